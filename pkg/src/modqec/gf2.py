"""
Dense GF(2) linear algebra on bit-packed rows, plus the bivariate
monomial/polynomial arithmetic used to build two-block circulant parity
checks.

Rows are packed into numpy uint64 words, 64 columns per word, bit j of
word j // 64 being column j.  All elimination routines XOR whole word
rows, so rank/solve/kernel stay fast up to a few thousand columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_WORD = 64


def _n_words(ncols):
    return max(1, (ncols + _WORD - 1) // _WORD)


def pack_rows(dense):
    """Pack a 2-D {0,1} array into uint64 words, one row per packed row."""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    if dense.ndim != 2:
        raise ValueError("expected a 2-D array")
    nrows, ncols = dense.shape
    words = _n_words(ncols)
    padded = np.zeros((nrows, words * _WORD), dtype=np.uint8)
    padded[:, :ncols] = dense
    # little-endian bit order lines up with uint64 bit positions on
    # little-endian hosts, so a plain byte view round-trips
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def unpack_rows(words, ncols):
    """Inverse of pack_rows; returns a uint8 {0,1} array of width ncols."""
    words = np.ascontiguousarray(words, dtype=np.uint64)
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :ncols]


def get_bit(words, row, col):
    return int((words[row, col >> 6] >> np.uint64(col & 63)) & np.uint64(1))


class GF2Matrix:
    """A dense matrix over GF(2) with bit-packed rows.

    The packed representation is exposed as .words (nrows x nwords uint64)
    for routines that want to do their own elimination.
    """

    __slots__ = ("words", "nrows", "ncols")

    def __init__(self, words, nrows, ncols):
        self.words = words
        self.nrows = nrows
        self.ncols = ncols

    # ---- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, nrows, ncols):
        return cls(np.zeros((nrows, _n_words(ncols)), dtype=np.uint64), nrows, ncols)

    @classmethod
    def identity(cls, n):
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense):
        dense = np.atleast_2d(np.asarray(dense, dtype=np.uint8))
        return cls(pack_rows(dense), dense.shape[0], dense.shape[1])

    @classmethod
    def shift(cls, n, power=1):
        """Circulant shift matrix S_n**power: row r has a 1 at column (r+power) mod n."""
        dense = np.zeros((n, n), dtype=np.uint8)
        dense[np.arange(n), (np.arange(n) + power) % n] = 1
        return cls.from_dense(dense)

    # ---- basic algebra ------------------------------------------------

    def to_dense(self):
        return unpack_rows(self.words, self.ncols)

    def copy(self):
        return GF2Matrix(self.words.copy(), self.nrows, self.ncols)

    def __eq__(self, other):
        return (
            isinstance(other, GF2Matrix)
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and np.array_equal(self.words, other.words)
        )

    def __add__(self, other):
        self._check_same_shape(other)
        return GF2Matrix(self.words ^ other.words, self.nrows, self.ncols)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise ValueError("dimension mismatch in GF2 matmul")
        out = np.zeros((self.nrows, other.words.shape[1]), dtype=np.uint64)
        dense_left = self.to_dense()
        for i in range(self.nrows):
            support = np.nonzero(dense_left[i])[0]
            if support.size:
                out[i] = np.bitwise_xor.reduce(other.words[support], axis=0)
        return GF2Matrix(out, self.nrows, other.ncols)

    def transpose(self):
        return GF2Matrix.from_dense(self.to_dense().T)

    def kron(self, other):
        return GF2Matrix.from_dense(
            np.kron(self.to_dense(), other.to_dense()) & 1
        )

    def is_zero(self):
        return not self.words.any()

    def _check_same_shape(self, other):
        if self.nrows != other.nrows or self.ncols != other.ncols:
            raise ValueError("shape mismatch")

    def __repr__(self):
        return f"GF2Matrix({self.nrows}x{self.ncols})"


# ---- elimination on raw packed arrays ---------------------------------


def _eliminate(words, ncols, full=False, stop_rank=None):
    """In-place forward elimination.  Returns pivot column list.

    full=True also clears entries above each pivot (Gauss-Jordan).
    """
    nrows = words.shape[0]
    pivots = []
    prow = 0
    limit = nrows if stop_rank is None else min(nrows, stop_rank)
    for col in range(ncols):
        if prow >= limit:
            break
        w, b = col >> 6, np.uint64(col & 63)
        colbits = (words[prow:, w] >> b) & np.uint64(1)
        hits = np.nonzero(colbits)[0]
        if hits.size == 0:
            continue
        src = prow + hits[0]
        if src != prow:
            words[[prow, src]] = words[[src, prow]]
        below = prow + 1 + np.nonzero((words[prow + 1 :, w] >> b) & np.uint64(1))[0]
        if below.size:
            words[below] ^= words[prow]
        if full:
            above = np.nonzero((words[:prow, w] >> b) & np.uint64(1))[0]
            if above.size:
                words[above] ^= words[prow]
        pivots.append(col)
        prow += 1
    return pivots


def gf2_rank(mat):
    """GF(2) rank of a GF2Matrix or a dense {0,1} array."""
    if not isinstance(mat, GF2Matrix):
        mat = GF2Matrix.from_dense(mat)
    scratch = mat.words.copy()
    return len(_eliminate(scratch, mat.ncols))


def gf2_solve(mat, rhs):
    """Solve mat @ x = rhs over GF(2).

    Returns a uint8 solution vector, or None when the system is
    inconsistent.  Among solutions, free variables are set to zero.
    """
    if not isinstance(mat, GF2Matrix):
        mat = GF2Matrix.from_dense(mat)
    rhs = np.asarray(rhs, dtype=np.uint8) & 1
    if rhs.shape != (mat.nrows,):
        raise ValueError("rhs length mismatch")
    aug_dense = np.concatenate([mat.to_dense(), rhs[:, None]], axis=1)
    aug = pack_rows(aug_dense)
    pivots = _eliminate(aug, mat.ncols, full=True)
    # inconsistent iff some row is 0 ... 0 | 1
    r = len(pivots)
    tail = unpack_rows(aug[r:], mat.ncols + 1) if r < mat.nrows else None
    if tail is not None and tail[:, -1].any():
        return None
    x = np.zeros(mat.ncols, dtype=np.uint8)
    rhs_col = unpack_rows(aug[:r], mat.ncols + 1)[:, -1]
    for k, col in enumerate(pivots):
        x[col] = rhs_col[k]
    return x


def gf2_kernel(mat):
    """Basis of the right null space of mat as a GF2Matrix (one row per basis vector)."""
    if not isinstance(mat, GF2Matrix):
        mat = GF2Matrix.from_dense(mat)
    work = mat.words.copy()
    pivots = _eliminate(work, mat.ncols, full=True)
    dense = unpack_rows(work[: len(pivots)], mat.ncols)
    pivot_set = set(pivots)
    free_cols = [c for c in range(mat.ncols) if c not in pivot_set]
    basis = np.zeros((len(free_cols), mat.ncols), dtype=np.uint8)
    for k, fc in enumerate(free_cols):
        basis[k, fc] = 1
        for r, pc in enumerate(pivots):
            basis[k, pc] = dense[r, fc]
    return GF2Matrix.from_dense(basis) if len(free_cols) else GF2Matrix.zeros(0, mat.ncols)


def gf2_row_space_contains(mat, vec):
    """True when vec lies in the row space of mat."""
    if not isinstance(mat, GF2Matrix):
        mat = GF2Matrix.from_dense(mat)
    vec = np.asarray(vec, dtype=np.uint8) & 1
    base = gf2_rank(mat)
    stacked = np.concatenate([mat.to_dense(), vec[None, :]], axis=0)
    return gf2_rank(stacked) == base


def gf2_same_row_space(a, b):
    """True when two matrices span the same row space over GF(2)."""
    da = a.to_dense() if isinstance(a, GF2Matrix) else np.asarray(a, dtype=np.uint8)
    db = b.to_dense() if isinstance(b, GF2Matrix) else np.asarray(b, dtype=np.uint8)
    if da.shape[1] != db.shape[1]:
        return False
    ra = gf2_rank(da)
    rb = gf2_rank(db)
    if ra != rb:
        return False
    return gf2_rank(np.concatenate([da, db], axis=0)) == ra


# ---- bivariate polynomials over the group algebra ---------------------


@dataclass(frozen=True)
class RingParams:
    """Quotient ring parameters: exponents of x live mod l, of y mod m."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("ring periods must be positive")

    @property
    def size(self):
        return self.l * self.m


@dataclass(frozen=True)
class Monomial:
    """x**i * y**j with exponents stored already reduced."""

    i: int
    j: int

    def reduced(self, ring):
        return Monomial(self.i % ring.l, self.j % ring.m)


class BivariatePolynomial:
    """A sum of distinct monomials over GF(2), exponents eagerly reduced.

    Duplicate monomials cancel in pairs at construction time, so the
    term list is always a canonical sorted set.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring, monomials):
        self.ring = ring
        seen = set()
        for mono in monomials:
            key = (mono.i % ring.l, mono.j % ring.m)
            if key in seen:
                seen.remove(key)  # GF(2): pairs cancel
            else:
                seen.add(key)
        self.terms = tuple(Monomial(i, j) for i, j in sorted(seen))

    @classmethod
    def from_exponents(cls, ring, pairs):
        return cls(ring, [Monomial(i, j) for i, j in pairs])

    @property
    def weight(self):
        return len(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, BivariatePolynomial)
            and self.ring == other.ring
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, self.terms))

    def __add__(self, other):
        self._check(other)
        return BivariatePolynomial(self.ring, list(self.terms) + list(other.terms))

    def __mul__(self, other):
        self._check(other)
        prods = [
            Monomial(a.i + b.i, a.j + b.j) for a in self.terms for b in other.terms
        ]
        return BivariatePolynomial(self.ring, prods)

    def transpose(self):
        """Matrix transpose at the polynomial level: x**i y**j -> x**-i y**-j."""
        return BivariatePolynomial(
            self.ring, [Monomial(-t.i, -t.j) for t in self.terms]
        )

    def x_exponents(self):
        """I(P): the set of distinct x exponents."""
        return sorted({t.i for t in self.terms})

    def y_exponents(self):
        """J(P): the set of distinct y exponents."""
        return sorted({t.j for t in self.terms})

    def _check(self, other):
        if self.ring != other.ring:
            raise ValueError("mixed rings")

    def __repr__(self):
        if not self.terms:
            return "0"

        def fmt(t):
            parts = []
            if t.i:
                parts.append(f"x^{t.i}" if t.i != 1 else "x")
            if t.j:
                parts.append(f"y^{t.j}" if t.j != 1 else "y")
            return "*".join(parts) or "1"

        return " + ".join(fmt(t) for t in self.terms)


def parse_poly(ring, text):
    """Parse '"x^3 + y + y^2"'-style strings into a BivariatePolynomial."""
    monos = []
    for chunk in text.replace(" ", "").split("+"):
        if not chunk:
            continue
        i = j = 0
        if chunk == "1":
            monos.append(Monomial(0, 0))
            continue
        for factor in chunk.split("*"):
            if factor.startswith("x"):
                i += int(factor[2:]) if factor.startswith("x^") else 1
            elif factor.startswith("y"):
                j += int(factor[2:]) if factor.startswith("y^") else 1
            elif factor == "1":
                pass
            else:
                raise ValueError(f"cannot parse monomial {chunk!r}")
        monos.append(Monomial(i, j))
    return BivariatePolynomial(ring, monos)


def monomial_matrix(ring, mono):
    """The lm x lm permutation matrix of x**i y**j.

    Has a 1 at row v*m + w, column ((v+i) mod l)*m + ((w+j) mod m); equal
    to the Kronecker product of the two cyclic shift powers.
    """
    l, m = ring.l, ring.m
    i, j = mono.i % l, mono.j % m
    rows = np.arange(l * m)
    v, w = rows // m, rows % m
    cols = ((v + i) % l) * m + (w + j) % m
    dense = np.zeros((l * m, l * m), dtype=np.uint8)
    dense[rows, cols] = 1
    return GF2Matrix.from_dense(dense)


def poly_to_matrix(ring, poly):
    """XOR of the monomial matrices of all terms."""
    out = GF2Matrix.zeros(ring.size, ring.size)
    for t in poly.terms:
        out = out + monomial_matrix(ring, t)
    return out
