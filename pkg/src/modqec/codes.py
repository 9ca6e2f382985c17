"""
Stabilizer-code construction: generic Pauli-list codes, two-block
circulant CSS codes built from bivariate polynomials, logical-operator
extraction, and the qubit labeling shared with the machine layer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .gf2 import (
    BivariatePolynomial,
    GF2Matrix,
    Monomial,
    RingParams,
    gf2_kernel,
    gf2_rank,
    pack_rows,
    poly_to_matrix,
    unpack_rows,
)

_PAULI_XZ = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_PAULI = {v: k for k, v in _PAULI_XZ.items()}


@dataclass(frozen=True)
class PauliOperator:
    """An n-qubit Pauli without phase, stored as its non-identity factors.

    terms is sorted by qubit index; identity factors never appear.
    """

    num_qubits: int
    terms: tuple

    def __post_init__(self):
        seen = set()
        for q, kind in self.terms:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"qubit {q} out of range")
            if kind not in _PAULI_XZ:
                raise ValueError(f"bad Pauli kind {kind!r}")
            if q in seen:
                raise ValueError(f"duplicate qubit {q}")
            seen.add(q)
        object.__setattr__(self, "terms", tuple(sorted(self.terms)))

    @classmethod
    def from_dict(cls, num_qubits, support):
        return cls(num_qubits, tuple(support.items()))

    @classmethod
    def from_xz(cls, x_bits, z_bits):
        x_bits = np.asarray(x_bits, dtype=np.uint8) & 1
        z_bits = np.asarray(z_bits, dtype=np.uint8) & 1
        if x_bits.shape != z_bits.shape:
            raise ValueError("x/z length mismatch")
        terms = tuple(
            (int(q), _XZ_PAULI[(int(x_bits[q]), int(z_bits[q]))])
            for q in np.nonzero(x_bits | z_bits)[0]
        )
        return cls(len(x_bits), terms)

    def as_dict(self):
        return dict(self.terms)

    @property
    def weight(self):
        return len(self.terms)

    def x_bits(self):
        out = np.zeros(self.num_qubits, dtype=np.uint8)
        for q, kind in self.terms:
            out[q] = _PAULI_XZ[kind][0]
        return out

    def z_bits(self):
        out = np.zeros(self.num_qubits, dtype=np.uint8)
        for q, kind in self.terms:
            out[q] = _PAULI_XZ[kind][1]
        return out

    def commutes_with(self, other):
        if self.num_qubits != other.num_qubits:
            raise ValueError("size mismatch")
        a, b = self.as_dict(), other.as_dict()
        anti = sum(1 for q in a.keys() & b.keys() if a[q] != b[q])
        return anti % 2 == 0

    def __repr__(self):
        if not self.terms:
            return f"I({self.num_qubits})"
        return "*".join(f"{kind}{q}" for q, kind in self.terms)


def symplectic_matrix(ops, num_qubits=None):
    """Stack operators as [x | z] rows over GF(2)."""
    if num_qubits is None:
        num_qubits = ops[0].num_qubits
    rows = np.zeros((len(ops), 2 * num_qubits), dtype=np.uint8)
    for r, op in enumerate(ops):
        rows[r, :num_qubits] = op.x_bits()
        rows[r, num_qubits:] = op.z_bits()
    return rows


@dataclass(frozen=True)
class StabilizerCode:
    num_qubits: int
    generators: tuple
    k: int
    known_distance: int | None = None


def make_stabilizer_code(generators, known_distance=None):
    """Validate commutation, compute the dimension, freeze the code."""
    generators = tuple(generators)
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].num_qubits
    if any(g.num_qubits != n for g in generators):
        raise ValueError("generators act on different qubit counts")
    sym = symplectic_matrix(generators, n)
    x, z = sym[:, :n], sym[:, n:]
    comm = (x @ z.T + z @ x.T) % 2
    if comm.any():
        bad = np.argwhere(comm)[0]
        raise ValueError(f"generators {bad[0]} and {bad[1]} anticommute")
    k = n - gf2_rank(sym)
    return StabilizerCode(n, generators, k, known_distance)


# ---- two-block circulant CSS construction -----------------------------


@dataclass(frozen=True)
class BBCode:
    """CSS code with checks [A | B] and [B^T | A^T] over the bivariate ring."""

    params: RingParams
    A: BivariatePolynomial
    B: BivariatePolynomial
    H_X: GF2Matrix
    H_Z: GF2Matrix
    k: int
    omega: int
    known_distance: int | None = None
    name: str = ""

    @property
    def n(self):
        return 2 * self.params.size

    def __repr__(self):
        d = self.known_distance if self.known_distance is not None else "?"
        return f"BBCode({self.name or 'anon'}: [[{self.n},{self.k},{d}]])"


def build_bb_code(params, a, b, known_distance=None, name=""):
    if a.ring != params or b.ring != params:
        raise ValueError("polynomials not over the given ring")
    if a.weight == 0 or b.weight == 0:
        raise ValueError("polynomials must be nonempty")
    ma = poly_to_matrix(params, a).to_dense()
    mb = poly_to_matrix(params, b).to_dense()
    hx = GF2Matrix.from_dense(np.concatenate([ma, mb], axis=1))
    hz = GF2Matrix.from_dense(np.concatenate([mb.T, ma.T], axis=1))
    # AB = BA in the commutative ring, so this can only fire on a bug
    assert (hx @ hz.transpose()).is_zero()
    n = 2 * params.size
    k = n - gf2_rank(hx) - gf2_rank(hz)
    omega = a.weight + b.weight
    code = BBCode(params, a, b, hx, hz, k, omega, known_distance, name)
    for mat in (hx, hz):
        dense = mat.to_dense()
        if not ((dense.sum(axis=1) == omega).all()):
            raise ValueError("check row weight differs from omega")
    return code


# ---- qubit labels ------------------------------------------------------

DATA_BLOCKS = (0, 1)
ANCILLA_BLOCKS = ("X", "Z")


@dataclass(frozen=True)
class QubitLabel:
    """(u, v, w) with u in {0, 1} for data qubits, {"X", "Z"} for ancillas."""

    u: object
    v: int
    w: int

    @property
    def is_data(self):
        return self.u in DATA_BLOCKS


def label_to_index(label, params):
    """Flat index within the label's own 2*l*m space (data or ancilla)."""
    if not (0 <= label.v < params.l and 0 <= label.w < params.m):
        raise ValueError(f"label {label} out of range for {params}")
    if label.u in DATA_BLOCKS:
        block = label.u
    elif label.u in ANCILLA_BLOCKS:
        block = ANCILLA_BLOCKS.index(label.u)
    else:
        raise ValueError(f"bad block {label.u!r}")
    return block * params.size + label.v * params.m + label.w


def index_to_label(index, params, ancilla=False):
    if not 0 <= index < 2 * params.size:
        raise ValueError(f"index {index} out of range")
    block, rest = divmod(index, params.size)
    v, w = divmod(rest, params.m)
    u = ANCILLA_BLOCKS[block] if ancilla else DATA_BLOCKS[block]
    return QubitLabel(u, v, w)


# ---- stabilizers and logicals -----------------------------------------


def stabilizer_generators(code):
    """One X-type generator per H_X row, then one Z-type per H_Z row.

    Row r corresponds to ancilla (X, r // m, r % m) resp. (Z, ...), so the
    generator order matches the ancilla label order.
    """
    n = code.n
    gens = []
    for dense, kind in ((code.H_X.to_dense(), "X"), (code.H_Z.to_dense(), "Z")):
        for row in dense:
            support = {int(q): kind for q in np.nonzero(row)[0]}
            gens.append(PauliOperator.from_dict(n, support))
    return make_stabilizer_code(gens, known_distance=code.known_distance)


def _quotient_basis(kernel_rows, modulo_dense, count):
    """Pick rows of kernel_rows independent modulo the row space of modulo_dense."""
    stack = modulo_dense.copy()
    rank = gf2_rank(stack)
    picked = []
    for row in kernel_rows:
        trial = np.concatenate([stack, row[None, :]], axis=0)
        r = gf2_rank(trial)
        if r > rank:
            stack, rank = trial, r
            picked.append(row)
            if len(picked) == count:
                break
    return picked


def logical_observables(code, basis):
    """k independent logical X- or Z-type operators.

    X logicals live in ker(H_Z) modulo the row space of H_X; dually for Z.
    The choice is the first independent set the kernel elimination yields,
    fixed so golden tests stay stable.
    """
    if code.k < 1:
        raise ValueError("code has no logical qubits")
    if basis == "X":
        kernel = gf2_kernel(code.H_Z)
        modulo = code.H_X.to_dense()
    elif basis == "Z":
        kernel = gf2_kernel(code.H_X)
        modulo = code.H_Z.to_dense()
    else:
        raise ValueError(f"bad basis {basis!r}")
    rows = _quotient_basis(kernel.to_dense(), modulo, code.k)
    if len(rows) != code.k:
        raise AssertionError("logical extraction found fewer than k operators")
    ops = []
    for row in rows:
        support = {int(q): basis for q in np.nonzero(row)[0]}
        ops.append(PauliOperator.from_dict(code.n, support))
    return ops


def logical_pairing(code):
    """k x k overlap-parity matrix between X and Z logical sets."""
    lx = np.stack([op.x_bits() for op in logical_observables(code, "X")])
    lz = np.stack([op.z_bits() for op in logical_observables(code, "Z")])
    return (lx @ lz.T) % 2


# ---- exhaustive distance ----------------------------------------------

_BRUTE_FORCE_LIMIT = 20


def brute_force_distance(code, protected=None):
    """Minimum weight of a damaging logical operator, by exhaustive search.

    With protected=None a candidate counts when it centralizes the
    stabilizer group without belonging to it.  Passing a sequence of
    logical operators restricts to candidates anticommuting with at least
    one of them (memory-basis distance).
    """
    n = code.num_qubits
    if n > _BRUTE_FORCE_LIMIT:
        raise ValueError(f"exhaustive search capped at {_BRUTE_FORCE_LIMIT} qubits")
    if code.k == 0:
        raise ValueError("code has no logical qubits")
    gens = symplectic_matrix(code.generators, n)
    # symplectic-partner matrix: candidate (x|z) commutes with all
    # generators iff (x|z) @ partner.T = 0
    partner = np.concatenate([gens[:, n:], gens[:, :n]], axis=1)
    if protected is not None:
        prot = symplectic_matrix(tuple(protected), n)
        prot_partner = np.concatenate([prot[:, n:], prot[:, :n]], axis=1)
    # RREF of the generator rows for membership tests
    packed = pack_rows(gens)
    from .gf2 import _eliminate

    pivots = _eliminate(packed, 2 * n, full=True)
    reduced = unpack_rows(packed[: len(pivots)], 2 * n)

    def in_group(vecs):
        work = vecs.copy()
        for r, col in enumerate(pivots):
            hit = work[:, col] == 1
            work[hit] ^= reduced[r]
        return ~work.any(axis=1)

    patterns = [np.array(_PAULI_XZ[k], dtype=np.uint8) for k in "XYZ"]
    for w in range(1, n + 1):
        for combo in itertools.combinations(range(n), w):
            combo = np.array(combo)
            choices = np.array(
                list(itertools.product(range(3), repeat=w)), dtype=np.intp
            )
            cand = np.zeros((len(choices), 2 * n), dtype=np.uint8)
            for slot in range(w):
                bits = np.stack([patterns[c] for c in choices[:, slot]])
                cand[:, combo[slot]] = bits[:, 0]
                cand[:, n + combo[slot]] = bits[:, 1]
            central = ~((cand @ partner.T) % 2).any(axis=1)
            if not central.any():
                continue
            hits = cand[central]
            if protected is None:
                if (~in_group(hits)).any():
                    return w
            else:
                if ((hits @ prot_partner.T) % 2).any():
                    return w
    raise AssertionError("unreachable: identity is never damaging")


# ---- catalog -----------------------------------------------------------


def _parse_terms(text):
    pairs = []
    for chunk in text.replace("(", " ").replace(")", " ").replace(",", " ").split():
        pairs.append(int(chunk))
    if len(pairs) % 2:
        raise ValueError(f"odd exponent list in {text!r}")
    return [(pairs[i], pairs[i + 1]) for i in range(0, len(pairs), 2)]


def parse_catalog(text):
    """Parse the shipped catalog format; see data/bb_catalog.txt."""
    records = []
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        value = value.strip()
        if key == "code":
            current = {"name": value}
            records.append(current)
        elif current is None:
            raise ValueError(f"field {key!r} before any code record")
        elif key in ("ell", "m", "k", "d"):
            current[key] = int(value)
        elif key in ("a", "b"):
            current[key] = _parse_terms(value)
        else:
            raise ValueError(f"unknown catalog field {key!r}")
    return records


def _build_catalog_entry(rec):
    required = {"name", "ell", "m", "a", "b", "k", "d"}
    missing = required - rec.keys()
    if missing:
        raise ValueError(f"catalog record {rec.get('name')!r} missing {missing}")
    ring = RingParams(rec["ell"], rec["m"])
    a = BivariatePolynomial(ring, [Monomial(i, j) for i, j in rec["a"]])
    b = BivariatePolynomial(ring, [Monomial(i, j) for i, j in rec["b"]])
    code = build_bb_code(ring, a, b, known_distance=rec["d"], name=rec["name"])
    if code.k != rec["k"]:
        raise ValueError(
            f"catalog {rec['name']}: computed k={code.k}, recorded k={rec['k']}"
        )
    return code


def load_catalog():
    """All shipped codes, validated (n, k, row weights) on load."""
    text = resources.files("modqec.data").joinpath("bb_catalog.txt").read_text()
    codes = {}
    for rec in parse_catalog(text):
        code = _build_catalog_entry(rec)
        codes[code.name] = code
    return codes


def catalog_code(name):
    codes = load_catalog()
    if name not in codes:
        raise KeyError(f"unknown code {name!r}; have {sorted(codes)}")
    return codes[name]
