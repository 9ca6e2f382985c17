"""Noiseless verification, dense oracles, and fast noisy sampling.

Three engines share this module.  A bit-packed stabilizer tableau with
symbolic phases runs the p = 0 circuit exactly: each genuinely random
readout mints a fresh symbol, every outcome is an affine form over those
symbols, and a detector is deterministic precisely when its form's
symbol mask cancels.  Small dense simulators (state vectors up to six
data qubits, circuit branch enumeration up to twelve) serve as ground
truth the tableau and the compiler are checked against.  Noisy sampling
never touches amplitudes: every elementary fault's detector and
observable flips are precomputed by backward propagation, and shots just
XOR sampled fault signatures together.

Sampling randomness is keyed by (seed, shot block): shots are grouped
into fixed blocks of 1024, each block derives one Philox stream from the
master seed and its block index, and channels inside a block draw in
circuit order.  Blocks are independent, so shot ranges parallelize with
a fixed merge order, and a batch is a prefix of any longer batch with
the same seed.

ShotBatch export format (byte-exact): an 8-byte little-endian header
word per field -- magic 0x4253514d ("MQSB"), version 1, shots,
detectors, observables, seed -- followed by the detector bitmap and then
the observable bitmap, row-major, each row padded to whole bytes, bit i
of byte j covering index 8*j + i.
"""

import math
import struct
from dataclasses import dataclass

import numpy as np

from .circuits import (
    GATE_KINDS,
    MEAS_KINDS,
    _backward_sweep,
    fault_channels,
)
from .codes import stabilizer_generators, symplectic_matrix
from .gf2 import gf2_rank, gf2_same_row_space

_ONE = np.uint64(1)


class TableauState:
    """Stabilizer tableau with symbolic signs.

    Rows 0..n-1 are destabilizers, n..2n-1 stabilizers, packed 64 qubits
    per word.  Signs carry a constant bit plus an integer mask over
    outcome symbols; destabilizer signs are never read and are not
    maintained.
    """

    def __init__(self, num_qubits):
        n = num_qubits
        self.n = n
        self.words = max(1, (n + 63) // 64)
        self.x = np.zeros((2 * n, self.words), dtype=np.uint64)
        self.z = np.zeros((2 * n, self.words), dtype=np.uint64)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        self.mask = [0] * (2 * n)
        self.num_symbols = 0
        for i in range(n):
            w, b = divmod(i, 64)
            self.x[i, w] = _ONE << np.uint64(b)
            self.z[n + i, w] = _ONE << np.uint64(b)

    def _cols(self, q):
        w, b = divmod(q, 64)
        b = np.uint64(b)
        return w, b, (self.x[:, w] >> b) & _ONE, (self.z[:, w] >> b) & _ONE

    def h(self, q):
        w, b, xq, zq = self._cols(q)
        self.r ^= (xq & zq).astype(np.uint8)
        diff = (xq ^ zq) << b
        self.x[:, w] ^= diff
        self.z[:, w] ^= diff

    def s(self, q):
        w, b, xq, zq = self._cols(q)
        self.r ^= (xq & zq).astype(np.uint8)
        self.z[:, w] ^= xq << b

    def cx(self, c, t):
        wc, bc, xc, zc = self._cols(c)
        wt, bt, xt, zt = self._cols(t)
        self.r ^= (xc & zt & (xt ^ zc ^ _ONE)).astype(np.uint8)
        self.x[:, wt] ^= xc << bt
        self.z[:, wc] ^= zt << bc

    def cz(self, a, b):
        self.h(b)
        self.cx(a, b)
        self.h(b)

    def cy(self, c, t):
        # S^3 = S-dagger; CY = S_t CX S_t^-1 as an applied sequence
        self.s(t)
        self.s(t)
        self.s(t)
        self.cx(c, t)
        self.s(t)

    def _rowsum_into(self, rows, p):
        """Multiply row p into every listed row, signs for stabilizers only."""
        xp, zp = self.x[p], self.z[p]
        stab = rows[rows >= self.n]
        if stab.size:
            xi, zi = self.x[stab], self.z[stab]
            yp_ = xp & zp
            xp_ = xp & ~zp
            zp_ = zp & ~xp
            plus = (yp_ & zi & ~xi) | (xp_ & zi & xi) | (zp_ & xi & ~zi)
            minus = (yp_ & xi & ~zi) | (xp_ & zi & ~xi) | (zp_ & xi & zi)
            cnt = np.bitwise_count(plus).sum(axis=1).astype(np.int64)
            cnt -= np.bitwise_count(minus).sum(axis=1).astype(np.int64)
            total = 2 * self.r[stab].astype(np.int64) + 2 * int(self.r[p]) + cnt
            total %= 4
            assert not (total & 1).any(), "anticommuting stabilizer product"
            self.r[stab] = (total >> 1).astype(np.uint8)
            mp = self.mask[p]
            if mp:
                for i in stab:
                    self.mask[int(i)] ^= mp
        self.x[rows] ^= xp
        self.z[rows] ^= zp

    def _product_form(self, rows):
        """Sign form of the product of the listed (commuting) rows."""
        phase = 0
        mask = 0
        sx = sz = 0
        for i in rows:
            i = int(i)
            xi = int.from_bytes(self.x[i].tobytes(), "little")
            zi = int.from_bytes(self.z[i].tobytes(), "little")
            yi = xi & zi
            xo = xi & ~zi
            zo = zi & ~xi
            plus = (yi & sz & ~sx) | (xo & sz & sx) | (zo & sx & ~sz)
            minus = (yi & sx & ~sz) | (xo & sz & ~sx) | (zo & sx & sz)
            phase += 2 * int(self.r[i]) + plus.bit_count() - minus.bit_count()
            mask ^= self.mask[i]
            sx ^= xi
            sz ^= zi
        phase %= 4
        assert phase % 2 == 0, "anticommuting stabilizer product"
        return (phase >> 1) & 1, mask, sx, sz

    def measure_z(self, q):
        """Outcome as (constant bit, symbol mask); collapses the state."""
        w, b, xq, _ = self._cols(q)
        stab_hits = np.nonzero(xq[self.n :])[0]
        if stab_hits.size:
            p = int(stab_hits[0]) + self.n
            rows = np.nonzero(xq)[0]
            self._rowsum_into(rows[rows != p], p)
            d = p - self.n
            self.x[d] = self.x[p]
            self.z[d] = self.z[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, w] = _ONE << b
            self.num_symbols += 1
            sym = 1 << (self.num_symbols - 1)
            self.r[p] = 0
            self.mask[p] = sym
            return 0, sym
        hits = np.nonzero(xq[: self.n])[0] + self.n
        const, mask, sx, sz = self._product_form(hits)
        assert sx == 0 and sz == 1 << q, "product is not the measured operator"
        return const, mask

    def measure_x(self, q):
        self.h(q)
        out = self.measure_z(q)
        self.h(q)
        return out

    def _conditional_flip(self, col, q, form):
        """Apply a Pauli raised to an affine form: flip anticommuting signs."""
        const, mask = form
        if const == 0 and mask == 0:
            return
        w, b = divmod(q, 64)
        bits = (col[self.n :, w] >> np.uint64(b)) & _ONE
        rows = np.nonzero(bits)[0] + self.n
        if const:
            self.r[rows] ^= 1
        if mask:
            for i in rows:
                self.mask[int(i)] ^= mask

    def prep_x(self, q):
        # measure, then a conditional Z steers the qubit to |+>
        self._conditional_flip(self.x, q, self.measure_x(q))

    def prep_z(self, q):
        self._conditional_flip(self.z, q, self.measure_z(q))

    def reset_after_x_readout(self, q, form):
        self._conditional_flip(self.x, q, form)


def _run_noiseless(circuit):
    """Symbolic tableau pass; returns the state and per-outcome forms."""
    tab = TableauState(circuit.num_qubits)
    outcomes = []
    for op in circuit.ops:
        kind = op.kind
        if kind in GATE_KINDS:
            apply = {"CX": tab.cx, "CZ": tab.cz, "CY": tab.cy}[kind]
            for a, b in zip(op.targets[::2], op.targets[1::2]):
                apply(a, b)
        elif kind == "PX":
            for q in op.targets:
                tab.prep_x(q)
        elif kind == "PZ":
            for q in op.targets:
                tab.prep_z(q)
        elif kind == "MZ":
            for q in op.targets:
                outcomes.append(tab.measure_z(q))
        elif kind == "MX":
            for q in op.targets:
                outcomes.append(tab.measure_x(q))
        elif kind == "MRX":
            for q in op.targets:
                form = tab.measure_x(q)
                outcomes.append(form)
                tab.reset_after_x_readout(q, form)
    return tab, outcomes


@dataclass(frozen=True)
class NoiselessReport:
    num_measurements: int
    num_random_outcomes: int
    num_detectors: int
    num_observables: int
    measured_group_rank: int | None = None


def verify_noiseless(
    circuit,
    stabilizers=None,
    data_qubits=None,
    check_measurements=None,
    skip_prefix_ops=0,
):
    """Simulate the p = 0 circuit and assert its book-keeping is sound.

    Every detector and observable must come out deterministic and
    silent.  When `stabilizers` is given, the operators effectively
    measured by `check_measurements` (pulled back to just before
    ops[skip_prefix_ops]) must act only on `data_qubits` and span
    exactly the given group.
    """
    _, outcomes = _run_noiseless(circuit)
    det_index = 0
    cursor = 0
    for op in circuit.ops:
        if op.kind in MEAS_KINDS:
            cursor += len(op.targets)
        elif op.kind in ("DETECTOR", "OBSERVABLE"):
            const = 0
            mask = 0
            for ref in op.targets:
                c, m = outcomes[cursor + ref]
                const ^= c
                mask ^= m
            if op.kind == "DETECTOR":
                label = f"detector {det_index}"
                det_index += 1
            else:
                label = f"observable {op.arg}"
            if mask:
                raise ValueError(f"{label} is not deterministic")
            if const:
                raise ValueError(f"{label} flips in the noiseless circuit")

    group_rank = None
    if stabilizers is not None:
        group_rank = _check_measured_group(
            circuit, stabilizers, data_qubits, check_measurements, skip_prefix_ops
        )

    return NoiselessReport(
        num_measurements=len(outcomes),
        num_random_outcomes=sum(1 for _, m in outcomes if m),
        num_detectors=circuit.num_detectors,
        num_observables=circuit.num_observables,
        measured_group_rank=group_rank,
    )


def _check_measured_group(
    circuit, stabilizers, data_qubits, check_measurements, skip_prefix_ops
):
    total = circuit.num_measurements
    if data_qubits is None:
        data_qubits = range(circuit.num_qubits)
    if check_measurements is None:
        check_measurements = range(total)
    data = list(data_qubits)
    checks = np.fromiter(check_measurements, dtype=np.int64)
    rx, rz = _backward_sweep(
        circuit, [1 << m for m in range(total)], stop=skip_prefix_ops
    )

    sel = 0
    for m in checks:
        sel |= 1 << int(m)
    outside = 0
    on_data = 0
    inside = set(data)
    for q in range(circuit.num_qubits):
        if q in inside:
            on_data |= rx[q] | rz[q]
        else:
            outside |= rx[q] | rz[q]
    straddle = outside & on_data & sel
    if straddle:
        bad = (straddle & -straddle).bit_length() - 1
        raise ValueError(f"measurement {bad} mixes data and non-data support")

    # junk module readouts pull back to pure ancilla operators; they say
    # nothing about the data block and drop out here
    checks = np.array(
        [m for m in checks if (on_data >> int(m)) & 1], dtype=np.int64
    )
    nbytes = (total + 7) // 8 or 1
    rows = np.zeros((len(checks), 2 * len(data)), dtype=np.uint8)
    for col, q in enumerate(data):
        zc = np.unpackbits(
            np.frombuffer(rz[q].to_bytes(nbytes, "little"), np.uint8),
            bitorder="little",
        )
        xc = np.unpackbits(
            np.frombuffer(rx[q].to_bytes(nbytes, "little"), np.uint8),
            bitorder="little",
        )
        # a Z error flips outcomes whose operator has X support there
        rows[:, col] = zc[checks]
        rows[:, len(data) + col] = xc[checks]
    want = symplectic_matrix(list(stabilizers), len(data))
    if not gf2_same_row_space(rows, want):
        raise ValueError("measured group differs from the stabilizer group")
    return int(gf2_rank(rows))


def verify_memory_experiment(code, circuit):
    """Determinism plus the measured-group identity for a memory circuit.

    The pullback cut sits just after the transversal data preparation,
    and the group is taken over every ancilla readout (the trailing
    block of data readouts is excluded).
    """
    cut = next(
        i for i, op in enumerate(circuit.ops) if op.kind == "TICK"
    ) + 1
    total = circuit.num_measurements
    return verify_noiseless(
        circuit,
        stabilizers=stabilizer_generators(code).generators,
        data_qubits=range(code.n),
        check_measurements=range(total - code.n),
        skip_prefix_ops=cut,
    )


# ---------------------------------------------------------------------------
# Exact outcome distributions from the symbolic run.


def circuit_outcome_distribution(circuit, measurements=None):
    """Joint outcome distribution over the chosen measurement indices.

    The noiseless run makes every outcome an affine form over fresh
    symbols, so the joint distribution is uniform over an affine
    subspace; this enumerates it exactly.
    """
    _, outcomes = _run_noiseless(circuit)
    if measurements is None:
        measurements = range(len(outcomes))
    forms = [outcomes[m] for m in measurements]
    base = 0
    for j, (c, _) in enumerate(forms):
        base ^= c << j

    basis = {}
    num_symbols = max((m.bit_length() for _, m in forms), default=0)
    for s in range(num_symbols):
        col = 0
        for j, (_, m) in enumerate(forms):
            col ^= ((m >> s) & 1) << j
        while col:
            top = col.bit_length() - 1
            if top not in basis:
                basis[top] = col
                break
            col ^= basis[top]
    if len(basis) > 20:
        raise ValueError("distribution support too large to enumerate")

    span = [0]
    for vec in basis.values():
        span += [v ^ vec for v in span]
    prob = 1.0 / len(span)
    width = len(forms)
    return {
        tuple((base ^ v) >> j & 1 for j in range(width)): prob for v in span
    }


# ---------------------------------------------------------------------------
# Dense oracles.


def _apply_pauli_dense(vec, xmask, zmask):
    idx = np.arange(len(vec))
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & zmask) & 1)
    herm = 1j ** int(xmask & zmask).bit_count()
    out = np.empty_like(vec)
    out[idx ^ xmask] = herm * signs * vec
    return out


def dense_sequential_oracle(paulis, initial_state=None):
    """Measure the operators one at a time on |0..0> by dense simulation.

    Each step attaches a fresh |+> ancilla, applies the controlled
    operator, and reads the ancilla in the X basis; outcome bit 0 means
    eigenvalue +1.  Returns {outcome tuple: (probability, normalized
    post-measurement state)} over every outcome chain of nonzero
    probability.
    """
    r = len(paulis)
    if r == 0 or r > 6:
        raise ValueError("oracle takes between 1 and 6 operators")
    N = paulis[0].num_qubits
    if N > 6:
        raise ValueError("oracle capped at 6 qubits")
    if any(p.num_qubits != N for p in paulis):
        raise ValueError("operators must share a qubit count")
    dim = 1 << N
    if initial_state is None:
        state = np.zeros(dim, dtype=complex)
        state[0] = 1.0
    else:
        state = np.asarray(initial_state, dtype=complex)
        state = state / np.linalg.norm(state)

    branches = {(): (1.0, state)}
    for op in paulis:
        xmask = int.from_bytes(np.packbits(op.x_bits(), bitorder="little"), "little")
        zmask = int.from_bytes(np.packbits(op.z_bits(), bitorder="little"), "little")
        nxt = {}
        for hist, (prob, st) in branches.items():
            # |+> ancilla, controlled operator, X-basis readout
            applied = _apply_pauli_dense(st, xmask, zmask)
            for bit in (0, 1):
                half = (st + applied) / 2.0 if bit == 0 else (st - applied) / 2.0
                p = float(np.vdot(half, half).real)
                if p > 1e-12:
                    nxt[hist + (bit,)] = (prob * p, half / math.sqrt(p))
        branches = nxt
    return branches


def _move_front(state, num_qubits, q):
    arr = state.reshape([2] * num_qubits)
    return np.moveaxis(arr, num_qubits - 1 - q, 0).reshape(2, -1)


def _from_front(pair, num_qubits, q):
    arr = pair.reshape([2] * num_qubits)
    return np.moveaxis(arr, 0, num_qubits - 1 - q).reshape(-1)


def _dense_reset(state, num_qubits, q, plus):
    pair = _move_front(state, num_qubits, q)
    r0, r1 = pair[0], pair[1]
    n0 = float(np.vdot(r0, r0).real)
    n1 = float(np.vdot(r1, r1).real)
    ip = abs(np.vdot(r0, r1)) ** 2
    if not math.isclose(ip, n0 * n1, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("reset on an entangled qubit")
    rest = (r0 if n0 >= n1 else r1) / math.sqrt(max(n0, n1))
    if plus:
        out = np.stack([rest, rest]) / math.sqrt(2.0)
    else:
        out = np.stack([rest, np.zeros_like(rest)])
    return _from_front(out, num_qubits, q)


def dense_circuit_oracle(circuit, max_qubits=12):
    """Branch-enumerating dense run of a noiseless circuit.

    Returns [(probability, outcome bits, final state)] with one entry
    per outcome chain of nonzero probability.  Noise annotations are
    ignored; meant for small compiled circuits as independent ground
    truth for the tableau path.
    """
    nq = circuit.num_qubits
    if nq > max_qubits:
        raise ValueError(f"dense run capped at {max_qubits} qubits")
    dim = 1 << nq
    init = np.zeros(dim, dtype=complex)
    init[0] = 1.0
    branches = [(1.0, (), init)]
    idx = np.arange(dim)

    def gate(state, kind, a, b):
        abit = (idx >> a) & 1
        bbit = (idx >> b) & 1
        if kind == "CX":
            out = np.empty_like(state)
            out[idx ^ (abit << b)] = state
            return out
        if kind == "CZ":
            return state * (1.0 - 2.0 * (abit & bbit))
        out = np.empty_like(state)
        out[idx ^ (abit << b)] = state * np.where(
            abit, 1j * (1.0 - 2.0 * bbit), 1.0
        )
        return out

    for op in circuit.ops:
        kind = op.kind
        if kind in GATE_KINDS:
            for a, b in zip(op.targets[::2], op.targets[1::2]):
                branches = [
                    (p, o, gate(st, kind, a, b)) for p, o, st in branches
                ]
        elif kind in ("PX", "PZ"):
            for q in op.targets:
                branches = [
                    (p, o, _dense_reset(st, nq, q, kind == "PX"))
                    for p, o, st in branches
                ]
        elif kind in MEAS_KINDS:
            for q in op.targets:
                nxt = []
                for p, o, st in branches:
                    pair = _move_front(st, nq, q)
                    if kind == "MZ":
                        halves = [pair[0], pair[1]]
                        posts = [
                            np.stack([pair[0], np.zeros_like(pair[0])]),
                            np.stack([np.zeros_like(pair[1]), pair[1]]),
                        ]
                    else:
                        m0 = (pair[0] + pair[1]) / math.sqrt(2.0)
                        m1 = (pair[0] - pair[1]) / math.sqrt(2.0)
                        halves = [m0, m1]
                        posts = [
                            np.stack([m0, m0]) / math.sqrt(2.0),
                            np.stack([m1, -m1]) / math.sqrt(2.0),
                        ]
                    for bit in (0, 1):
                        pr = float(np.vdot(halves[bit], halves[bit]).real)
                        if pr <= 1e-12:
                            continue
                        post = posts[bit] / math.sqrt(pr)
                        if kind == "MRX":
                            # reset leaves the remainder factor in place
                            kept = post[0] * math.sqrt(2.0)
                            post = np.stack([kept, kept]) / math.sqrt(2.0)
                        nxt.append(
                            (p * pr, o + (bit,), _from_front(post, nq, q))
                        )
                branches = nxt
    return branches


# ---------------------------------------------------------------------------
# Noisy sampling.

_BLOCK = 1024
_MAGIC = 0x4253514D  # "MQSB" little-endian


@dataclass(frozen=True, eq=False)
class ShotBatch:
    """Packed detector events and observable flips for a run of shots."""

    shots: int
    num_detectors: int
    num_observables: int
    seed: int
    detector_bits: np.ndarray
    observable_bits: np.ndarray

    def detector_array(self):
        out = np.unpackbits(self.detector_bits, axis=1, bitorder="little")
        return out[:, : self.num_detectors].astype(bool)

    def observable_array(self):
        out = np.unpackbits(self.observable_bits, axis=1, bitorder="little")
        return out[:, : self.num_observables].astype(bool)

    def to_bytes(self):
        head = struct.pack(
            "<QQQQQQ",
            _MAGIC,
            1,
            self.shots,
            self.num_detectors,
            self.num_observables,
            self.seed,
        )
        return head + self.detector_bits.tobytes() + self.observable_bits.tobytes()

    @classmethod
    def from_bytes(cls, blob):
        magic, version, shots, nd, no, seed = struct.unpack_from("<QQQQQQ", blob)
        if magic != _MAGIC or version != 1:
            raise ValueError("not a shot batch")
        bytes_d = (nd + 7) // 8
        bytes_o = (no + 7) // 8
        off = 48
        det = np.frombuffer(blob, np.uint8, shots * bytes_d, off)
        obs = np.frombuffer(blob, np.uint8, shots * bytes_o, off + shots * bytes_d)
        return cls(
            shots,
            nd,
            no,
            seed,
            det.reshape(shots, bytes_d).copy(),
            obs.reshape(shots, bytes_o).copy(),
        )


def _fault_tables(circuit):
    channels = fault_channels(circuit)
    nd = circuit.num_detectors
    no = circuit.num_observables
    bytes_d = (nd + 7) // 8
    bytes_o = (no + 7) // 8
    rates = np.array([c.rate for c in channels], dtype=float)
    sizes = np.array([len(c.signatures) for c in channels], dtype=np.int64)
    starts = np.zeros(len(channels), dtype=np.int64)
    if len(channels):
        starts[1:] = np.cumsum(sizes)[:-1]
    det_mask = (1 << nd) - 1
    det_tab = np.zeros((int(sizes.sum()), bytes_d), dtype=np.uint8)
    obs_tab = np.zeros((int(sizes.sum()), bytes_o), dtype=np.uint8)
    row = 0
    for chan in channels:
        for sig in chan.signatures:
            det_tab[row] = np.frombuffer(
                (sig & det_mask).to_bytes(bytes_d, "little"), np.uint8
            )
            obs_tab[row] = np.frombuffer(
                (sig >> nd).to_bytes(bytes_o, "little"), np.uint8
            )
            row += 1
    return rates, sizes, starts, det_tab, obs_tab


def sample(circuit, shots, seed, start_shot=0, _verified=False):
    """Pauli-frame sampling of detector events and observable flips.

    Verifies the circuit's noiseless bookkeeping first, then draws
    faults channel by channel: each channel fires as a Bernoulli event
    at its rate and picks one of its equally likely fault effects, whose
    precomputed signature is XORed into the shot row.  Identical
    (circuit, seed) give identical batches, and rows start_shot ..
    start_shot + shots - 1 of any call agree with every other call
    overlapping them.
    """
    if shots < 1:
        raise ValueError("need at least one shot")
    if start_shot < 0:
        raise ValueError("start_shot must be nonnegative")
    if not _verified:
        verify_noiseless(circuit)
    seed = int(seed) & (2**64 - 1)
    nd = circuit.num_detectors
    no = circuit.num_observables
    bytes_d = (nd + 7) // 8
    bytes_o = (no + 7) // 8
    rates, sizes, starts, det_tab, obs_tab = _fault_tables(circuit)

    det_out = np.zeros((shots, bytes_d), dtype=np.uint8)
    obs_out = np.zeros((shots, bytes_o), dtype=np.uint8)
    lo = start_shot
    hi = start_shot + shots
    for block in range(lo // _BLOCK, (hi - 1) // _BLOCK + 1):
        base = block * _BLOCK
        det_blk = np.zeros((_BLOCK, bytes_d), dtype=np.uint8)
        obs_blk = np.zeros((_BLOCK, bytes_o), dtype=np.uint8)
        if len(rates):
            rng = np.random.Generator(np.random.Philox(key=[seed, block]))
            counts = rng.binomial(_BLOCK, rates)
            for c in np.nonzero(counts)[0]:
                k = int(counts[c])
                pos = rng.choice(_BLOCK, size=k, replace=False)
                if sizes[c] > 1:
                    picks = rng.integers(0, sizes[c], size=k)
                else:
                    picks = np.zeros(k, dtype=np.int64)
                det_blk[pos] ^= det_tab[starts[c] + picks]
                obs_blk[pos] ^= obs_tab[starts[c] + picks]
        a = max(lo, base)
        b = min(hi, base + _BLOCK)
        det_out[a - lo : b - lo] = det_blk[a - base : b - base]
        obs_out[a - lo : b - lo] = obs_blk[a - base : b - base]
    return ShotBatch(shots, nd, no, seed, det_out, obs_out)
