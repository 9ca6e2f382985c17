"""Flat noisy circuits: lowering, memory experiments, detector error models.

A machine program talks about module slots; everything downstream
(simulation, decoding) wants a flat qubit index and a linear stream of
operations.  This module flattens programs under the array noise model,
wraps them into memory experiments with detectors and logical
observables, and turns a circuit's noise channels into a detector error
model by backward fault propagation.

Circuit text format, one operation per line:

    circuit <num_qubits>
    PX <q>...                     prepare |+> on each listed qubit
    PZ <q>...                     prepare |0>
    CX <c> <t> ...                controlled-X on listed pairs
    CZ <a> <b> ...                controlled-Z
    CY <c> <t> ...                controlled-Y
    MX <rate> <q>...              X-basis readout, outcome flip at rate
    MRX <rate> <q>...             X-basis readout, then reset to |+>
    MZ <rate> <q>...              Z-basis readout
    D1 <rate> <q>...              one-qubit depolarizing on each qubit
    D2 <rate> <c> <t> ...         two-qubit depolarizing on each pair
    TICK                          layer boundary, no effect
    DETECTOR <ref>...             parity of referenced outcomes
    OBSERVABLE <k> <ref>...       logical observable k, same references

Measurement references are backward-relative: -1 is the most recent
outcome at the point the line appears.  Rates print as Python float
repr, so text round-trips are byte-exact.
"""

from dataclasses import dataclass

import numpy as np

from .codes import logical_observables, BBCode
from .layouts import LAYOUT_NAMES, build_layout
from .machine import (
    CHAIN_SEQUENTIAL,
    Gate2,
    IntraShift,
    MeasureX,
    PrepPlus,
    Shift,
    validate_program,
)

GATE_KINDS = ("CX", "CZ", "CY")
PREP_KINDS = ("PX", "PZ")
MEAS_KINDS = ("MX", "MRX", "MZ")
NOISE_KINDS = ("D1", "D2")
_ALL_KINDS = GATE_KINDS + PREP_KINDS + MEAS_KINDS + NOISE_KINDS + (
    "TICK",
    "DETECTOR",
    "OBSERVABLE",
)


@dataclass(frozen=True)
class NoiseModel:
    """Array noise rates, all derived from the two-qubit rate p.

    tau_m is the measurement duration in idle rounds; tau_s scales the
    all-qubit depolarizing charged after every shift layer.
    """

    p: float
    tau_m: int = 30
    tau_s: int = 30

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be a probability")
        if self.tau_m < 0 or self.tau_s < 0:
            raise ValueError("durations must be nonnegative")

    @property
    def one_qubit_rate(self):
        return min(self.p / 10.0, 1.0)

    @property
    def idle_rate(self):
        return min(self.p / 100.0, 1.0)

    @property
    def meas_flip_rate(self):
        return min(self.p / 10.0, 1.0)

    @property
    def shift_rate(self):
        return min(self.tau_s * self.p / 100.0, 1.0)

    def compound_idle(self, steps):
        """Exact composition of `steps` sequential depolarizing idles.

        Composing depolarizing channels multiplies their (1 - 4r/3)
        factors, so the aggregate is again depolarizing.
        """
        if steps <= 0:
            return 0.0
        r = self.idle_rate
        return min(0.75 * (1.0 - (1.0 - 4.0 * r / 3.0) ** steps), 1.0)


@dataclass(frozen=True)
class CircuitOp:
    kind: str
    targets: tuple
    rate: float = None
    arg: int = None

    def __post_init__(self):
        if self.kind not in _ALL_KINDS:
            raise ValueError(f"unknown circuit op {self.kind!r}")
        if self.kind in NOISE_KINDS and not 0.0 < self.rate <= 1.0:
            raise ValueError("noise rate must be in (0, 1]")
        if self.kind in MEAS_KINDS and not 0.0 <= self.rate <= 1.0:
            raise ValueError("flip rate must be a probability")
        if self.kind in ("CX", "CZ", "CY", "D2") and len(self.targets) % 2:
            raise ValueError(f"{self.kind} needs an even target list")
        if self.kind == "OBSERVABLE" and (self.arg is None or self.arg < 0):
            raise ValueError("observable index required")


@dataclass(frozen=True)
class NoisyCircuit:
    num_qubits: int
    ops: tuple

    def __post_init__(self):
        meas = 0
        for op in self.ops:
            if op.kind in ("DETECTOR", "OBSERVABLE"):
                for ref in op.targets:
                    if not -meas <= ref <= -1:
                        raise ValueError(
                            f"{op.kind} reference {ref} has no measurement"
                        )
            elif op.kind != "TICK":
                for q in op.targets:
                    if not 0 <= q < self.num_qubits:
                        raise ValueError(f"qubit {q} out of range")
            if op.kind in MEAS_KINDS:
                meas += len(op.targets)

    @property
    def num_measurements(self):
        return sum(len(op.targets) for op in self.ops if op.kind in MEAS_KINDS)

    @property
    def num_detectors(self):
        return sum(1 for op in self.ops if op.kind == "DETECTOR")

    @property
    def num_observables(self):
        idx = [op.arg for op in self.ops if op.kind == "OBSERVABLE"]
        return max(idx) + 1 if idx else 0

    @property
    def num_noise_channels(self):
        count = 0
        for op in self.ops:
            if op.kind in NOISE_KINDS:
                count += len(op.targets) if op.kind == "D1" else len(op.targets) // 2
            elif op.kind in MEAS_KINDS and op.rate > 0.0:
                count += len(op.targets)
        return count

    def to_text(self):
        lines = [f"circuit {self.num_qubits}"]
        for op in self.ops:
            parts = [op.kind]
            if op.kind == "OBSERVABLE":
                parts.append(str(op.arg))
            if op.rate is not None:
                parts.append(repr(op.rate))
            parts.extend(str(t) for t in op.targets)
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 2 or head[0] != "circuit":
            raise ValueError("missing circuit header")
        ops = []
        for ln in lines[1:]:
            parts = ln.split()
            kind, rest = parts[0], parts[1:]
            arg = None
            rate = None
            if kind == "OBSERVABLE":
                arg, rest = int(rest[0]), rest[1:]
            if kind in MEAS_KINDS or kind in NOISE_KINDS:
                rate, rest = float(rest[0]), rest[1:]
            ops.append(CircuitOp(kind, tuple(int(t) for t in rest), rate, arg))
        return cls(int(head[1]), tuple(ops))


# ---------------------------------------------------------------------------
# Lowering machine programs.


def _module_of(loc):
    return (loc.row, loc.cell)


def _color_gates(gates):
    """Exact max-degree edge coloring of a layer's module graph.

    Chains run one two-qubit gate at a time, so a layer's gates split
    into sub-steps where no module appears twice.  The module graph is
    bipartite (moving modules against data modules; a same-module gate
    gets a private degree-one endpoint), so max-degree many sub-steps
    always suffice; the alternating-path swap below realizes that bound.
    """
    ends = []
    degree = {}
    for idx, gate in enumerate(gates):
        u, v = _module_of(gate.control), _module_of(gate.target)
        if v == u:
            v = ("loop", idx)
        ends.append((u, v))
        degree[u] = degree.get(u, 0) + 1
        degree[v] = degree.get(v, 0) + 1
    delta = max(degree.values())
    busy = {u: {} for u in degree}  # module -> color -> gate index
    color = [None] * len(gates)

    def free(u):
        return next(c for c in range(delta) if c not in busy[u])

    for idx, (u, v) in enumerate(ends):
        shared = [
            c for c in range(delta) if c not in busy[u] and c not in busy[v]
        ]
        if shared:
            c = shared[0]
        else:
            a, b = free(u), free(v)
            # flip the a/b alternating path from v; bipartiteness keeps
            # it away from u, freeing a at both ends
            path = []
            x, want = v, a
            while want in busy[x]:
                g2 = busy[x][want]
                path.append(g2)
                u2, v2 = ends[g2]
                x = v2 if u2 == x else u2
                want = b if want == a else a
            for g2 in path:
                for m in ends[g2]:
                    del busy[m][color[g2]]
            for g2 in path:
                color[g2] = b if color[g2] == a else a
                for m in ends[g2]:
                    busy[m][color[g2]] = g2
            c = a
        busy[u][c] = idx
        busy[v][c] = idx
        color[idx] = c
    steps = [[] for _ in range(delta)]
    for idx, gate in enumerate(gates):
        steps[color[idx]].append(gate)
    return [s for s in steps if s]


def lower_to_circuit(program, noise, loc_to_qubit=None, parallelism=None):
    """Flatten a validated machine program to a noisy circuit.

    Shifts relabel slots but move no amplitude, so they lower to pure
    noise layers.  Layer idle noise is charged at layer end as one
    compound depolarizing per qubit (duration minus the qubit's own busy
    steps); commuting it past the qubit's gates within the layer is a
    deliberate modeling simplification.  In chain-sequential mode a gate
    layer lasts as many sub-steps as its busiest module.
    """
    validate_program(program)
    if parallelism is None:
        parallelism = program.config.parallelism
    if loc_to_qubit is None:
        locs = set()
        for layer in program.layers:
            for ins in layer:
                if isinstance(ins, Gate2):
                    locs.update((ins.control, ins.target))
                elif isinstance(ins, (PrepPlus, MeasureX)):
                    locs.update(ins.targets)
        loc_to_qubit = {
            loc: i
            for i, loc in enumerate(sorted(locs, key=lambda l: (l.row, l.cell, l.q)))
        }
    num_qubits = max(loc_to_qubit.values()) + 1
    all_qubits = tuple(sorted(loc_to_qubit.values()))
    ops = []

    def emit_idle(steps, qubits):
        rate = noise.compound_idle(steps)
        if rate > 0.0 and qubits:
            ops.append(CircuitOp("D1", tuple(sorted(qubits)), rate))

    for layer in program.layers:
        shifts = [i for i in layer if isinstance(i, (Shift, IntraShift))]
        gates = [i for i in layer if isinstance(i, Gate2)]
        preps = [i for i in layer if isinstance(i, PrepPlus)]
        metas = [i for i in layer if isinstance(i, MeasureX)]
        if shifts:
            if noise.shift_rate > 0.0:
                ops.append(CircuitOp("D1", all_qubits, noise.shift_rate))
            ops.append(CircuitOp("TICK", ()))
            continue
        if preps and (gates or metas):
            raise ValueError("preparation layers must stand alone")
        if preps:
            prepped = [loc_to_qubit[t] for p in preps for t in p.targets]
            ops.append(CircuitOp("PX", tuple(prepped)))
            if noise.one_qubit_rate > 0.0:
                ops.append(CircuitOp("D1", tuple(prepped), noise.one_qubit_rate))
            emit_idle(1, set(all_qubits) - set(prepped))
            ops.append(CircuitOp("TICK", ()))
            continue

        if parallelism == CHAIN_SEQUENTIAL and gates:
            substeps = _color_gates(gates)
        else:
            substeps = [gates] if gates else []
        for step in substeps:
            for kind in GATE_KINDS:
                pairs = [g for g in step if g.kind == kind]
                if pairs:
                    flat = tuple(
                        loc_to_qubit[loc]
                        for g in pairs
                        for loc in (g.control, g.target)
                    )
                    ops.append(CircuitOp(kind, flat))
            if noise.p > 0.0:
                flat = tuple(
                    loc_to_qubit[loc] for g in step for loc in (g.control, g.target)
                )
                ops.append(CircuitOp("D2", flat, noise.p))

        measured = []
        for meas in metas:
            qubits = tuple(loc_to_qubit[t] for t in meas.targets)
            kind = "MRX" if meas.reset else "MX"
            ops.append(CircuitOp(kind, qubits, noise.meas_flip_rate))
            if meas.reset and noise.one_qubit_rate > 0.0:
                ops.append(CircuitOp("D1", qubits, noise.one_qubit_rate))
            measured.extend(qubits)

        duration = len(substeps)
        if metas:
            duration = max(duration, noise.tau_m)
        gated = {loc_to_qubit[loc] for g in gates for loc in (g.control, g.target)}
        emit_idle(duration - 1, gated)
        emit_idle(duration, set(all_qubits) - gated - set(measured))
        ops.append(CircuitOp("TICK", ()))

    return NoisyCircuit(num_qubits, tuple(ops))


# ---------------------------------------------------------------------------
# Memory experiments.


def build_memory_experiment(
    code, layout="sparse", basis="Z", rounds=None, noise=None, parallelism=None
):
    """T rounds of syndrome extraction bracketed by transversal data rounds.

    Detectors: round-1 outcomes of memory-basis checks, consecutive
    outcomes of every check, and the final data readout recomputing the
    memory-basis checks.  Observables: the code's k memory-basis
    logicals, read off the final data measurement.
    """
    if not isinstance(code, BBCode):
        raise TypeError("memory experiments need a two-block symmetric code")
    if basis not in ("X", "Z"):
        raise ValueError(f"bad basis {basis!r}")
    if layout not in LAYOUT_NAMES:
        raise ValueError(f"unknown layout {layout!r}; choose from {LAYOUT_NAMES}")
    if rounds is None:
        rounds = code.known_distance or 1
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    if noise is None:
        noise = NoiseModel(0.0)

    result = build_layout(code, layout, rounds=rounds)
    inner = lower_to_circuit(
        result.program, noise, result.loc_to_qubit, parallelism
    )
    n = code.n
    data = tuple(range(n))
    ancilla = tuple(q for q in range(inner.num_qubits) if q >= n)

    ops = [CircuitOp("PX" if basis == "X" else "PZ", data)]
    if noise.one_qubit_rate > 0.0:
        ops.append(CircuitOp("D1", data, noise.one_qubit_rate))
    idle = noise.compound_idle(1)
    if idle > 0.0 and ancilla:
        ops.append(CircuitOp("D1", ancilla, idle))
    ops.append(CircuitOp("TICK", ()))
    ops.extend(inner.ops)
    ops.append(
        CircuitOp("MX" if basis == "X" else "MZ", data, noise.meas_flip_rate)
    )

    # measurement bookkeeping: ancilla readouts then the data readout
    meas_at = {}
    for k, tag in enumerate(result.measurement_tags):
        if tag is not None:
            meas_at[tag] = k
    total = len(result.measurement_tags) + n

    def ref(index):
        return index - total

    lm = code.params.size
    checks = code.H_Z if basis == "Z" else code.H_X
    rows = checks.to_dense()
    for row in range(lm):
        ops.append(CircuitOp("DETECTOR", (ref(meas_at[(basis, row, 1)]),)))
    for rnd in range(2, rounds + 1):
        for kind in (basis, "X" if basis == "Z" else "Z"):
            for row in range(lm):
                ops.append(
                    CircuitOp(
                        "DETECTOR",
                        (
                            ref(meas_at[(kind, row, rnd - 1)]),
                            ref(meas_at[(kind, row, rnd)]),
                        ),
                    )
                )
    anc_total = len(result.measurement_tags)
    for row in range(lm):
        refs = [ref(meas_at[(basis, row, rounds)])]
        refs.extend(ref(anc_total + int(q)) for q in np.nonzero(rows[row])[0])
        ops.append(CircuitOp("DETECTOR", tuple(refs)))
    for k, op in enumerate(logical_observables(code, basis)):
        refs = tuple(ref(anc_total + q) for q, _ in op.terms)
        ops.append(CircuitOp("OBSERVABLE", refs, None, k))

    return NoisyCircuit(inner.num_qubits, tuple(ops))


# ---------------------------------------------------------------------------
# Backward error-sensitivity sweep.


def _bits(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def signature_masks(circuit):
    """Flip mask per absolute measurement index.

    Bit d stands for detector d, bit num_detectors + k for observable k;
    a set bit means flipping that outcome flips that detector or
    observable.
    """
    nd = circuit.num_detectors
    sig = [0] * circuit.num_measurements
    det_index = 0
    meas_seen = 0
    for op in circuit.ops:
        if op.kind in MEAS_KINDS:
            meas_seen += len(op.targets)
        elif op.kind == "DETECTOR":
            for r in op.targets:
                sig[meas_seen + r] ^= 1 << det_index
            det_index += 1
        elif op.kind == "OBSERVABLE":
            for r in op.targets:
                sig[meas_seen + r] ^= 1 << (nd + op.arg)
    return sig


@dataclass(frozen=True)
class FaultChannel:
    """One elementary noise source and its equally likely fault effects.

    A D1 channel has three signatures (X, Z, Y insertion), a D2 channel
    fifteen (non-identity pairs in a fixed order), a measurement-flip
    channel one.  Each signature is an int mask in signature_masks
    convention; zero means that fault flips nothing.
    """

    kind: str
    rate: float
    signatures: tuple


def _backward_sweep(circuit, meas_sig, stop=0, channels=None):
    """Propagate outcome flip masks backward to error sensitivities.

    Returns per-qubit int masks (rx, rz) just before ops[stop]: bit b of
    rx[q] is set when an X error there flips outcome mask bit b, rz
    likewise for Z.  When `channels` is a list, one FaultChannel per
    noise channel is appended in forward circuit order.
    """
    rx = [0] * circuit.num_qubits
    rz = [0] * circuit.num_qubits
    per_op = [] if channels is not None else None
    meas_cursor = circuit.num_measurements
    ops = circuit.ops
    for idx in range(len(ops) - 1, stop - 1, -1):
        op = ops[idx]
        kind = op.kind
        if kind in MEAS_KINDS:
            meas_cursor -= len(op.targets)
            group = []
            for off, q in enumerate(op.targets):
                sig = meas_sig[meas_cursor + off]
                if per_op is not None and op.rate > 0.0:
                    group.append(FaultChannel(kind, op.rate, (sig,)))
                if kind == "MRX":
                    # reset wall: earlier errors only flip the outcome
                    rz[q] = sig
                    rx[q] = 0
                elif kind == "MX":
                    rz[q] ^= sig
                else:  # MZ
                    rx[q] ^= sig
            if per_op is not None:
                per_op.append(group)
        elif kind in PREP_KINDS:
            for q in op.targets:
                rx[q] = 0
                rz[q] = 0
        elif kind == "CX":
            for c, t in zip(op.targets[::2], op.targets[1::2]):
                rx[c] ^= rx[t]
                rz[t] ^= rz[c]
        elif kind == "CZ":
            for a, b in zip(op.targets[::2], op.targets[1::2]):
                new_a = rx[a] ^ rz[b]
                new_b = rx[b] ^ rz[a]
                rx[a], rx[b] = new_a, new_b
        elif kind == "CY":
            for c, t in zip(op.targets[::2], op.targets[1::2]):
                old_zc = rz[c]
                rx[c] ^= rx[t] ^ rz[t]
                rx[t] ^= old_zc
                rz[t] ^= old_zc
        elif kind == "D1":
            if per_op is not None:
                per_op.append(
                    [
                        FaultChannel(
                            kind, op.rate, (rx[q], rz[q], rx[q] ^ rz[q])
                        )
                        for q in op.targets
                    ]
                )
        elif kind == "D2":
            if per_op is not None:
                group = []
                for a, b in zip(op.targets[::2], op.targets[1::2]):
                    singles_a = (0, rx[a], rz[a], rx[a] ^ rz[a])
                    singles_b = (0, rx[b], rz[b], rx[b] ^ rz[b])
                    sigs = tuple(
                        sa ^ sb
                        for i, sa in enumerate(singles_a)
                        for j, sb in enumerate(singles_b)
                        if i or j
                    )
                    group.append(FaultChannel(kind, op.rate, sigs))
                per_op.append(group)
    if channels is not None:
        for group in reversed(per_op):
            channels.extend(group)
    return rx, rz


def fault_channels(circuit):
    """All noise channels with their detector/observable flip signatures."""
    channels = []
    _backward_sweep(circuit, signature_masks(circuit), channels=channels)
    return tuple(channels)


# ---------------------------------------------------------------------------
# Detector error model.


@dataclass(frozen=True)
class Mechanism:
    probability: float
    detectors: tuple
    observables: tuple


@dataclass(frozen=True)
class DetectorErrorModel:
    num_detectors: int
    num_observables: int
    mechanisms: tuple

    @property
    def num_mechanisms(self):
        return len(self.mechanisms)


def _merge(p1, p2):
    return p1 + p2 - 2.0 * p1 * p2


def detector_error_model(circuit, check_determinism=True):
    """Propagate every elementary fault to its detector/observable flips.

    Works backward through the circuit keeping, per qubit, the set of
    detectors and observables an X or Z error at that point would flip.
    Faults with identical flip signatures merge by XOR of independent
    events; faults flipping nothing are dropped.
    """
    if check_determinism:
        from .simulate import verify_noiseless

        verify_noiseless(circuit)

    nd = circuit.num_detectors
    nobs = circuit.num_observables
    found = {}
    for channel in fault_channels(circuit):
        share = channel.rate / len(channel.signatures)
        for sig in channel.signatures:
            if sig and share > 0.0:
                found[sig] = _merge(found.get(sig, 0.0), share)

    mechanisms = []
    for sig in sorted(found, key=_bits):
        split = _bits(sig)
        dets = tuple(b for b in split if b < nd)
        obs = tuple(b - nd for b in split if b >= nd)
        mechanisms.append(Mechanism(found[sig], dets, obs))
    return DetectorErrorModel(nd, nobs, tuple(mechanisms))
