"""Layout compilers lowering stabilizer measurement schedules onto module arrays.

Five compilers share one output shape: a machine program plus the
bookkeeping needed to flatten it into a circuit (qubit numbering and a
tag for every ancilla measurement).  The windowed compiler handles
arbitrary Pauli lists on a 2 x L array; the others are specialized to
two-block symmetric codes and hit fixed per-round layer budgets, which
depth_table cross-checks against closed forms.
"""

import itertools
import math
from dataclasses import dataclass

from .codes import BBCode, stabilizer_generators
from .gf2 import Monomial
from .machine import (
    ArrayConfig,
    Gate2,
    IntraShift,
    Loc,
    MeasureX,
    PrepPlus,
    ProgramBuilder,
    Shift,
    validate_program,
)


@dataclass(frozen=True)
class LayoutResult:
    """A compiled program plus the mapping back to flat circuit qubits.

    measurement_tags has one entry per measured qubit, in emission order.
    Ancilla measurements that read a stabilizer check carry
    ("X"|"Z", check_row, round); junk measurements carry None.
    """

    name: str
    program: object
    loc_to_qubit: dict
    num_qubits: int
    data_qubits: tuple
    measurement_tags: tuple
    rounds: int

    def depth_report(self):
        return validate_program(self.program)


def _bb_circuit_ids(code):
    l, m = code.params.l, code.params.m
    lm = l * m
    n = 2 * lm

    def data_id(u, v, w):
        return u * lm + v * m + w

    def anc_id(kind, v, w):
        return n + (0 if kind == "X" else lm) + v * m + w

    return data_id, anc_id


def _grid(l, m):
    return [(v, w) for v in range(l) for w in range(m)]


def _transpose_mono(mono, ring):
    return Monomial(-mono.i, -mono.j).reduced(ring)


# ---------------------------------------------------------------------------
# Two-pass layout on a 2 x m array of 2l-qubit chain modules.


def _sparse_passes(code, basis):
    a, b = code.A, code.B
    passes = []
    if basis in ("X", "XZ"):
        passes.append(("X", "CX", ((a, 0), (b, 1))))
    if basis in ("Z", "XZ"):
        passes.append(("Z", "CZ", ((b.transpose(), 0), (a.transpose(), 1))))
    if basis not in ("X", "Z", "XZ"):
        raise ValueError(f"basis must be X, Z, or XZ, got {basis!r}")
    return passes


def sparse_cyclic_layout(code, basis="XZ", rounds=1, swap_axes=False):
    """One shared ancilla row; one aligning shift per exponent group.

    Single-pass depth is |J(A) u J(B)| + omega + 2 on the default axis
    and |I(A) u I(B)| + omega + 2 with the axes swapped.
    """
    if not isinstance(code, BBCode):
        raise TypeError("sparse_cyclic_layout expects a two-block symmetric code")
    l, m = code.params.l, code.params.m
    ring = code.params
    if swap_axes:
        num_cells, module_size = l, 2 * m

        def data_loc(u, v, w):
            return Loc(0, v, u * m + w)

        def anc_loc(kind, v, w):
            return Loc(1, v, (0 if kind == "X" else m) + w)

        def group(mono):
            return mono.i

        def minor(mono):
            return mono.j

    else:
        num_cells, module_size = m, 2 * l

        def data_loc(u, v, w):
            return Loc(0, w, u * l + v)

        def anc_loc(kind, v, w):
            return Loc(1, w, (0 if kind == "X" else l) + v)

        def group(mono):
            return mono.j

        def minor(mono):
            return mono.i

    config = ArrayConfig(num_moving_rows=1, L=num_cells, module_size=module_size)
    builder = ProgramBuilder(config)
    tags = []
    offset = 0
    grid = _grid(l, m)

    for rnd in range(1, rounds + 1):
        for kind, gate, couplings in _sparse_passes(code, basis):
            anc = [anc_loc(kind, v, w) for v, w in grid]
            builder.add(PrepPlus(tuple(anc))).end_layer()
            groups = sorted({group(t) for poly, _ in couplings for t in poly.terms})
            for g in groups:
                builder.add(Shift(1, (g - offset) % num_cells)).end_layer()
                offset = g
                for poly, block in couplings:
                    terms = sorted(
                        (t for t in poly.terms if group(t) == g), key=minor
                    )
                    for t in terms:
                        builder.add(
                            *(
                                Gate2(
                                    gate,
                                    anc_loc(kind, v, w),
                                    data_loc(block, (v + t.i) % l, (w + t.j) % m),
                                )
                                for v, w in grid
                            )
                        ).end_layer()
            builder.add(MeasureX(tuple(anc), reset=False)).end_layer()
            tags.extend((kind, v * m + w, rnd) for v, w in grid)

    data_id, anc_id = _bb_circuit_ids(code)
    loc_to_qubit = {}
    for u in (0, 1):
        for v, w in grid:
            loc_to_qubit[data_loc(u, v, w)] = data_id(u, v, w)
    for kind in ("X", "Z"):
        for v, w in grid:
            loc_to_qubit[anc_loc(kind, v, w)] = anc_id(kind, v, w)
    return LayoutResult(
        name="sparse",
        program=builder.build(),
        loc_to_qubit=loc_to_qubit,
        num_qubits=4 * l * m,
        data_qubits=tuple(range(2 * l * m)),
        measurement_tags=tuple(tags),
        rounds=rounds,
    )


# ---------------------------------------------------------------------------
# Flat variant: 2l single-qubit sites per module, intra-module shifts.


def flat_cyclic_layout(code, basis="XZ", rounds=1):
    """Left/right-interleaved flat modules; two shift layers per monomial.

    Trades shift count for gate parallelism: every monomial becomes one
    aligning global shift, one intra-module shift, and one full gate
    layer, for a single-pass depth of 3*omega + 2.
    """
    if not isinstance(code, BBCode):
        raise TypeError("flat_cyclic_layout expects a two-block symmetric code")
    l, m = code.params.l, code.params.m
    period = 2 * l
    config = ArrayConfig(num_moving_rows=1, L=m, module_size=period, flat=True)
    builder = ProgramBuilder(config)
    tags = []
    goff = 0
    ioff = 0
    grid = _grid(l, m)

    def data_loc(u, v, w):
        return Loc(0, w, 2 * v + u)

    def anc_loc(kind, v, w):
        return Loc(1, w, 2 * v + (0 if kind == "X" else 1))

    for rnd in range(1, rounds + 1):
        for kind, gate, couplings in _sparse_passes(code, basis):
            parity = 0 if kind == "X" else 1
            anc = [anc_loc(kind, v, w) for v, w in grid]
            builder.add(PrepPlus(tuple(anc))).end_layer()
            for poly, block in couplings:
                for t in sorted(poly.terms, key=lambda t: (t.j, t.i)):
                    builder.add(Shift(1, (t.j - goff) % m)).end_layer()
                    goff = t.j
                    target_off = (2 * t.i + block - parity) % period
                    step = (target_off - ioff) % period
                    builder.add(
                        *(IntraShift((1, w), step) for w in range(m))
                    ).end_layer()
                    ioff = target_off
                    builder.add(
                        *(
                            Gate2(
                                gate,
                                anc_loc(kind, v, w),
                                data_loc(block, (v + t.i) % l, (w + t.j) % m),
                            )
                            for v, w in grid
                        )
                    ).end_layer()
            builder.add(MeasureX(tuple(anc), reset=False)).end_layer()
            tags.extend((kind, v * m + w, rnd) for v, w in grid)

    data_id, anc_id = _bb_circuit_ids(code)
    loc_to_qubit = {}
    for u in (0, 1):
        for v, w in grid:
            loc_to_qubit[data_loc(u, v, w)] = data_id(u, v, w)
    for kind in ("X", "Z"):
        for v, w in grid:
            loc_to_qubit[anc_loc(kind, v, w)] = anc_id(kind, v, w)
    return LayoutResult(
        name="flat",
        program=builder.build(),
        loc_to_qubit=loc_to_qubit,
        num_qubits=4 * l * m,
        data_qubits=tuple(range(2 * l * m)),
        measurement_tags=tuple(tags),
        rounds=rounds,
    )


# ---------------------------------------------------------------------------
# Interleaved variants: split ancilla rows, X and Z checks in flight together.


@dataclass(frozen=True)
class MuTuple:
    """One step of an interleaved schedule.

    uz/ux name the data block each side couples to; qz/qx are the
    coupling monomials.  A None side is idle for that step.
    """

    uz: object
    ux: object
    qz: object
    qx: object


@dataclass(frozen=True)
class MuSchedule:
    style: str
    segments: tuple

    @property
    def tuples(self):
        return tuple(t for seg in self.segments for t in seg)


def mu_interleaved_gates(code):
    """Fixed seven-step schedule threading X work into the Z gaps.

    Requires both polynomials to have exactly three terms.  Step seven
    folds into step one of the following round, so a round costs six
    gate layers and six shift layers in steady state.
    """
    ring = code.params
    a, b = code.A.terms, code.B.terms
    if len(a) != 3 or len(b) != 3:
        raise ValueError("interleaved-gates schedule needs weight-3 polynomials")
    ta = [_transpose_mono(t, ring) for t in a]
    tb = [_transpose_mono(t, ring) for t in b]
    steps = (
        MuTuple(1, None, ta[0], None),
        MuTuple(1, 0, ta[2], a[1]),
        MuTuple(0, 1, tb[0], b[1]),
        MuTuple(0, 1, tb[1], b[0]),
        MuTuple(0, 1, tb[2], b[2]),
        MuTuple(1, 0, ta[1], a[0]),
        MuTuple(None, 0, None, a[2]),
    )
    return MuSchedule(style="interleaved-gates", segments=(steps,))


def mu_concurrent_rounds(code):
    """Pipelined schedule: round r's X tail overlaps round r+1's Z head.

    Term orders are chosen so consecutive steps stay inside one exponent
    group wherever possible: the transposed terms are sorted by their y
    exponent, the A-side group matching the first B-side group is
    rotated to the back, and each x-side step reuses the z-side step's
    underlying term.  That pins the shift-layer count at
    |J(A) u J(B)| per round plus |J(A)| once at startup.
    """
    ring = code.params
    bt = sorted(
        (_transpose_mono(t, ring) for t in code.B.terms), key=lambda t: (t.j, t.i)
    )
    at = sorted(
        (_transpose_mono(t, ring) for t in code.A.terms), key=lambda t: (t.j, t.i)
    )
    j0 = bt[0].j
    at = [t for t in at if t.j != j0] + [t for t in at if t.j == j0]
    mu_z = tuple(MuTuple(1, None, t, None) for t in at)
    mu_zx = tuple(
        MuTuple(0, 1, t, _transpose_mono(t, ring)) for t in bt
    )
    mu_x = tuple(MuTuple(None, 0, None, _transpose_mono(t, ring)) for t in at)
    return MuSchedule(style="concurrent-rounds", segments=(mu_z, mu_zx, mu_x))


class _InterleavedEmitter:
    def __init__(self, code, rounds):
        self.code = code
        self.rounds = rounds
        l, m = code.params.l, code.params.m
        self.l, self.m = l, m
        self.grid = _grid(l, m)
        self.config = ArrayConfig(num_moving_rows=2, L=m, module_size=2 * l)
        self.builder = ProgramBuilder(self.config)
        self.tags = []
        self.zoff = 0
        self.xoff = 0

    def data_loc(self, u, v, w):
        return Loc(0, w, u * self.l + v)

    def x_anc(self, v, w):
        return Loc(1, w, v)

    def z_anc(self, v, w):
        return Loc(2, w, v)

    def prep_all(self):
        anc = [self.x_anc(v, w) for v, w in self.grid]
        anc += [self.z_anc(v, w) for v, w in self.grid]
        self.builder.add(PrepPlus(tuple(anc))).end_layer()

    def z_gates(self, uz, q):
        l, m = self.l, self.m
        return [
            Gate2(
                "CZ",
                self.z_anc(v, w),
                self.data_loc(uz, (v + q.i) % l, (w + q.j) % m),
            )
            for v, w in self.grid
        ]

    def x_gates(self, ux, q):
        l, m = self.l, self.m
        return [
            Gate2(
                "CX",
                self.x_anc(v, w),
                self.data_loc(ux, (v + q.i) % l, (w + q.j) % m),
            )
            for v, w in self.grid
        ]

    def shift_layer(self, zq, xq, always):
        dz = (zq.j - self.zoff) % self.m if zq is not None else 0
        dx = (xq.j - self.xoff) % self.m if xq is not None else 0
        if zq is not None:
            self.zoff = zq.j
        if xq is not None:
            self.xoff = xq.j
        if always:
            self.builder.add(Shift(2, dz), Shift(1, dx)).end_layer()
        else:
            moves = []
            if dz:
                moves.append(Shift(2, dz))
            if dx:
                moves.append(Shift(1, dx))
            if moves:
                self.builder.add(*moves).end_layer()

    def measure_row(self, kind, rnd):
        anc = self.x_anc if kind == "X" else self.z_anc
        locs = tuple(anc(v, w) for v, w in self.grid)
        self.builder.add(MeasureX(locs, reset=True)).end_layer()
        self.tags.extend((kind, v * self.m + w, rnd) for v, w in self.grid)

    def result(self, name):
        data_id, anc_id = _bb_circuit_ids(self.code)
        loc_to_qubit = {}
        for u in (0, 1):
            for v, w in self.grid:
                loc_to_qubit[self.data_loc(u, v, w)] = data_id(u, v, w)
        for v, w in self.grid:
            loc_to_qubit[self.x_anc(v, w)] = anc_id("X", v, w)
            loc_to_qubit[self.z_anc(v, w)] = anc_id("Z", v, w)
        lm = self.l * self.m
        return LayoutResult(
            name=name,
            program=self.builder.build(),
            loc_to_qubit=loc_to_qubit,
            num_qubits=4 * lm,
            data_qubits=tuple(range(2 * lm)),
            measurement_tags=tuple(self.tags),
            rounds=self.rounds,
        )


def _emit_interleaved_gates(code, mu, rounds):
    em = _InterleavedEmitter(code, rounds)
    em.prep_all()
    steps = mu.segments[0]
    for g in range(1, 6 * rounds + 2):
        rnd = (g - 1) // 6 + 1
        pos = (g - 1) % 6 + 1
        zpart = steps[pos - 1] if rnd <= rounds else None
        if pos == 1:
            xpart = steps[6] if rnd >= 2 else None
        else:
            xpart = steps[pos - 1]
        em.shift_layer(
            zpart.qz if zpart else None,
            xpart.qx if xpart else None,
            always=True,
        )
        gates = []
        if zpart is not None:
            gates += em.z_gates(zpart.uz, zpart.qz)
        if xpart is not None:
            gates += em.x_gates(xpart.ux, xpart.qx)
        em.builder.add(*gates).end_layer()
        if pos == 6:
            em.measure_row("Z", rnd)
        if pos == 1 and rnd >= 2:
            em.measure_row("X", rnd - 1)
    return em.result("interleaved-gates")


def _emit_concurrent_rounds(code, mu, rounds):
    em = _InterleavedEmitter(code, rounds)
    mu_z, mu_zx, mu_x = mu.segments
    em.prep_all()
    for t in mu_z:
        em.shift_layer(t.qz, None, always=False)
        em.builder.add(*em.z_gates(t.uz, t.qz)).end_layer()
    for rnd in range(1, rounds + 1):
        for t in mu_zx:
            em.shift_layer(t.qz, t.qx, always=False)
            if rnd == 1:
                # pipeline warm-up: the two sides get separate layers once
                em.builder.add(*em.z_gates(t.uz, t.qz)).end_layer()
                em.builder.add(*em.x_gates(t.ux, t.qx)).end_layer()
            else:
                em.builder.add(
                    *em.z_gates(t.uz, t.qz), *em.x_gates(t.ux, t.qx)
                ).end_layer()
        em.measure_row("Z", rnd)
        for i, t in enumerate(mu_x):
            znext = mu_z[i] if rnd < rounds else None
            em.shift_layer(znext.qz if znext else None, t.qx, always=False)
            gates = list(em.x_gates(t.ux, t.qx))
            if znext is not None:
                gates += em.z_gates(znext.uz, znext.qz)
            em.builder.add(*gates).end_layer()
        em.measure_row("X", rnd)
    return em.result("concurrent-rounds")


def interleaved_layout(code, mu=None, rounds=1, style="interleaved-gates"):
    """Compile a split-ancilla-row schedule onto the 3 x m array."""
    if not isinstance(code, BBCode):
        raise TypeError("interleaved_layout expects a two-block symmetric code")
    if mu is None:
        if style == "interleaved-gates":
            mu = mu_interleaved_gates(code)
        elif style == "concurrent-rounds":
            mu = mu_concurrent_rounds(code)
        else:
            raise ValueError(f"unknown schedule style {style!r}")
    if mu.style == "interleaved-gates":
        return _emit_interleaved_gates(code, mu, rounds)
    if mu.style == "concurrent-rounds":
        return _emit_concurrent_rounds(code, mu, rounds)
    raise ValueError(f"unknown schedule style {mu.style!r}")


# ---------------------------------------------------------------------------
# Windowed compiler for arbitrary Pauli lists on a 2 x L array.

_GATE_FOR = {"X": "CX", "Y": "CY", "Z": "CZ"}
_ANTICOMMUTE = {
    ("X", "Z"), ("Z", "X"), ("X", "Y"), ("Y", "X"), ("Y", "Z"), ("Z", "Y"),
}


def _schedule_window_module(hits, n):
    """Layer one module's window gates, depth at most n.

    hits is a list of (q, s, letter) in operator order.  First try a
    greedy packing that keeps anticommuting same-target pairs in order
    (no corrections needed); when that exceeds n layers, fall back to
    the latin schedule layer = (s - q) mod n and report the swapped
    anticommuting pairs so the caller can insert CZ corrections.

    Returns (layers, swapped) where layers maps a layer index to the
    (q, s, letter) triples it runs and swapped lists (qa, qb) pairs,
    one entry per order swap.
    """
    layers = {}
    busy = []  # per layer, the slots in use: ("a", q) and ("d", s)
    placed = []  # (s, letter, layer)
    ok = True
    for q, s, letter in hits:
        floor = 0
        for s2, lt2, lay in placed:
            if s2 == s and (letter, lt2) in _ANTICOMMUTE:
                floor = max(floor, lay + 1)
        k = floor
        while k < len(busy) and (("a", q) in busy[k] or ("d", s) in busy[k]):
            k += 1
        if k >= n:
            ok = False
            break
        if k == len(busy):
            busy.append(set())
        busy[k].update((("a", q), ("d", s)))
        layers.setdefault(k, []).append((q, s, letter))
        placed.append((s, letter, k))
    if ok:
        return layers, []

    layers = {}
    swapped = []
    per_target = {}
    for q, s, letter in hits:
        layers.setdefault((s - q) % n, []).append((q, s, letter))
        per_target.setdefault(s, []).append((q, letter))
    for s, on_target in per_target.items():
        for (qa, la), (qb, lb) in itertools.combinations(on_target, 2):
            if (la, lb) in _ANTICOMMUTE and (s - qa) % n > (s - qb) % n:
                swapped.append((qa, qb))
    return layers, swapped


def cyclic_layout(paulis, module_size, num_cells, data_placement=None, tags=None):
    """Windowed measurement of an arbitrary Pauli list.

    Operators are batched onto ancilla modules that ride the moving row
    across the data cells, collecting their controlled-Pauli gates one
    aligned cell at a time, and are read out when they reach the last
    cell.  Program depth is at most
    3 + (ceil(r/n) + L - 1) * (n + 1)
    for r operators on n-qubit modules over L cells.

    Each window packs its gates into a latin-square schedule of depth at
    most n.  That schedule may run two controlled-Pauli gates that share
    a target and anticommute there in swapped order; every swap equals
    the in-order product times a CZ on the two controls, and that CZ
    commutes with every controlled-Pauli gate in the program.  The
    compiler tracks the swap parity per ancilla pair and inserts the
    accumulated CZ corrections just before the pair's readout, so the
    emitted circuit measures the operators exactly in list order.
    """
    n, L = module_size, num_cells
    r = len(paulis)
    if r == 0:
        raise ValueError("need at least one operator")
    N = paulis[0].num_qubits
    if any(p.num_qubits != N for p in paulis):
        raise ValueError("operators must share a qubit count")
    if data_placement is None:
        data_placement = [(g // n, g % n) for g in range(N)]
    if len(data_placement) != N:
        raise ValueError("placement size mismatch")
    for cell, slot in data_placement:
        if cell >= L - 1:
            raise ValueError("data qubits must occupy the first L-1 cells")
    if tags is not None and len(tags) != r:
        raise ValueError("tags must parallel the operator list")

    config = ArrayConfig(num_moving_rows=1, L=L, module_size=n)
    builder = ProgramBuilder(config)
    meas_tags = []
    supports = [sorted(p.as_dict().items()) for p in paulis]
    num_batches = math.ceil(r / n)
    assigned = {}  # home cell -> batch index

    home0 = (L - 1) % L
    builder.add(
        PrepPlus(tuple(Loc(1, home0, q) for q in range(n)))
    ).end_layer()
    assigned[home0] = 0
    next_batch = 1

    swap_parity = {}  # (home, qa, qb) with qa < qb -> bit

    for t in range(1, num_batches + L + 1):
        builder.add(Shift(1, 1)).end_layer()
        merged = {}  # layer index -> gates, merged across window modules
        for home in sorted(assigned):
            cur = (home + t) % L
            if cur > L - 2:
                continue
            batch = assigned[home]
            hits = []
            for q in range(n):
                idx = batch * n + q
                if idx >= r:
                    break
                for g, letter in supports[idx]:
                    if data_placement[g][0] == cur:
                        hits.append((q, data_placement[g][1], letter))
            mod_layers, swaps = _schedule_window_module(hits, n)
            for k, triples in mod_layers.items():
                merged.setdefault(k, []).extend(
                    Gate2(_GATE_FOR[lt], Loc(1, home, q), Loc(0, cur, s))
                    for q, s, lt in triples
                )
            for qa, qb in swaps:
                key = (home, qa, qb)
                swap_parity[key] = swap_parity.get(key, 0) ^ 1
        layers = [merged[k] for k in sorted(merged)]

        home_meas = (L - 1 - t) % L
        batch_meas = assigned.pop(home_meas, None)
        corr_layers = []
        if batch_meas is not None:
            odd = sorted(
                (qa, qb)
                for (h, qa, qb), bit in swap_parity.items()
                if h == home_meas and bit
            )
            swap_parity = {
                k: v for k, v in swap_parity.items() if k[0] != home_meas
            }
            for qa, qb in odd:
                gate = Gate2("CZ", Loc(1, home_meas, qa), Loc(1, home_meas, qb))
                for layer in corr_layers:
                    if all(
                        qa not in pair and qb not in pair for _, pair in layer
                    ):
                        layer.append((gate, (qa, qb)))
                        break
                else:
                    corr_layers.append([(gate, (qa, qb))])
        for i, layer in enumerate(corr_layers):
            gates = [gate for gate, _ in layer]
            if i < len(layers):
                layers[i].extend(gates)
            else:
                layers.append(gates)

        meas = MeasureX(tuple(Loc(1, home_meas, q) for q in range(n)), reset=True)
        for q in range(n):
            idx = None if batch_meas is None else batch_meas * n + q
            if idx is None or idx >= r:
                meas_tags.append(None)
            else:
                meas_tags.append(tags[idx] if tags is not None else ("op", idx))
        k = len(corr_layers)  # readout waits for this module's corrections
        if k < len(layers):
            layers[k].append(meas)
        else:
            layers.append([meas])
        for layer in layers:
            builder.add(*layer).end_layer()

        if next_batch < num_batches:
            assigned[home_meas] = next_batch
            next_batch += 1

    loc_to_qubit = {}
    for g in range(N):
        loc_to_qubit[Loc(0, *data_placement[g])] = g
    for home in range(L):
        for q in range(n):
            loc_to_qubit[Loc(1, home, q)] = N + home * n + q
    return LayoutResult(
        name="cyclic",
        program=builder.build(),
        loc_to_qubit=loc_to_qubit,
        num_qubits=N + L * n,
        data_qubits=tuple(range(N)),
        measurement_tags=tuple(meas_tags),
        rounds=1,
    )


def cyclic_bb_layout(code, rounds=1):
    """Windowed layout specialized to a two-block code's generator list."""
    l, m = code.params.l, code.params.m
    lm = l * m
    gens = stabilizer_generators(code).generators
    paulis = []
    tags = []
    for rnd in range(1, rounds + 1):
        paulis.extend(gens)
        tags.extend(
            ("X", i, rnd) if i < lm else ("Z", i - lm, rnd)
            for i in range(2 * lm)
        )
    placement = [None] * (2 * lm)
    for u in (0, 1):
        for v in range(l):
            for w in range(m):
                placement[u * lm + v * m + w] = (w, u * l + v)
    result = cyclic_layout(
        paulis,
        module_size=2 * l,
        num_cells=m + 1,
        data_placement=placement,
        tags=tags,
    )
    return LayoutResult(
        name="cyclic",
        program=result.program,
        loc_to_qubit=result.loc_to_qubit,
        num_qubits=result.num_qubits,
        data_qubits=result.data_qubits,
        measurement_tags=result.measurement_tags,
        rounds=rounds,
    )


# ---------------------------------------------------------------------------
# Layer-count bookkeeping.

LAYOUT_NAMES = ("cyclic", "sparse", "flat", "interleaved-gates", "concurrent-rounds")


def build_layout(code, name, rounds=1):
    if name == "cyclic":
        return cyclic_bb_layout(code, rounds)
    if name == "sparse":
        return sparse_cyclic_layout(code, "XZ", rounds)
    if name == "flat":
        return flat_cyclic_layout(code, "XZ", rounds)
    if name in ("interleaved-gates", "concurrent-rounds"):
        return interleaved_layout(code, rounds=rounds, style=name)
    raise ValueError(f"unknown layout {name!r}; choose from {LAYOUT_NAMES}")


def depth_table(code, rounds=10):
    """Measured layer counts for the four fixed-budget layouts.

    Each row is checked against its closed form before being returned,
    so a schedule regression fails loudly here.
    """
    w = code.omega
    ja = {t.j for t in code.A.terms}
    ju = len(ja | {t.j for t in code.B.terms})
    ja = len(ja)
    T = rounds
    expected = {
        "sparse": (2 * w * T, 2 * T * ju, 4 * T, 2 * ju + 2 * w + 4),
        "flat": (2 * w * T, 4 * w * T, 4 * T, 6 * w + 4),
        "interleaved-gates": (w * T + 1, w * T + 1, 2 * T, 2 * w + 2),
        "concurrent-rounds": (w * T + w, T * ju + ja, 2 * T, ju + w + 2),
    }
    table = {}
    for name in ("sparse", "flat", "interleaved-gates", "concurrent-rounds"):
        report = build_layout(code, name, rounds).depth_report()
        shifts = report.shift_layers + report.intra_shift_layers
        if name in ("sparse", "flat"):
            meas = report.meas_prep_layers
        else:
            meas = report.meas_reset_layers
        got = (report.two_qubit_layers, shifts, meas)
        want = expected[name][:3]
        assert got == want, f"{code.name} {name}: layer counts {got} != {want}"
        table[name] = {
            "gate_layers": got[0],
            "shift_layers": got[1],
            "measure_layers": got[2],
            "amortized_per_round": expected[name][3],
            "total_depth": report.total_depth,
        }
    return table
