"""
Abstract module-array machine: a fixed row of data modules plus one or
two moving rows of ancilla modules on a ring of L cells.  Machine
programs are sequences of layers; this module defines the instruction
set, legality checking with module-position tracking, depth accounting,
and a line-oriented text format.

Targets name qubits by module identity: (row, home cell, slot).  A
moving module's current cell is its home cell plus the row's accumulated
shift, modulo L.  Two-qubit gates must join qubits in one module or in
two modules currently at the same cell; in flat mode cross-module gates
must additionally join equal current intra-module positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

FULL = "full"
CHAIN_SEQUENTIAL = "chain-sequential"

GATE2_KINDS = ("CX", "CY", "CZ")


class MachineProgramError(ValueError):
    pass


@dataclass(frozen=True)
class ArrayConfig:
    num_moving_rows: int
    L: int
    module_size: int
    flat: bool = False
    parallelism: str = FULL

    def __post_init__(self):
        if self.num_moving_rows not in (1, 2):
            raise ValueError("num_moving_rows must be 1 or 2")
        if self.L < 1 or self.module_size < 1:
            raise ValueError("L and module_size must be positive")
        if self.parallelism not in (FULL, CHAIN_SEQUENTIAL):
            raise ValueError(f"bad parallelism {self.parallelism!r}")

    @property
    def num_rows(self):
        return 1 + self.num_moving_rows


@dataclass(frozen=True, order=True)
class Loc:
    """A qubit slot: (row, home cell, position in module)."""

    row: int
    cell: int
    q: int


@dataclass(frozen=True)
class PrepPlus:
    targets: tuple


@dataclass(frozen=True)
class MeasureX:
    targets: tuple
    reset: bool = True


@dataclass(frozen=True)
class Gate1:
    kind: str
    target: Loc


@dataclass(frozen=True)
class Gate2:
    kind: str
    control: Loc
    target: Loc

    def __post_init__(self):
        if self.kind not in GATE2_KINDS:
            raise ValueError(f"bad two-qubit gate {self.kind!r}")


@dataclass(frozen=True)
class Shift:
    row: int
    s: int


@dataclass(frozen=True)
class IntraShift:
    module: tuple  # (row, home cell)
    s: int


@dataclass(frozen=True)
class EndLayer:
    pass


@dataclass(frozen=True)
class MachineProgram:
    config: ArrayConfig
    layers: tuple

    @classmethod
    def from_instructions(cls, config, instructions):
        layers, current = [], []
        for inst in instructions:
            if isinstance(inst, EndLayer):
                layers.append(tuple(current))
                current = []
            else:
                current.append(inst)
        if current:
            layers.append(tuple(current))
        return cls(config, tuple(layers))

    @property
    def num_layers(self):
        return len(self.layers)


class ProgramBuilder:
    def __init__(self, config):
        self.config = config
        self._layers = []
        self._current = []

    def add(self, *instructions):
        self._current.extend(instructions)
        return self

    def end_layer(self):
        if self._current:
            self._layers.append(tuple(self._current))
            self._current = []
        return self

    def build(self):
        self.end_layer()
        return MachineProgram(self.config, tuple(self._layers))


@dataclass(frozen=True)
class DepthReport:
    two_qubit_layers: int
    shift_layers: int
    intra_shift_layers: int
    meas_reset_layers: int
    prep_layers: int
    other_layers: int
    total_depth: int
    total_cx: int  # every two-qubit gate, whatever its kind

    @property
    def meas_prep_layers(self):
        return self.meas_reset_layers + self.prep_layers


def apply_shift(cell, s, L):
    return (cell + s) % L


class _Tracker:
    """Module positions and (flat) intra offsets through a program."""

    def __init__(self, config):
        self.config = config
        self.row_offsets = [0] * (config.num_moving_rows + 1)
        self.intra = {}

    def current_cell(self, loc):
        return apply_shift(loc.cell, self.row_offsets[loc.row], self.config.L)

    def current_pos(self, loc):
        off = self.intra.get((loc.row, loc.cell), 0)
        return (loc.q + off) % self.config.module_size

    def shift(self, row, s):
        self.row_offsets[row] = (self.row_offsets[row] + s) % self.config.L

    def intra_shift(self, module, s):
        self.intra[module] = (self.intra.get(module, 0) + s) % self.config.module_size


def _check_loc(loc, config, where):
    if not 0 <= loc.row <= config.num_moving_rows:
        raise MachineProgramError(f"{where}: row {loc.row} out of range")
    if not 0 <= loc.cell < config.L:
        raise MachineProgramError(f"{where}: cell {loc.cell} out of range")
    if not 0 <= loc.q < config.module_size:
        raise MachineProgramError(f"{where}: slot {loc.q} out of range")


def validate_program(program):
    """Check legality layer by layer and return the depth report.

    The validator never re-schedules: a chain-sequential program must
    already obey the one-gate-per-module-per-layer rule.
    """
    config = program.config
    tracker = _Tracker(config)
    counts = dict(gate2=0, shift=0, intra=0, meas=0, prep=0, other=0)
    total_cx = 0
    for lnum, layer in enumerate(program.layers):
        where = f"layer {lnum}"
        touched = set()
        shift_rows = set()
        intra_modules = set()
        gates_per_module = {}
        has = dict(gate2=False, shift=False, intra=False, meas=False, prep=False, other=False)

        def touch(loc, what=where):
            if loc in touched:
                raise MachineProgramError(f"{what}: overlapping support at {loc}")
            touched.add(loc)

        for inst in layer:
            if isinstance(inst, Shift):
                if not 1 <= inst.row <= config.num_moving_rows:
                    raise MachineProgramError(f"{where}: shift on fixed or missing row {inst.row}")
                if inst.row in shift_rows:
                    raise MachineProgramError(f"{where}: two shifts on row {inst.row}")
                shift_rows.add(inst.row)
                has["shift"] = True
            elif isinstance(inst, IntraShift):
                if not config.flat:
                    raise MachineProgramError(f"{where}: intra-module shift outside flat mode")
                if inst.module in intra_modules:
                    raise MachineProgramError(f"{where}: two intra shifts on module {inst.module}")
                intra_modules.add(inst.module)
                has["intra"] = True
            elif isinstance(inst, Gate2):
                c, t = inst.control, inst.target
                _check_loc(c, config, where)
                _check_loc(t, config, where)
                touch(c)
                touch(t)
                same_module = (c.row, c.cell) == (t.row, t.cell)
                if not same_module:
                    if tracker.current_cell(c) != tracker.current_cell(t):
                        raise MachineProgramError(
                            f"{where}: misaligned gate {c} - {t} "
                            f"(cells {tracker.current_cell(c)} vs {tracker.current_cell(t)})"
                        )
                    if config.flat and tracker.current_pos(c) != tracker.current_pos(t):
                        raise MachineProgramError(
                            f"{where}: flat gate on unequal positions {c} - {t}"
                        )
                for mod in {(c.row, c.cell), (t.row, t.cell)}:
                    gates_per_module[mod] = gates_per_module.get(mod, 0) + 1
                total_cx += 1
                has["gate2"] = True
            elif isinstance(inst, Gate1):
                _check_loc(inst.target, config, where)
                touch(inst.target)
                has["other"] = True
            elif isinstance(inst, PrepPlus):
                for loc in inst.targets:
                    _check_loc(loc, config, where)
                    touch(loc)
                has["prep"] = True
            elif isinstance(inst, MeasureX):
                for loc in inst.targets:
                    _check_loc(loc, config, where)
                    touch(loc)
                has["meas"] = True
            else:
                raise MachineProgramError(f"{where}: unknown instruction {inst!r}")

        if (has["shift"] or has["intra"]) and (
            has["gate2"] or has["meas"] or has["prep"] or has["other"]
        ):
            raise MachineProgramError(f"{where}: shifts may not share a layer with gates")
        if config.parallelism == CHAIN_SEQUENTIAL:
            crowded = [m for m, c in gates_per_module.items() if c > 1]
            if crowded:
                raise MachineProgramError(
                    f"{where}: {len(crowded)} modules exceed one gate per layer "
                    f"in chain-sequential mode (first: {crowded[0]})"
                )

        # classify the layer once, two-qubit work first
        if has["gate2"]:
            counts["gate2"] += 1
        elif has["shift"]:
            counts["shift"] += 1
        elif has["intra"]:
            counts["intra"] += 1
        elif has["meas"]:
            counts["meas"] += 1
        elif has["prep"]:
            counts["prep"] += 1
        elif has["other"]:
            counts["other"] += 1

        for row in shift_rows:
            matching = [i for i in layer if isinstance(i, Shift) and i.row == row]
            tracker.shift(row, matching[0].s)
        for module in intra_modules:
            matching = [i for i in layer if isinstance(i, IntraShift) and i.module == module]
            tracker.intra_shift(module, matching[0].s)

    return DepthReport(
        two_qubit_layers=counts["gate2"],
        shift_layers=counts["shift"],
        intra_shift_layers=counts["intra"],
        meas_reset_layers=counts["meas"],
        prep_layers=counts["prep"],
        other_layers=counts["other"],
        total_depth=len(program.layers),
        total_cx=total_cx,
    )


# ---- text format -------------------------------------------------------


def _fmt_loc(loc):
    return f"({loc.row},{loc.cell},{loc.q})"


def _parse_loc(text):
    inner = text.strip().lstrip("(").rstrip(")")
    row, cell, q = (int(part) for part in inner.split(","))
    return Loc(row, cell, q)


def program_to_text(program):
    """Line-oriented export; END_LAYER separates layers."""
    cfg = program.config
    lines = [
        "machine"
        f" moving_rows={cfg.num_moving_rows}"
        f" L={cfg.L}"
        f" module_size={cfg.module_size}"
        f" flat={int(cfg.flat)}"
        f" parallelism={cfg.parallelism}"
    ]
    for layer in program.layers:
        for inst in layer:
            if isinstance(inst, PrepPlus):
                lines.append("PREP_PLUS " + " ".join(_fmt_loc(t) for t in inst.targets))
            elif isinstance(inst, MeasureX):
                lines.append(
                    f"MEASURE_X reset={int(inst.reset)} "
                    + " ".join(_fmt_loc(t) for t in inst.targets)
                )
            elif isinstance(inst, Gate1):
                lines.append(f"{inst.kind} {_fmt_loc(inst.target)}")
            elif isinstance(inst, Gate2):
                lines.append(
                    f"{inst.kind} {_fmt_loc(inst.control)} {_fmt_loc(inst.target)}"
                )
            elif isinstance(inst, Shift):
                lines.append(f"SHIFT {inst.row} {inst.s}")
            elif isinstance(inst, IntraShift):
                lines.append(f"INTRA_SHIFT ({inst.module[0]},{inst.module[1]}) {inst.s}")
            else:
                raise ValueError(f"cannot export {inst!r}")
        lines.append("END_LAYER")
    return "\n".join(lines) + "\n"


def program_from_text(text):
    config = None
    instructions = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head == "machine":
            kv = dict(part.split("=", 1) for part in parts[1:])
            config = ArrayConfig(
                num_moving_rows=int(kv["moving_rows"]),
                L=int(kv["L"]),
                module_size=int(kv["module_size"]),
                flat=bool(int(kv["flat"])),
                parallelism=kv["parallelism"],
            )
        elif head == "END_LAYER":
            instructions.append(EndLayer())
        elif head == "PREP_PLUS":
            instructions.append(PrepPlus(tuple(_parse_loc(p) for p in parts[1:])))
        elif head == "MEASURE_X":
            reset = bool(int(parts[1].split("=", 1)[1]))
            instructions.append(
                MeasureX(tuple(_parse_loc(p) for p in parts[2:]), reset=reset)
            )
        elif head == "SHIFT":
            instructions.append(Shift(int(parts[1]), int(parts[2])))
        elif head == "INTRA_SHIFT":
            inner = parts[1].lstrip("(").rstrip(")").split(",")
            instructions.append(IntraShift((int(inner[0]), int(inner[1])), int(parts[2])))
        elif head in GATE2_KINDS:
            instructions.append(Gate2(head, _parse_loc(parts[1]), _parse_loc(parts[2])))
        else:
            instructions.append(Gate1(head, _parse_loc(parts[1])))
    if config is None:
        raise ValueError("missing machine header line")
    return MachineProgram.from_instructions(config, instructions)
