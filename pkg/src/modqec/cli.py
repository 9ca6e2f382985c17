"""Command-line front end tying the toolchain together.

Eight subcommands: `catalog` lists the shipped codes, `compile` emits a
machine program as text, `verify` checks noiseless determinism and the
measured stabilizer group, `depth` prints the fixed-budget layer counts,
`experiment` runs a Monte-Carlo grid, `modularity` runs the paired
shift-noise comparison, `fit` recovers curve constants from a results
CSV, and `oracle` replays the small-instance equivalence suites.

Settings come from defaults, then a JSON config file (--config), then
flags; later sources win.  The config file mirrors the experiment spec
one field to one key, so a manifest checked into a repo reproduces a run
exactly.
"""

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .circuits import (
    DetectorErrorModel,
    Mechanism,
    NoiseModel,
    build_memory_experiment,
    lower_to_circuit,
)
from .codes import PauliOperator, catalog_code, load_catalog
from .decoder import DecoderConfig, decode
from .harness import (
    DEFAULT_GRID,
    ExperimentSpec,
    fit_curve,
    modularity_comparison,
    run_memory_experiment,
    export_results,
)
from .layouts import (
    LAYOUT_NAMES,
    build_layout,
    cyclic_layout,
    depth_table,
    flat_cyclic_layout,
    sparse_cyclic_layout,
)
from .machine import program_to_text
from .simulate import (
    circuit_outcome_distribution,
    dense_sequential_oracle,
    verify_memory_experiment,
)

_ORACLE_TRIALS = 25
_MODULARITY_P = (4e-3,)


@dataclass(frozen=True)
class RunConfig:
    """Merged settings for one invocation, validated before dispatch."""

    command: str
    code: str = None
    layout: str = "sparse"
    basis: str = "Z"
    p_values: tuple = None
    tau_s: float = 30.0
    tau_m: float = 30.0
    rounds: int = None
    shots: int = None
    seed: int = 0
    out: str = None
    csv_path: str = None
    decoder: DecoderConfig = None
    verbose: bool = False

    def __post_init__(self):
        if self.basis not in ("X", "Z"):
            raise ValueError(f"bad basis {self.basis!r}; choose X or Z")
        if self.layout not in LAYOUT_NAMES:
            raise ValueError(
                f"unknown layout {self.layout!r}; choose from {LAYOUT_NAMES}"
            )
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.shots is not None and self.shots < 1:
            raise ValueError("shots must be at least 1")
        if self.p_values is not None:
            for p in self.p_values:
                if not 0.0 <= p < 1.0:
                    raise ValueError(f"physical rate {p} outside [0, 1)")
        if self.tau_s < 0 or self.tau_m < 0:
            raise ValueError("durations must be nonnegative")


_CONFIG_KEYS = {
    "code", "layout", "basis", "p_values", "tau_s", "tau_m",
    "rounds", "shots", "seed", "decoder",
}


def _load_config(path):
    with open(path, encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys {sorted(unknown)}")
    if "p_values" in data:
        data["p_values"] = tuple(float(p) for p in data["p_values"])
    if "decoder" in data:
        data["decoder"] = DecoderConfig(**data["decoder"])
    return data


def _merge_config(args):
    settings = {}
    if args.config:
        settings.update(_load_config(args.config))
    for name in ("code", "layout", "basis", "tau_s", "tau_m", "rounds",
                 "shots", "seed", "out", "csv_path", "verbose"):
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    if getattr(args, "p_values", None):
        settings["p_values"] = tuple(args.p_values)
    if settings.get("p_values") is not None:
        settings["p_values"] = tuple(settings["p_values"])
    defaults = {f.name: f.default for f in fields(RunConfig)}
    merged = {
        name: settings.get(name, defaults[name])
        for name in defaults
        if name != "command"
    }
    return RunConfig(command=args.command, **merged)


def _require_code(cfg):
    if cfg.code is None:
        raise ValueError("--code is required for this command")
    return catalog_code(cfg.code)


# ---------------------------------------------------------------------------
# Subcommands.


def _cmd_catalog(cfg):
    for name, code in sorted(load_catalog().items()):
        print(
            f"{name:<8} [[{code.n},{code.k},{code.known_distance}]]"
            f"  omega {code.omega}  ring {code.params.l}x{code.params.m}"
        )
    return 0


def _cmd_compile(cfg):
    code = _require_code(cfg)
    rounds = cfg.rounds or 1
    if cfg.layout == "sparse":
        result = sparse_cyclic_layout(code, cfg.basis, rounds=rounds)
    elif cfg.layout == "flat":
        result = flat_cyclic_layout(code, cfg.basis, rounds=rounds)
    else:
        result = build_layout(code, cfg.layout, rounds=rounds)
    text = program_to_text(result.program)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as handle:
            handle.write(text)
        print(f"wrote {cfg.out}")
    else:
        sys.stdout.write(text)
    return 0


def _schedule_depth(code, layout, basis):
    # headline per-round figure: one basis for the alternating layouts,
    # the full interleaved round otherwise
    if layout == "sparse":
        result = sparse_cyclic_layout(code, basis, rounds=1)
    elif layout == "flat":
        result = flat_cyclic_layout(code, basis, rounds=1)
    else:
        result = build_layout(code, layout, rounds=1)
    return result.depth_report().total_depth


def _cmd_verify(cfg):
    code = _require_code(cfg)
    circuit = build_memory_experiment(
        code, cfg.layout, cfg.basis, rounds=cfg.rounds
    )
    report = verify_memory_experiment(code, circuit)
    print(
        f"{cfg.code} {cfg.layout} {cfg.basis}: "
        f"{report.num_detectors} detectors deterministic, "
        f"{report.num_observables} observables, "
        f"measured group rank {report.measured_group_rank}"
    )
    print(f"depth {_schedule_depth(code, cfg.layout, cfg.basis)}")
    return 0


def _cmd_depth(cfg):
    code = _require_code(cfg)
    rounds = cfg.rounds or 10
    table = depth_table(code, rounds)
    print(f"{cfg.code}, {rounds} rounds")
    header = f"{'layout':<20} {'gates':>6} {'shifts':>7} {'meas':>5} " \
             f"{'per-round':>10} {'total':>6}"
    print(header)
    for name, row in table.items():
        print(
            f"{name:<20} {row['gate_layers']:>6} {row['shift_layers']:>7} "
            f"{row['measure_layers']:>5} {row['amortized_per_round']:>10} "
            f"{row['total_depth']:>6}"
        )
    return 0


def _experiment_spec(cfg):
    _require_code(cfg)
    kwargs = {
        "code": cfg.code,
        "layout": cfg.layout,
        "basis": cfg.basis,
        "tau_s": cfg.tau_s,
        "tau_m": cfg.tau_m,
        "rounds": cfg.rounds,
        "seed": cfg.seed,
    }
    if cfg.p_values is not None:
        kwargs["p_values"] = cfg.p_values
    if cfg.shots is not None:
        kwargs["shots"] = cfg.shots
    if cfg.decoder is not None:
        kwargs["decoder"] = cfg.decoder
    return ExperimentSpec(**kwargs)


def _print_estimate(est):
    print(
        f"{est.code} {est.layout} {est.basis} p={est.p:g} T={est.rounds} "
        f"shots={est.shots} failures={est.failures} "
        f"p_L_round={est.p_L_round:.4e} "
        f"ci=[{est.ci_low:.4e}, {est.ci_high:.4e}]"
    )


def _cmd_experiment(cfg):
    spec = _experiment_spec(cfg)
    if cfg.verbose:
        print(
            f"grid {spec.p_values} T={spec.rounds or 'auto'} "
            f"shots={spec.shots} decoder {spec.decoder.describe()}"
        )
    estimates = run_memory_experiment(spec)
    for est in estimates:
        _print_estimate(est)
    if cfg.out:
        export_results(estimates, cfg.out)
        print(f"appended {len(estimates)} rows to {cfg.out}")
    return 0


def _cmd_modularity(cfg):
    if cfg.p_values is None:
        cfg = replace(cfg, p_values=_MODULARITY_P)
    spec = _experiment_spec(cfg)
    report = modularity_comparison(spec)
    for pair in report.pairs:
        s, u = pair.shifted, pair.unshifted
        print(
            f"p={pair.p:g}: shift noise kept "
            f"p_L={s.p_L_round:.4e} [{s.ci_low:.4e}, {s.ci_high:.4e}]  "
            f"vs rate doubled p_L={u.p_L_round:.4e} "
            f"[{u.ci_low:.4e}, {u.ci_high:.4e}]  -> {pair.verdict}"
        )
    if cfg.out:
        rows = [pair.shifted for pair in report.pairs]
        rows += [pair.unshifted for pair in report.pairs]
        export_results(rows, cfg.out)
        print(f"appended {len(rows)} rows to {cfg.out}")
    if not report.all_confirmed:
        print("modularity advantage not confirmed", file=sys.stderr)
        return 1
    return 0


def _read_points(path):
    groups = {}
    with open(path, encoding="utf-8") as handle:
        rows = csv.DictReader(
            line for line in handle if not line.startswith("#")
        )
        for row in rows:
            key = (row["code"], row["layout"], row["basis"])
            groups.setdefault(key, []).append(
                (float(row["p"]), float(row["p_L_round"]))
            )
    return groups


def _cmd_fit(cfg):
    if cfg.csv_path is None:
        raise ValueError("fit needs a results CSV path")
    groups = _read_points(cfg.csv_path)
    if cfg.code is not None:
        groups = {
            key: pts for key, pts in groups.items()
            if key == (cfg.code, cfg.layout, cfg.basis)
        }
        if not groups:
            raise ValueError(
                f"no rows match {cfg.code} {cfg.layout} {cfg.basis}"
            )
    fitted = 0
    for (code_name, layout, basis), points in sorted(groups.items()):
        distance = catalog_code(code_name).known_distance
        try:
            fit = fit_curve(points, distance)
        except ValueError as err:
            print(f"{code_name} {layout} {basis}: skipped ({err})")
            continue
        fitted += 1
        print(
            f"{code_name} {layout} {basis}: d={distance} "
            f"c0={fit.c0:.4f} c1={fit.c1:.2f} c2={fit.c2:.1f} "
            f"residual={fit.residual_norm:.3e}"
        )
    if fitted == 0:
        print("no group had enough usable points", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# Equivalence suites for the oracle subcommand.


def _random_pauli(rng, num_qubits):
    while True:
        support = {}
        for q in range(num_qubits):
            letter = ("I", "X", "Y", "Z")[int(rng.integers(0, 4))]
            if letter != "I":
                support[q] = letter
        if support:
            return PauliOperator.from_dict(num_qubits, support)


def sequential_equivalence_suite(trials, seed):
    """Worst TV distance between scheduled circuits and the dense oracle.

    Random operator lists, anticommuting pairs included, go through the
    general layout compiler and the noiseless simulator; the dense
    simulation measures the same list one operator at a time.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        num_qubits = int(rng.integers(1, 5))
        num_ops = int(rng.integers(1, 5))
        paulis = [_random_pauli(rng, num_qubits) for _ in range(num_ops)]
        module_size = int(rng.integers(1, 4))
        cells = math.ceil(num_qubits / module_size) + 1
        cells += int(rng.integers(0, 2))
        result = cyclic_layout(
            paulis, module_size=module_size, num_cells=cells,
            tags=tuple(range(num_ops)),
        )
        circuit = lower_to_circuit(
            result.program, NoiseModel(0.0), result.loc_to_qubit
        )
        order = [0] * num_ops
        for k, tag in enumerate(result.measurement_tags):
            if tag is not None:
                order[tag] = k
        got = circuit_outcome_distribution(circuit, measurements=order)
        want = dense_sequential_oracle(paulis)
        tv = 0.0
        for key in set(got) | set(want):
            tv += abs(got.get(key, 0.0) - want.get(key, (0.0,))[0])
        worst = max(worst, tv / 2.0)
    return worst


def repetition_ml_failure(flip_rate=0.1):
    """Decoder failure mass over all 8 patterns of the 3-bit line model."""
    dem = DetectorErrorModel(
        num_detectors=2,
        num_observables=1,
        mechanisms=(
            Mechanism(flip_rate, (0,), (0,)),
            Mechanism(flip_rate, (0, 1), ()),
            Mechanism(flip_rate, (1,), ()),
        ),
    )
    failure = 0.0
    for pattern in range(8):
        prob = 1.0
        events = [False, False]
        actual = 0
        for bit in range(3):
            if pattern >> bit & 1:
                prob *= flip_rate
                for det in dem.mechanisms[bit].detectors:
                    events[det] = not events[det]
                if dem.mechanisms[bit].observables:
                    actual ^= 1
            else:
                prob *= 1.0 - flip_rate
        predicted = decode(dem, events).prediction[0]
        if int(predicted) != actual:
            failure += prob
    return failure


def single_mechanism_recovery(num_mechanisms=20, seed=5):
    """Count exact recoveries of lone faults with unique signatures."""
    rng = np.random.default_rng(seed)
    num_detectors = 10
    signatures = set()
    while len(signatures) < num_mechanisms:
        size = int(rng.integers(1, 4))
        sig = tuple(sorted(rng.choice(num_detectors, size, replace=False)))
        signatures.add(sig)
    mechanisms = tuple(
        Mechanism(
            0.01 + 0.001 * i,
            sig,
            (int(rng.integers(0, 3)),) if rng.integers(0, 2) else (),
        )
        for i, sig in enumerate(sorted(signatures))
    )
    dem = DetectorErrorModel(num_detectors, 3, mechanisms)
    hits = 0
    for mech in mechanisms:
        events = np.zeros(num_detectors, dtype=bool)
        events[list(mech.detectors)] = True
        predicted = decode(dem, events).prediction
        expected = tuple(
            1 if obs in mech.observables else 0 for obs in range(3)
        )
        if tuple(int(b) for b in predicted) == expected:
            hits += 1
    return hits, num_mechanisms


def _cmd_oracle(cfg):
    trials = cfg.shots or _ORACLE_TRIALS
    failed = False
    worst = sequential_equivalence_suite(trials, cfg.seed)
    ok = worst < 1e-9
    failed |= not ok
    print(
        f"sequential equivalence: {trials} instances, worst TV {worst:.3e}"
        f" -> {'ok' if ok else 'FAIL'}"
    )
    rate = repetition_ml_failure()
    ok = abs(rate - 0.028) < 1e-12
    failed |= not ok
    print(
        f"repetition-line decoding: failure mass {rate:.6f}"
        f" -> {'ok' if ok else 'FAIL'}"
    )
    hits, total = single_mechanism_recovery()
    ok = hits == total
    failed |= not ok
    print(
        f"single-fault recovery: {hits}/{total} signatures"
        f" -> {'ok' if ok else 'FAIL'}"
    )
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Argument parsing and dispatch.


_COMMANDS = {
    "catalog": _cmd_catalog,
    "compile": _cmd_compile,
    "verify": _cmd_verify,
    "depth": _cmd_depth,
    "experiment": _cmd_experiment,
    "modularity": _cmd_modularity,
    "fit": _cmd_fit,
    "oracle": _cmd_oracle,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="modqec",
        description=__doc__.splitlines()[0],
        epilog="precedence: defaults, then --config values, then flags",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_csv=False):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--code", help="catalog code name, e.g. bb72")
        cmd.add_argument("--layout", help=f"one of {', '.join(LAYOUT_NAMES)}")
        cmd.add_argument("--basis", help="memory basis, X or Z")
        cmd.add_argument(
            "--p", action="append", type=float, dest="p_values",
            metavar="RATE", help="two-qubit error rate; repeatable",
        )
        cmd.add_argument("--tau-s", type=float, help="shift duration")
        cmd.add_argument("--tau-m", type=float, help="measurement duration")
        cmd.add_argument("--rounds", type=int, help="syndrome rounds T")
        cmd.add_argument("--shots", type=int, help="samples per point")
        cmd.add_argument("--seed", type=int, help="master seed")
        cmd.add_argument("--out", help="output file (program text or CSV)")
        cmd.add_argument("--config", help="JSON config file")
        cmd.add_argument(
            "--verbose", action="store_true", default=None,
            help="print extra progress detail",
        )
        if needs_csv:
            cmd.add_argument(
                "csv_path", metavar="CSV", help="results file to fit",
            )
        return cmd

    add("catalog", "list shipped codes with parameters")
    add("compile", "emit a machine program as text")
    add("verify", "noiseless determinism and stabilizer-group check")
    add("depth", "layer counts for the fixed-budget layouts")
    add("experiment", "Monte-Carlo grid, optionally appended to CSV")
    add("modularity", "paired shift-noise versus doubled-rate runs")
    add("fit", "recover curve constants from a results CSV", needs_csv=True)
    add("oracle", "small-instance equivalence and decoder suites")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return _COMMANDS[args.command](cfg)
    except KeyError as err:
        print(f"error: {err.args[0]}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
