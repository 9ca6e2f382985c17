"""Monte-Carlo memory experiments and their bookkeeping.

One experiment point compiles a layout, lowers it under the chain
machine model, samples detector events, decodes them, and converts the
total failure fraction over T rounds to a per-round rate via
p_L_round = 1 - (1 - P)^(1/T).  Confidence intervals are Wilson 95%
on the total fraction, pushed through the same conversion.

Every point draws its own seed by hashing the experiment description
together with the master seed, so a grid produces identical rows no
matter how its points are ordered or distributed.
"""

import hashlib
import math
import os
import tempfile
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .circuits import NoiseModel, build_memory_experiment, detector_error_model
from .codes import catalog_code
from .decoder import DecoderConfig, decode_batch
from .machine import CHAIN_SEQUENTIAL
from .simulate import sample

_Z95 = 1.959963984540054

DEFAULT_GRID = (1e-3, 2e-3, 3e-3, 5e-3, 7e-3, 1e-2)

CSV_COLUMNS = (
    "code", "layout", "basis", "p", "tau_s", "tau_m", "T", "shots",
    "failures", "p_fail_total", "p_L_round", "ci_low", "ci_high",
    "seed", "decoder", "timestamp",
)
CSV_PREAMBLE = (
    "# p_L_round = 1 - (1 - p_fail_total)**(1/T); "
    "ci_low/ci_high are Wilson 95% bounds pushed through the same conversion"
)


def _default_decoder():
    # throttled iteration count for throughput; the trade-off is recorded
    # in every row's decoder column
    return DecoderConfig(bp_iterations=30)


@dataclass(frozen=True)
class ExperimentSpec:
    code: str
    layout: str = "sparse"
    basis: str = "Z"
    p_values: tuple = DEFAULT_GRID
    tau_s: float = 30.0
    tau_m: float = 30.0
    rounds: int = None
    shots: int = 10_000
    seed: int = 0
    decoder: DecoderConfig = field(default_factory=_default_decoder)

    def __post_init__(self):
        object.__setattr__(self, "p_values", tuple(self.p_values))
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        for p in self.p_values:
            if not 0.0 <= p < 1.0:
                raise ValueError(f"noise rate {p} outside [0, 1)")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.tau_s < 0 or self.tau_m < 0:
            raise ValueError("shift and measurement durations are nonnegative")


@dataclass(frozen=True)
class LogicalErrorEstimate:
    code: str
    layout: str
    basis: str
    p: float
    tau_s: float
    tau_m: float
    rounds: int
    shots: int
    failures: int
    p_fail_total: float
    p_L_round: float
    ci_low: float
    ci_high: float
    seed: int
    decoder: str

    def __post_init__(self):
        if not 0.0 <= self.p_L_round <= self.p_fail_total <= 1.0:
            raise ValueError("per-round rate must not exceed the total")
        if not self.ci_low <= self.p_L_round <= self.ci_high:
            raise ValueError("interval must bracket the estimate")


@dataclass(frozen=True)
class FitResult:
    c0: float
    c1: float
    c2: float
    residual_norm: float
    distance: int

    def __post_init__(self):
        for c in (self.c0, self.c1, self.c2, self.residual_norm):
            if not math.isfinite(c):
                raise ValueError("fit produced a non-finite coefficient")

    def evaluate(self, p):
        """Modeled per-round logical error rate at physical rate p."""
        p = np.asarray(p, dtype=float)
        out = p ** (self.distance / 2) * np.exp(
            self.c0 + self.c1 * p + self.c2 * p * p
        )
        return float(out) if out.ndim == 0 else out


def wilson_interval(failures, shots):
    """95% score interval for a binomial proportion."""
    if not 0 <= failures <= shots:
        raise ValueError("failures must lie in [0, shots]")
    z2 = _Z95 * _Z95
    phat = failures / shots
    denom = 1.0 + z2 / shots
    center = (phat + z2 / (2 * shots)) / denom
    half = (
        _Z95
        * math.sqrt(phat * (1.0 - phat) / shots + z2 / (4.0 * shots * shots))
        / denom
    )
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == shots else min(1.0, center + half)
    return lo, hi


def per_round_rate(p_total, rounds):
    """Invert P = 1 - (1 - r)^T for the per-round rate r."""
    if not 0.0 <= p_total <= 1.0:
        raise ValueError("total failure probability outside [0, 1]")
    return 1.0 - (1.0 - p_total) ** (1.0 / rounds)


def _resolve_rounds(spec, code):
    if spec.rounds is not None:
        return spec.rounds
    return code.known_distance or 1


def _point_seed(spec, p, rounds):
    desc = "|".join(
        (
            spec.code,
            spec.layout,
            spec.basis,
            f"{p:.12e}",
            f"{spec.tau_s:.6g}",
            f"{spec.tau_m:.6g}",
            str(rounds),
            str(spec.shots),
            spec.decoder.describe(),
            str(spec.seed),
        )
    )
    digest = hashlib.sha256(desc.encode()).digest()
    return int.from_bytes(digest[:8], "little")


def run_memory_experiment(spec):
    """Sample and decode each grid point; one estimate per p, in order.

    The lowering always serializes gates that share a module, which is
    the long-chain machine the noise durations refer to.  Sampling
    re-checks the circuit's noiseless bookkeeping on every point.
    """
    code = catalog_code(spec.code)
    rounds = _resolve_rounds(spec, code)
    out = []
    for p in spec.p_values:
        noise = NoiseModel(p, tau_m=spec.tau_m, tau_s=spec.tau_s)
        circuit = build_memory_experiment(
            code,
            spec.layout,
            spec.basis,
            rounds=rounds,
            noise=noise,
            parallelism=CHAIN_SEQUENTIAL,
        )
        dem = detector_error_model(circuit, check_determinism=False)
        seed = _point_seed(spec, p, rounds)
        batch = sample(circuit, spec.shots, seed)
        failures = decode_batch(dem, batch, spec.decoder)
        p_fail = failures / spec.shots
        lo, hi = wilson_interval(failures, spec.shots)
        out.append(
            LogicalErrorEstimate(
                code=spec.code,
                layout=spec.layout,
                basis=spec.basis,
                p=p,
                tau_s=spec.tau_s,
                tau_m=spec.tau_m,
                rounds=rounds,
                shots=spec.shots,
                failures=failures,
                p_fail_total=p_fail,
                p_L_round=per_round_rate(p_fail, rounds),
                ci_low=per_round_rate(lo, rounds),
                ci_high=per_round_rate(hi, rounds),
                seed=seed,
                decoder=spec.decoder.describe(),
            )
        )
    return out


@dataclass(frozen=True)
class ModularityPair:
    """One matched comparison: keep the shift noise, or double p instead."""

    p: float
    shifted: LogicalErrorEstimate
    unshifted: LogicalErrorEstimate
    verdict: str

    VERDICTS = ("confirmed", "unresolved", "inconclusive")


@dataclass(frozen=True)
class ModularityReport:
    code: str
    layout: str
    basis: str
    rounds: int
    shots: int
    seed: int
    pairs: tuple

    @property
    def all_confirmed(self):
        return all(pair.verdict == "confirmed" for pair in self.pairs)


def modularity_comparison(spec):
    """Paired runs at (p, tau_s) and (2p, tau_s=0) for each grid p.

    The claim under test is that shift noise costs less than doubling
    the physical rate.  Each pair's verdict is confirmed only when the
    95% intervals separate the right way; two zero-failure arms carry
    no evidence and report as inconclusive.
    """
    for p in spec.p_values:
        if not 0.0 <= 2 * p < 1.0:
            raise ValueError(f"doubled rate {2 * p} outside [0, 1)")
    pairs = []
    for p in spec.p_values:
        shifted = run_memory_experiment(replace(spec, p_values=(p,)))[0]
        unshifted = run_memory_experiment(
            replace(spec, p_values=(2 * p,), tau_s=0.0)
        )[0]
        if shifted.failures == 0 and unshifted.failures == 0:
            verdict = "inconclusive"
        elif shifted.ci_high < unshifted.ci_low:
            verdict = "confirmed"
        else:
            verdict = "unresolved"
        pairs.append(ModularityPair(p, shifted, unshifted, verdict))
    code = catalog_code(spec.code)
    return ModularityReport(
        code=spec.code,
        layout=spec.layout,
        basis=spec.basis,
        rounds=_resolve_rounds(spec, code),
        shots=spec.shots,
        seed=spec.seed,
        pairs=tuple(pairs),
    )


def fit_curve(points, distance):
    """Least squares for ln(p_L) - (d/2) ln(p) against [1, p, p^2]."""
    usable = [(p, pl) for p, pl in points if pl > 0.0]
    if len(usable) < 3:
        raise ValueError("need at least 3 points with p_L > 0")
    p = np.array([q for q, _ in usable], dtype=float)
    if np.unique(p).size < 3:
        raise ValueError("need at least 3 distinct p values")
    pl = np.array([v for _, v in usable], dtype=float)
    y = np.log(pl) - (distance / 2) * np.log(p)
    design = np.column_stack([np.ones_like(p), p, p * p])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.linalg.norm(design @ coef - y))
    return FitResult(
        c0=float(coef[0]),
        c1=float(coef[1]),
        c2=float(coef[2]),
        residual_norm=residual,
        distance=distance,
    )


def _csv_value(column, estimate, timestamp):
    if column == "T":
        return str(estimate.rounds)
    if column == "timestamp":
        return timestamp
    value = getattr(estimate, column)
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def export_results(estimates, path):
    """Append rows for the estimates, atomically; create with header."""
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            content = fh.read()
        header = next(
            (line for line in content.splitlines() if not line.startswith("#")),
            None,
        )
        if header != ",".join(CSV_COLUMNS):
            raise ValueError(f"{path} does not carry the expected schema")
        if content and not content.endswith("\n"):
            content += "\n"
    else:
        content = CSV_PREAMBLE + "\n" + ",".join(CSV_COLUMNS) + "\n"
    timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    for estimate in estimates:
        row = ",".join(
            _csv_value(column, estimate, timestamp) for column in CSV_COLUMNS
        )
        content += row + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
