import itertools

import numpy as np
import pytest

from modqec.circuits import (
    DetectorErrorModel,
    Mechanism,
    NoiseModel,
    build_memory_experiment,
    detector_error_model,
)
from modqec.codes import catalog_code
from modqec.decoder import DecodeResult, DecoderConfig, decode, decode_batch
from modqec.simulate import ShotBatch, sample

# Three-bit repetition chain: checks e0+e1 and e1+e2, logical flip
# tracked on the first bit.
REP_DEM = DetectorErrorModel(
    num_detectors=2,
    num_observables=1,
    mechanisms=(
        Mechanism(0.1, (0,), (0,)),
        Mechanism(0.1, (0, 1), ()),
        Mechanism(0.1, (1,), ()),
    ),
)


def _rep_syndrome(err):
    return np.array([err[0] ^ err[1], err[1] ^ err[2]], dtype=bool)


def _rep_ml_prediction(synd, p=0.1):
    best = None
    for err in itertools.product((0, 1), repeat=3):
        if not np.array_equal(_rep_syndrome(err), synd):
            continue
        like = np.prod([p if e else 1.0 - p for e in err])
        if best is None or like > best[0]:
            best = (like, err[0])
    return best[1]


def test_config_validation_and_label():
    with pytest.raises(ValueError, match="iteration"):
        DecoderConfig(bp_iterations=0)
    with pytest.raises(ValueError, match="variant"):
        DecoderConfig(bp_variant="turbo")
    assert DecoderConfig().describe() == "bp100-min-sum(0.8)-osd0"
    assert DecoderConfig(bp_variant="product-sum", osd_order=3).describe() == (
        "bp100-product-sum-osd3"
    )


def test_zero_syndrome_is_trivial():
    result = decode(REP_DEM, np.zeros(2, dtype=bool))
    assert isinstance(result, DecodeResult)
    assert not result.prediction.any()
    assert result.converged
    assert result.weight == 0.0


@pytest.mark.parametrize(
    "cfg",
    [
        DecoderConfig(),
        DecoderConfig(bp_variant="product-sum"),
        DecoderConfig(osd_order=2),
        DecoderConfig(bp_iterations=1),
    ],
)
def test_repetition_oracle_matches_exact_ml(cfg):
    p = 0.1
    failure_mass = 0.0
    for err in itertools.product((0, 1), repeat=3):
        synd = _rep_syndrome(err)
        result = decode(REP_DEM, synd, cfg)
        assert int(result.prediction[0]) == _rep_ml_prediction(synd)
        if int(result.prediction[0]) != err[0]:
            failure_mass += np.prod([p if e else 1.0 - p for e in err])
    assert failure_mass == pytest.approx(3 * p**2 * (1 - p) + p**3)
    assert failure_mass == pytest.approx(0.028)


def _toy_dem(rng, num_detectors=12, num_observables=3, mechanisms=20):
    seen = set()
    out = []
    while len(out) < mechanisms:
        dets = tuple(
            sorted(
                int(d)
                for d in rng.choice(
                    num_detectors, size=int(rng.integers(1, 4)), replace=False
                )
            )
        )
        if dets in seen:
            continue
        seen.add(dets)
        obs = tuple(
            int(k) for k in range(num_observables) if rng.random() < 0.4
        )
        out.append(Mechanism(float(rng.uniform(0.01, 0.05)), dets, obs))
    return DetectorErrorModel(num_detectors, num_observables, tuple(out))


def test_unique_signature_mechanisms_recovered():
    rng = np.random.default_rng(99)
    dem = _toy_dem(rng)
    for mech in dem.mechanisms:
        events = np.zeros(dem.num_detectors, dtype=bool)
        for d in mech.detectors:
            events[d] = True
        result = decode(dem, events)
        want = np.zeros(dem.num_observables, dtype=bool)
        for k in mech.observables:
            want[k] = True
        assert np.array_equal(result.prediction, want)
        true_weight = float(np.log((1 - mech.probability) / mech.probability))
        assert result.weight <= true_weight + 1e-9


def test_decode_is_pure():
    rng = np.random.default_rng(3)
    dem = _toy_dem(rng)
    events = np.zeros(dem.num_detectors, dtype=bool)
    events[[1, 4, 7]] = True
    a = decode(dem, events)
    b = decode(dem, events)
    assert np.array_equal(a.prediction, b.prediction)
    assert a.converged == b.converged
    assert a.weight == b.weight


def test_infeasible_syndrome_is_rejected():
    dem = DetectorErrorModel(2, 0, (Mechanism(0.1, (0,), ()),))
    events = np.array([False, True])
    with pytest.raises(ValueError, match="span"):
        decode(dem, events)


def test_event_length_must_match():
    with pytest.raises(ValueError, match="length"):
        decode(REP_DEM, np.zeros(3, dtype=bool))


def test_osd_sweep_never_worsens_the_weight():
    rng = np.random.default_rng(17)
    dem = _toy_dem(rng, num_detectors=8, num_observables=2, mechanisms=14)
    weak = DecoderConfig(bp_iterations=1)
    swept = DecoderConfig(bp_iterations=1, osd_order=4)
    for _ in range(30):
        # feasible syndromes come from actual mechanism subsets
        events = np.zeros(dem.num_detectors, dtype=bool)
        for mech in dem.mechanisms:
            if rng.random() < 0.2:
                for d in mech.detectors:
                    events[d] ^= True
        w0 = decode(dem, events, weak).weight
        w4 = decode(dem, events, swept).weight
        assert w4 <= w0 + 1e-9


# ---------------------------------------------------------------------------
# Batch decoding.


def test_zero_noise_batch_has_no_failures():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(0.0)
    )
    dem = detector_error_model(circuit)
    assert dem.num_mechanisms == 0
    batch = sample(circuit, 64, seed=1)
    assert decode_batch(dem, batch) == 0


def test_injected_observable_flip_is_a_failure():
    batch = ShotBatch(
        shots=3,
        num_detectors=2,
        num_observables=1,
        seed=0,
        detector_bits=np.zeros((3, 1), dtype=np.uint8),
        observable_bits=np.array([[0], [1], [0]], dtype=np.uint8),
    )
    assert decode_batch(REP_DEM, batch) == 1


def test_batch_dimension_mismatch():
    batch = ShotBatch(
        shots=1,
        num_detectors=3,
        num_observables=1,
        seed=0,
        detector_bits=np.zeros((1, 1), dtype=np.uint8),
        observable_bits=np.zeros((1, 1), dtype=np.uint8),
    )
    with pytest.raises(ValueError, match="detector count"):
        decode_batch(REP_DEM, batch)


def test_batch_count_is_chunking_invariant():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=2, noise=NoiseModel(3e-3)
    )
    dem = detector_error_model(circuit, check_determinism=False)
    batch = sample(circuit, 384, seed=8)
    cfg = DecoderConfig(bp_iterations=25)
    counts = {
        decode_batch(dem, batch, cfg, chunk_shots=chunk)
        for chunk in (50, 150, 384)
    }
    assert len(counts) == 1


def test_memory_failure_rate_is_in_the_expected_band():
    # fitted-model ballpark at this rate is a few percent over two rounds
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=2, noise=NoiseModel(3e-3)
    )
    dem = detector_error_model(circuit, check_determinism=False)
    batch = sample(circuit, 1500, seed=12)
    failures = decode_batch(dem, batch, DecoderConfig(bp_iterations=30))
    assert 5 <= failures <= 250
