import math

import numpy as np
import pytest

from modqec.circuits import (
    CircuitOp,
    NoiseModel,
    NoisyCircuit,
    build_memory_experiment,
    detector_error_model,
    fault_channels,
)
from modqec.codes import PauliOperator, catalog_code, stabilizer_generators
from modqec.simulate import (
    ShotBatch,
    TableauState,
    circuit_outcome_distribution,
    dense_circuit_oracle,
    dense_sequential_oracle,
    sample,
    verify_memory_experiment,
    verify_noiseless,
)

# ---------------------------------------------------------------------------
# Tableau basics.


def test_z_measurement_on_fresh_qubit_is_plus_one():
    tab = TableauState(1)
    assert tab.measure_z(0) == (0, 0)
    assert tab.measure_z(0) == (0, 0)


def test_x_measurement_on_fresh_qubit_is_uniform():
    tab = TableauState(1)
    const, mask = tab.measure_x(0)
    assert const == 0 and mask != 0
    # collapsed: repeating gives the same symbolic form
    assert tab.measure_x(0) == (const, mask)


def test_anticommuting_sequence_first_deterministic_then_uniform():
    tab = TableauState(1)
    assert tab.measure_z(0) == (0, 0)
    const, mask = tab.measure_x(0)
    assert mask != 0
    # and the X collapse makes a following Z fully random again
    _, mask2 = tab.measure_z(0)
    assert mask2 != 0 and mask2 != mask


def test_bell_pair_outcomes_share_one_symbol():
    tab = TableauState(2)
    tab.prep_x(0)
    tab.cx(0, 1)
    a = tab.measure_z(0)
    b = tab.measure_z(1)
    assert a == b and a[1] != 0


def test_conditional_reset_pins_the_sign():
    tab = TableauState(1)
    tab.prep_x(0)
    assert tab.measure_x(0) == (0, 0)
    tab.prep_z(0)
    assert tab.measure_z(0) == (0, 0)


# ---------------------------------------------------------------------------
# Exact distributions versus the dense branch oracle.


def _dense_distribution(circuit):
    agg = {}
    for prob, outcome, _ in dense_circuit_oracle(circuit):
        agg[outcome] = agg.get(outcome, 0.0) + prob
    return agg


def _assert_same_distribution(circuit):
    got = circuit_outcome_distribution(circuit)
    want = _dense_distribution(circuit)
    tv = 0.0
    for key in set(got) | set(want):
        tv += abs(got.get(key, 0.0) - want.get(key, 0.0))
    assert tv / 2.0 < 1e-9, (got, want)


def test_bell_distribution_matches_dense():
    circuit = NoisyCircuit(
        2,
        (
            CircuitOp("PX", (0,)),
            CircuitOp("PZ", (1,)),
            CircuitOp("CX", (0, 1)),
            CircuitOp("MZ", (0, 1), 0.0),
        ),
    )
    assert circuit_outcome_distribution(circuit) == {
        (0, 0): 0.5,
        (1, 1): 0.5,
    }
    _assert_same_distribution(circuit)


def test_cy_phase_shows_up_in_x_statistics():
    circuit = NoisyCircuit(
        2,
        (
            CircuitOp("PX", (0, 1)),
            CircuitOp("CY", (0, 1)),
            CircuitOp("MX", (0,), 0.0),
            CircuitOp("MZ", (1,), 0.0),
        ),
    )
    _assert_same_distribution(circuit)


def _random_noiseless_circuit(rng, num_qubits, segments):
    ops = []
    cut = int(rng.integers(0, num_qubits + 1))
    qubits = list(rng.permutation(num_qubits))
    if cut:
        ops.append(CircuitOp("PZ", tuple(sorted(qubits[:cut]))))
    if cut < num_qubits:
        ops.append(CircuitOp("PX", tuple(sorted(qubits[cut:]))))
    meas = 0
    for _ in range(segments):
        for _ in range(int(rng.integers(1, 4))):
            kind = ("CX", "CZ", "CY")[int(rng.integers(0, 3))]
            a, b = rng.choice(num_qubits, size=2, replace=False)
            ops.append(CircuitOp(kind, (int(a), int(b))))
        if rng.random() < 0.8:
            kind = ("MX", "MZ", "MRX")[int(rng.integers(0, 3))]
            q = int(rng.integers(0, num_qubits))
            ops.append(CircuitOp(kind, (q,), 0.0))
            meas += 1
            # a prep straight after a readout keeps the state factorized
            if kind != "MRX" and rng.random() < 0.5:
                ops.append(CircuitOp("PX" if rng.random() < 0.5 else "PZ", (q,)))
    if meas == 0:
        ops.append(CircuitOp("MZ", (0,), 0.0))
    return NoisyCircuit(num_qubits, tuple(ops))


def test_random_circuits_match_dense_oracle():
    rng = np.random.default_rng(20260822)
    for _ in range(40):
        circuit = _random_noiseless_circuit(rng, 4, 5)
        _assert_same_distribution(circuit)


def test_distribution_marginal_selects_measurements():
    circuit = NoisyCircuit(
        2,
        (
            CircuitOp("PX", (0,)),
            CircuitOp("PZ", (1,)),
            CircuitOp("CX", (0, 1)),
            CircuitOp("MZ", (0,), 0.0),
            CircuitOp("MZ", (1,), 0.0),
        ),
    )
    assert circuit_outcome_distribution(circuit, measurements=[1]) == {
        (0,): 0.5,
        (1,): 0.5,
    }


def test_distribution_support_guard():
    n = 21
    circuit = NoisyCircuit(
        n,
        (
            CircuitOp("PZ", tuple(range(n))),
            CircuitOp("MX", tuple(range(n)), 0.0),
        ),
    )
    with pytest.raises(ValueError, match="support"):
        circuit_outcome_distribution(circuit)


# ---------------------------------------------------------------------------
# Sequential operator oracle.


def _pauli(num_qubits, spec):
    return PauliOperator.from_dict(num_qubits, spec)


def test_sequential_oracle_deterministic_z():
    out = dense_sequential_oracle([_pauli(2, {0: "Z"})])
    assert set(out) == {(0,)}
    assert out[(0,)][0] == pytest.approx(1.0)


def test_sequential_oracle_uniform_x_then_z():
    out = dense_sequential_oracle([_pauli(1, {0: "X"}), _pauli(1, {0: "Z"})])
    assert set(out) == {(0, 0), (0, 1), (1, 0), (1, 1)}
    for prob, _ in out.values():
        assert prob == pytest.approx(0.25)


def test_sequential_oracle_repeated_operator_sticks():
    op = _pauli(3, {0: "X", 2: "Y"})
    out = dense_sequential_oracle([op, op])
    assert set(out) == {(0, 0), (1, 1)}


def _measure_through_ancilla(paulis):
    """Hand-built ancilla circuit measuring the operators in order."""
    n = paulis[0].num_qubits
    anc = n
    ops = [CircuitOp("PZ", tuple(range(n))), CircuitOp("PX", (anc,))]
    for op in paulis:
        xs = op.x_bits()
        zs = op.z_bits()
        for q in range(n):
            if xs[q] and zs[q]:
                ops.append(CircuitOp("CY", (anc, q)))
            elif xs[q]:
                ops.append(CircuitOp("CX", (anc, q)))
            elif zs[q]:
                ops.append(CircuitOp("CZ", (anc, q)))
        ops.append(CircuitOp("MRX", (anc,), 0.0))
    return NoisyCircuit(n + 1, tuple(ops))


def _random_pauli(rng, num_qubits):
    while True:
        terms = {}
        for q in range(num_qubits):
            letter = ("I", "X", "Y", "Z")[int(rng.integers(0, 4))]
            if letter != "I":
                terms[q] = letter
        if terms:
            return PauliOperator.from_dict(num_qubits, terms)


def test_ancilla_circuit_reproduces_sequential_oracle():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n = int(rng.integers(1, 5))
        paulis = [_random_pauli(rng, n) for _ in range(int(rng.integers(1, 5)))]
        circuit = _measure_through_ancilla(paulis)
        got = circuit_outcome_distribution(circuit)
        want = dense_sequential_oracle(paulis)
        tv = 0.0
        for key in set(got) | set(want):
            tv += abs(got.get(key, 0.0) - want.get(key, (0.0,))[0])
        assert tv / 2.0 < 1e-9


# ---------------------------------------------------------------------------
# Noiseless verification.


def test_empty_circuit_verifies():
    report = verify_noiseless(NoisyCircuit(1, ()))
    assert report.num_measurements == 0
    assert report.measured_group_rank is None


def test_memory_experiment_verifies_with_group_check():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=2, noise=NoiseModel(1e-3)
    )
    report = verify_memory_experiment(code, circuit)
    assert report.num_detectors == 144
    assert report.num_observables == 12
    assert report.measured_group_rank == code.n - code.k


def test_memory_experiment_other_layouts_verify():
    code = catalog_code("bb72")
    for layout, basis in (("cyclic", "X"), ("flat", "Z")):
        circuit = build_memory_experiment(
            code, layout, basis, rounds=1, noise=NoiseModel(1e-3)
        )
        verify_memory_experiment(code, circuit)


def test_tampered_circuit_fails_determinism():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(1e-3)
    )
    last_meas = max(
        i for i, op in enumerate(circuit.ops) if op.kind == "MZ"
    )
    ops = (
        circuit.ops[:last_meas]
        + (CircuitOp("CX", (0, 1)),)
        + circuit.ops[last_meas:]
    )
    bad = NoisyCircuit(circuit.num_qubits, ops)
    with pytest.raises(ValueError, match="deterministic"):
        verify_noiseless(bad)


def test_wrong_stabilizer_group_is_rejected():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(1e-3)
    )
    cut = next(i for i, op in enumerate(circuit.ops) if op.kind == "TICK") + 1
    gens = stabilizer_generators(code).generators
    with pytest.raises(ValueError, match="differs"):
        verify_noiseless(
            circuit,
            stabilizers=gens[: len(gens) // 2],
            data_qubits=range(code.n),
            check_measurements=range(circuit.num_measurements - code.n),
            skip_prefix_ops=cut,
        )


def test_check_outside_data_block_is_rejected():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(1e-3)
    )
    cut = next(i for i, op in enumerate(circuit.ops) if op.kind == "TICK") + 1
    gens = stabilizer_generators(code).generators
    with pytest.raises(ValueError, match="non-data support"):
        verify_noiseless(
            circuit,
            stabilizers=gens,
            data_qubits=range(code.n - 1),
            check_measurements=range(circuit.num_measurements - code.n),
            skip_prefix_ops=cut,
        )


def test_model_builder_runs_the_determinism_gate():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(1e-3)
    )
    checked = detector_error_model(circuit)
    unchecked = detector_error_model(circuit, check_determinism=False)
    assert checked.mechanisms == unchecked.mechanisms
    bad = NoisyCircuit(
        1,
        (
            CircuitOp("PZ", (0,)),
            CircuitOp("MX", (0,), 0.0),
            CircuitOp("DETECTOR", (-1,)),
        ),
    )
    with pytest.raises(ValueError, match="deterministic"):
        detector_error_model(bad)


# ---------------------------------------------------------------------------
# Sampling.


def _one_channel_circuit(rate):
    return NoisyCircuit(
        1,
        (
            CircuitOp("PX", (0,)),
            CircuitOp("D1", (0,), rate),
            CircuitOp("MX", (0,), 0.0),
            CircuitOp("DETECTOR", (-1,)),
        ),
    )


def test_sampling_zero_noise_is_silent():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(0.0)
    )
    batch = sample(circuit, 256, seed=3)
    assert not batch.detector_bits.any()
    assert not batch.observable_bits.any()


def test_single_channel_detector_rate():
    # Z and Y branches of the depolarizing insertion flip an X readout
    batch = sample(_one_channel_circuit(0.1), 100_000, seed=11)
    rate = batch.detector_array().mean()
    expect = 2.0 * 0.1 / 3.0
    sigma = math.sqrt(expect * (1.0 - expect) / 100_000)
    assert abs(rate - expect) < 4.0 * sigma


def test_same_seed_reproduces_different_seed_varies():
    circuit = _one_channel_circuit(0.1)
    a = sample(circuit, 10_000, seed=5)
    b = sample(circuit, 10_000, seed=5)
    c = sample(circuit, 10_000, seed=6)
    assert np.array_equal(a.detector_bits, b.detector_bits)
    assert not np.array_equal(a.detector_bits, c.detector_bits)


def test_shot_windows_are_prefix_stable():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=1, noise=NoiseModel(2e-3)
    )
    full = sample(circuit, 3000, seed=17)
    head = sample(circuit, 700, seed=17)
    windowed = sample(circuit, 1100, seed=17, start_shot=900)
    assert np.array_equal(full.detector_bits[:700], head.detector_bits)
    assert np.array_equal(
        full.detector_bits[900:2000], windowed.detector_bits
    )
    assert np.array_equal(
        full.observable_bits[900:2000], windowed.observable_bits
    )


def test_sampling_requires_a_sound_circuit():
    bad = NoisyCircuit(
        1,
        (
            CircuitOp("PZ", (0,)),
            CircuitOp("MX", (0,), 0.0),
            CircuitOp("DETECTOR", (-1,)),
        ),
    )
    with pytest.raises(ValueError, match="deterministic"):
        sample(bad, 10, seed=0)


def _exact_detector_marginals(circuit):
    nd = circuit.num_detectors
    stay = np.ones(nd)
    for chan in fault_channels(circuit):
        for d in range(nd):
            hits = sum(1 for sig in chan.signatures if (sig >> d) & 1)
            q = chan.rate * hits / len(chan.signatures)
            stay[d] *= 1.0 - 2.0 * q
    return (1.0 - stay) / 2.0


def test_sampled_marginals_match_channel_arithmetic():
    # a qubit-pair check cycle: the same Y-type parity twice, then a
    # Z-type parity, then data readout, every channel kind in play
    ops = (
        CircuitOp("PZ", (1, 2)),
        CircuitOp("PX", (0,)),
        CircuitOp("D1", (0, 1, 2), 0.03),
        CircuitOp("CX", (1, 2)),
        CircuitOp("CY", (0, 1)),
        CircuitOp("CY", (0, 2)),
        CircuitOp("D2", (0, 1), 0.05),
        CircuitOp("MRX", (0,), 0.01),
        CircuitOp("CY", (0, 1)),
        CircuitOp("CY", (0, 2)),
        CircuitOp("D2", (0, 2), 0.02),
        CircuitOp("MRX", (0,), 0.02),
        CircuitOp("DETECTOR", (-1, -2)),
        CircuitOp("CZ", (0, 1)),
        CircuitOp("CZ", (0, 2)),
        CircuitOp("MX", (0,), 0.0),
        CircuitOp("DETECTOR", (-1,)),
        CircuitOp("MZ", (1,), 0.01),
        CircuitOp("MZ", (2,), 0.0),
        CircuitOp("DETECTOR", (-1, -2, -3)),
    )
    circuit = NoisyCircuit(3, ops)
    shots = 200_000
    batch = sample(circuit, shots, seed=23)
    rates = batch.detector_array().mean(axis=0)
    assert (rates > 0.01).all()
    for got, expect in zip(rates, _exact_detector_marginals(circuit)):
        sigma = math.sqrt(expect * (1.0 - expect) / shots)
        assert abs(got - expect) < 4.5 * sigma


def test_memory_observable_flips_need_noise():
    code = catalog_code("bb72")
    circuit = build_memory_experiment(
        code, "sparse", "Z", rounds=2, noise=NoiseModel(3e-3)
    )
    batch = sample(circuit, 2000, seed=29)
    assert batch.detector_array().any()
    assert batch.num_observables == code.k


# ---------------------------------------------------------------------------
# Shot export.


def test_shot_batch_bytes_round_trip():
    circuit = _one_channel_circuit(0.2)
    batch = sample(circuit, 1500, seed=41)
    blob = batch.to_bytes()
    back = ShotBatch.from_bytes(blob)
    assert back.shots == 1500
    assert back.num_detectors == batch.num_detectors
    assert back.num_observables == batch.num_observables
    assert back.seed == batch.seed
    assert np.array_equal(back.detector_bits, batch.detector_bits)
    assert np.array_equal(back.observable_bits, batch.observable_bits)


def test_shot_batch_rejects_garbage():
    with pytest.raises(ValueError, match="shot batch"):
        ShotBatch.from_bytes(b"\x00" * 64)


def test_shot_batch_magic_is_readable():
    circuit = _one_channel_circuit(0.2)
    blob = sample(circuit, 8, seed=1).to_bytes()
    assert blob[:4] == b"MQSB"
