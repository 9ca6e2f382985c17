"""Tests for code construction, labels, logicals, and the shipped catalog."""

import numpy as np
import pytest

from modqec.codes import (
    PauliOperator,
    QubitLabel,
    brute_force_distance,
    build_bb_code,
    catalog_code,
    index_to_label,
    label_to_index,
    load_catalog,
    logical_observables,
    logical_pairing,
    make_stabilizer_code,
    stabilizer_generators,
    symplectic_matrix,
)
from modqec.gf2 import RingParams, gf2_rank, gf2_row_space_contains, parse_poly


def pauli(n, text):
    """'ZZI' style dense string to PauliOperator."""
    assert len(text) == n
    return PauliOperator.from_dict(
        n, {q: c for q, c in enumerate(text) if c != "I"}
    )


# ---- PauliOperator -----------------------------------------------------


def test_pauli_ops_basics():
    p = pauli(4, "XIZY")
    assert p.weight == 3
    assert p.as_dict() == {0: "X", 2: "Z", 3: "Y"}
    assert np.array_equal(p.x_bits(), [1, 0, 0, 1])
    assert np.array_equal(p.z_bits(), [0, 0, 1, 1])
    q = PauliOperator.from_xz(p.x_bits(), p.z_bits())
    assert q == p


def test_pauli_commutation():
    assert pauli(2, "XI").commutes_with(pauli(2, "IX"))
    assert not pauli(2, "XI").commutes_with(pauli(2, "ZI"))
    assert pauli(2, "XX").commutes_with(pauli(2, "ZZ"))
    assert pauli(2, "XY").commutes_with(pauli(2, "YX"))


def test_pauli_validation():
    with pytest.raises(ValueError):
        PauliOperator(2, ((2, "X"),))
    with pytest.raises(ValueError):
        PauliOperator(2, ((0, "Q"),))


# ---- stabilizer codes --------------------------------------------------


def test_make_stabilizer_code_dimension():
    rep = make_stabilizer_code([pauli(3, "ZZI"), pauli(3, "IZZ")])
    assert rep.k == 1
    four22 = make_stabilizer_code([pauli(4, "XXXX"), pauli(4, "ZZZZ")])
    assert four22.k == 2


def test_make_stabilizer_code_rejects_anticommuting():
    with pytest.raises(ValueError):
        make_stabilizer_code([pauli(2, "XI"), pauli(2, "ZI")])


# ---- BB construction ---------------------------------------------------


def _standard_polys(ring):
    return parse_poly(ring, "x^3 + y + y^2"), parse_poly(ring, "y^3 + x + x^2")


def test_build_144():
    ring = RingParams(12, 6)
    a, b = _standard_polys(ring)
    code = build_bb_code(ring, a, b)
    assert code.n == 144
    assert code.k == 12
    assert (code.H_X @ code.H_Z.transpose()).is_zero()


def test_build_72():
    ring = RingParams(6, 6)
    a, b = _standard_polys(ring)
    code = build_bb_code(ring, a, b)
    assert code.n == 72 and code.k == 12 and code.omega == 6


def test_weights_match_omega():
    for code in load_catalog().values():
        hx, hz = code.H_X.to_dense(), code.H_Z.to_dense()
        assert (hx.sum(axis=1) == code.omega).all()
        assert (hz.sum(axis=1) == code.omega).all()
        # each data qubit sits in omega checks total (half X-type, half Z-type)
        stacked = np.concatenate([hx, hz], axis=0)
        assert (stacked.sum(axis=0) == code.omega).all()


def test_k_invariant_under_xz_duality():
    for code in load_catalog().values():
        dual = build_bb_code(code.params, code.B.transpose(), code.A.transpose())
        assert dual.k == code.k


# ---- labels ------------------------------------------------------------


def test_label_examples():
    p12 = RingParams(12, 6)
    assert label_to_index(QubitLabel(0, 0, 0), p12) == 0
    assert label_to_index(QubitLabel(1, 0, 0), p12) == 72


def test_label_round_trip_exhaustive():
    for l in range(1, 7):
        for m in range(1, 7):
            params = RingParams(l, m)
            for u in (0, 1):
                for v in range(l):
                    for w in range(m):
                        lab = QubitLabel(u, v, w)
                        idx = label_to_index(lab, params)
                        assert index_to_label(idx, params) == lab
            for u in ("X", "Z"):
                for v in range(l):
                    for w in range(m):
                        lab = QubitLabel(u, v, w)
                        idx = label_to_index(lab, params)
                        assert index_to_label(idx, params, ancilla=True) == lab


def test_label_rejects_out_of_range():
    with pytest.raises(ValueError):
        label_to_index(QubitLabel(0, 6, 0), RingParams(6, 6))


# ---- stabilizer generators and logicals --------------------------------


def test_stabilizers_72():
    code = catalog_code("bb72")
    stab = stabilizer_generators(code)
    assert len(stab.generators) == 72
    assert all(g.weight == 6 for g in stab.generators)
    assert gf2_rank(symplectic_matrix(stab.generators)) == 60
    assert stab.k == 12


def test_logical_observables_counts_and_commutation():
    code = catalog_code("bb144")
    stab = stabilizer_generators(code)
    for basis in ("X", "Z"):
        logs = logical_observables(code, basis)
        assert len(logs) == 12
        for op in logs:
            assert all(op.commutes_with(g) for g in stab.generators)


def test_logical_pairing_invertible():
    for name in ("bb72", "bb90", "bb108", "bb144"):
        code = catalog_code(name)
        pairing = logical_pairing(code)
        assert pairing.shape == (code.k, code.k)
        assert gf2_rank(pairing) == code.k


def test_logicals_not_in_stabilizer_row_space():
    code = catalog_code("bb72")
    hz = code.H_Z.to_dense()
    for op in logical_observables(code, "Z"):
        assert not gf2_row_space_contains(hz, op.z_bits())


# ---- exhaustive distance -----------------------------------------------


def test_distance_repetition_code():
    rep = make_stabilizer_code([pauli(3, "ZZI"), pauli(3, "IZZ")])
    z_logical = pauli(3, "ZII")
    x_logical = pauli(3, "XXX")
    assert brute_force_distance(rep, protected=[z_logical]) == 3
    assert brute_force_distance(rep, protected=[x_logical]) == 1
    assert brute_force_distance(rep) == 1


def test_distance_422():
    code = make_stabilizer_code([pauli(4, "XXXX"), pauli(4, "ZZZZ")])
    assert brute_force_distance(code) == 2


def test_distance_errors():
    dense = make_stabilizer_code(
        [pauli(2, "XX"), pauli(2, "ZZ")]
    )  # k = 0
    with pytest.raises(ValueError):
        brute_force_distance(dense)
    big = make_stabilizer_code([pauli(21, "Z" * 21)])
    with pytest.raises(ValueError):
        brute_force_distance(big)


def test_distance_five_qubit_code():
    # standard [[5,1,3]]; all cyclic shifts of XZZXI
    gens = [pauli(5, t) for t in ("XZZXI", "IXZZX", "XIXZZ", "ZXIXZ")]
    code = make_stabilizer_code(gens)
    assert code.k == 1
    assert brute_force_distance(code) == 3


# ---- catalog -----------------------------------------------------------


def test_catalog_parameters():
    expected = {
        "bb72": (72, 12, 6),
        "bb90": (90, 8, 10),
        "bb108": (108, 8, 10),
        "bb144": (144, 12, 12),
    }
    catalog = load_catalog()
    assert set(catalog) == set(expected)
    for name, (n, k, d) in expected.items():
        code = catalog[name]
        assert (code.n, code.k, code.known_distance) == (n, k, d)
        assert code.omega == 6


def test_catalog_unknown_name():
    with pytest.raises(KeyError):
        catalog_code("bb999")
