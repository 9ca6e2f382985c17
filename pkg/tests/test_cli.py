"""End-to-end checks of the command-line front end."""

import json

import pytest

from modqec.cli import main
from modqec.harness import LogicalErrorEstimate, export_results
from modqec.machine import program_from_text, validate_program


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_help_lists_every_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--code", "--layout", "--basis", "--p", "--tau-s",
                 "--tau-m", "--rounds", "--shots", "--seed", "--out",
                 "--config"):
        assert flag in out


def test_catalog_lists_all_codes(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == 0
    for name, params in (
        ("bb72", "[[72,12,6]]"),
        ("bb90", "[[90,8,10]]"),
        ("bb108", "[[108,8,10]]"),
        ("bb144", "[[144,12,12]]"),
    ):
        line = next(l for l in out.splitlines() if l.startswith(name + " "))
        assert params in line and "omega 6" in line


def test_verify_sparse_prints_round_depth(capsys):
    code, out, _ = run(
        capsys, "verify", "--code", "bb72", "--layout", "sparse",
        "--rounds", "2",
    )
    assert code == 0
    assert "depth 12" in out
    assert "deterministic" in out


def test_verify_unknown_code_fails(capsys):
    code, _, err = run(capsys, "verify", "--code", "nosuch")
    assert code == 2
    assert "nosuch" in err


def test_compile_round_trips_through_text(tmp_path, capsys):
    out_file = tmp_path / "program.txt"
    code, _, _ = run(
        capsys, "compile", "--code", "bb72", "--layout", "sparse",
        "--basis", "Z", "--out", str(out_file),
    )
    assert code == 0
    program = program_from_text(out_file.read_text())
    assert validate_program(program).total_depth == 12


def test_compile_rejects_unknown_layout(capsys):
    code, _, err = run(
        capsys, "compile", "--code", "bb72", "--layout", "nosuch",
    )
    assert code == 2
    assert "sparse" in err and "interleaved-gates" in err


def test_depth_matches_closed_forms(capsys):
    code, out, _ = run(capsys, "depth", "--code", "bb72", "--rounds", "5")
    assert code == 0
    rows = {
        line.split()[0]: line.split()[1:]
        for line in out.splitlines()[2:]
    }
    assert rows["sparse"][:3] == ["60", "40", "20"]
    assert rows["flat"][:3] == ["60", "120", "20"]
    assert rows["interleaved-gates"][:3] == ["31", "31", "10"]
    assert rows["concurrent-rounds"][:3] == ["36", "23", "10"]


def test_experiment_runs_and_exports(tmp_path, capsys):
    out_file = tmp_path / "results.csv"
    code, out, _ = run(
        capsys, "experiment", "--code", "bb72", "--p", "0.002",
        "--rounds", "1", "--shots", "60", "--seed", "11",
        "--out", str(out_file),
    )
    assert code == 0
    assert "bb72 sparse Z p=0.002" in out
    lines = out_file.read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1].startswith("code,layout,basis,p,")
    assert len(lines) == 3


def test_experiment_is_deterministic(capsys):
    argv = ("experiment", "--code", "bb72", "--p", "0.003",
            "--rounds", "1", "--shots", "40", "--seed", "2")
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2


def test_config_file_is_overridden_by_flags(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "code": "bb72",
        "p_values": [0.0],
        "rounds": 1,
        "shots": 50,
        "seed": 4,
        "decoder": {"bp_iterations": 5},
    }))
    code, out, _ = run(
        capsys, "experiment", "--config", str(config), "--shots", "70",
    )
    assert code == 0
    assert "shots=70" in out
    assert "failures=0" in out


def test_config_rejects_unknown_keys(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"code": "bb72", "wat": 1}))
    code, _, err = run(capsys, "experiment", "--config", str(config))
    assert code == 2
    assert "wat" in err


def test_modularity_without_evidence_is_nonzero(capsys):
    code, out, err = run(
        capsys, "modularity", "--code", "bb72", "--p", "0.0001",
        "--rounds", "1", "--shots", "30", "--seed", "6",
    )
    assert code == 1
    assert "inconclusive" in out
    assert "not confirmed" in err


def test_fit_recovers_exact_constants(tmp_path, capsys):
    import math

    c0, c1, c2 = 12.002, 674.98, -67694.0
    rows = []
    for p in (2e-3, 3e-3, 4e-3, 5e-3, 6e-3):
        p_l = p**3 * math.exp(c0 + c1 * p + c2 * p * p)
        total = 1.0 - (1.0 - p_l) ** 6
        rows.append(LogicalErrorEstimate(
            code="bb72", layout="sparse", basis="Z", p=p, tau_s=30.0,
            tau_m=30.0, rounds=6, shots=10**9,
            failures=int(total * 10**9), p_fail_total=total,
            p_L_round=p_l, ci_low=p_l * 0.9, ci_high=p_l * 1.1,
            seed=1, decoder="exact",
        ))
    path = tmp_path / "fit.csv"
    export_results(rows, str(path))
    code, out, _ = run(capsys, "fit", str(path), "--code", "bb72")
    assert code == 0
    assert "c0=12.0020" in out
    assert "c1=674.98" in out
    assert "c2=-67694.0" in out


def test_fit_with_no_matching_rows_fails(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    export_results([], str(path))
    code, _, err = run(capsys, "fit", str(path), "--code", "bb72")
    assert code == 2
    assert "no rows" in err


def test_oracle_suites_pass(capsys):
    code, out, _ = run(capsys, "oracle", "--shots", "8", "--seed", "13")
    assert code == 0
    assert out.count("-> ok") == 3
    assert "0.028000" in out
