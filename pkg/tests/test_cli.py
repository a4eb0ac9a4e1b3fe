import json
import subprocess
import sys

import pytest

import ifsmeasures.cli as cli
import ifsmeasures.cuntz as cuntz
import ifsmeasures.nadic_measure as nadic_measure
from ifsmeasures.cli import COMMANDS, EXIT_CAP, EXIT_INPUT, EXIT_OK, EXIT_VALIDATION, run

from conftest import FIXTURES

HAAR = str(FIXTURES / "haar_bank.json")
SHIFT = str(FIXTURES / "shift_bank.json")
D4 = str(FIXTURES / "d4_bank.json")
DEGENERATE = str(FIXTURES / "degenerate_bank.json")
CANTOR = str(FIXTURES / "cantor_ifs.json")
E0_E2 = str(FIXTURES / "e0_e2.json")

# one representative invocation per subcommand, all on shipped fixtures
INVOCATIONS = {
    "validate": ["--bank", D4],
    "atoms": ["--bank", D4, "--vector", E0_E2, "--k", "6"],
    "fourier": ["--bank", HAAR, "--k", "8", "--t-grid=-10:10:21", "--with-bound"],
    "cdf": ["--bank", D4, "--k", "8", "--x-grid", "0:1:101"],
    "integrate": ["--bank", HAAR, "--k", "10", "--psi", "cos(2*pi*x) + x**2", "--moment", "1.5"],
    "cyclicity": ["--bank", SHIFT, "--k", "6"],
    "hutchinson-cascade": ["--ifs", CANTOR, "--k", "6"],
    "hutchinson-chaos": ["--ifs", CANTOR, "--n-samples", "20000", "--seed", "5", "--bins", "9"],
    "moments": ["--ifs", CANTOR, "--max-order", "6"],
    "eigen-check": ["--bank", HAAR],
    "cross-check": ["--bank", HAAR, "--k", "8"],
    "convergence": ["--bank", D4, "--k-min", "2", "--k-max", "10", "--x-grid", "0:1:201"],
}

# every operation of the library and the subcommand that exposes it
COVERAGE = {
    (cli, "validate_filterbank"): "validate",
    (cli, "verify_cuntz_relations"): "validate",
    (cuntz, "apply_s"): "validate",
    (cuntz, "apply_s_star"): "validate",
    (cli, "atom_tree"): "atoms",
    (nadic_measure.AtomTree, "refine"): "convergence",
    (cli, "fourier_of_atoms"): "fourier",
    (cli, "fourier_error_bound"): "fourier",
    (cli, "cdf"): "cdf",
    (cli, "integrate"): "integrate",
    (cli, "refinement_residual"): "cross-check",
    (cli, "cascade"): "hutchinson-cascade",
    (cli, "self_similarity_residual"): "hutchinson-cascade",
    (cli, "attractor_cover"): "hutchinson-cascade",
    (cli, "chaos_game"): "hutchinson-chaos",
    (cli, "solve_moments"): "moments",
    (cli, "solve_joint_eigenproblem"): "eigen-check",
    (cli, "pushforward_measure"): "cyclicity",
    (cli, "cyclicity_test"): "cyclicity",
    (cli, "radon_nikodym_profile"): "cyclicity",
    (cli, "eigen_cross_check"): "cross-check",
    (cli, "convergence_profile"): "convergence",
}


def invoke(tmp_path, command, args, name="out"):
    out = tmp_path / name
    extra = []
    if command == "hutchinson-cascade":
        extra = ["--summary", str(tmp_path / f"{name}.summary.json")]
    status = run([command, *args, *extra, "--out", str(out)])
    return status, out


def test_invocation_table_covers_all_commands():
    assert set(INVOCATIONS) == set(COMMANDS)
    assert set(COVERAGE.values()) == set(COMMANDS)


@pytest.mark.parametrize("command", COMMANDS)
def test_subcommand_deterministic(command, tmp_path):
    s1, o1 = invoke(tmp_path, command, INVOCATIONS[command], "a")
    s2, o2 = invoke(tmp_path, command, INVOCATIONS[command], "b")
    assert s1 == s2 == EXIT_OK
    assert o1.read_bytes() == o2.read_bytes()
    assert o1.stat().st_size > 0
    if command == "hutchinson-cascade":
        assert (tmp_path / "a.summary.json").read_bytes() == (tmp_path / "b.summary.json").read_bytes()


def test_deterministic_across_processes(tmp_path):
    outs = []
    for name in ("p1", "p2"):
        out = tmp_path / name
        proc = subprocess.run(
            [sys.executable, "-m", "ifsmeasures", "atoms", "--bank", D4, "--k", "8", "--out", str(out)],
            capture_output=True,
        )
        assert proc.returncode == 0
        assert proc.stdout == b""
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


@pytest.mark.parametrize("target,command", list(COVERAGE.items()), ids=lambda v: v[1] if isinstance(v, tuple) else v)
def test_operation_reachable(target, command, tmp_path, monkeypatch):
    owner, name = target
    original = getattr(owner, name)
    calls = []

    def spy(*a, **kw):
        calls.append(1)
        return original(*a, **kw)

    monkeypatch.setattr(owner, name, spy)
    status, _ = invoke(tmp_path, command, INVOCATIONS[command])
    assert status == EXIT_OK
    assert calls, f"{name} not reached from {command}"


def test_shift_atoms_single_row(capsys):
    assert run(["atoms", "--bank", SHIFT, "--k", "3"]) == EXIT_OK
    assert capsys.readouterr().out == "numerator,depth,base,position_float,mass\n0,3,2,0.0,1.0\n"


def test_validate_haar_report(capsys):
    assert run(["validate", "--bank", HAAR]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["max_defect"] <= 1e-10


def test_validate_degenerate_exit_2(capsys):
    assert run(["validate", "--bank", DEGENERATE]) == EXIT_VALIDATION
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_other_commands_refuse_non_unitary_bank(tmp_path):
    status, out = invoke(tmp_path, "atoms", ["--bank", DEGENERATE, "--k", "3"])
    assert status == EXIT_VALIDATION
    assert not out.exists()


def test_cap_exceeded_exit_3(tmp_path):
    status, out = invoke(tmp_path, "atoms", ["--bank", HAAR, "--k", "12", "--cap", "1000"])
    assert status == EXIT_CAP
    assert not out.exists()
    status, _ = invoke(tmp_path, "hutchinson-cascade", ["--ifs", CANTOR, "--k", "12", "--cap", "1000"])
    assert status == EXIT_CAP


@pytest.mark.parametrize("args", [
    ["atoms", "--bank", HAAR],
    ["atoms", "--bank", HAAR, "--k", "-1"],
    ["atoms", "--bank", HAAR, "--k", "x"],
    ["atoms", "--bank", "/nonexistent.json", "--k", "2"],
    ["atoms", "--bank", E0_E2, "--k", "2"],
    ["fourier", "--bank", HAAR, "--k", "2", "--t-grid", "1:2"],
    ["integrate", "--bank", HAAR, "--k", "2", "--psi", "__import__('os')"],
    ["moments", "--ifs", HAAR],
    ["frobnicate"],
    ["atoms", "--bank", HAAR, "--k", "2", "--no-such-flag"],
])
def test_malformed_input_exit_1(args, capsys):
    assert run(args) == EXIT_INPUT
    assert capsys.readouterr().out == ""


def test_malformed_json_file(tmp_path):
    bad = tmp_path / "bank.json"
    bad.write_text("{")
    assert run(["validate", "--bank", str(bad)]) == EXIT_INPUT


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bank": SHIFT, "k": 3}))
    assert run(["atoms", "--config", str(cfg)]) == EXIT_OK
    assert capsys.readouterr().out.endswith("0,3,2,0.0,1.0\n")
    assert run(["atoms", "--config", str(cfg), "--k", "5"]) == EXIT_OK
    assert capsys.readouterr().out.endswith("0,5,2,0.0,1.0\n")


@pytest.mark.parametrize("content", [{"bogus": 1}, {"k": "three"}, {"k": True}, [1, 2]])
def test_config_rejections(content, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(content))
    assert run(["atoms", "--bank", SHIFT, "--config", str(cfg)]) == EXIT_INPUT


def test_fourier_csv_columns(capsys):
    assert run(["fourier", "--bank", HAAR, "--k", "4", "--t-grid", "0,1"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "t,re,im"
    t, re, im = map(float, lines[1].split(","))
    assert (t, im) == (0.0, 0.0) and re == pytest.approx(1.0, abs=1e-12)


def test_cyclicity_json(capsys):
    assert run(["cyclicity", "--bank", SHIFT, "--k", "6"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "VIOLATION"
    assert [w["numerator"] for w in rep["witnesses"] if w["channel"] == 1] == [32]


def test_moments_json(capsys):
    assert run(["moments", "--ifs", CANTOR, "--max-order", "2"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["moments"] == pytest.approx([1.0, 0.5, 0.375], abs=1e-12)
