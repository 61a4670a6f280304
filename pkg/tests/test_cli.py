import json

import numpy as np
import pytest
import scipy.linalg

from penproj import cli, operators as ops, projectors as pj
from penproj.scenarios import get_scenario


def read_fields(path):
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    u0 = np.array([float(r[2]) + 1j * float(r[3]) for r in rows])
    uT = np.array([float(r[4]) + 1j * float(r[5]) for r in rows])
    return u0, uT


def test_scenario_defaults_match_reference_figures():
    zero = get_scenario("heat-dirichlet-zero")
    assert (zero.n, zero.t, zero.dt, zero.diffusion) == (32, 1.0, 1e-5, 4.0)
    neumann = get_scenario("heat-neumann")
    assert (neumann.n, neumann.t, neumann.dt) == (16, 2.0, 1e-3)
    wave = get_scenario("wave-circle")
    assert (wave.n, wave.t, wave.dt, wave.c2) == (32, 1.0, 1e-4, 1.0)
    with pytest.raises(KeyError):
        get_scenario("heat-unknown")


def test_run_lambda_zero_matches_dense_reference(tmp_path):
    out = tmp_path / "run"
    rc = cli.main(
        ["run", "heat-dirichlet-zero", "--n", "8", "--lambda", "0",
         "--t", "0.1", "--dt", "1e-5", "--out", str(out)]
    )
    assert rc == 0
    u0, uT = read_fields(out / "fields.csv")
    run = get_scenario("heat-dirichlet-zero", n=8, t=0.1).build()
    A = ops.assemble_dense(run.problem.generator)
    b = run.problem.forcing.eval(0.0)
    aug = np.zeros((len(b) + 1, len(b) + 1), dtype=complex)
    aug[: len(b), : len(b)] = A
    aug[: len(b), len(b)] = b
    want = (scipy.linalg.expm(aug * 0.1) @ np.concatenate([run.problem.initial, [1.0]]))[
        : len(b)
    ]
    assert np.abs(uT - want).max() <= 1e-6


def test_run_writes_manifest_and_artifacts(tmp_path):
    out = tmp_path / "m"
    rc = cli.main(
        ["run", "heat-dirichlet-zero", "--n", "8", "--lambda", "100",
         "--t", "0.05", "--dt", "1e-4", "--out", str(out)]
    )
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    for key in ("scenario", "n", "t", "dt", "mode", "lambda", "seed"):
        assert key in manifest
    assert (out / "trajectory.csv").exists()
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,constraint_error_sq,norm"


def test_sweep_manifest_and_determinism(tmp_path):
    args = ["sweep", "heat-dirichlet-zero", "--n", "8", "--t", "0.05",
            "--dt", "1e-4", "--lambdas", "1e2,1e3,1e4"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli.main(args + ["--out", str(out_a)]) == 0
    assert cli.main(args + ["--out", str(out_b)]) == 0
    csv_a = (out_a / "sweep.csv").read_bytes()
    csv_b = (out_b / "sweep.csv").read_bytes()
    # wall-time column varies; everything else is byte-identical
    strip = lambda raw: [line.rsplit(b",", 1)[0] for line in raw.splitlines()]
    assert strip(csv_a) == strip(csv_b)
    manifest = json.loads((out_a / "manifest.json").read_text())
    assert "slope" in manifest and "lambda_required" in manifest
    lines = csv_a.decode().splitlines()
    assert lines[0] == "lambda,measured_err_sq,bound,slope_window,wall_time_s"
    assert len(lines) == 4


def test_sweep_rejects_duplicates(tmp_path):
    rc = cli.main(
        ["sweep", "heat-dirichlet-zero", "--n", "8", "--dt", "1e-4",
         "--lambdas", "1e2,1e2", "--out", str(tmp_path / "d")]
    )
    assert rc == cli.EXIT_USAGE


def test_invalid_flags_exit_two(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["run", "not-a-scenario"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["unknown-command"])
    assert exc.value.code == 2


def test_emulate_subcommand():
    assert cli.main(["emulate", "--qubits-guard", "10"]) == 0


def test_estimate_subcommand(tmp_path, capsys):
    out = tmp_path / "report.json"
    rc = cli.main(["estimate", "heat", "--n", "32", "--d", "2", "--t", "1", "--out", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["M_prime"] > 0 and "overhead_log2" in data


def test_kubo_study_subcommand(tmp_path, capsys):
    rc = cli.main(["kubo-study", "--zetas", "1e-2,5e-3", "--n", "8",
                   "--out", str(tmp_path)])
    assert rc == 0
    lines = (tmp_path / "kubo_study.csv").read_text().splitlines()
    assert len(lines) == 3
    captured = capsys.readouterr()
    assert "residual" in captured.out


def test_lambda_warning(tmp_path):
    with pytest.warns(UserWarning, match="aliasing"):
        cli.main(
            ["run", "heat-dirichlet-zero", "--n", "8", "--lambda", "2e6",
             "--t", "1e-4", "--dt", "1e-4", "--out", str(tmp_path / "w")]
        )
