import subprocess
import sys
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def sweep_artifacts(tmp_path_factory):
    """Sweep CSV + manifest produced through the producer's CLI (the only
    interface this package consumes)."""
    out = tmp_path_factory.mktemp("sweep")
    cmd = [
        sys.executable, "-m", "penproj.cli", "sweep", "heat-dirichlet-zero",
        "--n", "8", "--t", "0.05", "--dt", "1e-4",
        "--lambdas", "1e2,1e3,1e4", "--out", str(out),
    ]
    subprocess.run(cmd, check=True, capture_output=True)
    return out / "sweep.csv", out / "manifest.json"


@pytest.fixture(scope="session")
def field_artifacts(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cmd = [
        sys.executable, "-m", "penproj.cli", "run", "heat-dirichlet-zero",
        "--n", "8", "--t", "0.05", "--dt", "1e-4", "--lambda", "1e3",
        "--out", str(out),
    ]
    subprocess.run(cmd, check=True, capture_output=True)
    return out / "fields.csv"
