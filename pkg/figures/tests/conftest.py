import json
import subprocess
import sys

import pytest

pytest.importorskip(
    "scenario_cert",
    reason="fixtures are generated through the assessment CLI",
)


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "scenario_cert.cli", *args],
        capture_output=True,
        text=True,
    )
    if proc.returncode == 2:
        raise RuntimeError(f"assessment CLI failed: {proc.stderr}")
    return proc


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory):
    """Reports and CSVs for the coordinate-ReLU instance, written once
    through the assessment CLI: a certified run, a min-ball run, a
    three-weight sweep bundle, and a half-space run."""
    d = tmp_path_factory.mktemp("fixtures")
    (d / "model.json").write_text(
        json.dumps(
            {"layers": [{"weights": [[1, 0], [0, 1]], "bias": [0, 0], "activation": "relu"}]}
        )
    )
    (d / "dist.json").write_text(
        json.dumps(
            {"kind": "uniform_norm_ball", "norm": "l1", "center": [1.0, 0.0], "radius": 1.0}
        )
    )
    (d / "safe.json").write_text(json.dumps({"A": [[0.0, 1.0]], "b": [0.5]}))

    base = [
        "--model", str(d / "model.json"),
        "--dist", str(d / "dist.json"),
        "--safe", str(d / "safe.json"),
        "--eps", "0.1",
        "--delta", "1e-5",
        "--seed", "28",
    ]
    run_cli(
        "assess", *base, "--class", "l2",
        "--regularizer", '{"kind": "radius_squared", "lambda": 0.1}',
        "--out", str(d / "certified.json"),
        "--export-samples", str(d / "samples.csv"),
    )
    run_cli(
        "assess", *base, "--class", "l2",
        "--regularizer", '{"kind": "radius_squared", "lambda": 1e6}',
        "--out", str(d / "minball.json"),
        "--export-samples", str(d / "samples_minball.csv"),
    )
    run_cli(
        "assess", *base, "--class", "half_space",
        "--regularizer", '{"kind": "none", "lambda": 0}',
        "--out", str(d / "halfspace.json"),
        "--export-samples", str(d / "samples_hs.csv"),
    )
    run_cli(
        "sweep", *base, "--class", "l2",
        "--regularizer", '{"kind": "radius_squared", "lambda": 0}',
        "--lambdas", "0,1e-4,1",
        "--out-dir", str(d / "sweep"),
    )
    return d
