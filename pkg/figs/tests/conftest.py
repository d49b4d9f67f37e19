"""Shared fixtures: real simulator outputs produced through its CLI."""

import json
import subprocess

import pytest


def _cli(*args):
    proc = subprocess.run(["lowmach", *args], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    return proc


@pytest.fixture(scope="session")
def creep_run(tmp_path_factory):
    """Snapshots of a small creep-regime run at eps = 0.05."""
    root = tmp_path_factory.mktemp("creep")
    cfg = root / "cfg.json"
    cfg.write_text(json.dumps({
        "kind": "well_prepared",
        "epsilon": 0.05,
        "checks": ["creep"],
        "numerical": {"end_time": 5.0, "snapshot_times": [0.0, 1.0, 5.0]},
    }))
    out = root / "out"
    proc = _cli("simulate", "--config", str(cfg), "--out", str(out))
    assert "PASS creep" in proc.stdout
    return out


@pytest.fixture(scope="session")
def profile_csv(tmp_path_factory):
    root = tmp_path_factory.mktemp("fields")
    _cli("profiles", "--time", "1", "--cells", "257", "--out", str(root))
    return root / "profiles_t1.csv"
