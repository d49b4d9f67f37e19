"""Snapshot file format round trips and validation."""

import numpy as np
import pytest

from lowmach.errors import ConfigInvalid
from lowmach.grids import Grid
from lowmach.io import read_snapshot, write_snapshot
from lowmach.solver import FluctuationState, LagrangianState, init_well_prepared


def test_lagrangian_round_trip(ps, tmp_path):
    grid = Grid(15.0, 201)
    state = init_well_prepared(ps, grid)
    state.time = 2.5
    path = tmp_path / "snap.txt"
    write_snapshot(state, path, epsilon=0.1)
    back, eps = read_snapshot(path)
    assert isinstance(back, LagrangianState)
    assert eps == 0.1
    assert back.time == 2.5
    assert back.grid == grid
    assert np.array_equal(back.v, state.v)
    assert np.array_equal(back.u, state.u)
    assert np.array_equal(back.T, state.T)


def test_fluctuation_round_trip_without_epsilon(tmp_path):
    grid = Grid(5.0, 64)
    rng = np.random.default_rng(0)
    state = FluctuationState(grid, 1.0, rng.uniform(-1, 1, 64),
                             rng.uniform(-1, 1, 64), rng.uniform(-1, 1, 64))
    path = tmp_path / "fluct.txt"
    write_snapshot(state, path)
    back, eps = read_snapshot(path)
    assert isinstance(back, FluctuationState)
    assert eps is None
    assert np.array_equal(back.p, state.p)
    assert np.array_equal(back.theta, state.theta)


def _write_and_mangle(state, path, mangler):
    write_snapshot(state, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(mangler(lines)) + "\n")


def test_read_rejects_missing_header(ps, tmp_path):
    state = init_well_prepared(ps, Grid(5.0, 32))
    path = tmp_path / "bad.txt"
    _write_and_mangle(state, path,
                      lambda ls: [l for l in ls if "time" not in l])
    with pytest.raises(ConfigInvalid, match="time"):
        read_snapshot(path)


def test_read_rejects_row_count_mismatch(ps, tmp_path):
    state = init_well_prepared(ps, Grid(5.0, 32))
    path = tmp_path / "bad.txt"
    _write_and_mangle(state, path, lambda ls: ls[:-3])
    with pytest.raises(ConfigInvalid, match="rows"):
        read_snapshot(path)


def test_read_rejects_unknown_field_layout(ps, tmp_path):
    state = init_well_prepared(ps, Grid(5.0, 32))
    path = tmp_path / "bad.txt"
    _write_and_mangle(
        state, path,
        lambda ls: [l.replace("fields=x v u T", "fields=a b c d") for l in ls])
    with pytest.raises(ConfigInvalid, match="layout"):
        read_snapshot(path)


def test_read_rejects_shifted_x_column(ps, tmp_path):
    state = init_well_prepared(ps, Grid(5.0, 32))
    path = tmp_path / "bad.txt"

    def shift(lines):
        out = []
        for line in lines:
            if line.startswith("#"):
                out.append(line)
            else:
                parts = line.split()
                parts[0] = str(float(parts[0]) + 0.5)
                out.append(" ".join(parts))
        return out

    _write_and_mangle(state, path, shift)
    with pytest.raises(ConfigInvalid, match="x column"):
        read_snapshot(path)


def test_write_rejects_unknown_state(tmp_path):
    with pytest.raises(ConfigInvalid):
        write_snapshot(object(), tmp_path / "x.txt")
