"""Rendering behaviour, including the creep sign property on real runs."""

import numpy as np
import pytest

from figs import (
    FigureError,
    FigureKind,
    FigureSpec,
    creep_overlay_data,
    read_table,
    render,
)


def _spec(kind, inputs, out):
    return FigureSpec(inputs=tuple(str(p) for p in inputs), kind=kind,
                      output=str(out))


def test_creep_overlay_sign_agreement_on_simulated_snapshots(
        creep_run, tmp_path):
    for tag in ("t0", "t1", "t5"):
        snap = creep_run / f"snapshot_eps0.05_{tag}.txt"
        out = tmp_path / f"creep_{tag}.png"
        info = render(_spec(FigureKind.CREEP_OVERLAY, [snap], out))
        assert out.stat().st_size > 0
        x, u = info.series["u"]
        _, Tx = info.series["T_x"]
        assert x.size > 10
        # flow points from cold toward hot wherever the slope does
        assert np.all(np.sign(u) == np.sign(Tx))


def test_creep_region_shrinks_in_eta(creep_run):
    table = read_table(creep_run / "snapshot_eps0.05_t5.txt")
    x, u, Tx, t = creep_overlay_data(table)
    assert t == pytest.approx(5.0, abs=1e-9)
    assert np.max(np.abs(x)) <= np.sqrt(1.0 + t) + 1e-12
    narrow = creep_overlay_data(table, eta0=0.5)[0]
    assert narrow.size < x.size


def test_creep_overlay_needs_lagrangian_columns(tmp_path):
    path = tmp_path / "fluct.txt"
    lines = ["# time=1", "# epsilon=0.1", "# half_length=5", "# cells=5",
             "# fields=x p u theta"]
    for xv in np.linspace(-5.0, 5.0, 5):
        lines.append(f"{xv} 0.1 0.0 0.0")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(FigureError, match="missing column 'T'"):
        render(_spec(FigureKind.CREEP_OVERLAY, [path], tmp_path / "o.png"))


def test_rate_fit_annotates_the_fitted_slope(tmp_path):
    path = tmp_path / "series.csv"
    rows = ["epsilon,norm"]
    for eps in (0.2, 0.1, 0.05):
        rows.append(f"{eps},{2.0 * eps ** -0.5}")
    path.write_text("\n".join(rows) + "\n")
    out = tmp_path / "rate.png"
    info = render(_spec(FigureKind.RATE_FIT, [path], out))
    assert out.stat().st_size > 0
    assert any("-0.500" in a for a in info.annotations)


def test_rate_fit_time_axis_uses_one_plus_t(tmp_path):
    path = tmp_path / "decay.csv"
    rows = ["t,linf_r1"]
    for t in (1.0, 3.0, 9.0):
        rows.append(f"{t},{(1.0 + t) ** -1.0}")
    path.write_text("\n".join(rows) + "\n")
    info = render(_spec(FigureKind.RATE_FIT, [path], tmp_path / "o.png"))
    assert any("-1.000" in a for a in info.annotations)


def test_empty_rate_series_names_the_input(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("epsilon,norm\n")
    with pytest.raises(FigureError, match="no data rows") as err:
        render(_spec(FigureKind.RATE_FIT, [path], tmp_path / "o.png"))
    assert "empty.csv" in str(err.value)


def test_short_column_named(tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("epsilon,norm\n0.1,2.0\n")
    with pytest.raises(FigureError, match="'norm'"):
        render(_spec(FigureKind.RATE_FIT, [path], tmp_path / "o.png"))


def test_malformed_cell_names_column_and_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("epsilon,norm\n0.2,abc\n")
    with pytest.raises(FigureError, match="column 'norm' row 1"):
        read_table(path)


def test_row_width_mismatch_reported(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("epsilon,norm\n0.2\n")
    with pytest.raises(FigureError, match="row 1 has 1 values, expected 2"):
        read_table(path)


def test_missing_input_rejected(tmp_path):
    with pytest.raises(FigureError, match="does not exist"):
        _spec(FigureKind.CREEP_OVERLAY, [tmp_path / "nope.txt"],
              tmp_path / "o.png")


def test_spec_needs_inputs(tmp_path):
    with pytest.raises(FigureError, match="at least one input"):
        FigureSpec(inputs=(), kind=FigureKind.PROFILES,
                   output=str(tmp_path / "o.png"))


def test_profiles_figure_plots_every_field(profile_csv, tmp_path):
    out = tmp_path / "profiles.png"
    info = render(_spec(FigureKind.PROFILES, [profile_csv], out))
    assert out.stat().st_size > 0
    assert set(info.series) == {"v_bar", "u_bar", "T_bar", "v_tilde",
                                "u_tilde", "T_tilde", "r1", "r2"}


def test_profiles_accepts_snapshot_layout(creep_run, tmp_path):
    snap = creep_run / "snapshot_eps0.05_t1.txt"
    info = render(_spec(FigureKind.PROFILES, [snap], tmp_path / "s.png"))
    assert set(info.series) == {"v", "u", "T"}


def test_rendering_is_deterministic_and_read_only(creep_run, tmp_path):
    snap = creep_run / "snapshot_eps0.05_t5.txt"
    before = snap.read_bytes()
    outs = []
    for name in ("a.png", "b.png"):
        out = tmp_path / name
        render(_spec(FigureKind.CREEP_OVERLAY, [snap], out))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert snap.read_bytes() == before
