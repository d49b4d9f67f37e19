"""Exit codes and messages of the per-figure commands."""

from figs.cli import creep_overlay_main, profiles_main, rate_fit_main


def test_creep_overlay_command(creep_run, tmp_path, capsys):
    snap = creep_run / "snapshot_eps0.05_t5.txt"
    out = tmp_path / "creep.png"
    assert creep_overlay_main([str(snap), str(out)]) == 0
    assert f"wrote {out}" in capsys.readouterr().out
    assert out.exists()


def test_missing_input_exits_two(tmp_path, capsys):
    code = creep_overlay_main([str(tmp_path / "nope.txt"),
                               str(tmp_path / "o.png")])
    assert code == 2
    err = capsys.readouterr().err
    assert "error:" in err and "does not exist" in err


def test_rate_fit_command_accepts_many_inputs(tmp_path, capsys):
    paths = []
    for i, name in enumerate(("a.csv", "b.csv")):
        path = tmp_path / name
        path.write_text("epsilon,norm\n0.2,1.0\n0.1,0.5\n0.05,0.25\n")
        paths.append(str(path))
    out = tmp_path / "rates.png"
    assert rate_fit_main([*paths, str(out)]) == 0
    assert out.exists()


def test_profiles_command_reports_bad_table(tmp_path, capsys):
    path = tmp_path / "just_x.csv"
    path.write_text("x\n0.0\n1.0\n")
    code = profiles_main([str(path), str(tmp_path / "o.png")])
    assert code == 2
    assert "field column" in capsys.readouterr().err
