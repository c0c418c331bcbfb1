"""Tests for config parsing, CSV traces, plots, summaries, and exit codes."""

import io
import math

import numpy as np
import pytest

from spindisk import ConfigError, ObjectiveKind, builtin_scenario, run, with_overrides
from spindisk.cli import (
    CSV_HEADER,
    format_summary,
    main,
    panel_frames,
    parse_config,
    read_trace_csv,
    resolve_scenario,
    serialize_config,
    summarize,
    write_trace_csv,
    emit_plots,
)
from spindisk.simulation import Trace


def _scenarios_equivalent(a, b):
    return (
        a.name == b.name
        and np.array_equal(a.omega0, b.omega0)
        and a.t_end == b.t_end
        and a.dt == b.dt
        and a.params.mr2 == b.params.mr2
        and a.plan.segments == b.plan.segments
        and a.control_cfg == b.control_cfg
        and a.clamp_l_to_radius == b.clamp_l_to_radius
        and (a.inertia0.I2, a.inertia0.I3) == (b.inertia0.I2, b.inertia0.I3)
    )


def test_parse_config_combined_example():
    text = "name=combined\nomega0=1e-5,10,0\nplan=20:alignment;40:precession\nt_end=40"
    assert _scenarios_equivalent(parse_config(text), builtin_scenario("combined"))


def test_parse_config_defaults_and_inheritance():
    sc = parse_config("")
    assert sc.name == "custom" and sc.dt == 1e-3 and sc.params.mr2 == 4.0
    # a built-in name pulls in that scenario's values for unset keys
    sc = parse_config("name=precession\ndt=0.002")
    assert sc.t_end == 80.0 and sc.dt == 0.002
    assert sc.plan.segments[-1][1] is ObjectiveKind.PRECESSION


def test_parse_config_overrides():
    sc = parse_config(
        "name=tuned\nomega0=1,2,3\nmr2=8\ngain=2\ndeadband=1e-6\nclamp_l=yes\nt_end=5\ndt=0.01"
    )
    assert np.array_equal(sc.omega0, [1.0, 2.0, 3.0])
    assert sc.params.mr2 == 8.0
    assert (sc.inertia0.I2, sc.inertia0.I3) == (2.0, 2.0)
    assert sc.control_cfg.gain == 2.0 and sc.control_cfg.deadband_eps == 1e-6
    assert sc.clamp_l_to_radius is True


def test_parse_config_comments_and_blank_lines():
    sc = parse_config("# a comment\n\nname=passive\n")
    assert sc.name == "passive" and sc.t_end == 40.0


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("dt=-0.1", "line 1"),
        ("name=x\nwibble=3", "line 2"),
        ("omega0=1,2", "line 1"),
        ("omega0=1,2,spam", "malformed number"),
        ("plan=20:alignment;10:precession", "line 1"),
        ("plan=20-alignment", "time:objective"),
        ("plan=20:sideways", "unknown objective"),
        ("t_end=0", "line 1"),
        ("gain=0", "line 1"),
        ("deadband=-1", "line 1"),
        ("clamp_l=maybe", "line 1"),
        ("name=a\nname=b", "duplicate"),
        ("just words", "key = value"),
        ("dt=0.5\nt_end=0.25", "at least one step"),
    ],
)
def test_parse_config_rejects_bad_input(text, fragment):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(text)
    assert fragment in str(excinfo.value)


def test_serialize_round_trip():
    for name in ("alignment", "passive", "precession", "combined"):
        sc = builtin_scenario(name)
        assert _scenarios_equivalent(parse_config(serialize_config(sc)), sc)
    custom = parse_config("name=tuned\nomega0=0.5,-2,3e-4\nmr2=2.5\ngain=1.5\nt_end=7\ndt=0.005")
    assert _scenarios_equivalent(parse_config(serialize_config(custom)), custom)


def test_serialize_rejects_unrepresentable():
    from spindisk.rigidbody import rotation_exp

    sc = with_overrides(builtin_scenario("passive"), R0=rotation_exp([0.1, 0.2, 0.3]))
    with pytest.raises(ConfigError):
        serialize_config(sc)


def test_resolve_scenario(tmp_path):
    assert resolve_scenario("precession").name == "precession"
    path = tmp_path / "my.cfg"
    path.write_text("name=mine\nomega0=1,0,0\nt_end=1\n")
    assert resolve_scenario(str(path)).name == "mine"
    with pytest.raises(ConfigError):
        resolve_scenario("no-such-thing")


def test_csv_header_and_initial_row():
    sc = with_overrides(builtin_scenario("combined"), t_end=0.001)
    trace = run(sc)
    buf = io.StringIO()
    count = write_trace_csv(trace, buf)
    lines = buf.getvalue().split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("0,1e-05,10,0,1,1,0,0,")
    assert count == 2
    assert buf.getvalue().endswith("\n")


def test_csv_single_row_trace():
    sc = with_overrides(builtin_scenario("combined"), t_end=0.001)
    full = run(sc)
    single = Trace(scenario=sc, rows=full.rows[:1])
    buf = io.StringIO()
    assert write_trace_csv(single, buf) == 1


def test_csv_empty_trace_rejected():
    sc = builtin_scenario("combined")
    with pytest.raises(ValueError):
        write_trace_csv(Trace(scenario=sc, rows=[]), io.StringIO())


def test_csv_round_trip_is_bit_exact():
    sc = with_overrides(builtin_scenario("passive"), t_end=0.05)
    trace = run(sc)
    buf = io.StringIO()
    write_trace_csv(trace, buf)
    buf.seek(0)
    columns, data = read_trace_csv(buf)
    assert columns == CSV_HEADER.split(",")
    assert data.shape == (len(trace), 16)
    for i, row in enumerate(trace):
        original = [
            row.t, row.omega[0], row.omega[1], row.omega[2], row.I2, row.I3,
            row.l2, row.l3, row.u1, row.u2, row.V, row.E_kin,
            row.L_world[0], row.L_world[1], row.L_world[2], row.precession_norm_sq,
        ]
        for got, want in zip(data[i], original):
            assert math.copysign(1.0, got) == math.copysign(1.0, want)
            assert got == want


def test_csv_determinism_byte_identical():
    sc = with_overrides(builtin_scenario("combined"), t_end=0.2)
    a, b = io.StringIO(), io.StringIO()
    write_trace_csv(run(sc), a)
    write_trace_csv(run(sc), b)
    assert a.getvalue() == b.getvalue()


def test_panel_frames_table():
    assert panel_frames("alignment")[2] == ((0.0, 40.0), (-7.0, 10.0))
    assert panel_frames("alignment")[4] == ((-0.2, 2.5), (-0.2, 2.0))
    assert panel_frames("precession")[3] == ((-5.0, 5.0), (-5.0, 5.0))
    assert panel_frames("combined")[4] == ((-0.2, 4.0), (-0.2, 3.0))
    assert panel_frames("something-else") is None


def test_emit_plots_writes_four_svg_files(tmp_path):
    sc = with_overrides(builtin_scenario("alignment"), t_end=0.05)
    paths = emit_plots(run(sc), tmp_path)
    assert len(paths) == 4
    assert [p.name for p in paths] == [f"alignment_panel{i}.svg" for i in (1, 2, 3, 4)]
    for p in paths:
        content = p.read_text()
        assert content.lstrip().startswith("<?xml")


def test_summarize_single_row_equals_initial():
    sc = with_overrides(builtin_scenario("passive"), t_end=0.001)
    full = run(sc)
    summary = summarize(Trace(scenario=sc, rows=full.rows[:1]))
    assert np.array_equal(summary.final_omega, [10.0, 4.0, 1.0])
    assert (summary.final_I2, summary.final_I3) == (1.0, 1.0)
    assert summary.max_momentum_drift == 0.0
    assert summary.final_precession_norm_sq == full.rows[0].precession_norm_sq
    assert len(summary.segments) == 1 and summary.v_monotone


def test_summarize_segments_split_at_switch():
    from spindisk import SchedulePlan

    # a switch moved into a short horizon must split the statistics
    plan = SchedulePlan(((0.02, ObjectiveKind.ALIGNMENT), (1.0, ObjectiveKind.PRECESSION)))
    sc = with_overrides(builtin_scenario("combined"), t_end=0.03, dt=0.01, plan=plan)
    trace = run(sc)
    summary = summarize(trace)
    assert [seg.kind for seg in summary.segments] == [ObjectiveKind.ALIGNMENT,
                                                      ObjectiveKind.PRECESSION]
    assert summary.segments[0].t_end == 0.01
    assert summary.segments[1].t_start == 0.02
    assert "segment" in format_summary(summary)


def test_main_run_writes_outputs(tmp_path, capsys):
    rc = main(["run", "--scenario", "passive", "--t-end", "0.05",
               "--out", str(tmp_path), "--plots", "--attitude"])
    assert rc == 0
    assert (tmp_path / "passive.csv").is_file()
    assert (tmp_path / "passive_attitude.csv").is_file()
    for i in (1, 2, 3, 4):
        assert (tmp_path / f"passive_panel{i}.svg").is_file()
    out = capsys.readouterr().out
    assert "final omega" in out
    att_lines = (tmp_path / "passive_attitude.csv").read_text().splitlines()
    assert att_lines[0].startswith("t,R11,R12,R13,")
    assert att_lines[1].startswith("0,1,0,0,0,1,0,0,0,1")


def test_main_run_config_file(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text("name=tiny\nomega0=1,2,0\nt_end=0.01\n")
    rc = main(["run", "--scenario", str(cfg), "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "tiny.csv").is_file()


def test_main_exit_codes(tmp_path, capsys):
    assert main(["run", "--scenario", "no-such"]) == 1
    assert main(["run", "--scenario", "passive", "--dt", "-1"]) == 1
    assert main(["bogus-command"]) == 1
    # a destabilizing gain drives the inertia negative: integration failure
    rc = main(["run", "--scenario", "precession", "--gain", "2000",
               "--t-end", "1", "--out", str(tmp_path)])
    assert rc == 2
    capsys.readouterr()


def test_main_verify(capsys):
    assert main(["verify", "--samples", "50", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count(" pass  samples=") == 3
    # an impossible tolerance must surface as the verification exit code
    assert main(["verify", "--samples", "5", "--tol", "1e-30"]) == 3


def test_main_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for name in ("alignment", "passive", "precession", "combined"):
        assert name in out
