"""Command-line front end: scenario configs, CSV traces, summaries, and plots.

Config files are flat ``key = value`` text.  Recognized keys:

    name      scenario name; a built-in name also supplies that scenario's
              defaults for everything not overridden
    omega0    initial body rate, three comma-separated numbers [rad/s]
    t_end     run length [s]
    dt        integration step [s]
    mr2       disk mass times radius squared [kg m^2]
    plan      objective schedule, e.g. ``20:alignment;40:precession``
    gain      control output magnitude
    deadband  gradient-norm threshold below which the control is zeroed
    clamp_l   true/false: cap the mass offsets at the disk radius

Blank lines and ``#`` comments are ignored; unknown keys are rejected with
the offending line number.

CSV traces use the fixed header
``t,w1,w2,w3,I2,I3,l2,l3,u1,u2,V,Ekin,Lx,Ly,Lz,prec2`` with LF line endings
and shortest round-trip number formatting, so parsing a trace back yields
the original binary64 values exactly and repeated runs of one config are
byte-identical.

Exit codes: 0 success, 1 validation error, 2 integration failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, IntegrationError
from .gradcheck import verify_objective
from .objectives import ControlLawConfig, ObjectiveKind, SchedulePlan, scheduled_kind
from .rigidbody import DiskParams
from .simulation import Scenario, Trace, builtin_scenario, builtin_scenarios, run, with_overrides

CSV_HEADER = "t,w1,w2,w3,I2,I3,l2,l3,u1,u2,V,Ekin,Lx,Ly,Lz,prec2"

_CONFIG_KEYS = ("name", "omega0", "t_end", "dt", "mr2", "plan", "gain", "deadband", "clamp_l")

_BOOL_WORDS = {
    "true": True, "yes": True, "on": True, "1": True,
    "false": False, "no": False, "off": False, "0": False,
}

# Axis windows of the four standard figure panels per built-in scenario:
# 1 normalized energy/objective vs t, 2 rate components vs t,
# 3 (w2, w3) trajectory, 4 (I2, I3) trajectory.
_PANEL_FRAMES = {
    "alignment": {
        1: ((0.0, 40.0), (0.0, 1.0)),
        2: ((0.0, 40.0), (-7.0, 10.0)),
        3: ((-5.0, 5.0), (-5.0, 5.0)),
        4: ((-0.2, 2.5), (-0.2, 2.0)),
    },
    "passive": {
        1: ((0.0, 40.0), (0.0, 1.0)),
        2: ((0.0, 40.0), (-5.0, 10.0)),
        3: ((-5.0, 5.0), (-5.0, 5.0)),
        4: ((-0.2, 6.0), (-0.2, 6.0)),
    },
    "precession": {
        1: ((0.0, 80.0), (0.0, 1.0)),
        2: ((0.0, 80.0), (-5.0, 10.0)),
        3: ((-5.0, 5.0), (-5.0, 5.0)),
        4: ((-0.2, 6.0), (-0.2, 6.0)),
    },
    "combined": {
        1: ((0.0, 40.0), (0.0, 1.0)),
        2: ((0.0, 40.0), (-5.0, 10.0)),
        3: ((-5.0, 5.0), (-5.0, 5.0)),
        4: ((-0.2, 4.0), (-0.2, 3.0)),
    },
}


def panel_frames(name: str) -> dict | None:
    """Fixed axis windows for a built-in scenario's plot panels, else None."""
    return _PANEL_FRAMES.get(name)


def _fmt(value: float) -> str:
    # Shortest decimal string that round-trips the binary64 value (at most
    # 17 significant digits); integral values drop the trailing ".0".
    s = repr(float(value))
    return s[:-2] if s.endswith(".0") else s


def _parse_float(raw: str, key: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: malformed number for {key}: {raw!r}") from None


def parse_config(source: str) -> Scenario:
    """Build a scenario from flat key = value text.

    A ``name`` matching a built-in scenario supplies that scenario's values
    as defaults; everything else starts from the generic defaults.  Raises
    :class:`ConfigError` with a line number for malformed or unknown input.
    """
    entries: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(source.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"line {lineno}: expected key = value, got {text!r}")
        key, _, raw = text.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(
                f"line {lineno}: unknown key {key!r}; valid keys: {', '.join(_CONFIG_KEYS)}"
            )
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first on line {entries[key][0]})")
        entries[key] = (lineno, raw)

    name = entries["name"][1] if "name" in entries else "custom"
    try:
        base = builtin_scenario(name)
    except ConfigError:
        base = Scenario(
            name=name,
            omega0=(1e-5, 10.0, 0.0),
            inertia0=DiskParams().nominal_inertia(),
            plan=SchedulePlan.single(ObjectiveKind.ALIGNMENT, 40.0),
            t_end=40.0,
        )

    params = base.params
    if "mr2" in entries:
        lineno, raw = entries["mr2"]
        mr2 = _parse_float(raw, "mr2", lineno)
        if mr2 <= 0.0:
            raise ConfigError(f"line {lineno}: mr2 must be positive, got {raw}")
        params = DiskParams.from_mr2(mr2)

    omega0 = base.omega0
    if "omega0" in entries:
        lineno, raw = entries["omega0"]
        parts = raw.split(",")
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: omega0 needs 3 comma-separated numbers, got {raw!r}")
        omega0 = tuple(_parse_float(p.strip(), "omega0", lineno) for p in parts)

    t_end = base.t_end
    if "t_end" in entries:
        lineno, raw = entries["t_end"]
        t_end = _parse_float(raw, "t_end", lineno)
        if t_end <= 0.0:
            raise ConfigError(f"line {lineno}: t_end must be positive, got {raw}")

    dt = base.dt
    if "dt" in entries:
        lineno, raw = entries["dt"]
        dt = _parse_float(raw, "dt", lineno)
        if dt <= 0.0:
            raise ConfigError(f"line {lineno}: dt must be positive, got {raw}")

    plan = base.plan
    if "plan" in entries:
        lineno, raw = entries["plan"]
        segments = []
        for piece in raw.split(";"):
            piece = piece.strip()
            if not piece:
                continue
            if ":" not in piece:
                raise ConfigError(f"line {lineno}: plan segment must be time:objective, got {piece!r}")
            time_part, _, kind_part = piece.partition(":")
            end_time = _parse_float(time_part.strip(), "plan", lineno)
            try:
                kind = ObjectiveKind.parse(kind_part)
            except ConfigError as err:
                raise ConfigError(f"line {lineno}: {err}") from None
            segments.append((end_time, kind))
        try:
            plan = SchedulePlan(tuple(segments))
        except ConfigError as err:
            raise ConfigError(f"line {lineno}: {err}") from None

    cfg = base.control_cfg
    gain = cfg.gain
    deadband = cfg.deadband_eps
    if "gain" in entries:
        lineno, raw = entries["gain"]
        gain = _parse_float(raw, "gain", lineno)
        if gain <= 0.0:
            raise ConfigError(f"line {lineno}: gain must be positive, got {raw}")
    if "deadband" in entries:
        lineno, raw = entries["deadband"]
        deadband = _parse_float(raw, "deadband", lineno)
        if deadband <= 0.0:
            raise ConfigError(f"line {lineno}: deadband must be positive, got {raw}")

    clamp = base.clamp_l_to_radius
    if "clamp_l" in entries:
        lineno, raw = entries["clamp_l"]
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ConfigError(f"line {lineno}: clamp_l must be true or false, got {raw!r}")
        clamp = _BOOL_WORDS[word]

    if t_end < dt:
        raise ConfigError(f"t_end ({t_end}) must be at least one step dt ({dt})")
    return Scenario(
        name=name,
        omega0=omega0,
        inertia0=params.nominal_inertia(),
        plan=plan,
        t_end=t_end,
        dt=dt,
        params=params,
        control_cfg=ControlLawConfig(deadband_eps=deadband, gain=gain),
        clamp_l_to_radius=clamp,
    )


def serialize_config(scenario: Scenario) -> str:
    """Config text that parses back to an equivalent scenario.

    Only scenarios expressible in the flat format are supported: the initial
    attitude must be the identity and the initial inertia nominal.
    """
    if not np.array_equal(scenario.R0, np.eye(3)):
        raise ConfigError("cannot serialize a scenario with a non-identity initial attitude")
    nominal = scenario.params.nominal_inertia()
    if (scenario.inertia0.I2, scenario.inertia0.I3) != (nominal.I2, nominal.I3):
        raise ConfigError("cannot serialize a scenario with a non-nominal initial inertia")
    plan_text = ";".join(f"{_fmt(end)}:{kind.value}" for end, kind in scenario.plan.segments)
    lines = [
        f"name={scenario.name}",
        f"omega0={','.join(_fmt(v) for v in scenario.omega0)}",
        f"t_end={_fmt(scenario.t_end)}",
        f"dt={_fmt(scenario.dt)}",
        f"mr2={_fmt(scenario.params.mr2)}",
        f"plan={plan_text}",
        f"gain={_fmt(scenario.control_cfg.gain)}",
        f"deadband={_fmt(scenario.control_cfg.deadband_eps)}",
        f"clamp_l={'true' if scenario.clamp_l_to_radius else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def resolve_scenario(selector: str) -> Scenario:
    """Map a CLI selector to a scenario: built-in name first, then config path."""
    try:
        return builtin_scenario(selector)
    except ConfigError:
        pass
    path = Path(selector)
    if path.is_file():
        return parse_config(path.read_text())
    raise ConfigError(f"{selector!r} is neither a built-in scenario nor a config file")


def write_trace_csv(trace: Trace, destination) -> int:
    """Write a trace to a text stream; returns the number of data rows."""
    if not trace.rows:
        raise ValueError("refusing to write an empty trace")
    destination.write(CSV_HEADER + "\n")
    count = 0
    for row in trace.rows:
        fields = (
            row.t, row.omega[0], row.omega[1], row.omega[2], row.I2, row.I3,
            row.l2, row.l3, row.u1, row.u2, row.V, row.E_kin,
            row.L_world[0], row.L_world[1], row.L_world[2], row.precession_norm_sq,
        )
        destination.write(",".join(_fmt(v) for v in fields) + "\n")
        count += 1
    return count


def read_trace_csv(stream) -> tuple[list[str], np.ndarray]:
    """Parse a trace CSV back into its header fields and a float matrix."""
    header = stream.readline().strip()
    columns = header.split(",")
    data = [[float(cell) for cell in line.strip().split(",")] for line in stream if line.strip()]
    return columns, np.array(data)


def _emit_panel(fig_path: Path, draw, frame):
    from matplotlib.figure import Figure

    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    draw(ax)
    if frame is not None:
        ax.set_xlim(*frame[0])
        ax.set_ylim(*frame[1])
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(fig_path, format="svg")


def emit_plots(trace: Trace, out_dir) -> list[Path]:
    """Write the four standard panels as SVG files; returns the file paths.

    Built-in scenarios use the fixed axis windows from :func:`panel_frames`;
    anything else autoscales.  Panel 1 shows kinetic energy and the objective
    normalized by their initial values (raw values live in the CSV).
    """
    if not trace.rows:
        raise ValueError("refusing to plot an empty trace")
    out_dir = Path(out_dir)
    name = trace.scenario.name
    frames = panel_frames(name) or {}
    t = np.array([row.t for row in trace.rows])
    omega = np.array([row.omega for row in trace.rows])
    i2 = np.array([row.I2 for row in trace.rows])
    i3 = np.array([row.I3 for row in trace.rows])
    v = np.array([row.V for row in trace.rows])
    e_kin = np.array([row.E_kin for row in trace.rows])

    v_scale = v[0] if v[0] > 0.0 else 1.0
    e_scale = e_kin[0] if e_kin[0] > 0.0 else 1.0

    def panel1(ax):
        ax.plot(t, e_kin / e_scale, color="tab:blue", label="kinetic energy (normalized)")
        ax.plot(t, v / v_scale, color="tab:red", label="objective V (normalized)")
        ax.set_xlabel("t [s]")
        ax.legend(loc="upper right", fontsize=8)

    def panel2(ax):
        for idx, label in enumerate(("w1", "w2", "w3")):
            ax.plot(t, omega[:, idx], label=label)
        ax.set_xlabel("t [s]")
        ax.set_ylabel("body rate [rad/s]")
        ax.legend(loc="upper right", fontsize=8)

    def panel3(ax):
        ax.plot(omega[:, 1], omega[:, 2], linewidth=0.7)
        ax.set_xlabel("w2 [rad/s]")
        ax.set_ylabel("w3 [rad/s]")

    def panel4(ax):
        ax.plot(i2, i3, linewidth=0.7)
        ax.set_xlabel("I2 [kg m^2]")
        ax.set_ylabel("I3 [kg m^2]")

    paths = []
    for number, draw in ((1, panel1), (2, panel2), (3, panel3), (4, panel4)):
        path = out_dir / f"{name}_panel{number}.svg"
        _emit_panel(path, draw, frames.get(number))
        paths.append(path)
    return paths


@dataclass(frozen=True)
class SegmentStats:
    kind: ObjectiveKind
    t_start: float
    t_end: float
    v_min: float
    v_max: float
    v_monotone: bool


@dataclass(frozen=True)
class TraceSummary:
    """Endpoint values and per-segment objective statistics of a trace."""

    final_omega: np.ndarray
    final_I2: float
    final_I3: float
    max_momentum_drift: float
    final_precession_norm_sq: float
    segments: tuple
    v_monotone: bool


V_MONOTONE_SLACK = 1e-9


def summarize(trace: Trace) -> TraceSummary:
    """Endpoint state, worst relative momentum drift, and per-segment V stats."""
    if not trace.rows:
        raise ValueError("cannot summarize an empty trace")
    rows = trace.rows
    L0 = rows[0].L_world
    scale = float(np.linalg.norm(L0))
    if scale == 0.0:
        scale = 1.0
    drift = max(float(np.linalg.norm(row.L_world - L0)) for row in rows) / scale

    plan = trace.scenario.plan
    segments = []
    seg_rows = [rows[0]]
    seg_kind = scheduled_kind(plan, rows[0].t)
    for row in rows[1:]:
        kind = scheduled_kind(plan, row.t)
        if kind is not seg_kind:
            segments.append(_segment_stats(seg_kind, seg_rows))
            seg_rows = [row]
            seg_kind = kind
        else:
            seg_rows.append(row)
    segments.append(_segment_stats(seg_kind, seg_rows))

    last = rows[-1]
    return TraceSummary(
        final_omega=last.omega.copy(),
        final_I2=last.I2,
        final_I3=last.I3,
        max_momentum_drift=drift,
        final_precession_norm_sq=last.precession_norm_sq,
        segments=tuple(segments),
        v_monotone=all(seg.v_monotone for seg in segments),
    )


def _segment_stats(kind: ObjectiveKind, rows) -> SegmentStats:
    values = [row.V for row in rows]
    monotone = all(b <= a + V_MONOTONE_SLACK for a, b in zip(values, values[1:]))
    return SegmentStats(
        kind=kind,
        t_start=rows[0].t,
        t_end=rows[-1].t,
        v_min=min(values),
        v_max=max(values),
        v_monotone=monotone,
    )


def format_summary(summary: TraceSummary) -> str:
    w = summary.final_omega
    lines = [
        f"final omega      : ({_fmt(w[0])}, {_fmt(w[1])}, {_fmt(w[2])}) rad/s",
        f"final inertia    : I2={_fmt(summary.final_I2)}, I3={_fmt(summary.final_I3)} kg m^2",
        f"momentum drift   : {summary.max_momentum_drift:.3e} (max relative)",
        f"final prec. norm2: {summary.final_precession_norm_sq:.6g}",
        f"V monotone       : {summary.v_monotone} (slack {V_MONOTONE_SLACK:g}/step)",
    ]
    for seg in summary.segments:
        lines.append(
            f"  segment {seg.kind.value:11s} t=[{seg.t_start:g}, {seg.t_end:g}]  "
            f"V in [{seg.v_min:.6g}, {seg.v_max:.6g}]  monotone={seg.v_monotone}"
        )
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spindisk", description="Inertia-shaping spin control simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario and write its trace")
    p_run.add_argument("--scenario", required=True, help="built-in name or config file path")
    p_run.add_argument("--dt", type=float, help="override integration step [s]")
    p_run.add_argument("--t-end", type=float, help="override run length [s]")
    p_run.add_argument("--gain", type=float, help="override control magnitude")
    p_run.add_argument("--deadband", type=float, help="override control deadband")
    p_run.add_argument("--out", default=".", help="output directory (default: current)")
    p_run.add_argument("--plots", action="store_true", help="also write the four SVG panels")
    p_run.add_argument("--attitude", action="store_true",
                       help="also write a CSV of the attitude matrix per step")
    p_run.set_defaults(func=_cmd_run)

    p_verify = sub.add_parser("verify", help="finite-difference check of all objectives")
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.add_argument("--tol", type=float, default=1e-6)
    p_verify.add_argument("--seed", type=int, default=42)
    p_verify.set_defaults(func=_cmd_verify)

    p_list = sub.add_parser("list", help="list the built-in scenarios")
    p_list.set_defaults(func=_cmd_list)
    return parser


def _cmd_run(args) -> int:
    scenario = resolve_scenario(args.scenario)
    overrides = {}
    if args.dt is not None:
        if args.dt <= 0.0:
            raise ConfigError(f"--dt must be positive, got {args.dt}")
        overrides["dt"] = args.dt
    if args.t_end is not None:
        if args.t_end <= 0.0:
            raise ConfigError(f"--t-end must be positive, got {args.t_end}")
        overrides["t_end"] = args.t_end
    if args.gain is not None or args.deadband is not None:
        cfg = scenario.control_cfg
        overrides["control_cfg"] = ControlLawConfig(
            deadband_eps=args.deadband if args.deadband is not None else cfg.deadband_eps,
            gain=args.gain if args.gain is not None else cfg.gain,
        )
    if overrides:
        scenario = with_overrides(scenario, **overrides)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = run(scenario, record_attitude=args.attitude)

    csv_path = out_dir / f"{scenario.name}.csv"
    with open(csv_path, "w", newline="") as stream:
        rows = write_trace_csv(trace, stream)
    print(f"wrote {rows} rows to {csv_path}")

    if args.attitude:
        att_path = out_dir / f"{scenario.name}_attitude.csv"
        with open(att_path, "w", newline="") as stream:
            stream.write("t," + ",".join(f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)) + "\n")
            for row, R in zip(trace.rows, trace.attitudes):
                stream.write(_fmt(row.t) + "," + ",".join(_fmt(v) for v in R.ravel()) + "\n")
        print(f"wrote attitude trace to {att_path}")

    if args.plots:
        for path in emit_plots(trace, out_dir):
            print(f"wrote {path}")

    print(format_summary(summarize(trace)))
    return 0


def _cmd_verify(args) -> int:
    all_passed = True
    for kind in ObjectiveKind:
        report = verify_objective(kind, n_samples=args.samples, tol=args.tol, seed=args.seed)
        print(report.summary_line())
        all_passed = all_passed and report.passed
    if not all_passed:
        print("verification FAILED", file=sys.stderr)
        return 3
    return 0


def _cmd_list(args) -> int:
    for scenario in builtin_scenarios():
        plan_text = "; ".join(f"{kind.value} until {end:g}s" for end, kind in scenario.plan.segments)
        w = scenario.omega0
        print(f"{scenario.name:11s} omega0=({w[0]:g}, {w[1]:g}, {w[2]:g})  "
              f"t_end={scenario.t_end:g}s  dt={scenario.dt:g}s  plan: {plan_text}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except IntegrationError as err:
        print(f"integration failure: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
