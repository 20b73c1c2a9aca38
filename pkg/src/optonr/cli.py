"""Command-line entry point: ``optonr <command> [--config FILE] ...``.

Commands: solve, sweep-power, sweep-detuning, stability, oracle, figure <id>.
Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, emit, load_config, parse_config
from .model import TWO_PI, Direction, DriveScenario
from .oracle import MeanFieldState, relative_distance, trajectory
from .stability import EigenSolverError
from .transmission import (
    Axis,
    BranchPolicy,
    NoStableRootError,
    SweepResult,
    axis_values,
    isolation,
    select,
    steady_states,
    sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

SWEEP_COLUMNS = [
    "axis_value", "direction", "T21", "T12", "isolation_dB",
    "branch21", "branch12", "stable21", "stable12",
    "n_roots_fwd", "n_roots_bwd", "x_lower", "x_middle", "x_upper",
    "x_lower_bwd", "x_middle_bwd", "x_upper_bwd",
]
TRAJECTORY_COLUMNS = ["t", "re_alpha1", "im_alpha1", "re_alpha2", "im_alpha2", "q", "p"]

# panel name -> (command, overrides in canonical config keys)
FIGURES = {
    "fig2a": [("fig2a", "sweep-power", dict(delta1_GHz=2.0, delta2_GHz=0.0, J_GHz=0.5))],
    "fig2b": [("fig2b", "sweep-power", dict(delta1_GHz=4.0, delta2_GHz=4.0, J_GHz=3.0))],
    "fig2c": [("fig2c", "sweep-power", dict(delta1_GHz=4.6, delta2_GHz=4.6, J_GHz=3.0))],
    "fig2d": [("fig2d", "sweep-power", dict(delta1_GHz=4.6, delta2_GHz=4.6, J_GHz=3.0, power_stop_mW=30.0))],
    "fig3": [
        ("fig3a", "sweep-detuning", dict(J_GHz=4.0, p_in_mW=0.1)),
        ("fig3b", "sweep-detuning", dict(J_GHz=4.0, p_in_mW=20.0)),
        ("fig3c", "sweep-detuning", dict(J_GHz=4.0, p_in_mW=30.0)),
    ],
    "fig4a": [("fig4a", "sweep-detuning", dict(J_GHz=5.0, p_in_mW=30.0))],
    "fig4b": [("fig4b", "sweep-detuning", dict(J_GHz=6.0, p_in_mW=30.0))],
    "fig5a": [("fig5a", "sweep-detuning", dict(J_GHz=4.0, g_MHz=8.0, p_in_mW=0.3))],
    "fig5b": [("fig5b", "sweep-detuning", dict(J_GHz=4.0, omega_m_GHz=6.0 / 1.1, p_in_mW=30.0 / 1.1))],
}


class NumericalFailure(RuntimeError):
    pass


def apply_preset(config: RunConfig, overrides: dict) -> RunConfig:
    """Fill preset values for every key the user did not set explicitly."""
    chosen = {}
    for key, value in overrides.items():
        if key in config.explicit:
            if getattr(config, key) != value:
                warnings.warn(f"preset value {key}={value!r} ignored; keeping explicit {getattr(config, key)!r}")
            continue
        chosen[key] = value
    return config.with_overrides(chosen)


def _directions(config: RunConfig) -> tuple[Direction, ...]:
    if config.direction == "both":
        return (Direction.FORWARD, Direction.BACKWARD)
    return (Direction(config.direction),)


def _traversals(config: RunConfig) -> tuple[str, ...]:
    return ("up", "down") if config.traversal == "both" else (config.traversal,)


def _policy(config: RunConfig) -> BranchPolicy:
    return BranchPolicy(config.branch)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if hasattr(v, "value"):
        return str(v.value)
    return str(v)


def run_sweep(config: RunConfig, axis: Axis) -> SweepResult:
    params = config.params()
    log = config.spacing == "log"
    if axis is Axis.POWER:
        values = axis_values(config.power_start_mW * 1e-3, config.power_stop_mW * 1e-3, config.points, log)
        return sweep(params, axis, values, directions=_directions(config),
                     traversals=_traversals(config), policy=_policy(config))
    values = TWO_PI * 1e9 * axis_values(config.detuning_start_GHz, config.detuning_stop_GHz, config.points, log)
    return sweep(params, axis, values, p_in=config.p_in, directions=_directions(config),
                 traversals=_traversals(config), policy=_policy(config))


def sweep_rows(result: SweepResult) -> list[dict]:
    """Rows of the sweep CSV; axis values in mW (power) or GHz (detuning)."""
    unit = 1e3 if result.axis is Axis.POWER else 1.0 / (TWO_PI * 1e9)
    rows = []
    for trav, pts in result.points.items():
        idx = range(len(result.values)) if trav == "up" else range(len(result.values) - 1, -1, -1)
        for i, pt in zip(idx, pts):
            branches = result.all_branches[i]
            fwd = branches.get(Direction.FORWARD, [])
            bwd = branches.get(Direction.BACKWARD, [])
            row = {
                "axis_value": float(result.values[i]) * unit,
                "direction": trav,
                "T21": pt.T21, "T12": pt.T12,
                "isolation_dB": pt.isolation_dB if pt.T21 is not None and pt.T12 is not None else None,
                "branch21": pt.branch21, "branch12": pt.branch12,
                "stable21": pt.stable21, "stable12": pt.stable12,
                "n_roots_fwd": len(fwd) if fwd else None,
                "n_roots_bwd": len(bwd) if bwd else None,
            }
            for suffix, sols in (("", fwd), ("_bwd", bwd)):
                by_branch = {s.branch.value: s.x for s in sols}
                if len(sols) == 1:
                    by_branch = {"lower": sols[0].x}
                for name in ("lower", "middle", "upper"):
                    row[f"x_{name}{suffix}"] = by_branch.get(name)
            rows.append(row)
    return rows


def write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return _fmt(v)
    if hasattr(v, "value") and not isinstance(v, (int, float)):
        return v.value
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


def write_json(obj) -> str:
    def walk(o):
        if isinstance(o, dict):
            return {k: walk(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [walk(v) for v in o]
        return _jsonable(o)

    return json.dumps(walk(obj), indent=2) + "\n"


def sweep_output(result: SweepResult, fmt: str) -> str:
    rows = sweep_rows(result)
    if fmt == "json":
        return write_json({
            "axis": result.axis.value,
            "axis_unit": "mW" if result.axis is Axis.POWER else "GHz",
            "p_in_mW": None if result.p_in is None else result.p_in * 1e3,
            "folds": [
                {"traversal": f.traversal, "direction": f.direction,
                 "axis_value": f.axis_value * (1e3 if result.axis is Axis.POWER else 1 / (TWO_PI * 1e9))}
                for f in result.folds
            ],
            "rows": rows,
        })
    return write_csv(rows, SWEEP_COLUMNS)


def solve_report(config: RunConfig) -> dict:
    params = config.params()
    policy = BranchPolicy.HIGHEST_STABLE if config.branch == "continued" else _policy(config)
    report = {"p_in_mW": config.p_in_mW, "policy": policy.value, "directions": {}}
    selected = {}
    for d in (Direction.FORWARD, Direction.BACKWARD):
        sols = steady_states(params, DriveScenario(d, config.p_in))
        try:
            pick = select(sols, policy)
        except NoStableRootError:
            pick = None
        selected[d] = pick
        report["directions"][d.value] = {
            "branches": [
                {
                    "branch": s.branch, "x": s.x, "T": s.transmission,
                    "alpha1": s.alpha1, "alpha2": s.alpha2, "alpha_out": s.alpha_out, "qbar": s.qbar,
                    "stability": s.stability, "max_real_part": s.report.max_real_part,
                    "selected": pick is s,
                }
                for s in sols
            ],
            "T": None if pick is None else pick.transmission,
            "branch": None if pick is None else pick.branch,
        }
    f, b = selected[Direction.FORWARD], selected[Direction.BACKWARD]
    if f is not None and b is not None:
        iso = isolation(f.transmission, b.transmission)
        report.update(T21=f.transmission, T12=b.transmission, isolation=iso.ratio, isolation_dB=iso.dB)
    else:
        report.update(T21=None, T12=None, isolation=None, isolation_dB=None)
    return report


def solve_text(report: dict) -> str:
    lines = [f"p_in = {report['p_in_mW']:.6g} mW, branch policy: {report['policy']}"]
    for name, block in report["directions"].items():
        lines.append(f"[{name}]")
        for br in block["branches"]:
            mark = "*" if br["selected"] else " "
            lines.append(
                f" {mark} {br['branch'].value:<7} T={br['T']:.6g}  x={br['x']:.6g}  qbar={br['qbar']:.6g}  "
                f"{br['stability'].value} (max Re = {br['max_real_part']:.4g} rad/s)"
            )
    if report["isolation_dB"] is not None:
        lines.append(f"T21 = {report['T21']:.4g}, T12 = {report['T12']:.4g}, isolation = {report['isolation_dB']:.4g} dB")
    else:
        lines.append("isolation undefined: no stable branch in at least one direction")
    return "\n".join(lines) + "\n"


def stability_rows(config: RunConfig) -> list[dict]:
    params = config.params()
    rows = []
    for d in _directions(config):
        for s in steady_states(params, DriveScenario(d, config.p_in)):
            for k, lam in enumerate(s.report.eigenvalues):
                rows.append({
                    "direction": d, "branch": s.branch, "index": k,
                    "re": float(lam.real), "im": float(lam.imag), "stable": s.stability,
                })
    return rows


def oracle_run(config: RunConfig, seed: str, perturbation: float, horizon: float | None, samples: int):
    params = config.params()
    d = _directions(config)[0]
    scenario = DriveScenario(d, config.p_in)
    sols = steady_states(params, scenario)
    if seed == "zero":
        initial = MeanFieldState()
    else:
        match = [s for s in sols if s.branch.value == seed or (seed == "lower" and len(sols) == 1)]
        if not match:
            raise ConfigError(f"no {seed} branch at these parameters", key="seed")
        s = match[0]
        initial = MeanFieldState(s.alpha1 * (1 + perturbation), s.alpha2, s.qbar, 0.0)
    times, states, result = trajectory(params, scenario, initial, horizon=horizon, samples=samples,
                                       stop_on_convergence=True)
    distances = {s.branch.value: relative_distance(result.state, s) for s in sols}
    best = min(distances, key=distances.get)
    verdict = {
        "direction": d, "seed": seed, "converged": result.converged, "diverged": result.diverged,
        "t_end": result.state.t, "nearest_branch": best, "relative_distance": distances[best],
        "nearest_branch_stability": next(s.stability for s in sols if s.branch.value == best),
    }
    rows = [
        {"t": float(t), "re_alpha1": y[0].real, "im_alpha1": y[0].imag, "re_alpha2": y[1].real,
         "im_alpha2": y[1].imag, "q": y[2].real, "p": y[3].real}
        for t, y in zip(times, states)
    ]
    return rows, verdict


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _panel_path(out: str, panel: str, n_panels: int) -> str:
    if n_panels == 1:
        return out
    p = Path(out)
    return str(p.with_name(f"{p.stem}_{panel}{p.suffix}"))


def run_command(command: str, config: RunConfig, figure: str | None = None, out: str | None = None,
                seed: str = "zero", perturbation: float = 1e-3, horizon: float | None = None,
                samples: int = 2000, require_convergence: bool = False) -> int:
    out = out or config.out or None
    fmt = config.format
    if command == "solve":
        report = solve_report(config)
        _emit(write_json(report) if fmt == "json" else solve_text(report), out)
        return EXIT_OK
    if command in ("sweep-power", "sweep-detuning"):
        axis = Axis.POWER if command == "sweep-power" else Axis.DETUNING
        _emit(sweep_output(run_sweep(config, axis), fmt), out)
        return EXIT_OK
    if command == "stability":
        rows = stability_rows(config)
        _emit(write_json(rows) if fmt == "json" else write_csv(rows, ["direction", "branch", "index", "re", "im", "stable"]), out)
        return EXIT_OK
    if command == "oracle":
        rows, verdict = oracle_run(config, seed, perturbation, horizon, samples)
        if fmt == "json":
            _emit(write_json({"verdict": verdict, "trajectory": rows}), out)
        else:
            _emit(write_csv(rows, TRAJECTORY_COLUMNS), out)
            sys.stderr.write(write_json(verdict))
        if require_convergence and not verdict["converged"]:
            raise NumericalFailure("trajectory did not converge within the horizon")
        return EXIT_OK
    if command == "figure":
        if figure not in FIGURES:
            raise ConfigError(f"unknown figure id {figure!r}; choose from {', '.join(FIGURES)}", key="figure")
        panels = FIGURES[figure]
        for panel, sub, overrides in panels:
            cfg = apply_preset(config, overrides)
            text = sweep_output(run_sweep(cfg, Axis.POWER if sub == "sweep-power" else Axis.DETUNING), fmt)
            if out:
                _emit(text, _panel_path(out, panel, len(panels)))
            else:
                if len(panels) > 1:
                    sys.stdout.write(f"# panel {panel}\n")
                sys.stdout.write(text)
        return EXIT_OK
    raise ConfigError(f"unknown command {command!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (JSON or key = value)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="extra configuration entry, same syntax as the file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--points", type=int)
    common.add_argument("--direction", choices=["forward", "backward", "both"])
    common.add_argument("--traversal", choices=["up", "down", "both"])
    common.add_argument("--branch", choices=["lowest", "highest", "continued"])
    common.add_argument("--log", action="store_true", help="log-spaced sweep grid")

    parser = argparse.ArgumentParser(prog="optonr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep-power", "sweep-detuning", "stability"):
        sub.add_parser(name, parents=[common])
    o = sub.add_parser("oracle", parents=[common])
    o.add_argument("--seed", choices=["zero", "lower", "middle", "upper"], default="zero")
    o.add_argument("--perturbation", type=float, default=1e-3)
    o.add_argument("--horizon", type=float, help="integration horizon in seconds")
    o.add_argument("--samples", type=int, default=2000)
    o.add_argument("--require-convergence", action="store_true")
    f = sub.add_parser("figure", parents=[common])
    f.add_argument("figure_id", choices=sorted(FIGURES))
    sub.add_parser("show-config", parents=[common], help="print the resolved configuration")
    return parser


def resolve_config(args) -> RunConfig:
    text = ""
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
    config = parse_config(text)
    if args.set:
        extra = parse_config("\n".join(args.set))
        config = config.with_overrides({k: getattr(extra, k) for k in extra.explicit}, mark_explicit=True)
    flags = {}
    for name in ("format", "points", "direction", "traversal", "branch"):
        v = getattr(args, name, None)
        if v is not None:
            flags[name] = v
    if getattr(args, "log", False):
        flags["spacing"] = "log"
    if flags:
        config = config.with_overrides(flags, mark_explicit=True)
    return config.validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        config = resolve_config(args)
        if args.command == "show-config":
            _emit(emit(config), args.out)
            return EXIT_OK
        return run_command(
            args.command, config,
            figure=getattr(args, "figure_id", None), out=args.out,
            seed=getattr(args, "seed", "zero"), perturbation=getattr(args, "perturbation", 1e-3),
            horizon=getattr(args, "horizon", None), samples=getattr(args, "samples", 2000),
            require_convergence=getattr(args, "require_convergence", False),
        )
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EigenSolverError, NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
