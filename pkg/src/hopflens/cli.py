"""Command-line interface: tensor evaluation, curvature grids, ray tracing,
scenario batches, topological charge, and the cross-validation battery.

Exit codes: 0 success, 1 validation failure, 2 usage/input error,
3 scenario degradation (more than 10% of rays aborted).
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import sys

import numpy as np

from hopflens import scenarios, validate
from hopflens.effective_geometry import (
    inv_metric_cartesian,
    inv_metric_toroidal,
    metric_cartesian,
    ricci_scalar,
)
from hopflens.geodesics import (
    GeodesicState,
    IntegratorSettings,
    integrate,
    normalize_velocity,
)
from hopflens.hopf_map import (
    AnsatzConfig,
    ChartDomainError,
    cartesian_to_toroidal,
    hopf_charge_whitehead,
    linking_number_refined,
)
from hopflens.scenarios import _atomic_write

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_USAGE = 2
EXIT_DEGRADED = 3


class CliError(Exception):
    """Input or usage error; maps to exit code 2."""


def _parse_triple(text: str, what: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise CliError(f"{what} must be three comma-separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise CliError(f"invalid {what} {text!r}: {exc}") from exc


def _print_matrix(m: np.ndarray) -> None:
    for row in m:
        print(" ".join("%.15g" % v for v in row))


def cmd_metric(args) -> int:
    at = _parse_triple(args.at, "--at")
    try:
        if args.toroidal:
            p = cartesian_to_toroidal(at)
            minv = inv_metric_toroidal(AnsatzConfig(a=1, b=1), p)
            m = minv if args.inverse else np.linalg.inv(minv)
        else:
            m = inv_metric_cartesian(at) if args.inverse else metric_cartesian(at)
    except ChartDomainError as exc:
        raise CliError(str(exc)) from exc
    _print_matrix(m)
    return EXIT_OK


def cmd_ricci(args) -> int:
    if (args.at is None) == (args.grid is None):
        raise CliError("ricci requires exactly one of --at or --grid")
    if args.at is not None:
        print("%.15g" % float(ricci_scalar(_parse_triple(args.at, "--at"))))
        return EXIT_OK
    parts = args.grid.split(",")
    if len(parts) != 3:
        raise CliError(f"--grid must be min,max,n, got {args.grid!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"invalid --grid {args.grid!r}: {exc}") from exc
    if n < 2 or hi <= lo:
        raise CliError("--grid needs n >= 2 and max > min")
    axis = np.linspace(lo, hi, n)
    xs, ys, zs = np.meshgrid(axis, axis, axis, indexing="ij")
    pts = np.stack([xs, ys, zs], axis=-1).reshape(-1, 3)
    vals = ricci_scalar(pts)
    lines = ["x,y,z,R"]
    lines.extend("%.17g,%.17g,%.17g,%.17g" % (p[0], p[1], p[2], r)
                 for p, r in zip(pts, vals))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_checked(args.out, text)
        print(f"wrote {len(pts)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _write_checked(path: str, text: str) -> None:
    try:
        _atomic_write(path, text)
    except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def cmd_geodesic(args) -> int:
    start = _parse_triple(args.start, "--start")
    direction = _parse_triple(args.direction, "--direction")
    if not np.linalg.norm(direction) > 0:
        raise CliError("--direction must be nonzero")
    if args.t_end <= 0:
        raise CliError("--t-end must be positive")
    try:
        settings = IntegratorSettings(rel_tol=args.rel_tol, abs_tol=args.abs_tol,
                                      t_end=args.t_end)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    v0 = normalize_velocity(start[None, :], direction[None, :])[0]
    traj = integrate(GeodesicState(start, v0), settings)
    if args.out:
        lines = ["t,x,y,z,vx,vy,vz,drift"]
        for j in range(len(traj.t)):
            p, v = traj.positions[j], traj.velocities[j]
            lines.append("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
                         % (traj.t[j], p[0], p[1], p[2], v[0], v[1], v[2],
                            traj.drift[j]))
        _write_checked(args.out, "\n".join(lines) + "\n")
    p = traj.positions[-1]
    print("status=%s steps=%d t=%.15g final=%.15g,%.15g,%.15g max_drift=%.3e"
          % (traj.status, len(traj.t), traj.t[-1], p[0], p[1], p[2],
             traj.drift.max()))
    return EXIT_OK


def cmd_scenario(args) -> int:
    if args.config:
        try:
            cfg = scenarios.load_config(args.config)
        except FileNotFoundError as exc:
            raise CliError(f"config not found: {exc}") from exc
        except (ValueError, TypeError) as exc:
            raise CliError(f"invalid scenario config: {exc}") from exc
    elif args.builtin:
        if args.builtin not in scenarios.BUILDERS:
            raise CliError(f"unknown builtin scenario {args.builtin!r}; "
                           f"choose from {sorted(scenarios.BUILDERS)}")
        cfg = bundled_config(args.builtin)
    else:
        raise CliError("scenario requires --config or --builtin")

    outputs = cfg.outputs
    if args.trajectories_csv or args.diagnostics_json:
        outputs = scenarios.OutputSpec(
            trajectories_csv=args.trajectories_csv or outputs.trajectories_csv,
            diagnostics_json=args.diagnostics_json or outputs.diagnostics_json)
    result = scenarios.run(cfg)
    diag = scenarios.diagnostics_dict(result)
    if outputs.trajectories_csv:
        try:
            scenarios.export_trajectories_csv(result, outputs.trajectories_csv)
        except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
            raise CliError(f"cannot write {outputs.trajectories_csv}: {exc}") from exc
    if outputs.diagnostics_json:
        try:
            scenarios.export_diagnostics_json(result, outputs.diagnostics_json)
        except (FileNotFoundError, NotADirectoryError, PermissionError) as exc:
            raise CliError(f"cannot write {outputs.diagnostics_json}: {exc}") from exc
    print("scenario=%s rays=%d aborts=%d focal_points=%d max_drift=%s"
          % (cfg.name, result.n_rays, result.n_aborted,
             len(diag["focal_points"]),
             "%.3e" % diag["max_drift"] if diag["max_drift"] is not None else "n/a"))
    return EXIT_DEGRADED if result.degraded else EXIT_OK


def bundled_config(name: str) -> scenarios.ScenarioConfig:
    """Load one of the packaged scenario configs (fig2 ... fig7)."""
    ref = importlib.resources.files("hopflens") / "configs" / f"{name}.json"
    return scenarios.ScenarioConfig.from_dict(json.loads(ref.read_text()))


def cmd_charge(args) -> int:
    if args.a == 0 or args.b == 0:
        raise CliError("winding numbers a and b must be nonzero")
    cfg = AnsatzConfig(a=args.a, b=args.b)
    q = hopf_charge_whitehead(cfg)
    lk = linking_number_refined(cfg)
    print("whitehead=%.15g linking=%.15g expected=%d" % (q, lk, args.a * args.b))
    return EXIT_OK


def cmd_validate(args) -> int:
    results = validate.run_battery()
    text, payload = validate.report(results)
    print(text)
    if args.json:
        _write_checked(args.json, json.dumps(payload, indent=2) + "\n")
    else:
        print(json.dumps(payload))
    return EXIT_OK if payload["passed"] else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hopflens",
        description="Effective geometry and geodesic lensing around a Q=1 "
                    "Hopf soliton")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metric", help="print the effective metric at a point")
    p.add_argument("--at", required=True, metavar="x,y,z")
    p.add_argument("--inverse", action="store_true",
                   help="print the reciprocal (inverse) metric")
    p.add_argument("--toroidal", action="store_true",
                   help="use the toroidal chart components")
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("ricci", help="Ricci scalar at a point or on a grid")
    p.add_argument("--at", metavar="x,y,z")
    p.add_argument("--grid", metavar="min,max,n",
                   help="cubic lattice [min,max]^3 with n points per axis")
    p.add_argument("--out", help="write grid CSV here instead of stdout")
    p.set_defaults(func=cmd_ricci)

    p = sub.add_parser("geodesic", help="trace a single ray")
    p.add_argument("--start", required=True, metavar="x,y,z")
    p.add_argument("--direction", required=True, metavar="dx,dy,dz")
    p.add_argument("--t-end", type=float, default=8.0)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    p.add_argument("--abs-tol", type=float, default=1e-8)
    p.add_argument("--out", help="write trajectory CSV here")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("scenario", help="run a ray-bundle experiment")
    p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--builtin", metavar="figN",
                   help="bundled scenario (fig2 ... fig7)")
    p.add_argument("--trajectories-csv", help="override trajectory output path")
    p.add_argument("--diagnostics-json", help="override diagnostics output path")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("charge", help="topological charge of the torus ansatz")
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--b", type=int, default=1)
    p.set_defaults(func=cmd_charge)

    p = sub.add_parser("validate", help="run the cross-validation battery")
    p.add_argument("--json", help="write the machine-readable report here")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
