"""Command-line interface: ``run`` one scenario, ``sweep`` the full
controller-by-cable-mode grid, ``check`` the library invariants."""

import argparse
import sys

import numpy as np

from .config import CABLE_MODES, load_scenario
from .control import CONTROLLER_KINDS


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cdprsim",
        description="Adaptive passivity-based pose tracking on an 8-cable "
                    "parallel robot.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and write CSV/JSON")
    sweep_p = sub.add_parser(
        "sweep", help="run all controllers in both cable modes")
    check_p = sub.add_parser("check", help="run the invariant suites")

    for p in (run_p, sweep_p):
        p.add_argument("--config", default=None,
                       help="scenario YAML (defaults to the packaged robot)")
        p.add_argument("--duration", type=float, default=None, help="seconds")
        p.add_argument("--dt", type=float, default=None, help="time step, s")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--controller", choices=CONTROLLER_KINDS, default=None)
    run_p.add_argument("--cables", choices=CABLE_MODES, default=None)
    sweep_p.add_argument("--jobs", type=int, default=None,
                         help="parallel worker processes")
    check_p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)

    if args.command == "check":
        from .checks import run_all
        failures = 0
        for name, ok, detail in run_all(seed=args.seed):
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
            failures += 0 if ok else 1
        return 1 if failures else 0

    try:
        sc = load_scenario(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2

    sc = sc.with_overrides(duration=args.duration, dt=args.dt, seed=args.seed)

    if args.command == "run":
        from .sweep import run_and_save
        sc = sc.with_overrides(controller=args.controller, cables=args.cables)
        log, summary = run_and_save(sc, args.out)
        print(f"wrote {args.out}/trajectory.csv and summary.json")
        if log.failure is not None:
            print(f"run failed at t={log.failure['time']:.4f}s: "
                  f"{log.failure['message']}", file=sys.stderr)
            return 1
        ss = summary.get("rms_error_angle_steady_rad")
        if ss is not None:
            print(f"steady-state RMS error angle: {np.rad2deg(ss):.4f} deg, "
                  f"terminal position error: "
                  f"{summary['terminal_position_error_m'] * 1e3:.3f} mm")
        return 0

    if args.command == "sweep":
        from .sweep import format_table, sweep
        table = sweep(sc, args.out, jobs=args.jobs)
        print(format_table(table))
        if any(row["failed"] for row in table.values()):
            return 1
        return 0

    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
