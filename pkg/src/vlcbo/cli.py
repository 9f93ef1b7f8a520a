"""Command-line entry point: ``vlcbo <subcommand> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import experiments as ex
from .errors import Infeasible, NoConvergence, ParseError, ValidationError
from .results import ResultTable, emit
from .robust import RotationBox
from .scenario import Qos, load_scenario

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default="table2", help="YAML file or preset name (default: table2)")
    common.add_argument("--qos-rate", type=float, help="minimum rate, bit/s/Hz")
    common.add_argument("--theta-max-deg", type=float, help="PD tilt limit, degrees")
    common.add_argument("--box-deg", type=float, nargs=3, metavar=("A", "B", "G"),
                        help="rotation-error half-widths, degrees")
    common.add_argument("--mode", choices=ex.MODES, default="fixed")
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="overrides the scenario seed")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="vlcbo", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="single optimisation at the scenario's user position")
    rm = sub.add_parser("region-map", parents=[common], help="classify floor cells by link type")
    rm.add_argument("--grid-step", type=float, default=0.25)
    tr = sub.add_parser("sweep-traj", parents=[common], help="walk the scenario trajectory")
    tr.add_argument("--budget", type=float, default=0.1, help="power budget for the rate column, W")
    th = sub.add_parser("sweep-thresh", parents=[common], help="power over rate and tilt-limit grids")
    th.add_argument("--rates", type=float, nargs="+", default=[4.0, 5.0, 6.0])
    th.add_argument("--thetas-deg", type=float, nargs="+", default=[15.0, 20.0, 30.0])
    th.add_argument("--modes", nargs="+", choices=ex.MODES, default=["fixed", "non_oar"])
    bx = sub.add_parser("sweep-box", parents=[common], help="power over rotation-box half-widths")
    bx.add_argument("--widths-deg", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    cd = sub.add_parser("cdf", parents=[common], help="Monte Carlo rate CDF under random rotations")
    cd.add_argument("--mc", type=int, default=10_000, help="number of trials")
    return p


def _solve_table(sc, qs, mode, box):
    res, status = ex.solve_point(sc, qs, mode, box)
    N = len(sc.leds)
    cols = ["mode", "status", "power", "rate", "iterations", "converged", "n_x", "n_y", "n_z"] + \
        [f"p{i + 1}" for i in range(N)]
    t = ResultTable(cols, {"power": "W", "rate": "bit/s/Hz"},
                    {"scenario": sc.name, "seed": sc.seed, "rate_min": qs.rate_min,
                     "theta_max_deg": float(np.rad2deg(qs.theta_max))})
    nan = float("nan")
    row = dict(mode=mode, status=status, power=res.power if res else nan, rate=res.rate if res else nan,
               iterations=res.iterations if res else 0, converged=bool(res and res.converged))
    n = res.n if res else [nan] * 3
    row.update(n_x=float(n[0]), n_y=float(n[1]), n_z=float(n[2]))
    row.update({f"p{i + 1}": float(res.p[i]) if res else nan for i in range(N)})
    t.add(**row)
    return t, res is not None


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.scenario)
        q = Qos(rate_min=sc.qos.rate_min if args.qos_rate is None else args.qos_rate,
                theta_max=sc.qos.theta_max if args.theta_max_deg is None else np.deg2rad(args.theta_max_deg))
        kw = {"qos": q}
        if args.seed is not None:
            kw["seed"] = args.seed
        sc = sc.with_(**kw)
        box = RotationBox.from_degrees(*args.box_deg) if args.box_deg else RotationBox()
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    code = EXIT_OK
    try:
        if args.command == "solve":
            table, ok = _solve_table(sc, ex.qos_for(sc), args.mode, box)
            code = EXIT_OK if ok else EXIT_INFEASIBLE
        elif args.command == "region-map":
            table = ex.region_map(sc, args.grid_step)
        elif args.command == "sweep-traj":
            table = ex.sweep_trajectory(sc, mode=args.mode, budget=args.budget, box=box)
        elif args.command == "sweep-thresh":
            table = ex.sweep_thresholds(sc, args.rates, args.thetas_deg, args.modes, box)
        elif args.command == "sweep-box":
            table = ex.sweep_box(sc, args.widths_deg)
        else:
            table = ex.monte_carlo_cdf(sc, box, n=args.mc)
    except (Infeasible, NoConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        emit(table, args.out, args.format)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return code


if __name__ == "__main__":
    sys.exit(main())
