"""Minimum transmit power over rate targets and tilt limits, with and without orientation control."""
from _common import parser, write

from vlcbo.experiments import sweep_thresholds
from vlcbo.scenario import load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--rates", type=float, nargs="+", default=[4.0, 5.0, 6.0])
    p.add_argument("--thetas-deg", type=float, nargs="+", default=[5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    args = p.parse_args()
    t = sweep_thresholds(load_scenario(args.scenario), args.rates, args.thetas_deg)
    write(t, args, "threshold_sweep")
    for mode in ("fixed", "non_oar"):
        for r in args.rates:
            row = t.where(mode=mode, rate_min=r).array("power")
            print(f"{mode:>8} R={r}:", " ".join(f"{v:.5f}" for v in row))
