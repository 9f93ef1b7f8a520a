"""Empirical rate CDF under random handset rotation for robust and nominal designs."""
from _common import parser, write

from vlcbo.experiments import monte_carlo_cdf
from vlcbo.robust import RotationBox
from vlcbo.scenario import Qos, load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--rate", type=float, default=5.0)
    p.add_argument("--box-deg", type=float, nargs=3, default=[0.5, 0.5, 0.5])
    p.add_argument("--mc", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    sc = load_scenario(args.scenario)
    t = monte_carlo_cdf(sc, RotationBox.from_degrees(*args.box_deg), Qos(args.rate, sc.qos.theta_max),
                        n=args.mc, seed=args.seed)
    write(t, args, "rate_cdf")
    for s in dict.fromkeys(t.column("scheme")):
        sub = t.where(scheme=s)
        print(f"{s:>16}: power {sub.column('power')[0]:.5f} W, violation {sub.column('violation_rate')[0]:.4f}, "
              f"min rate {sub.array('rate').min():.4f}")
