"""Transmit power per alternating-optimisation cycle for several tilt limits."""
from _common import parser, write

from vlcbo.experiments import convergence_history
from vlcbo.scenario import Qos, load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--rate", type=float, default=5.0)
    p.add_argument("--thetas-deg", type=float, nargs="+", default=[15.0, 20.0, 30.0])
    args = p.parse_args()
    t = convergence_history(load_scenario(args.scenario), args.thetas_deg, Qos(rate_min=args.rate))
    write(t, args, "ao_convergence")
    for th in args.thetas_deg:
        print(f"theta_max {th:>4} deg:", " ".join(f"{v:.6f}" for v in t.where(theta_max_deg=th).array("power")))
