"""Rate along the diagonal walk at a fixed power budget, tiltable versus fixed PD."""
from _common import parser, write

from vlcbo.experiments import sweep_trajectory
from vlcbo.results import ResultTable
from vlcbo.scenario import Qos, load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--budget", type=float, default=0.1, help="W")
    args = p.parse_args()
    sc = load_scenario(args.scenario)
    tabs = {m: sweep_trajectory(sc, Qos(rate_min=args.rate, theta_max=sc.qos.theta_max), m, args.budget)
            for m in ("fixed", "non_oar")}
    merged = ResultTable(["mode"] + tabs["fixed"].columns, tabs["fixed"].units, tabs["fixed"].meta)
    for m, t in tabs.items():
        merged.rows += [[m] + r for r in t.rows]
    write(merged, args, "trajectory_sweep")
    x = tabs["fixed"].array("ue_x")
    for xi, a, b in list(zip(x, tabs["fixed"].array("rate"), tabs["non_oar"].array("rate")))[::10]:
        print(f"X={xi:5.2f}  tilt {a:6.3f}  flat {b:6.3f}")
