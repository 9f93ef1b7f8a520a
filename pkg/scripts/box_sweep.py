"""Transmit power versus the half-width of the rotation-error box."""
from _common import parser, write

from vlcbo.experiments import sweep_box
from vlcbo.scenario import Qos, load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.add_argument("--rate", type=float, default=5.0)
    p.add_argument("--widths-deg", type=float, nargs="+", default=[0.0, 0.5, 1.0, 1.5, 2.0])
    args = p.parse_args()
    sc = load_scenario(args.scenario)
    t = sweep_box(sc, args.widths_deg, Qos(args.rate, sc.qos.theta_max))
    write(t, args, "box_sweep")
    for m in ("robust", "robust_non_oar", "fixed", "non_oar"):
        print(f"{m:>15}:", " ".join(f"{v:.5f}" for v in t.where(mode=m).array("power")))
