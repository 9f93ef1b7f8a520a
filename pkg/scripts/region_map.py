"""Floor map of link classes (blocked, LOS for both receivers, LOS only with tilt, NLOS)."""
from _common import parser, write

from vlcbo.experiments import REGIONS, region_map
from vlcbo.scenario import load_scenario

if __name__ == "__main__":
    p = parser(__doc__)
    p.set_defaults(scenario="region-map")
    p.add_argument("--grid-step", type=float, default=0.1)
    args = p.parse_args()
    t = region_map(load_scenario(args.scenario), args.grid_step)
    write(t, args, "region_map")
    codes = t.column("region_code")
    for k, name in enumerate(REGIONS):
        print(f"{name:>13}: {codes.count(k)} cells")
