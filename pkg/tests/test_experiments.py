import numpy as np
import pytest

from vlcbo.experiments import (monte_carlo_cdf, region_map, sweep_box, sweep_thresholds, sweep_trajectory,
                               convergence_history)
from vlcbo.robust import RotationBox
from vlcbo.scenario import Qos, Scenario, Trajectory, region_map_preset, table2


def test_region_map_blocked_behind_user():
    sc = region_map_preset()
    t = region_map(sc, 0.5)
    assert len(t) == 144
    xs, ys, cls = t.array("x"), t.array("y"), t.column("region")
    behind = [c for x, y, c in zip(xs, ys, cls) if abs(x - 3) < 0.3 and y > 4]
    assert behind and all(c == "Blocked" for c in behind)
    assert "LOS-OAR-only" in cls


def test_region_map_no_tilt_means_no_oar_only_cells():
    t = region_map(region_map_preset(), 0.5, theta_max=0.0)
    assert "LOS-OAR-only" not in t.column("region")


def test_region_map_quarter_turn_symmetry():
    base = Scenario(leds=np.array([[3.0, 3.0, 3.0]]), heading=np.pi / 2)
    turned = base.with_(heading=np.pi)  # scene turned by +90 degrees about the room centre
    a = region_map(base, 0.5)
    b = region_map(turned, 0.5)
    lookup = {(round(x, 6), round(y, 6)): c for x, y, c in zip(b.array("x"), b.array("y"), b.column("region"))}
    for x, y, c in zip(a.array("x"), a.array("y"), a.column("region")):
        # (x, y) -> rotate about (3, 3) by +90 degrees
        assert lookup[(round(6 - y, 6), round(x, 6))] == c


def test_short_trajectory_flags_infeasible_rows():
    sc = table2().with_(trajectory=Trajectory(start=(5.2, 5.2), end=(5.6, 5.6), step=0.25))
    t = sweep_trajectory(sc, Qos(rate_min=5.0), "fixed")
    assert len(t) == 3
    st = t.column("status")
    assert st[0] == "ok" and st[-1].startswith("infeasible")
    assert np.isnan(t.array("qos_power")[-1])


def test_threshold_sweep_shapes():
    sc = table2()
    t = sweep_thresholds(sc, [4.0, 5.0], [15.0, 30.0])
    assert len(t) == 8 and set(t.column("status")) == {"ok"}
    non = t.where(mode="non_oar")
    for r in (4.0, 5.0):
        rows = non.where(rate_min=r).array("power")
        assert rows[0] == rows[1]
    oar = t.where(mode="fixed", theta_max_deg=30.0).array("power")
    assert oar[0] < oar[1]  # more rate costs more power
    by_theta = t.where(mode="fixed", rate_min=5.0).array("power")  # theta 15 then 30
    assert by_theta[1] <= by_theta[0] + 1e-8


def test_single_overhead_led_coincides_at_ninety_degrees():
    sc = Scenario(leds=np.array([[3.0, 3.0, 3.0]]), position=(3.0, 2.7))
    t = sweep_thresholds(sc, [5.0], [90.0])
    p = t.array("power")
    assert p[0] == pytest.approx(p[1], rel=1e-9)


def test_box_sweep_and_convergence_tables():
    sc = table2()
    t = sweep_box(sc, [0.0, 0.5], modes=("robust", "fixed"))
    assert len(t) == 4
    fixed = t.where(mode="fixed").array("power")
    assert fixed[0] == fixed[1]
    h = convergence_history(sc, [30.0])
    assert h.column("iteration")[0] == 1


def test_cdf_single_trial():
    t = monte_carlo_cdf(table2(), RotationBox.from_degrees(.5, .5, .5), n=1, schemes=("robust_oar",))
    assert len(t) == 1 and t.column("cdf") == [1.0]
