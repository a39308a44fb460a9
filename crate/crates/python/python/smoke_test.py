"""Smoke test for the redlight extension module."""

import json
import math
import pathlib

import redlight

ROOT = pathlib.Path(__file__).resolve().parents[3]


def main():
    p = redlight.Problem.exponential(alpha=6, beta=20, v_max=200, v0=200, d=4000, L=4000, rate=0.1)
    assert p.validate() == []
    assert redlight.v_beta(p) == 60.0

    report = redlight.solve(p)
    assert report.pattern == "vmax~>el~>beta~>0", report.pattern
    assert abs(report.v_c_star - 86.944521) < 1e-5, report.v_c_star
    traj = report.trajectory
    assert abs(traj.total_distance() - 4000) < 1e-6
    assert abs(redlight.expected_arrival(traj, p) - report.expected_arrival) < 1e-12

    mean, se = redlight.expected_arrival_mc(traj, p, 20000, seed=3)
    assert abs(mean - report.expected_arrival) < 4 * se

    again = redlight.Trajectory.from_json(p, report.to_json())
    assert abs(redlight.expected_arrival(again, p) - report.expected_arrival) <= 1e-12 * report.expected_arrival

    u = redlight.Problem.from_json((ROOT / "problems" / "uniform.json").read_text())
    assert json.loads(u.to_json())["distribution"]["kind"] == "uniform"
    ru = redlight.solve(u)
    assert ru.level is not None and ru.v_c_star is None
    assert redlight.classify(u, u.v0, u.d) == ru.pattern

    dp = redlight.dp_min_cost(u, steps=200, speeds=100)
    assert dp["cost"] >= ru.expected_arrival * (1 - 1e-9)
    pert = redlight.perturbation_test(ru.trajectory, u, n=200, seed=1)
    assert pert["n"] == 200 and pert["min_delta"] >= -1e-7

    curve = redlight.sweep_switch_velocity(p, points=101)
    assert abs(curve["argmin"]["v_c"] - report.v_c_star) < 2.0
    assert all(pt["cost"] is None or math.isfinite(pt["cost"]) for pt in curve["points"])

    blocked = p.with_start(200, 900)
    assert "stopping-infeasible" in blocked.validate()
    try:
        redlight.solve(blocked)
    except redlight.InputError:
        pass
    else:
        raise AssertionError("solve accepted an infeasible instance")

    print("smoke test passed")


if __name__ == "__main__":
    main()
