import math

import numpy as np
import pytest

from isdq.scene import ObstacleConfig, Scenario, Task, gen_exsd, rect
from isdq.sim import (
    SOLO_INDEX,
    THETA_1,
    THETA_M,
    ParamSpace,
    SfParams,
    SimResult,
    Trajectory,
    count_collisions,
    interpolate_params,
    prepare,
    sf_step_force,
    simulate,
    solo_trajectory,
    sweep,
)
from isdq.sim.engine import TRAJECTORY_HEADER, run_prepared, trajectory_rows

OPEN = ObstacleConfig("open", (0, 0, 30, 30))


def test_interpolation_endpoints_and_midpoint():
    sp = ParamSpace(m=300)
    a, b = interpolate_params(sp, 1), interpolate_params(sp, 300)
    assert (a.agent_repulsion_importance, a.repulsion_agent_B, a.repulsion_agent_A_over_mass) == (0.0, 0.01, 5.0)
    assert (b.agent_repulsion_importance, b.repulsion_agent_B, b.repulsion_agent_A_over_mass) == (10.0, 0.28, 60.0)
    assert interpolate_params(sp, 50).agent_repulsion_importance == pytest.approx(10 * 49 / 299)
    assert sp.theta_star == interpolate_params(sp, SOLO_INDEX)
    for j in (0, 301):
        with pytest.raises(IndexError):
            interpolate_params(sp, j)


def test_only_agent_repulsion_varies():
    sp = ParamSpace(m=7)
    keep = ("agent_repulsion_importance", "repulsion_agent_B", "repulsion_agent_A_over_mass")
    for j in range(1, 8):
        p = sp[j]
        for name in SfParams.__dataclass_fields__:
            if name not in keep:
                assert getattr(p, name) == getattr(THETA_1, name)
        assert p.mass == 80.0
    with pytest.raises(ValueError):
        ParamSpace(THETA_1, SfParams(max_speed=3.0), m=5)
    with pytest.raises(ValueError):
        ParamSpace(m=1)


def test_drive_from_rest():
    a = sf_step_force(((0, 0), (0, 0), 0.3), [], None, THETA_1, (5, 0))
    # relaxation drive: (max_speed * e - v) / tau, tau = the acceleration field
    assert a == pytest.approx([THETA_1.max_speed / THETA_1.acceleration, 0.0])
    at_speed = sf_step_force(((0, 0), (2.6, 0), 0.3), [], None, THETA_1, (5, 0))
    assert at_speed == pytest.approx([0.0, 0.0])


def test_pair_symmetry_and_touching_magnitude():
    p = THETA_M
    left = ((0.0, 0.0), (1.0, 0.0), 0.3)
    right = ((0.9, 0.0), (-1.0, 0.0), 0.3)
    # target = own position isolates the interaction terms
    fl = sf_step_force(left, [right], None, p, left[0]) - sf_step_force(left, [], None, p, left[0])
    fr = sf_step_force(right, [left], None, p, right[0]) - sf_step_force(right, [], None, p, right[0])
    np.testing.assert_allclose(fl, -fr, rtol=0, atol=1e-12)
    touching = sf_step_force(((0, 0), (0, 0), 0.3), [((0.6, 0), (0, 0), 0.3)], None, p, (0, 0))
    assert touching == pytest.approx([-600.0, 0.0])
    # importance 0 switches the exponential term off
    assert sf_step_force(((0, 0), (0, 0), 0.3), [((0.6, 0), (0, 0), 0.3)], None, THETA_1, (0, 0)) == \
        pytest.approx([0.0, 0.0])


def test_contact_and_wall_terms():
    # overlapping agents: body force k * overlap along the normal
    a = sf_step_force(((0, 0), (0, 0), 0.3), [((0.5, 0), (0, 0), 0.3)], None, THETA_1, (0, 0))
    assert a[0] == pytest.approx(-1500 * 0.1 - 5.0 * 0.0, rel=1e-9)
    # sliding friction acts along the tangent against the relative velocity
    b = sf_step_force(((0, 0), (0, 0), 0.3), [((0.5, 0), (0, 1.0), 0.3)], None, THETA_1, (0, 0))
    assert b[1] == pytest.approx(3000 * 0.1 * 1.0)
    wall = ObstacleConfig("w", (-5, -5, 5, 5), (rect(1.0, -2, 2.0, 2),))
    w = sf_step_force(((0, 0), (0, 0), 0.3), [], wall, THETA_1, (0, 0))
    assert w == pytest.approx([-63.33 * math.exp((0.3 - 1.0) / 0.2), 0.0])


def _one(start, goal, **kw):
    return Scenario("one", OPEN, (Task(0, start, goal, **kw),))


def test_single_agent_straight():
    s = _one((2, 15), (20, 15))
    r = simulate(s, THETA_1)
    tr = r.trajectories[0]
    assert tr.reached_goal
    assert math.dist(tr.positions[-1], (20, 15)) <= 0.3
    assert np.abs(tr.positions[:, 1] - 15).max() < 1e-12
    assert tr.times[0] == 0.0 and np.allclose(np.diff(tr.times), 0.1)
    assert tuple(tr.positions[0]) == (2.0, 15.0)


def test_start_time_and_timeout():
    s = Scenario("late", OPEN, (Task(0, (2, 2), (20, 2), start_time=1.5), Task(1, (2, 20), (28, 20), max_steps=10)))
    r = simulate(s, THETA_1)
    a, b = r.trajectories
    assert a.times[0] == 1.5 and a.reached_goal
    assert not b.reached_goal and len(b) == 11


def _head_on(offset=0.0):
    return Scenario("ho", OPEN, (Task(0, (5, 15), (25, 15)), Task(1, (25, 15 + offset), (5, 15 + offset))))


def test_head_on_repulsion_grows_with_theta():
    s = _head_on(0.4)
    dev = []
    for p in (THETA_1, THETA_M):
        tr = simulate(s, p).trajectories[0]
        dev.append(np.abs(tr.positions[:, 1] - 15).max())
    assert dev[1] > dev[0]


def test_exact_head_on_resolves_with_perturbation():
    s = _head_on(0.0)
    r = simulate(s, THETA_M, seed=3)
    assert all(t.reached_goal for t in r.trajectories)


def test_mirror_symmetry_without_perturbation():
    # point symmetry about the world centre: agent 1 is agent 0 rotated by 180 degrees
    s = Scenario("mirror", OPEN, (Task(0, (5, 14.7), (25, 14.7)), Task(1, (25, 15.3), (5, 15.3))))
    r = simulate(s, interpolate_params(ParamSpace(m=10), 6), perturb=False)
    a, b = r.trajectories
    n = min(len(a), len(b))
    np.testing.assert_allclose(a.positions[:n], 30.0 - b.positions[:n], atol=1e-9)


def test_determinism_and_threads():
    s = gen_exsd("evac2", seed=0)[0]
    sp = ParamSpace(m=6)
    prep = prepare(s)
    one = sweep(s, sp, prepared=prep, workers=1)
    many = sweep(s, sp, prepared=prep, workers=4)
    again = sweep(s, sp, workers=2)
    assert [r.param_index for r in one] == list(range(1, 7))
    for x, y, z in zip(one, many, again):
        assert x.same_as(y) and x.same_as(z)
        assert x.n == s.n


def test_sweep_m2_endpoints():
    s = _head_on(0.4)
    res = sweep(s, ParamSpace(m=2))
    assert len(res) == 2
    assert res[0].same_as(run_prepared(prepare(s), THETA_1, param_index=1))
    assert res[1].same_as(run_prepared(prepare(s), THETA_M, param_index=2))


@pytest.mark.parametrize("bench", ["evac2", "bottleneck", "hallway4"])
def test_speed_bound_and_no_penetration(bench):
    s = gen_exsd(bench, seed=1)[0]
    for p in (THETA_1, THETA_M):
        r = simulate(s, p)
        for tr in r.trajectories:
            step = np.hypot(*np.diff(tr.positions, axis=0).T)
            assert step.max() <= p.max_speed * 0.1 * (1 + 1e-9)
            clear = min(s.config.clearance(tuple(q)) for q in tr.positions[::5])
            assert clear >= -p.max_speed * 0.1


def test_solo_ignores_other_tasks():
    base = gen_exsd("hallway2", seed=2)[0]
    tp = ParamSpace(m=300).theta_star
    a = solo_trajectory(base, 3, tp)
    fewer = base.with_tasks(base.tasks[:5])
    b = solo_trajectory(fewer, 3, tp)
    assert a.same_as(b)
    with pytest.raises(KeyError):
        solo_trajectory(base, 999, tp)


def test_solo_open_world_is_straight():
    s = Scenario("pair", OPEN, (Task(0, (2, 2), (20, 20)), Task(1, (20, 2), (2, 20))))
    tr = solo_trajectory(s, 0, ParamSpace().theta_star)
    d = tr.positions - np.array([2.0, 2.0])
    assert np.abs(d[:, 0] - d[:, 1]).max() < 1e-9


def _traj(aid, xs, t0=0.0):
    xy = np.array([(x, 0.0) for x in xs])
    return Trajectory(aid, t0 + 0.1 * np.arange(len(xs)), xy, True)


def test_count_collisions_examples():
    far = SimResult((_traj(0, [0, 0, 0]), _traj(1, [5, 5, 5])), 1, 0)
    assert list(count_collisions(far, [0.3, 0.3])) == [0, 0]
    # approach, overlap for 10 steps, separate: one entry each
    xs = [2.0, 1.5, 1.0] + [0.4] * 10 + [1.0, 2.0]
    pair = SimResult((_traj(0, [0.0] * len(xs)), _traj(1, xs)), 1, 0)
    assert list(count_collisions(pair, [0.3, 0.3])) == [1, 1]
    # re-entry after separating counts again
    xs2 = xs + [0.4, 0.4, 2.0]
    pair2 = SimResult((_traj(0, [0.0] * len(xs2)), _traj(1, xs2)), 1, 0)
    assert list(count_collisions(pair2, [0.3, 0.3])) == [2, 2]
    three = SimResult((_traj(0, [5, 0.0]), _traj(1, [9, 0.2]), _traj(2, [13, 0.4])), 1, 0)
    assert list(count_collisions(three, [0.3] * 3)) == [2, 2, 2]


def test_count_collisions_time_alignment():
    # agent 1 appears later, already overlapping: counted once at first coexistence
    a = _traj(0, [0.0] * 6)
    b = _traj(1, [0.1, 0.1, 3.0], t0=0.2)
    assert list(count_collisions(SimResult((a, b), 1, 0), [0.3, 0.3])) == [1, 1]


def test_trajectory_rows():
    s = _head_on(1.0)
    res = sweep(s, ParamSpace(m=2))
    rows = trajectory_rows("ho", res)
    assert len(TRAJECTORY_HEADER) == 7
    keys = [(r[1], r[2], r[3]) for r in rows]
    assert keys == sorted(keys)
    assert sum(len(t) for r in res for t in r.trajectories) == len(rows)
