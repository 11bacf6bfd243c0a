import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from isdq.scene import DomainSample, ObstacleConfig, Scenario, Task
from isdq.score import (
    BlConfig,
    IsConfig,
    baseline_bl,
    interaction_score,
    interaction_scores,
    is_domain,
    is_scenario,
    joint_prob,
    marginal_prob,
    pool,
    report_json,
)
from isdq.sim import prepare
from isdq.traj import mode_table
from oracles import brute_mi as _brute_mi


def test_probabilities():
    t = [[1, 1], [1, 2], [2, 2], [2, 2]]
    assert joint_prob(t, (2, 2)) == 0.5
    assert joint_prob(t, (2, 1)) == 0.0
    assert marginal_prob(t, 0, 1) == 0.5
    assert marginal_prob(t, 1, 2) == 0.75
    assert marginal_prob(t, 0, (2,), rest=True) == 0.75
    assert marginal_prob(mode_table(t), 1, (1,), rest=True) == 0.5


def test_is_examples():
    assert interaction_score([[1, 1], [1, 2], [1, 1], [1, 2]], 0) == 0.0
    assert interaction_score([[1, 1], [2, 2], [1, 1], [2, 2]], 0) == 1.0
    assert interaction_score([[1, 1], [1, 2], [2, 1], [2, 2]], 1) == 0.0
    assert interaction_score([[1], [2], [3]], 0) == 0.0
    assert interaction_score(np.arange(8).reshape(-1, 1) @ np.ones((1, 2), dtype=int), 1) == 3.0
    with pytest.raises(IndexError):
        interaction_score([[1, 2]], 2)
    with pytest.raises(ValueError):
        interaction_score([1, 2], 0)


tables = st.integers(1, 50).flatmap(
    lambda m: st.integers(1, 3).flatmap(
        lambda n: arrays(np.int64, (m, n), elements=st.integers(0, 4))))


@given(tables)
@settings(max_examples=400)
def test_matches_brute_force(t):
    for i in range(t.shape[1]):
        assert interaction_score(t, i) == pytest.approx(_brute_mi(t, i), rel=1e-12, abs=1e-12)


@given(tables)
def test_bounds(t):
    for i, v in enumerate(interaction_scores(t)):
        c = len(set(t[:, i].tolist()))
        assert 0.0 <= v <= math.log2(c) if c > 1 else v == 0.0


@given(st.integers(1, 60).flatmap(lambda m: arrays(np.int64, (m, 2), elements=st.integers(0, 6))))
def test_two_agent_symmetry(t):
    assert interaction_score(t, 0) == interaction_score(t, 1)


@given(tables, st.data())
@settings(max_examples=1000)
def test_appending_a_column_never_decreases(t, data):
    col = data.draw(arrays(np.int64, (t.shape[0], 1), elements=st.integers(0, 4)))
    wider = np.hstack([t, col])
    for i in range(t.shape[1]):
        assert interaction_score(wider, i) >= interaction_score(t, i) - 1e-12
    const = np.hstack([t, np.full((t.shape[0], 1), 7)])
    for i in range(t.shape[1]):
        assert interaction_score(const, i) == interaction_score(t, i)


@given(tables, st.randoms(use_true_random=False))
def test_row_permutation_invariance(t, rnd):
    perm = list(range(t.shape[0]))
    rnd.shuffle(perm)
    for i in range(t.shape[1]):
        assert interaction_score(t[perm], i) == interaction_score(t, i)


OPEN = ObstacleConfig("open", (0, 0, 40, 40))


def test_single_agent_scores_zero():
    s = Scenario("solo", OPEN, (Task(0, (2, 2), (30, 30)),))
    r = is_scenario(s, IsConfig(m=6))
    assert r.per_agent == (0.0,)


def test_far_apart_agents_score_zero():
    s = Scenario("far", OPEN, (Task(0, (2, 2), (20, 2)), Task(1, (2, 38), (20, 38))))
    r = is_scenario(s, IsConfig(m=12))
    assert r.per_agent == (0.0, 0.0)
    assert r.reached_goal == (True, True)


def test_report_json_fields():
    s = Scenario("pair", OPEN, (Task(0, (5, 20), (25, 20)), Task(1, (25, 20.3), (5, 20.3))))
    r = is_scenario(s, IsConfig(m=8))
    d = json.loads(report_json(r))
    assert d["method"] == "is" and d["scenario"] == "pair"
    assert [a["id"] for a in d["per_agent"]] == [0, 1]
    assert set(d["per_agent"][0]) == {"id", "is_bits", "reached_goal", "reached_fraction", "planned", "mode_count"}
    assert d["config"]["m"] == 8 and d["config"]["cluster"] == "percentile"
    assert d["mean"] == pytest.approx(np.mean([a["is_bits"] for a in d["per_agent"]]))
    assert r.table.m == 8 and r.table.param_index == tuple(range(1, 9))
    # memoized: the same config returns identical bytes
    assert report_json(is_scenario(s, IsConfig(m=8))) == report_json(r)


def test_dbscan_report_lists_outliers():
    s = Scenario("pair", OPEN, (Task(0, (5, 20), (25, 20)), Task(1, (25, 20.3), (5, 20.3))))
    d = is_scenario(s, IsConfig(m=8, method="dbscan")).to_dict()
    assert all("outliers" in a for a in d["per_agent"])


def test_domain_pooling_and_duplicates():
    a = Scenario("a", OPEN, (Task(0, (5, 20), (25, 20)), Task(1, (25, 20.3), (5, 20.3))))
    b = Scenario("b", OPEN, (Task(0, (2, 2), (20, 2)), Task(1, (2, 38), (20, 38)), Task(2, (30, 5), (30, 30))))
    cfg = IsConfig(m=8)
    one = is_domain(DomainSample("d", (a, b)), cfg)
    ra, rb = is_scenario(a, cfg), is_scenario(b, cfg)
    assert one.values == ra.per_agent + rb.per_agent
    assert one.mean == pytest.approx(np.mean(one.values))
    twice = is_domain(DomainSample("d", (a, b, a, b)), cfg)
    assert twice.mean == pytest.approx(one.mean) and twice.std == pytest.approx(one.std)
    assert pool("x", [ra]).scenario_means == (ra.scenario_mean,)


def test_config_validation():
    with pytest.raises(ValueError):
        IsConfig(method="kmeans")
    with pytest.raises(ValueError):
        IsConfig(m=1)
    with pytest.raises(ValueError):
        BlConfig(eps_d=0)


def test_bl_far_apart_is_zero():
    s = Scenario("far", OPEN, (Task(0, (2, 2), (20, 2)), Task(1, (2, 38), (20, 38))))
    assert baseline_bl(s).per_agent == (0, 0)


def test_bl_parallel_pair_flags_every_waypoint():
    s = Scenario("par", OPEN, (Task(0, (2.25, 10.25), (18.25, 10.25)), Task(1, (2.25, 11.25), (18.25, 11.25))))
    r = baseline_bl(s)
    n_wp = [len(p.waypoints) for p in prepare(s).paths]
    assert r.per_agent == tuple(n_wp)
    # a start delay beyond eps_t breaks the time match
    late = Scenario("late", OPEN, (s.tasks[0], Task(1, (2.25, 11.25), (18.25, 11.25), start_time=30.0)))
    assert baseline_bl(late).per_agent == (0, 0)
    # beyond eps_d in space
    wide = Scenario("wide", OPEN, (s.tasks[0], Task(1, (2.25, 12.25), (18.25, 12.25))))
    assert baseline_bl(wide).per_agent == (0, 0)
    d = json.loads(report_json(r))
    assert d["method"] == "bl" and d["config"] == {"eps_d": 1.6, "eps_t": 1.0, "max_speed": 2.6}
