import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isdq.diversity import CellGrid, dq, entropy_of_counts, env_entropy, start_goal_entropy
from isdq.scene import DomainSample, ObstacleConfig, Scenario, Task, gen_egrd, gen_exsd


def test_env_entropy_examples():
    assert env_entropy(["a"] * 7) == 0.0
    assert env_entropy(list("abcdef")) == pytest.approx(2.585, abs=1e-3)
    assert env_entropy(list("aabb")) == 1.0
    with pytest.raises(ValueError):
        env_entropy([])


@given(st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=80))
def test_env_entropy_bounds(labels):
    h = env_entropy(labels)
    assert 0.0 <= h <= math.log2(len(set(labels))) + 1e-12
    assert env_entropy(labels * 3) == pytest.approx(h)


def _sq(name, label, pairs, size=10.0):
    cfg = ObstacleConfig(label, (0, 0, size, size))
    tasks = tuple(Task(k, s, g) for k, (s, g) in enumerate(pairs))
    return Scenario(name, cfg, tasks)


FOUR = [((0.5, 0.5), (9.5, 9.5)), ((1.5, 0.5), (9.5, 8.5)), ((2.5, 0.5), (9.5, 7.5)), ((3.5, 0.5), (9.5, 6.5))]


def test_start_goal_entropy_examples():
    b = (0, 0, 10, 10)
    same = [Task(k, (0.5 + 0.1 * k, 0.5), (9.5, 9.5)) for k in range(4)]
    assert start_goal_entropy(same, bounds=b) == 0.0
    four = [Task(k, s, g) for k, (s, g) in enumerate(FOUR)]
    assert start_goal_entropy(four, bounds=b) == 2.0
    scaled = [Task(k, (3 * s[0], 3 * s[1]), (3 * g[0], 3 * g[1])) for k, (s, g) in enumerate(FOUR)]
    assert start_goal_entropy(scaled, bounds=(0, 0, 30, 30)) == 2.0
    with pytest.raises(ValueError):
        start_goal_entropy(four)


def test_cell_grid():
    g = CellGrid(10)
    assert g.n_cells == 100
    assert g.cell((0, 0), (0, 0, 10, 10)) == 0
    assert g.cell((10, 10), (0, 0, 10, 10)) == 99  # upper edge clamps into the last cell
    # longer side scaled to 1: a 20 x 10 world uses only the lower half of the rows
    assert g.cell((19.9, 9.9), (0, 0, 20, 10)) == 4 * 10 + 9
    with pytest.raises(ValueError):
        CellGrid(0)


def test_dq_chain_rule_example():
    a = _sq("a", "A", FOUR)
    b = _sq("b", "B", FOUR)
    r = dq(DomainSample("d", (a, b)))
    assert (r.h_env, r.h_id_given_env, r.h_joint, r.dq) == (1.0, 2.0, 3.0, -3.0)
    single = dq(DomainSample("one", (_sq("s", "S", FOUR[:1]),)))
    assert single.dq == 0.0
    d = json.loads(r.to_json())
    assert d["label_counts"] == {"A": 1, "B": 1} and d["cells_per_side"] == 10


def test_dq_duplicates_and_new_label():
    a = _sq("a", "A", FOUR[:2])
    b = _sq("b", "B", FOUR[2:])
    base = dq(DomainSample("d", (a, b)))
    assert dq(DomainSample("d", (a, b, a, b))).h_joint == pytest.approx(base.h_joint)
    c = _sq("c", "C", [((5.5, 5.5), (0.5, 9.5)), ((6.5, 5.5), (0.5, 8.5))])
    assert dq(DomainSample("d", (a, b, c))).dq < base.dq


def test_generated_domains():
    ex = [s for b in ("evac1", "evac2", "bottleneck", "concentric", "hallway2", "hallway4") for s in gen_exsd(b, 0, 2)]
    eg = gen_egrd(0, 100)
    rx, rg = dq(DomainSample("ExSD", ex)), dq(DomainSample("EgRD", eg))
    assert rx.h_env == pytest.approx(2.585, abs=1e-3)
    assert rg.h_env == pytest.approx(6.644, abs=1e-3)
    assert rg.dq < rx.dq


@given(st.lists(st.integers(0, 50), min_size=1, max_size=20).filter(any))
def test_entropy_of_counts_bounds(counts):
    h = entropy_of_counts(counts)
    assert 0.0 <= h <= math.log2(sum(1 for c in counts if c)) + 1e-12
