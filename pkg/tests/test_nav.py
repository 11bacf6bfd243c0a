import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from isdq.nav import (
    AgentState,
    NoPathError,
    OccupancyGrid,
    WaypointTracker,
    current_target,
    line_of_sight,
    plan_astar,
    plan_cells,
    range_map,
    rasterize,
)
from isdq.scene import ObstacleConfig, rect
from oracles import dijkstra_cost as _dijkstra_cost

SQ2 = math.sqrt(2.0)


def _grid(blocked, cell=1.0):
    b = np.asarray(blocked, dtype=bool)
    return OccupancyGrid(cell, (0.0, 0.0), b.shape[1], b.shape[0], b)


def test_rasterize_empty_and_full():
    assert not rasterize(ObstacleConfig("e", (0, 0, 5, 5)), 0.5).blocked.any()
    full = rasterize(ObstacleConfig("f", (0, 0, 5, 5), (rect(0, 0, 5, 5),)), 0.5)
    assert full.blocked.all() and full.blocked.shape == (10, 10)


def test_rasterize_unit_square():
    g = rasterize(ObstacleConfig("u", (0, 0, 5, 5), (rect(2, 2, 3, 3),)), 0.5, 0.0)
    assert sorted(map(tuple, np.argwhere(g.blocked))) == [(4, 4), (4, 5), (5, 4), (5, 5)]


def test_rasterize_inflation_grows():
    cfg = ObstacleConfig("u", (0, 0, 5, 5), (rect(2, 2, 3, 3),))
    g = rasterize(cfg, 0.5, 0.3)
    assert g.blocked.sum() == 16  # one extra ring of cells
    assert not g.blocked[2, 2]  # diagonal corner cell is 0.3*sqrt2 > 0.3 away


def test_rasterize_rejects_bad_cell():
    with pytest.raises(ValueError):
        rasterize(ObstacleConfig("e", (0, 0, 1, 1)), 0.0)


def test_astar_trivial_cases():
    g = _grid(np.zeros((3, 3)))
    p = plan_cells(g, (1, 1), (1, 1))
    assert len(p) == 1 and p.length == 0.0
    assert plan_cells(g, (0, 0), (2, 2)).cost == pytest.approx(2 * SQ2)
    b = np.zeros((3, 3))
    b[1, 1] = 1
    p = plan_cells(_grid(b), (0, 0), (2, 2))
    assert p.cost == pytest.approx(2 + SQ2)
    assert p.cost == pytest.approx(_dijkstra_cost(b.astype(bool), (0, 0), (2, 2)))


def test_astar_no_path():
    b = np.zeros((5, 5), dtype=bool)
    b[:, 2] = True
    with pytest.raises(NoPathError):
        plan_cells(_grid(b), (0, 0), (4, 4))
    with pytest.raises(NoPathError):
        plan_cells(_grid(b), (0, 2), (4, 4))


def _check_path(grid, p, s, g):
    assert p.cells[0] == s and p.cells[-1] == g
    for (r0, c0), (r1, c1) in zip(p.cells, p.cells[1:]):
        assert max(abs(r1 - r0), abs(c1 - c0)) == 1
    assert not any(grid.blocked[r, c] for r, c in p.cells)
    steps = np.hypot(*np.diff(p.waypoints, axis=0).T)
    assert p.cumulative_length[-1] == pytest.approx(steps.sum())


def test_astar_matches_dijkstra_on_random_grids():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(200):
        b = rng.random((20, 20)) < 0.3
        free = np.argwhere(~b)
        s, g = (tuple(int(v) for v in free[k]) for k in rng.choice(len(free), 2, replace=False))
        want = _dijkstra_cost(b, s, g)
        grid = _grid(b)
        if not np.isfinite(want):
            with pytest.raises(NoPathError):
                plan_cells(grid, s, g)
            continue
        p = plan_cells(grid, s, g)
        # distinct path costs differ by far more than float rounding of a sum
        assert abs(p.cost - want) < 1e-9
        _check_path(grid, p, s, g)
        checked += 1
    assert checked > 150


def test_astar_deterministic():
    rng = np.random.default_rng(3)
    b = rng.random((15, 15)) < 0.2
    b[0, 0] = b[14, 14] = False
    g = _grid(b)
    try:
        a = plan_cells(g, (0, 0), (14, 14))
    except NoPathError:
        pytest.skip("fixture blocked")
    assert a.cells == plan_cells(g, (0, 0), (14, 14)).cells


def test_plan_astar_world_coordinates():
    cfg = ObstacleConfig("w", (0, 0, 10, 10), (rect(4, 0, 5, 8),))
    g = rasterize(cfg, 0.5)
    p = plan_astar(g, (1, 1), (9, 1))
    assert tuple(p.waypoints[0]) == (1.25, 1.25) and tuple(p.waypoints[-1]) == (9.25, 1.25)
    assert p.waypoints[:, 1].max() > 8.0  # detours over the wall


def test_line_of_sight():
    cfg = ObstacleConfig("w", (0, 0, 10, 10), (rect(4, 4, 6, 6),))
    empty = ObstacleConfig("e", (0, 0, 10, 10))
    assert line_of_sight(empty, [], (0, 0), (10, 10))
    assert not line_of_sight(cfg, [], (1, 5), (9, 5))
    assert line_of_sight(cfg, [], (1, 1), (9, 1))
    # tangent disc at exactly r from the segment occludes
    assert not line_of_sight(empty, [((5.0, 1.5), 0.5)], (1, 1), (9, 1))
    assert line_of_sight(empty, [((5.0, 1.5), 0.4999)], (1, 1), (9, 1))
    assert line_of_sight(empty, [((5.0, 1.5), 0.5)], (1, 1), (9, 1), ignore_agents=True)
    # touching a polygon edge or vertex also blocks
    assert not line_of_sight(cfg, [], (1, 4), (9, 4))
    assert not line_of_sight(cfg, [], (3, 3), (4, 4))


def test_range_map_examples():
    empty = ObstacleConfig("e", (0, 0, 20, 20))
    rm = range_map(empty, [], AgentState((10, 10), 0.0), 36, 10.0)
    assert np.all(rm.distances == 10.0)
    wall = ObstacleConfig("w", (0, 0, 20, 20), (rect(12, 5, 13, 15),))
    assert range_map(wall, [], AgentState((10, 10), 0.0), 36).distances[0] == pytest.approx(2.0)
    rm = range_map(empty, [((11.0, 10.0), 0.3)], AgentState((10, 10), 0.0), 36)
    assert rm.distances[0] == pytest.approx(0.7)
    with pytest.raises(ValueError):
        range_map(empty, [], AgentState((1, 1)), 0)


def _rotate(p, ang, c=(10.0, 10.0)):
    x, y = p[0] - c[0], p[1] - c[1]
    return (c[0] + x * math.cos(ang) - y * math.sin(ang), c[1] + x * math.sin(ang) + y * math.cos(ang))


@given(st.integers(0, 7), st.floats(0.0, 2 * math.pi), st.floats(7.0, 13.0), st.floats(7.0, 13.0))
def test_range_map_rotation_invariance(k, heading, ox, oy):
    """Rotating world and ego heading by a multiple of the ray step permutes nothing."""
    res = 8
    ang = 2 * math.pi * k / res
    tri = ((4.0, 4.0), (6.0, 4.5), (5.0, 6.0))
    neighbor = ((12.0, 8.5), 0.4)
    # skip rays that graze a vertex or a disc tangent, where rounding decides hit or miss
    for k_ray in range(res):
        a_ray = heading + 2 * math.pi * k_ray / res
        u = (math.cos(a_ray), math.sin(a_ray))
        for v in tri:
            w = (v[0] - ox, v[1] - oy)
            assume(abs(u[0] * w[1] - u[1] * w[0]) > 1e-6)
        w = (neighbor[0][0] - ox, neighbor[0][1] - oy)
        assume(abs(abs(u[0] * w[1] - u[1] * w[0]) - neighbor[1]) > 1e-6)
    cfg = ObstacleConfig("r", (-20, -20, 40, 40), (tri,))
    cfg_r = ObstacleConfig("r", (-20, -20, 40, 40), (tuple(_rotate(p, ang) for p in tri),))
    a = range_map(cfg, [neighbor], AgentState((ox, oy), heading), res, 12.0).distances
    b = range_map(cfg_r, [(_rotate(neighbor[0], ang), 0.4)], AgentState(_rotate((ox, oy), ang), heading + ang),
                  res, 12.0).distances
    np.testing.assert_allclose(a, b, atol=1e-9)
    assert np.all((a >= 0) & (a <= 12.0))


def _straight_path(n, y=1.0):
    cfg = ObstacleConfig("c", (0, 0, 40, 10))
    g = rasterize(cfg, 1.0)
    return cfg, plan_astar(g, (0.5, y), (n - 0.5, y))


def test_current_target_full_visibility():
    cfg, p = _straight_path(10)
    k, pt = current_target(p, (0.5, 1.5), cfg)
    assert k == len(p) - 1 and pt == tuple(p.waypoints[-1])


def test_current_target_occluded():
    # the path runs along y=0.5 and turns up past the wall's corner, which
    # hides everything after the first two waypoints ahead of the ego
    cfg = ObstacleConfig("l", (0, 0, 10, 10), (rect(1.0, 1.0, 3.0, 7.0),))
    g = rasterize(cfg, 1.0)
    p = plan_astar(g, (0.5, 0.5), (3.5, 6.5))
    wp = [tuple(w) for w in p.waypoints]
    ego = wp[0]
    expected = max(k for k, w in enumerate(wp) if line_of_sight(cfg, [], ego, w))
    k, _ = current_target(p, ego, cfg)
    assert k == expected == 2
    # an agent between ego and waypoint 2 makes waypoint 1 the target
    k, _ = current_target(p, ego, cfg, agents=[((2.0, 0.5), 0.3)])
    assert k == 1


def test_waypoint_tracker_monotone():
    cfg, p = _straight_path(12)
    tr = WaypointTracker(p)
    seen = []
    for x in np.linspace(0.5, 11.5, 30):
        tr.target((x, 1.5), cfg, agents=[((x + 1.0, 1.5), 0.3)])
        seen.append(tr.first)
    assert seen == sorted(seen)
    # indices below the last target are never returned again for a visible path
    k, _ = current_target(p, (11.0, 1.5), cfg, first=tr.first)
    assert k >= tr.first
