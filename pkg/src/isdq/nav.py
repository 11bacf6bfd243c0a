"""Grid planning substrate: rasterization, A*, visibility, range maps, waypoint targeting."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import shapely
from numba import njit

from .geometry import (
    JIT,
    pack_polygons,
    point_in_polygon,
    ray_circle,
    ray_segment,
    segment_hits_disc,
    segment_hits_obstacles,
)
from .scene.model import ObstacleConfig, Vec2

SQRT2 = math.sqrt(2.0)
DEFAULT_CELL_SIZE = 0.5

# (drow, dcol) in a fixed order; the order only matters for reproducibility.
_MOVES = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


class NoPathError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    cell_size: float
    origin: Vec2
    width: int
    height: int
    blocked: np.ndarray  # (height, width), row = y index

    def cell_of(self, p: Vec2) -> tuple[int, int]:
        col = int(math.floor((p[0] - self.origin[0]) / self.cell_size))
        row = int(math.floor((p[1] - self.origin[1]) / self.cell_size))
        return min(max(row, 0), self.height - 1), min(max(col, 0), self.width - 1)

    def center(self, row: int, col: int) -> Vec2:
        return (
            self.origin[0] + (col + 0.5) * self.cell_size,
            self.origin[1] + (row + 0.5) * self.cell_size,
        )

    def index(self, row: int, col: int) -> int:
        return row * self.width + col

    def is_free(self, row: int, col: int) -> bool:
        return not self.blocked[row, col]

    def nearest_free(self, p: Vec2) -> tuple[int, int]:
        """Free cell whose center is closest to ``p`` (ties: lower cell index)."""
        r, c = self.cell_of(p)
        if not self.blocked[r, c]:
            return r, c
        free = np.argwhere(~self.blocked)
        if len(free) == 0:
            raise NoPathError("grid has no free cell")
        cx = self.origin[0] + (free[:, 1] + 0.5) * self.cell_size
        cy = self.origin[1] + (free[:, 0] + 0.5) * self.cell_size
        d2 = (cx - p[0]) ** 2 + (cy - p[1]) ** 2
        k = int(np.argmin(d2))  # argwhere is row-major, so first minimum = lowest index
        return int(free[k, 0]), int(free[k, 1])


@dataclass(frozen=True, eq=False)
class PlannedPath:
    waypoints: np.ndarray  # (k, 2) cell centers, start first
    cumulative_length: np.ndarray  # (k,) meters
    cells: tuple[tuple[int, int], ...]
    straight_moves: int = 0
    diagonal_moves: int = 0

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def cost(self) -> float:
        """Path cost in cell units (1 per straight move, sqrt 2 per diagonal move)."""
        return self.straight_moves + self.diagonal_moves * SQRT2

    @property
    def length(self) -> float:
        return float(self.cumulative_length[-1])


def rasterize(config: ObstacleConfig, cell_size: float = DEFAULT_CELL_SIZE, inflate_radius: float = 0.0) -> OccupancyGrid:
    """Occupancy grid over ``config.bounds``.

    A cell is blocked when an obstacle grown by ``inflate_radius`` overlaps the
    cell's interior; cells that merely touch an obstacle edge stay free when
    no inflation is requested.
    """
    if not cell_size > 0:
        raise ValueError("cell_size must be positive")
    xmin, ymin, xmax, ymax = config.bounds
    width = max(1, math.ceil((xmax - xmin) / cell_size - 1e-9))
    height = max(1, math.ceil((ymax - ymin) / cell_size - 1e-9))
    blocked = np.zeros((height, width), dtype=bool)
    if config.polygons:
        cols, rows = np.meshgrid(np.arange(width), np.arange(height))
        x0 = xmin + cols.ravel() * cell_size
        y0 = ymin + rows.ravel() * cell_size
        boxes = shapely.box(x0, y0, x0 + cell_size, y0 + cell_size)
        flat = blocked.ravel()
        for poly in config.polygons:
            shp = shapely.Polygon(poly)
            if inflate_radius > 0:
                flat |= shapely.distance(boxes, shp) < inflate_radius
            else:
                flat |= shapely.area(shapely.intersection(boxes, shp)) > 0.0
        blocked = flat.reshape(height, width)
    blocked.setflags(write=False)
    return OccupancyGrid(cell_size=float(cell_size), origin=(xmin, ymin), width=width, height=height, blocked=blocked)


def _octile(dr: int, dc: int) -> float:
    lo, hi = sorted((abs(dr), abs(dc)))
    return hi + (SQRT2 - 1.0) * lo


def plan_cells(grid: OccupancyGrid, start_cell: tuple[int, int], goal_cell: tuple[int, int]) -> PlannedPath:
    """A* between two free cells (8-connected, octile heuristic)."""
    H, W = grid.height, grid.width
    blocked = grid.blocked
    for name, (r, c) in (("start", start_cell), ("goal", goal_cell)):
        if blocked[r, c]:
            raise NoPathError(f"{name} cell {(r, c)} is blocked")
    s = start_cell[0] * W + start_cell[1]
    g = goal_cell[0] * W + goal_cell[1]
    gr, gc = goal_cell
    # g-scores are kept as (straight, diagonal) move counts so that equal paths
    # always evaluate to the same float.
    counts: dict[int, tuple[int, int]] = {s: (0, 0)}
    parent: dict[int, int] = {}
    closed: set[int] = set()
    heap = [(_octile(start_cell[0] - gr, start_cell[1] - gc), s)]
    while heap:
        _, u = heapq.heappop(heap)
        if u in closed:
            continue
        if u == g:
            break
        closed.add(u)
        ur, uc = divmod(u, W)
        a, b = counts[u]
        for dr, dc in _MOVES:
            vr, vc = ur + dr, uc + dc
            if not (0 <= vr < H and 0 <= vc < W) or blocked[vr, vc]:
                continue
            v = vr * W + vc
            if v in closed:
                continue
            na, nb = (a, b + 1) if dr and dc else (a + 1, b)
            cost = na + nb * SQRT2
            old = counts.get(v)
            if old is None or cost < old[0] + old[1] * SQRT2:
                counts[v] = (na, nb)
                parent[v] = u
                heapq.heappush(heap, (cost + _octile(vr - gr, vc - gc), v))
    else:
        raise NoPathError(f"no path from cell {start_cell} to {goal_cell}")
    if g not in counts:
        raise NoPathError(f"no path from cell {start_cell} to {goal_cell}")
    chain = [g]
    while chain[-1] != s:
        chain.append(parent[chain[-1]])
    chain.reverse()
    cells = tuple(divmod(v, W) for v in chain)
    pts = np.array([grid.center(r, c) for r, c in cells], dtype=np.float64)
    seg = np.hypot(*np.diff(pts, axis=0).T) if len(pts) > 1 else np.zeros(0)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    a, b = counts[g]
    pts.setflags(write=False)
    cum.setflags(write=False)
    return PlannedPath(waypoints=pts, cumulative_length=cum, cells=cells, straight_moves=a, diagonal_moves=b)


def plan_astar(grid: OccupancyGrid, start: Vec2, goal: Vec2) -> PlannedPath:
    """Cost-minimal 8-connected path between the cells containing ``start`` and ``goal``."""
    return plan_cells(grid, grid.cell_of(start), grid.cell_of(goal))


@lru_cache(maxsize=256)
def packed_obstacles(config: ObstacleConfig) -> tuple[np.ndarray, np.ndarray]:
    edges, off = pack_polygons(config.polygons)
    edges.setflags(write=False)
    off.setflags(write=False)
    return edges, off


def _pack_agents(agents) -> tuple[np.ndarray, np.ndarray]:
    xy = np.array([a[0] for a in agents], dtype=np.float64).reshape(-1, 2)
    r = np.array([a[1] for a in agents], dtype=np.float64)
    return xy, r


def line_of_sight(config: ObstacleConfig, agents, frm: Vec2, to: Vec2, ignore_agents: bool = False) -> bool:
    """True iff segment frm->to touches no obstacle and (unless ignored) no agent disc.

    ``agents`` is a sequence of ``((x, y), radius)``; touching counts as blocked.
    """
    edges, off = packed_obstacles(config)
    if segment_hits_obstacles(frm[0], frm[1], to[0], to[1], edges, off):
        return False
    if not ignore_agents:
        for (cx, cy), r in agents:
            if segment_hits_disc(frm[0], frm[1], to[0], to[1], cx, cy, r):
                return False
    return True


@dataclass(frozen=True)
class AgentState:
    position: Vec2
    heading: float = 0.0  # radians, world frame
    radius: float = 0.3


@dataclass(frozen=True, eq=False)
class RangeMap:
    resolution: int
    max_range: float
    distances: np.ndarray  # ray r points at heading + 2*pi*r/resolution


@njit(**JIT)
def _cast_rays(ox, oy, heading, resolution, max_range, edges, agent_xy, agent_r):
    out = np.empty(resolution)
    for k in range(resolution):
        ang = heading + 2.0 * math.pi * k / resolution
        dx = math.cos(ang)
        dy = math.sin(ang)
        best = max_range
        for e in range(edges.shape[0]):
            t = ray_segment(ox, oy, dx, dy, edges[e, 0], edges[e, 1], edges[e, 2], edges[e, 3])
            if t < best:
                best = t
        for a in range(agent_xy.shape[0]):
            t = ray_circle(ox, oy, dx, dy, agent_xy[a, 0], agent_xy[a, 1], agent_r[a])
            if t < best:
                best = t
        out[k] = best
    return out


def range_map(config: ObstacleConfig, agents, ego: AgentState, resolution: int = 360, max_range: float = 10.0) -> RangeMap:
    """Per-ray distance from the ego center to the nearest obstacle edge or agent surface."""
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    edges, _ = packed_obstacles(config)
    xy, r = _pack_agents(agents)
    d = _cast_rays(ego.position[0], ego.position[1], ego.heading, int(resolution), float(max_range), edges, xy, r)
    d.setflags(write=False)
    return RangeMap(resolution=int(resolution), max_range=float(max_range), distances=d)


@njit(**JIT)
def _visible(px, py, qx, qy, edges, poly_off, agent_xy, agent_r, skip, use_agents):
    if segment_hits_obstacles(px, py, qx, qy, edges, poly_off):
        return False
    if use_agents:
        for a in range(agent_xy.shape[0]):
            if a == skip or agent_r[a] <= 0.0:
                continue
            if segment_hits_disc(px, py, qx, qy, agent_xy[a, 0], agent_xy[a, 1], agent_r[a]):
                return False
    return True


@njit(**JIT)
def farthest_visible(px, py, wp, w0, w1, first, edges, poly_off, agent_xy, agent_r, skip, use_agents):
    """Index of the farthest waypoint in [first, w1) visible from p.

    ``wp[w0:w1]`` is the path; returned indices are relative to ``w0``.  Agent
    ``skip`` (the ego) is ignored.  When nothing ahead is visible (the ego was
    pushed off its path) the latest visible dropped waypoint is returned as a
    recovery target, so the result may be below ``first``; callers must not
    move their progress pointer backwards.  If no waypoint at all is visible
    the nearest remaining one is used.
    """
    n_wp = w1 - w0
    for k in range(n_wp - 1, first - 1, -1):
        if _visible(px, py, wp[w0 + k, 0], wp[w0 + k, 1], edges, poly_off, agent_xy, agent_r, skip, use_agents):
            return k
    for k in range(min(first, n_wp) - 1, -1, -1):
        if _visible(px, py, wp[w0 + k, 0], wp[w0 + k, 1], edges, poly_off, agent_xy, agent_r, skip, use_agents):
            return k
    best = first
    bd = np.inf
    for k in range(first, n_wp):
        d = math.hypot(wp[w0 + k, 0] - px, wp[w0 + k, 1] - py)
        if d < bd:
            bd = d
            best = k
    return best


def current_target(path: PlannedPath, ego: Vec2, config: ObstacleConfig, agents=(), first: int = 0,
                   ignore_agents: bool = False) -> tuple[int, Vec2]:
    """Farthest visible waypoint at or after ``first``; returns (index, point).

    The index is below ``first`` only for a recovery target (see
    :func:`farthest_visible`).
    """
    if len(path) == 0:
        raise ValueError("empty path")
    edges, off = packed_obstacles(config)
    xy, r = _pack_agents(agents)
    k = farthest_visible(ego[0], ego[1], path.waypoints, 0, len(path), int(first), edges, off, xy, r, -1,
                         not ignore_agents)
    k = int(k)
    return k, (float(path.waypoints[k, 0]), float(path.waypoints[k, 1]))


@dataclass
class WaypointTracker:
    """Stateful targeting that drops waypoints behind the last target."""

    path: PlannedPath
    first: int = field(default=0)

    def target(self, ego: Vec2, config: ObstacleConfig, agents=(), ignore_agents: bool = False) -> Vec2:
        k, p = current_target(self.path, ego, config, agents, self.first, ignore_agents)
        self.first = max(self.first, k)
        return p


def point_blocked(config: ObstacleConfig, p: Vec2) -> bool:
    edges, off = packed_obstacles(config)
    for q in range(len(off) - 1):
        if point_in_polygon(p[0], p[1], edges, off[q], off[q + 1]):
            return True
    return False
