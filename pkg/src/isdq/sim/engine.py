"""Social-force crowd engine.

Each agent plans an A* path once and, at every step, steers toward the
farthest waypoint it can see.  Accelerations combine a relaxation drive with
Helbing-style agent and wall interaction terms; integration is semi-implicit
Euler with a hard speed cap.  The whole per-step loop runs in one compiled
kernel, so a simulation is single-threaded and bit-reproducible.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from ..geometry import JIT, pack_polygons, point_in_polygon, polygon_nearest
from ..nav import DEFAULT_CELL_SIZE, NoPathError, farthest_visible, packed_obstacles, plan_cells, rasterize
from ..scene.model import Scenario
from .params import (
    P_A_AGENT,
    P_A_WALL,
    P_B_AGENT,
    P_B_WALL,
    P_IMPORTANCE,
    P_K_AGENT,
    P_K_WALL,
    P_KAPPA,
    P_MAX_SPEED,
    P_TAU,
    ParamSpace,
    SfParams,
)

DEFAULT_DT = 0.1
AGENT_CUTOFF = 5.0
WALL_CUTOFF = 3.0
PERTURB_SPEED = 1e-3
HEAD_ON_COS = math.cos(math.radians(1.0))
_EXP_CAP = 50.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    agent_id: int
    times: np.ndarray  # (k,)
    positions: np.ndarray  # (k, 2)
    reached_goal: bool
    planned: bool = True

    def __len__(self) -> int:
        return len(self.times)

    def same_as(self, other: "Trajectory") -> bool:
        return (
            self.agent_id == other.agent_id
            and self.reached_goal == other.reached_goal
            and self.planned == other.planned
            and self.times.tobytes() == other.times.tobytes()
            and self.positions.tobytes() == other.positions.tobytes()
        )


@dataclass(frozen=True, eq=False)
class SimResult:
    trajectories: tuple[Trajectory, ...]
    param_index: int
    seed: int

    @property
    def n(self) -> int:
        return len(self.trajectories)

    def same_as(self, other: "SimResult") -> bool:
        return (
            self.param_index == other.param_index
            and self.seed == other.seed
            and self.n == other.n
            and all(a.same_as(b) for a, b in zip(self.trajectories, other.trajectories))
        )


class SweepError(RuntimeError):
    def __init__(self, failures: list[tuple[int, BaseException]]):
        self.failures = failures
        msg = "; ".join(f"run {j}: {exc}" for j, exc in failures)
        super().__init__(f"{len(failures)} sweep run(s) failed: {msg}")


@dataclass(frozen=True, eq=False)
class Prepared:
    """Per-scenario data shared by every run: planned paths and packed obstacles."""

    scenario: Scenario
    start: np.ndarray
    goal: np.ndarray
    radius: np.ndarray
    start_time: np.ndarray
    max_steps: np.ndarray
    wp: np.ndarray
    wp_off: np.ndarray
    planned: np.ndarray
    edges: np.ndarray
    poly_off: np.ndarray
    paths: tuple
    plan_errors: dict

    def subset(self, idx: list[int]) -> "Prepared":
        paths = tuple(self.paths[i] for i in idx)
        wp, off = _pack_paths(paths)
        sel = np.array(idx, dtype=np.int64)
        tasks = tuple(self.scenario.tasks[i] for i in idx)
        return Prepared(
            scenario=self.scenario.with_tasks(tasks),
            start=self.start[sel],
            goal=self.goal[sel],
            radius=self.radius[sel],
            start_time=self.start_time[sel],
            max_steps=self.max_steps[sel],
            wp=wp,
            wp_off=off,
            planned=self.planned[sel],
            edges=self.edges,
            poly_off=self.poly_off,
            paths=paths,
            plan_errors={t.id: self.plan_errors[t.id] for t in tasks if t.id in self.plan_errors},
        )


def _pack_paths(paths) -> tuple[np.ndarray, np.ndarray]:
    chunks = [p.waypoints if p is not None else np.zeros((0, 2)) for p in paths]
    off = np.zeros(len(chunks) + 1, dtype=np.int64)
    off[1:] = np.cumsum([len(c) for c in chunks])
    wp = np.concatenate(chunks) if chunks else np.zeros((0, 2))
    return np.ascontiguousarray(wp, dtype=np.float64), off


def prepare(scenario: Scenario, cell_size: float = DEFAULT_CELL_SIZE, inflate_radius: float = 0.0) -> Prepared:
    """Plan every task once.  Start/goal cells snap to the nearest free cell.

    Planning uses the bare obstacles by default: at 0.5 m cells an inflated
    1.4 m doorway would close, and wall forces keep bodies off the jambs.
    """
    grid = rasterize(scenario.config, cell_size, inflate_radius)
    paths = []
    errors = {}
    for t in scenario.tasks:
        try:
            paths.append(plan_cells(grid, grid.nearest_free(t.start), grid.nearest_free(t.goal)))
        except NoPathError as exc:
            paths.append(None)
            errors[t.id] = str(exc)
    wp, off = _pack_paths(paths)
    edges, poly_off = packed_obstacles(scenario.config)
    tasks = scenario.tasks
    return Prepared(
        scenario=scenario,
        start=np.array([t.start for t in tasks], dtype=np.float64),
        goal=np.array([t.goal for t in tasks], dtype=np.float64),
        radius=np.array([t.radius for t in tasks], dtype=np.float64),
        start_time=np.array([t.start_time for t in tasks], dtype=np.float64),
        max_steps=np.array([t.max_steps for t in tasks], dtype=np.int64),
        wp=wp,
        wp_off=off,
        planned=np.array([p is not None for p in paths], dtype=np.bool_),
        edges=edges,
        poly_off=poly_off,
        paths=tuple(paths),
        plan_errors=errors,
    )


@njit(**JIT)
def _exp(x):
    return math.exp(min(x, _EXP_CAP))


@njit(**JIT)
def _accel(i, pos, vel, radius, status, tx, ty, edges, poly_off, prm):
    """Acceleration of agent i toward (tx, ty) under the current state."""
    vmax = prm[P_MAX_SPEED]
    tau = prm[P_TAU]
    px = pos[i, 0]
    py = pos[i, 1]
    vx = vel[i, 0]
    vy = vel[i, 1]
    ri = radius[i]

    dx = tx - px
    dy = ty - py
    dl = math.hypot(dx, dy)
    if dl > 1e-12:
        ax = (vmax * dx / dl - vx) / tau
        ay = (vmax * dy / dl - vy) / tau
    else:
        ax = -vx / tau
        ay = -vy / tau

    imp = prm[P_IMPORTANCE]
    a_ag = prm[P_A_AGENT]
    b_ag = prm[P_B_AGENT]
    k_ag = prm[P_K_AGENT]
    kappa = prm[P_KAPPA]
    n = pos.shape[0]
    for j in range(n):
        if j == i or status[j] != 1:
            continue
        ex = px - pos[j, 0]
        ey = py - pos[j, 1]
        d = math.hypot(ex, ey)
        if d > AGENT_CUTOFF:
            continue
        if d > 1e-12:
            nx = ex / d
            ny = ey / d
        elif i < j:
            nx = -1.0
            ny = 0.0
        else:
            nx = 1.0
            ny = 0.0
        rij = ri + radius[j]
        if imp > 0.0 and b_ag > 0.0:
            f = imp * a_ag * _exp((rij - d) / b_ag)
            ax += f * nx
            ay += f * ny
        overlap = rij - d
        if overlap > 0.0:
            tx_ = -ny
            ty_ = nx
            dvt = (vel[j, 0] - vx) * tx_ + (vel[j, 1] - vy) * ty_
            ax += k_ag * overlap * nx + kappa * overlap * dvt * tx_
            ay += k_ag * overlap * ny + kappa * overlap * dvt * ty_

    a_w = prm[P_A_WALL]
    b_w = prm[P_B_WALL]
    k_w = prm[P_K_WALL]
    npoly = poly_off.shape[0] - 1
    for p in range(npoly):
        d, qx, qy = polygon_nearest(px, py, edges, poly_off[p], poly_off[p + 1])
        if d > WALL_CUTOFF:
            continue
        ex = px - qx
        ey = py - qy
        el = math.hypot(ex, ey)
        if el <= 1e-12:
            continue
        nx = ex / el
        ny = ey / el
        if d < 0.0:
            nx = -nx
            ny = -ny
        if b_w > 0.0:
            f = a_w * _exp((ri - d) / b_w)
            ax += f * nx
            ay += f * ny
        overlap = ri - d
        if overlap > 0.0:
            tx_ = -ny
            ty_ = nx
            vt = vx * tx_ + vy * ty_
            ax += k_w * overlap * nx - kappa * overlap * vt * tx_
            ay += k_w * overlap * ny - kappa * overlap * vt * ty_
    return ax, ay


def sf_step_force(ego, neighbors, config, params: SfParams, target) -> np.ndarray:
    """Acceleration of one agent for a single step.

    ``ego`` and every neighbor are (position, velocity, radius) triples;
    ``config`` is an ObstacleConfig or None.
    """
    agents = [ego] + list(neighbors)
    pos = np.array([a[0] for a in agents], dtype=np.float64).reshape(-1, 2)
    vel = np.array([a[1] for a in agents], dtype=np.float64).reshape(-1, 2)
    radius = np.array([a[2] for a in agents], dtype=np.float64)
    status = np.ones(len(agents), dtype=np.int8)
    if config is None:
        edges, poly_off = pack_polygons(())
    else:
        edges, poly_off = packed_obstacles(config)
    ax, ay = _accel(0, pos, vel, radius, status, float(target[0]), float(target[1]), edges, poly_off,
                    params.as_array())
    return np.array([ax, ay])


@njit(**JIT)
def _head_on(i, pos, vel, status):
    """True when agent i and some neighbor approach each other within 1 degree of head-on."""
    n = pos.shape[0]
    for j in range(n):
        if j == i or status[j] != 1:
            continue
        ex = pos[j, 0] - pos[i, 0]
        ey = pos[j, 1] - pos[i, 1]
        d = math.hypot(ex, ey)
        if d > AGENT_CUTOFF or d <= 1e-12:
            continue
        rvx = vel[i, 0] - vel[j, 0]
        rvy = vel[i, 1] - vel[j, 1]
        rv = math.hypot(rvx, rvy)
        if rv <= 1e-9:
            continue
        if (rvx * ex + rvy * ey) / (rv * d) >= HEAD_ON_COS:
            return True
    return False


@njit(**JIT)
def _run(start, goal, radius, start_step, max_steps, wp, wp_off, planned, edges, poly_off, prm, dt,
         use_agent_los, perturb_sign, out_xy, out_len, out_reached, out_vmax):
    n = start.shape[0]
    pos = start.copy()
    vel = np.zeros((n, 2))
    acc = np.zeros((n, 2))
    status = np.zeros(n, dtype=np.int8)  # 0 pending, 1 active, 2 finished
    first = np.zeros(n, dtype=np.int64)
    occl = np.zeros(n)
    vmax = prm[P_MAX_SPEED]
    npoly = poly_off.shape[0] - 1

    pending = 0
    last = 0
    for i in range(n):
        if planned[i]:
            pending += 1
            if start_step[i] + max_steps[i] > last:
                last = start_step[i] + max_steps[i]
        else:
            status[i] = 2
            out_xy[i, 0, 0] = start[i, 0]
            out_xy[i, 0, 1] = start[i, 1]
            out_len[i] = 1

    step = 0
    while pending > 0 and step <= last:
        for i in range(n):
            if status[i] == 0 and start_step[i] <= step:
                status[i] = 1
                out_xy[i, 0, 0] = pos[i, 0]
                out_xy[i, 0, 1] = pos[i, 1]
                out_len[i] = 1
        for i in range(n):
            occl[i] = radius[i] if status[i] == 1 else 0.0

        for i in range(n):
            if status[i] != 1:
                continue
            w0 = wp_off[i]
            w1 = wp_off[i + 1]
            k = farthest_visible(pos[i, 0], pos[i, 1], wp, w0, w1, first[i], edges, poly_off, pos, occl, i,
                                 use_agent_los)
            if k > first[i]:
                first[i] = k
            if k == w1 - w0 - 1:
                tx = goal[i, 0]
                ty = goal[i, 1]
            else:
                tx = wp[w0 + k, 0]
                ty = wp[w0 + k, 1]
            ax, ay = _accel(i, pos, vel, radius, status, tx, ty, edges, poly_off, prm)
            acc[i, 0] = ax
            acc[i, 1] = ay

        for i in range(n):
            if status[i] != 1:
                continue
            vx = vel[i, 0] + acc[i, 0] * dt
            vy = vel[i, 1] + acc[i, 1] * dt
            if perturb_sign != 0 and _head_on(i, pos, vel, status):
                sp = math.hypot(vel[i, 0], vel[i, 1])
                if sp > 1e-12:
                    vx += perturb_sign * PERTURB_SPEED * vel[i, 1] / sp
                    vy -= perturb_sign * PERTURB_SPEED * vel[i, 0] / sp
            sp = math.hypot(vx, vy)
            if sp > vmax:
                vx *= vmax / sp
                vy *= vmax / sp
            acc[i, 0] = vx  # stash the new velocity until every agent is updated
            acc[i, 1] = vy

        for i in range(n):
            if status[i] != 1:
                continue
            vx = acc[i, 0]
            vy = acc[i, 1]
            x = pos[i, 0] + vx * dt
            y = pos[i, 1] + vy * dt
            for p in range(npoly):
                e0 = poly_off[p]
                e1 = poly_off[p + 1]
                if point_in_polygon(x, y, edges, e0, e1):
                    d, qx, qy = polygon_nearest(x, y, edges, e0, e1)
                    ox = qx - x
                    oy = qy - y
                    ol = math.hypot(ox, oy)
                    if ol > 0.0:
                        ox /= ol
                        oy /= ol
                        x = qx + 1e-6 * ox
                        y = qy + 1e-6 * oy
                        vn = vx * ox + vy * oy
                        if vn < 0.0:
                            vx -= vn * ox
                            vy -= vn * oy
            pos[i, 0] = x
            pos[i, 1] = y
            vel[i, 0] = vx
            vel[i, 1] = vy
            sp = math.hypot(vx, vy)
            if sp > out_vmax[i]:
                out_vmax[i] = sp
            k = out_len[i]
            out_xy[i, k, 0] = x
            out_xy[i, k, 1] = y
            out_len[i] = k + 1
            if math.hypot(x - goal[i, 0], y - goal[i, 1]) <= radius[i]:
                status[i] = 2
                out_reached[i] = True
                pending -= 1
            elif k >= max_steps[i]:
                status[i] = 2
                pending -= 1
        step += 1


def _perturb_sign(seed: int) -> int:
    return 1 if np.random.default_rng(seed).random() < 0.5 else -1


def run_prepared(prep: Prepared, params: SfParams, dt: float = DEFAULT_DT, seed: int = 0, param_index: int = 0,
                 ignore_agents_los: bool = False, perturb: bool = True) -> SimResult:
    if not dt > 0:
        raise ValueError("dt must be positive")
    n = len(prep.start)
    L = int(prep.max_steps.max()) + 1
    out_xy = np.zeros((n, L, 2))
    out_len = np.zeros(n, dtype=np.int64)
    out_reached = np.zeros(n, dtype=np.bool_)
    out_vmax = np.zeros(n)
    start_step = np.rint(prep.start_time / dt).astype(np.int64)
    _run(prep.start, prep.goal, prep.radius, start_step, prep.max_steps, prep.wp, prep.wp_off, prep.planned,
         prep.edges, prep.poly_off, params.as_array(), float(dt), not ignore_agents_los,
         _perturb_sign(seed) if perturb else 0, out_xy, out_len, out_reached, out_vmax)
    trajs = []
    for i, task in enumerate(prep.scenario.tasks):
        k = int(out_len[i])
        times = task.start_time + dt * np.arange(k)
        xy = out_xy[i, :k].copy()
        times.setflags(write=False)
        xy.setflags(write=False)
        trajs.append(Trajectory(task.id, times, xy, bool(out_reached[i]), bool(prep.planned[i])))
    return SimResult(tuple(trajs), param_index, seed)


def simulate(scenario: Scenario, params: SfParams, dt: float = DEFAULT_DT, seed: int = 0, *,
             prepared: Prepared | None = None, cell_size: float = DEFAULT_CELL_SIZE, param_index: int = 0,
             perturb: bool = True) -> SimResult:
    """Run one decentralized simulation of every task in ``scenario``."""
    prep = prepared if prepared is not None else prepare(scenario, cell_size)
    return run_prepared(prep, params, dt, seed, param_index, perturb=perturb)


def solo_trajectory(scenario: Scenario, task_id: int, theta_star: SfParams, dt: float = DEFAULT_DT, *,
                    prepared: Prepared | None = None, cell_size: float = DEFAULT_CELL_SIZE) -> Trajectory:
    """Trajectory of one task simulated alone among the obstacles."""
    prep = prepared if prepared is not None else prepare(scenario, cell_size)
    ids = [t.id for t in prep.scenario.tasks]
    if task_id not in ids:
        raise KeyError(f"no task {task_id}")
    i = ids.index(task_id)
    if not prep.planned[i]:
        raise NoPathError(prep.plan_errors.get(task_id, f"task {task_id} has no path"))
    sub = prep.subset([i])
    return run_prepared(sub, theta_star, dt, seed=0, ignore_agents_los=True).trajectories[0]


def sweep(scenario: Scenario, space: ParamSpace, dt: float = DEFAULT_DT, seed: int = 0, *,
          prepared: Prepared | None = None, cell_size: float = DEFAULT_CELL_SIZE, workers: int = 1) -> list[SimResult]:
    """One simulation per parameter theta^1..theta^m, ordered by j."""
    prep = prepared if prepared is not None else prepare(scenario, cell_size)

    def one(j: int) -> SimResult:
        return run_prepared(prep, space[j], dt, seed, param_index=j)

    js = list(range(1, space.m + 1))
    results: list = [None] * len(js)
    failures = []
    if workers <= 1:
        for k, j in enumerate(js):
            try:
                results[k] = one(j)
            except Exception as exc:  # collected and re-raised with run indices
                failures.append((j, exc))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(one, j) for j in js]
            for k, (j, fut) in enumerate(zip(js, futures)):
                try:
                    results[k] = fut.result()
                except Exception as exc:
                    failures.append((j, exc))
    if failures:
        raise SweepError(failures)
    return results


def count_collisions(result: SimResult, radii, dt: float = DEFAULT_DT) -> np.ndarray:
    """Agent-agent collision events per agent.

    An event is one entry of a pair into overlap (center distance below the sum
    of radii) on the shared time lattice; a pair already overlapping when both
    first coexist counts as one entry.  Both agents of the pair are charged.
    """
    trajs = result.trajectories
    n = len(trajs)
    radii = np.asarray(radii, dtype=np.float64)
    steps = [np.rint(t.times / dt).astype(np.int64) for t in trajs]
    counts = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            si, sj = steps[i], steps[j]
            if len(si) == 0 or len(sj) == 0:
                continue
            lo = max(si[0], sj[0])
            hi = min(si[-1], sj[-1])
            if hi < lo:
                continue
            pi = trajs[i].positions[lo - si[0]: hi - si[0] + 1]
            pj = trajs[j].positions[lo - sj[0]: hi - sj[0] + 1]
            inside = np.hypot(*(pi - pj).T) < radii[i] + radii[j]
            entries = int(inside[0]) + int(np.count_nonzero(inside[1:] & ~inside[:-1]))
            counts[i] += entries
            counts[j] += entries
    return counts


def trajectory_rows(scenario_name: str, results) -> list[tuple]:
    """Rows for the trajectory CSV, ordered by (param_index, agent_id, t)."""
    rows = []
    for res in sorted(results, key=lambda r: r.param_index):
        for tr in sorted(res.trajectories, key=lambda t: t.agent_id):
            flag = int(tr.reached_goal)
            for t, (x, y) in zip(tr.times, tr.positions):
                rows.append((scenario_name, res.param_index, tr.agent_id, float(t), float(x), float(y), flag))
    return rows


TRAJECTORY_HEADER = ("scenario", "param_index", "agent_id", "t", "x", "y", "reached_goal")
