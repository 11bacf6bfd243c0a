"""Interaction Score and the waypoint-proximity baseline.

The Interaction Score of agent i is the plug-in mutual information, in bits,
between its mode index K_i and the composite tuple K_{-i} of every other
agent's mode index, estimated over the m rows of a ModeTable.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .nav import DEFAULT_CELL_SIZE
from .scene.model import DomainSample, Scenario
from .sim.engine import DEFAULT_DT, prepare, solo_trajectory, sweep
from .sim.params import DEFAULT_M, ParamSpace, SfParams
from .traj import DEFAULT_ALPHA, DEFAULT_EPS, DEFAULT_MIN_SAMPLES, METHODS, PERCENTILE, ModeTable, dtw_matrix, table_from_dtw


def _rows(table) -> np.ndarray:
    idx = table.indices if isinstance(table, ModeTable) else np.asarray(table)
    if idx.ndim != 2:
        raise ValueError("table must be 2-D")
    return idx


def _key_ids(block: np.ndarray) -> np.ndarray:
    """Integer id per row such that equal rows share an id."""
    if block.shape[1] == 0:
        return np.zeros(block.shape[0], dtype=np.int64)
    _, inv = np.unique(block, axis=0, return_inverse=True)
    return inv.reshape(-1)


def joint_prob(table, k) -> float:
    idx = _rows(table)
    k = np.asarray(k)
    return float(np.count_nonzero(np.all(idx == k, axis=1))) / idx.shape[0]


def marginal_prob(table, i: int, k, rest: bool = False) -> float:
    """P(K_i = k), or P(K_{-i} = k) with ``rest=True`` (k is then the (n-1)-tuple)."""
    idx = _rows(table)
    if rest:
        others = np.delete(idx, i, axis=1)
        hit = np.all(others == np.asarray(k), axis=1)
    else:
        hit = idx[:, i] == k
    return float(np.count_nonzero(hit)) / idx.shape[0]


def interaction_score(table, i: int) -> float:
    """Plug-in I(K_i; K_{-i}) in bits.

    The estimate (1/m) sum_j log2(N_joint m / (N_i N_rest)) is evaluated as the
    log of one exact rational product, so mathematically equal scores come
    out bit-identical (two-agent symmetry, constant extra columns).
    """
    idx = _rows(table)
    m, n = idx.shape
    if m == 0:
        raise ValueError("empty table")
    if not 0 <= i < n:
        raise IndexError(i)
    if n == 1:
        return 0.0
    ki = idx[:, i]
    rest = _key_ids(np.delete(idx, i, axis=1))
    joint = Counter(zip(ki.tolist(), rest.tolist()))
    ni = Counter(ki.tolist())
    nr = Counter(rest.tolist())
    num = 1
    den = 1
    for (a, b), c in joint.items():
        num *= (c * m) ** c
        den *= (ni[a] * nr[b]) ** c
    r = Fraction(num, den)
    val = (math.log2(r.numerator) - math.log2(r.denominator)) / m
    # I <= H(K_i) <= log2(#distinct K_i); clip float rounding of huge logs
    return min(max(val, 0.0), math.log2(len(ni)))


def interaction_scores(table) -> np.ndarray:
    idx = _rows(table)
    return np.array([interaction_score(idx, i) for i in range(idx.shape[1])])


# ---------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class IsConfig:
    m: int = DEFAULT_M
    alpha: float = DEFAULT_ALPHA
    dt: float = DEFAULT_DT
    seed: int = 0
    method: str = PERCENTILE
    eps: float = DEFAULT_EPS
    min_samples: int = DEFAULT_MIN_SAMPLES
    cell_size: float = DEFAULT_CELL_SIZE
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown clustering method {self.method!r}")
        if self.m < 2:
            raise ValueError("m must be >= 2")


@dataclass(frozen=True, eq=False)
class DtwData:
    """Simulation-side output of the pipeline, reusable across clusterings."""

    scenario: str
    values: np.ndarray  # (m, n)
    agent_ids: tuple[int, ...]
    param_index: tuple[int, ...]
    reached_fraction: tuple[float, ...]
    planned: tuple[bool, ...]
    results: tuple = field(default=(), repr=False)


@dataclass(frozen=True, eq=False)
class IsReport:
    scenario: str
    per_agent: tuple[float, ...]
    agent_ids: tuple[int, ...]
    reached_goal: tuple[bool, ...]
    reached_fraction: tuple[float, ...]
    planned: tuple[bool, ...]
    table: ModeTable
    config: IsConfig

    @property
    def scenario_mean(self) -> float:
        return float(np.mean(self.per_agent))

    @property
    def scenario_std(self) -> float:
        return float(np.std(self.per_agent))

    def to_dict(self) -> dict:
        cfg = self.config
        agents = []
        for k, aid in enumerate(self.agent_ids):
            agents.append({
                "id": aid,
                "is_bits": self.per_agent[k],
                "reached_goal": self.reached_goal[k],
                "reached_fraction": self.reached_fraction[k],
                "planned": self.planned[k],
                "mode_count": self.table.mode_counts[k],
            })
            if cfg.method == "dbscan":
                agents[-1]["outliers"] = self.table.outliers()[k]
        return {
            "scenario": self.scenario,
            "method": "is",
            "per_agent": agents,
            "mean": self.scenario_mean,
            "std": self.scenario_std,
            "config": {"m": cfg.m, "alpha": cfg.alpha, "dt": cfg.dt, "seed": cfg.seed, "cluster": cfg.method,
                       "eps": cfg.eps, "min_samples": cfg.min_samples, "cell_size": cfg.cell_size},
        }


def _sim_key(cfg: IsConfig) -> tuple:
    return (cfg.m, cfg.dt, cfg.seed, cfg.cell_size)


@lru_cache(maxsize=512)
def _dtw_cached(scenario: Scenario, key: tuple, workers: int, keep: bool) -> DtwData:
    m, dt, seed, cell_size = key
    space = ParamSpace(m=m)
    prep = prepare(scenario, cell_size)
    solos = []
    for k, t in enumerate(scenario.tasks):
        solos.append(solo_trajectory(scenario, t.id, space.theta_star, dt, prepared=prep) if prep.planned[k] else None)
    results = sweep(scenario, space, dt, seed, prepared=prep, workers=workers)
    d = dtw_matrix(results, solos)
    d.setflags(write=False)
    reached = np.array([[tr.reached_goal for tr in r.trajectories] for r in results])
    return DtwData(
        scenario=scenario.name,
        values=d,
        agent_ids=tuple(t.id for t in scenario.tasks),
        param_index=tuple(r.param_index for r in results),
        reached_fraction=tuple(float(x) for x in reached.mean(axis=0)),
        planned=tuple(bool(x) for x in prep.planned),
        results=tuple(results) if keep else (),
    )


def scenario_dtw(scenario: Scenario, cfg: IsConfig = IsConfig(), keep_results: bool = False) -> DtwData:
    """Solo runs at theta*, the m-run sweep and the DTW matrix (memoized per scenario and config)."""
    return _dtw_cached(scenario, _sim_key(cfg), cfg.workers, keep_results)


def is_from_dtw(data: DtwData, cfg: IsConfig = IsConfig()) -> IsReport:
    table = table_from_dtw(data.values, cfg.method, cfg.alpha, cfg.eps, cfg.min_samples, data.param_index,
                           data.agent_ids)
    return IsReport(
        scenario=data.scenario,
        per_agent=tuple(float(x) for x in interaction_scores(table)),
        agent_ids=data.agent_ids,
        reached_goal=tuple(f == 1.0 for f in data.reached_fraction),
        reached_fraction=data.reached_fraction,
        planned=data.planned,
        table=table,
        config=cfg,
    )


def is_scenario(scenario: Scenario, cfg: IsConfig = IsConfig()) -> IsReport:
    """Interaction Score of every agent in ``scenario``."""
    return is_from_dtw(scenario_dtw(scenario, cfg), cfg)


@dataclass(frozen=True)
class DomainIs:
    name: str
    mean: float
    std: float
    values: tuple[float, ...]
    scenario_means: tuple[float, ...]


def pool(name: str, reports, exclude_failed: bool = False) -> DomainIs:
    vals = []
    for r in reports:
        for v, ok in zip(r.per_agent, r.reached_goal):
            if ok or not exclude_failed:
                vals.append(v)
    arr = np.array(vals, dtype=np.float64)
    return DomainIs(name, float(arr.mean()), float(arr.std()), tuple(vals), tuple(r.scenario_mean for r in reports))


def is_domain(domain: DomainSample, cfg: IsConfig = IsConfig(), exclude_failed: bool = False) -> DomainIs:
    """Mean and std of per-agent IS pooled over every scenario of the domain."""
    return pool(domain.name, [is_scenario(s, cfg) for s in domain.scenarios], exclude_failed)


# ---------------------------------------------------------------- baseline


@dataclass(frozen=True)
class BlConfig:
    eps_d: float = 1.6
    eps_t: float = 1.0
    max_speed: float = SfParams().max_speed

    def __post_init__(self):
        if not (self.eps_d > 0 and self.eps_t > 0 and self.max_speed > 0):
            raise ValueError("baseline thresholds and speed must be positive")


@dataclass(frozen=True)
class BlReport:
    scenario: str
    per_agent: tuple[int, ...]
    agent_ids: tuple[int, ...]
    planned: tuple[bool, ...]
    config: BlConfig

    @property
    def scenario_mean(self) -> float:
        return float(np.mean(self.per_agent))

    @property
    def scenario_std(self) -> float:
        return float(np.std(self.per_agent))

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "method": "bl",
            "per_agent": [{"id": a, "bl_count": c, "reached_goal": None, "planned": p}
                          for a, c, p in zip(self.agent_ids, self.per_agent, self.planned)],
            "mean": self.scenario_mean,
            "std": self.scenario_std,
            "config": asdict(self.config),
        }


def baseline_bl(scenario: Scenario, cfg: BlConfig = BlConfig(), cell_size: float = DEFAULT_CELL_SIZE) -> BlReport:
    """Waypoint proximity count on the planned A* paths.

    A waypoint at path length l is stamped start_time + l / max_speed.  Two
    waypoints of different agents are detected when closer than eps_d in space
    and eps_t in time; an agent's count is the number of its own waypoints
    that take part in at least one detection.
    """
    prep = prepare(scenario, cell_size)
    n = scenario.n
    wps, stamps = [], []
    for t, path in zip(scenario.tasks, prep.paths):
        if path is None:
            wps.append(np.zeros((0, 2)))
            stamps.append(np.zeros(0))
        else:
            wps.append(path.waypoints)
            stamps.append(t.start_time + path.cumulative_length / cfg.max_speed)
    hit = [np.zeros(len(w), dtype=bool) for w in wps]
    for i in range(n):
        for j in range(i + 1, n):
            if len(wps[i]) == 0 or len(wps[j]) == 0:
                continue
            d = np.linalg.norm(wps[i][:, None, :] - wps[j][None, :, :], axis=2)
            dt = np.abs(stamps[i][:, None] - stamps[j][None, :])
            close = (d < cfg.eps_d) & (dt < cfg.eps_t)
            hit[i] |= close.any(axis=1)
            hit[j] |= close.any(axis=0)
    counts = tuple(int(h.sum()) for h in hit)
    return BlReport(scenario.name, counts, tuple(t.id for t in scenario.tasks), tuple(bool(p) for p in prep.planned), cfg)


def report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n"
