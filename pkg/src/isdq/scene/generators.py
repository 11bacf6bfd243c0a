"""Deterministic scenario generators.

Every generator is a pure function of its arguments.  Random draws come from
``np.random.default_rng([seed, k])`` for scenario ``k`` so a batch of ``count``
scenarios is a prefix of any larger batch with the same seed.

Room and hallway dimensions that are not pinned by doorway or hallway widths
are fixed constants below; coordinates are rounded to millimetres so files
stay readable.
"""

from __future__ import annotations

import math

import numpy as np

from .model import DEFAULT_RADIUS, ObstacleConfig, Scenario, ScenarioError, Task

EXSD_BENCHMARKS = ("evac1", "evac2", "bottleneck", "concentric", "hallway2", "hallway4")
HYPOTHESIS_TESTS = ("temporal_accumulation", "consequent_interaction", "movement_direction")

MAX_TRIES = 10_000
_SEP = 2 * DEFAULT_RADIUS + 0.2  # minimum spacing between sampled starts (and goals)


def rect(x0: float, y0: float, x1: float, y1: float):
    """Counterclockwise axis-aligned rectangle."""
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


def _r(v: float) -> float:
    return round(float(v), 3)


def _sample_points(rng, region, count, config: ObstacleConfig, taken=(), radius=DEFAULT_RADIUS, sep=_SEP):
    x0, y0, x1, y1 = region
    pts = list(taken)
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > MAX_TRIES:
            raise ScenarioError(f"could not place {count} points in {region} after {MAX_TRIES} tries")
        p = (_r(rng.uniform(x0, x1)), _r(rng.uniform(y0, y1)))
        if any(math.dist(p, q) < sep for q in pts):
            continue
        if config.clearance(p) < radius + 0.1:
            continue
        pts.append(p)
        out.append(p)
    return out


def _tasks(starts, goals, **kw):
    return tuple(Task(id=k, start=s, goal=g, **kw) for k, (s, g) in enumerate(zip(starts, goals)))


# ---------------------------------------------------------------- ExSD

EVAC_BOUNDS = (0.0, 0.0, 26.0, 20.0)
EVAC_DOORS = {"evac1": 2.4, "evac2": 1.4}
EVAC_SPAWN = (1.5, 1.5, 12.0, 18.5)
EVAC_GOALS = (18.0, 3.0, 24.5, 17.0)

BOTTLENECK_BOUNDS = (0.0, 0.0, 36.0, 20.0)
BOTTLENECK_WIDTH = 4.2
BOTTLENECK_SPAWN = (1.5, 1.5, 10.0, 18.5)
BOTTLENECK_GOALS = (28.0, 5.0, 35.0, 15.0)

CONCENTRIC_BOUNDS = (0.0, 0.0, 24.0, 24.0)
CONCENTRIC_RADII = (8.0, 10.0)

HALLWAY2_BOUNDS = (0.0, 0.0, 40.0, 18.0)  # 16 m walkable between 1 m walls
HALLWAY4_BOUNDS = (0.0, 0.0, 40.0, 40.0)

EXSD_AGENTS = {"evac1": 30, "evac2": 30, "bottleneck": 30, "concentric": 20, "hallway2": 30, "hallway4": 32}


def _evac_config(name: str) -> ObstacleConfig:
    w = EVAC_DOORS[name]
    lo, hi = 10.0 - w / 2, 10.0 + w / 2
    polys = (
        rect(0.0, 0.0, 14.6, 0.5),
        rect(0.0, 19.5, 14.6, 20.0),
        rect(0.0, 0.5, 0.5, 19.5),
        rect(14.0, 0.5, 14.6, lo),
        rect(14.0, hi, 14.6, 19.5),
    )
    return ObstacleConfig(name, EVAC_BOUNDS, polys)


def _bottleneck_config() -> ObstacleConfig:
    half = BOTTLENECK_WIDTH / 2
    polys = (
        rect(0.0, 0.0, 12.0, 0.5),
        rect(0.0, 19.5, 12.0, 20.0),
        rect(0.0, 0.5, 0.5, 19.5),
        rect(12.0, 0.0, 26.0, 10.0 - half),
        rect(12.0, 10.0 + half, 26.0, 20.0),
    )
    return ObstacleConfig("bottleneck", BOTTLENECK_BOUNDS, polys)


def _hallway2_config() -> ObstacleConfig:
    return ObstacleConfig("hallway2", HALLWAY2_BOUNDS, (rect(0.0, 0.0, 40.0, 1.0), rect(0.0, 17.0, 40.0, 18.0)))


def _hallway4_config() -> ObstacleConfig:
    polys = (rect(0, 0, 12, 12), rect(28, 0, 40, 12), rect(0, 28, 12, 40), rect(28, 28, 40, 40))
    return ObstacleConfig("hallway4", HALLWAY4_BOUNDS, polys)


# arm regions of the four-way crossing: west, east, south, north
_H4_ARMS = ((1.0, 13.0, 9.0, 27.0), (31.0, 13.0, 39.0, 27.0), (13.0, 1.0, 27.0, 9.0), (13.0, 31.0, 27.0, 39.0))


def _exsd_one(name: str, rng) -> Scenario:
    n = EXSD_AGENTS[name]
    if name in EVAC_DOORS:
        cfg = _evac_config(name)
        starts = _sample_points(rng, EVAC_SPAWN, n, cfg)
        goals = _sample_points(rng, EVAC_GOALS, n, cfg)
    elif name == "bottleneck":
        cfg = _bottleneck_config()
        starts = _sample_points(rng, BOTTLENECK_SPAWN, n, cfg)
        goals = _sample_points(rng, BOTTLENECK_GOALS, n, cfg)
    elif name == "concentric":
        cfg = ObstacleConfig("concentric", CONCENTRIC_BOUNDS, ())
        R = rng.uniform(*CONCENTRIC_RADII)
        phase = rng.uniform(0.0, 2 * math.pi / n)
        cx = cy = 12.0
        starts, goals = [], []
        for k in range(n):
            a = phase + 2 * math.pi * k / n
            starts.append((_r(cx + R * math.cos(a)), _r(cy + R * math.sin(a))))
            goals.append((_r(cx - R * math.cos(a)), _r(cy - R * math.sin(a))))
    elif name == "hallway2":
        cfg = _hallway2_config()
        half = n // 2
        ls = _sample_points(rng, (1.0, 2.0, 9.0, 16.0), half, cfg)
        rs = _sample_points(rng, (31.0, 2.0, 39.0, 16.0), n - half, cfg)
        lg = _sample_points(rng, (31.0, 2.0, 39.0, 16.0), half, cfg)
        rg = _sample_points(rng, (1.0, 2.0, 9.0, 16.0), n - half, cfg)
        starts, goals = ls + rs, lg + rg
    elif name == "hallway4":
        cfg = _hallway4_config()
        per = n // 4
        starts, goals = [], []
        taken_goals: list = []
        for a, region in enumerate(_H4_ARMS):
            starts += _sample_points(rng, region, per, cfg, taken=starts)
            for _ in range(per):
                b = (a + 1 + int(rng.integers(3))) % 4
                g = _sample_points(rng, _H4_ARMS[b], 1, cfg, taken=taken_goals)
                taken_goals += g
                goals += g
    else:
        raise ValueError(f"unknown benchmark {name!r}; expected one of {', '.join(EXSD_BENCHMARKS)}")
    return Scenario(name, cfg, _tasks(starts, goals))


def gen_exsd(benchmark: str, seed: int = 0, count: int = 1) -> list[Scenario]:
    if benchmark not in EXSD_BENCHMARKS:
        raise ValueError(f"unknown benchmark {benchmark!r}; expected one of {', '.join(EXSD_BENCHMARKS)}")
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    for k in range(count):
        s = _exsd_one(benchmark, np.random.default_rng([seed, k]))
        out.append(Scenario(f"{benchmark}-{seed}-{k}", s.config, s.tasks))
    return out


# ---------------------------------------------------------------- EgRD

EGRD_DEFAULTS = dict(n_agents=25, obstacle_count=10, bounds=(0.0, 0.0, 20.0, 20.0), obstacle_size=1.0)
EGRD_MIN_TRAVEL = 2.0  # start-goal distance floor


def gen_egrd(seed: int = 0, count: int = 1, params: dict | None = None) -> list[Scenario]:
    """Uniform random square obstacles with uniform random start/goal pairs."""
    if count < 1:
        raise ValueError("count must be >= 1")
    p = dict(EGRD_DEFAULTS)
    if params:
        unknown = set(params) - set(p)
        if unknown:
            raise ValueError(f"unknown EgRD parameters: {sorted(unknown)}")
        p.update(params)
    x0, y0, x1, y1 = map(float, p["bounds"])
    size = float(p["obstacle_size"])
    out = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        polys = []
        for _ in range(int(p["obstacle_count"])):
            ox = _r(rng.uniform(x0, x1 - size))
            oy = _r(rng.uniform(y0, y1 - size))
            polys.append(rect(ox, oy, _r(ox + size), _r(oy + size)))
        cfg = ObstacleConfig(f"egrd-{seed}-{k}", (x0, y0, x1, y1), tuple(polys))
        region = (x0 + 0.5, y0 + 0.5, x1 - 0.5, y1 - 0.5)
        starts = _sample_points(rng, region, int(p["n_agents"]), cfg)
        goals: list = []
        for s in starts:
            tries = 0
            while True:
                tries += 1
                if tries > MAX_TRIES:
                    raise ScenarioError("could not place goals; world too crowded")
                g = _sample_points(rng, region, 1, cfg, taken=goals)[0]
                if math.dist(g, s) >= EGRD_MIN_TRAVEL:
                    goals.append(g)
                    break
        out.append(Scenario(f"egrd-{seed}-{k}", cfg, _tasks(starts, goals)))
    return out


# ---------------------------------------------------------------- hypothesis pairs

OPEN_BOUNDS = (0.0, 0.0, 20.0, 20.0)
PARALLEL_SPACING = 1.5  # lateral spacing of the side-by-side pair
QUEUE_SPACING = 1.2
HEX_INNER = 1.0
HEX_OUTER = 7.0
SHIFT = 10.0  # X_{-i} of the consequent test each travel this far to the left


def _open(label: str) -> ObstacleConfig:
    return ObstacleConfig(label, OPEN_BOUNDS, ())


def gen_hypothesis(test: str) -> tuple[Scenario, Scenario]:
    if test == "temporal_accumulation":
        cfg = _open(test)
        lo, hi = 10.0 - PARALLEL_SPACING / 2, 10.0 + PARALLEL_SPACING / 2
        s1 = _tasks([(2.0, lo), (2.0, hi)], [(18.0, lo), (18.0, hi)])
        s2 = _tasks([(2.0, 10.0), (18.0, 10.0)], [(18.0, 10.0), (2.0, 10.0)])
    elif test == "consequent_interaction":
        cfg = _open(test)
        ego = ((3.0, 10.0), (18.0, 10.0))
        d = QUEUE_SPACING
        queue = [(12.0 + d * k, 10.0) for k in range(5)]
        vee = [(12.0, 10.0), (12.0 + d, 10.0 + d), (12.0 + d, 10.0 - d), (12.0 + 2 * d, 10.0 + 2 * d),
               (12.0 + 2 * d, 10.0 - 2 * d)]
        queue = [(_r(x), _r(y)) for x, y in queue]
        vee = [(_r(x), _r(y)) for x, y in vee]
        # every X_{-i} keeps its horizontal level and travels SHIFT to the left
        s1 = _tasks([ego[0]] + queue, [ego[1]] + [(_r(x - SHIFT), y) for x, y in queue])
        s2 = _tasks([ego[0]] + vee, [ego[1]] + [(_r(x - SHIFT), y) for x, y in vee])
    elif test == "movement_direction":
        cfg = _open(test)
        inner, outer = [], []
        for k in range(6):
            a = math.pi / 3 * k
            inner.append((_r(10.0 + HEX_INNER * math.cos(a)), _r(10.0 + HEX_INNER * math.sin(a))))
            outer.append((_r(10.0 + HEX_OUTER * math.cos(a)), _r(10.0 + HEX_OUTER * math.sin(a))))
        s1 = _tasks(inner, outer)
        s2 = _tasks(outer, inner)
    else:
        raise ValueError(f"unknown hypothesis test {test!r}; expected one of {', '.join(HYPOTHESIS_TESTS)}")
    return Scenario(f"{test}-1", cfg, s1), Scenario(f"{test}-2", cfg, s2)


# ---------------------------------------------------------------- gap study

GAP_BOUNDS = (0.0, 0.0, 24.0, 18.0)
GAP_CENTER_X = 12.0
GAP_BLOCK = (6.0, 7.5, 8.5)  # block width, y0, y1
# Diagonal counterflow on 45 degree lines through cell centres.  X_i climbs
# along x - y = 3; the other three walk down in single file along x - y = 3.5.
GAP_EGO = ((4.25, 1.25), (17.25, 14.25))
GAP_OTHERS = tuple(((17.75 + k, 14.25 + k), (4.75 + k, 1.25 + k)) for k in range(3))


def gen_gap_study(gaps, radius: float = DEFAULT_RADIUS) -> list[Scenario]:
    """One scenario per gap; tasks are identical across gaps."""
    bw, y0, y1 = GAP_BLOCK
    pairs = (GAP_EGO,) + GAP_OTHERS
    out = []
    for g in gaps:
        g = float(g)
        if g < 2 * radius:
            raise ValueError(f"gap {g} m is narrower than an agent ({2 * radius} m)")
        lo = GAP_CENTER_X - g / 2
        hi = GAP_CENTER_X + g / 2
        polys = (rect(_r(max(GAP_BOUNDS[0], lo - bw)), y0, _r(lo), y1), rect(_r(hi), y0, _r(min(GAP_BOUNDS[2], hi + bw)), y1))
        cfg = ObstacleConfig(f"gap-{g:g}", GAP_BOUNDS, polys)
        tasks = tuple(Task(id=k, start=s, goal=e, radius=radius) for k, (s, e) in enumerate(pairs))
        out.append(Scenario(f"gap-{g:g}", cfg, tasks))
    return out
