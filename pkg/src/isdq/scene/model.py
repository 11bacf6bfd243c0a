"""Scenario data model and validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import shapely

Vec2 = tuple[float, float]
Polygon = tuple[Vec2, ...]

DEFAULT_RADIUS = 0.3
DEFAULT_MAX_STEPS = 2000
DEFAULT_START_TIME = 0.0


class ScenarioError(ValueError):
    """Raised for malformed or invalid scenario documents."""

    def __init__(self, message: str, field: str | None = None, task_id: int | None = None):
        self.field = field
        self.task_id = task_id
        where = []
        if task_id is not None:
            where.append(f"task {task_id}")
        if field is not None:
            where.append(field)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


def _signed_area(poly: Polygon) -> float:
    s = 0.0
    for (x1, y1), (x2, y2) in zip(poly, poly[1:] + poly[:1]):
        s += x1 * y2 - x2 * y1
    return 0.5 * s


def _as_vec(p, name: str, task_id: int | None = None) -> Vec2:
    try:
        x, y = float(p[0]), float(p[1])
        if len(p) != 2:
            raise TypeError
    except (TypeError, ValueError, IndexError):
        raise ScenarioError(f"expected [x, y], got {p!r}", name, task_id) from None
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ScenarioError("coordinates must be finite", name, task_id)
    return (x, y)


@dataclass(frozen=True)
class ObstacleConfig:
    label: str
    bounds: tuple[float, float, float, float]
    polygons: tuple[Polygon, ...] = ()

    def __post_init__(self):
        if not self.label:
            raise ScenarioError("label must be non-empty", "config.label")
        b = tuple(float(v) for v in self.bounds)
        if len(b) != 4 or not all(math.isfinite(v) for v in b) or b[0] >= b[2] or b[1] >= b[3]:
            raise ScenarioError(f"bad bounds {self.bounds!r}", "config.bounds")
        object.__setattr__(self, "bounds", b)
        polys = []
        for k, raw in enumerate(self.polygons):
            name = f"config.polygons[{k}]"
            poly = tuple(_as_vec(p, name) for p in raw)
            if len(poly) < 3:
                raise ScenarioError("polygon needs at least 3 vertices", name)
            area = _signed_area(poly)
            if area == 0.0:
                raise ScenarioError("degenerate polygon", name)
            if area < 0:
                poly = poly[::-1]
            if not shapely.Polygon(poly).is_valid:
                raise ScenarioError("polygon is not simple", name)
            for x, y in poly:
                if not (b[0] <= x <= b[2] and b[1] <= y <= b[3]):
                    raise ScenarioError(f"vertex ({x}, {y}) outside bounds", name)
            polys.append(poly)
        object.__setattr__(self, "polygons", tuple(polys))

    @property
    def width(self) -> float:
        return self.bounds[2] - self.bounds[0]

    @property
    def height(self) -> float:
        return self.bounds[3] - self.bounds[1]

    def clearance(self, p: Vec2) -> float:
        """Signed distance from ``p`` to the nearest obstacle (negative inside)."""
        if not self.polygons:
            return math.inf
        pt = shapely.Point(p)
        best = math.inf
        for poly in self.polygons:
            shp = shapely.Polygon(poly)
            d = shp.exterior.distance(pt)
            if shp.contains(pt):
                d = -d
            best = min(best, d)
        return best


@dataclass(frozen=True)
class Task:
    id: int
    start: Vec2
    goal: Vec2
    start_time: float = DEFAULT_START_TIME
    max_steps: int = DEFAULT_MAX_STEPS
    radius: float = DEFAULT_RADIUS
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, "start", _as_vec(self.start, "start", self.id))
        object.__setattr__(self, "goal", _as_vec(self.goal, "goal", self.id))
        object.__setattr__(self, "start_time", float(self.start_time))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.start_time >= 0 or not math.isfinite(self.start_time):
            raise ScenarioError("start_time must be >= 0", "start_time", self.id)
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ScenarioError("max_steps must be a positive integer", "max_steps", self.id)
        object.__setattr__(self, "max_steps", int(self.max_steps))
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise ScenarioError("radius must be > 0", "radius", self.id)
        if self.start == self.goal and not self.degenerate:
            raise ScenarioError("start equals goal", "goal", self.id)


@dataclass(frozen=True)
class Scenario:
    name: str
    config: ObstacleConfig
    tasks: tuple[Task, ...] = field(default_factory=tuple)

    def __post_init__(self):
        tasks = tuple(sorted(self.tasks, key=lambda t: t.id))
        object.__setattr__(self, "tasks", tasks)
        validate(self)

    @property
    def n(self) -> int:
        return len(self.tasks)

    def task(self, task_id: int) -> Task:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(task_id)

    def with_tasks(self, tasks) -> "Scenario":
        return Scenario(self.name, self.config, tuple(tasks))


@dataclass(frozen=True)
class DomainSample:
    name: str
    scenarios: tuple[Scenario, ...]

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        if not self.scenarios:
            raise ValueError(f"domain {self.name!r} has no scenarios")


def validate(s: Scenario) -> None:
    """Check the cross-field invariants of a scenario; raise ScenarioError."""
    if not s.tasks:
        raise ScenarioError("scenario needs at least one task", "tasks")
    seen: set[int] = set()
    starts: set[tuple[Vec2, float]] = set()
    xmin, ymin, xmax, ymax = s.config.bounds
    for t in s.tasks:
        if t.id in seen:
            raise ScenarioError("duplicate task id", "id", t.id)
        seen.add(t.id)
        key = (t.start, t.start_time)
        if key in starts:
            raise ScenarioError("another task starts at the same place and time", "start", t.id)
        starts.add(key)
        for name, p in (("start", t.start), ("goal", t.goal)):
            if not (xmin <= p[0] <= xmax and ymin <= p[1] <= ymax):
                raise ScenarioError(f"{p} outside bounds", name, t.id)
            if s.config.clearance(p) < t.radius:
                raise ScenarioError(f"{p} lies inside an obstacle inflated by the radius", name, t.id)
