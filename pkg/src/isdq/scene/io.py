"""JSON scenario files.

A scenario document looks like::

    {"name": "...",
     "config": {"label": "...", "bounds": [xmin, ymin, xmax, ymax],
                "polygons": [[[x, y], ...], ...]},
     "tasks": [{"id": 0, "start": [x, y], "goal": [x, y],
                "start_time": 0.0, "max_steps": 2000, "radius": 0.3}, ...]}

``start_time``, ``max_steps`` and ``radius`` may be omitted on input.  The
canonical form written by :func:`save_scenario` always spells them out, lists
tasks by id and writes floats in shortest round-trip form.
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import (
    DEFAULT_MAX_STEPS,
    DEFAULT_RADIUS,
    DEFAULT_START_TIME,
    ObstacleConfig,
    Scenario,
    ScenarioError,
    Task,
)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioError(f"missing field {key!r}", f"{where}{key}")
    return doc[key]


def scenario_from_dict(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("document must be a JSON object")
    name = _require(doc, "name", "")
    if not isinstance(name, str):
        raise ScenarioError("name must be a string", "name")
    cfg = _require(doc, "config", "")
    if not isinstance(cfg, dict):
        raise ScenarioError("config must be an object", "config")
    label = _require(cfg, "label", "config.")
    if not isinstance(label, str):
        raise ScenarioError("label must be a string", "config.label")
    bounds = _require(cfg, "bounds", "config.")
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise ScenarioError("bounds must be [xmin, ymin, xmax, ymax]", "config.bounds")
    polygons = cfg.get("polygons", [])
    if not isinstance(polygons, list):
        raise ScenarioError("polygons must be a list", "config.polygons")
    config = ObstacleConfig(label=label, bounds=tuple(bounds), polygons=tuple(tuple(map(tuple, p)) for p in polygons))

    raw_tasks = _require(doc, "tasks", "")
    if not isinstance(raw_tasks, list):
        raise ScenarioError("tasks must be a list", "tasks")
    tasks = []
    for k, rt in enumerate(raw_tasks):
        if not isinstance(rt, dict):
            raise ScenarioError("task must be an object", f"tasks[{k}]")
        tid = _require(rt, "id", f"tasks[{k}].")
        if not isinstance(tid, int) or isinstance(tid, bool):
            raise ScenarioError("id must be an integer", f"tasks[{k}].id")
        tasks.append(
            Task(
                id=tid,
                start=_require(rt, "start", f"tasks[{k}]."),
                goal=_require(rt, "goal", f"tasks[{k}]."),
                start_time=rt.get("start_time", DEFAULT_START_TIME),
                max_steps=rt.get("max_steps", DEFAULT_MAX_STEPS),
                radius=rt.get("radius", DEFAULT_RADIUS),
                degenerate=bool(rt.get("degenerate", False)),
            )
        )
    return Scenario(name=name, config=config, tasks=tuple(tasks))


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON: {exc}") from None
    return scenario_from_dict(doc)


def _num(v: float) -> str:
    return json.dumps(float(v))


def _pt(p) -> str:
    return f"[{_num(p[0])}, {_num(p[1])}]"


def save_scenario(s: Scenario) -> str:
    c = s.config
    lines = ["{", f'  "name": {json.dumps(s.name)},', '  "config": {']
    lines.append(f'    "label": {json.dumps(c.label)},')
    lines.append(f'    "bounds": [{", ".join(_num(v) for v in c.bounds)}],')
    if c.polygons:
        lines.append('    "polygons": [')
        body = ["      [" + ", ".join(_pt(p) for p in poly) + "]" for poly in c.polygons]
        lines.append(",\n".join(body))
        lines.append("    ]")
    else:
        lines.append('    "polygons": []')
    lines.append("  },")
    lines.append('  "tasks": [')
    rows = []
    for t in s.tasks:
        row = (
            f'    {{"id": {t.id}, "start": {_pt(t.start)}, "goal": {_pt(t.goal)}, '
            f'"start_time": {_num(t.start_time)}, "max_steps": {t.max_steps}, "radius": {_num(t.radius)}'
        )
        if t.degenerate:
            row += ', "degenerate": true'
        rows.append(row + "}")
    lines.append(",\n".join(rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def canonical(text: str) -> str:
    return save_scenario(load_scenario(text))


def read_scenario(path: str | Path) -> Scenario:
    return load_scenario(Path(path).read_text(encoding="utf-8"))


def write_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(save_scenario(s), encoding="utf-8")
