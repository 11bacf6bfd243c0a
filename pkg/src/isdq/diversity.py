"""Diversity of a scenario domain, in bits.

H(E) is the entropy of obstacle-configuration labels.  For each label the
start/goal cells of every pooled task give H(I, D | e); the joint entropy is
H(E) + sum_e p(e) H(I, D | e) and DQ is its negative.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

from .scene.model import DomainSample, Task

DEFAULT_CELLS_PER_SIDE = 10


def entropy_of_counts(counts) -> float:
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    if total == 0:
        raise ValueError("no samples")
    h = 0.0
    for c in counts:
        p = c / total
        h -= p * math.log2(p)
    return h + 0.0  # no negative zero


def env_entropy(labels) -> float:
    labels = list(labels)
    if not labels:
        raise ValueError("env_entropy needs at least one label")
    return entropy_of_counts(Counter(labels).values())


@dataclass(frozen=True)
class CellGrid:
    """Maps positions to cells after scaling bounds so the longer side is 1."""

    cells_per_side: int = DEFAULT_CELLS_PER_SIDE

    def __post_init__(self):
        if self.cells_per_side < 1:
            raise ValueError("cells_per_side must be >= 1")

    @property
    def n_cells(self) -> int:
        return self.cells_per_side ** 2

    def cell(self, p, bounds) -> int:
        xmin, ymin, xmax, ymax = bounds
        scale = max(xmax - xmin, ymax - ymin)
        k = self.cells_per_side
        u = (p[0] - xmin) / scale
        v = (p[1] - ymin) / scale
        cx = min(max(int(math.floor(u * k)), 0), k - 1)
        cy = min(max(int(math.floor(v * k)), 0), k - 1)
        return cy * k + cx


def start_goal_entropy(tasks, grid: CellGrid = CellGrid(), bounds=None) -> float:
    """Joint entropy of (cell(start), cell(goal)) over pooled tasks.

    ``tasks`` is either a list of (Task, bounds) pairs or a list of Task with
    a shared ``bounds``.
    """
    pairs = []
    for item in tasks:
        if isinstance(item, Task):
            if bounds is None:
                raise ValueError("bounds required for bare tasks")
            t, b = item, bounds
        else:
            t, b = item
        pairs.append((grid.cell(t.start, b), grid.cell(t.goal, b)))
    if not pairs:
        raise ValueError("start_goal_entropy needs at least one task")
    return entropy_of_counts(Counter(pairs).values())


@dataclass(frozen=True)
class DqReport:
    domain: str
    h_env: float
    h_id_given_env: float
    cells_per_side: int
    label_counts: tuple[tuple[str, int], ...]

    @property
    def h_joint(self) -> float:
        return self.h_env + self.h_id_given_env

    @property
    def dq(self) -> float:
        return -self.h_joint

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "h_env": self.h_env,
            "h_id_given_env": self.h_id_given_env,
            "h_joint": self.h_joint,
            "dq": self.dq,
            "cells_per_side": self.cells_per_side,
            "label_counts": dict(self.label_counts),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def dq(domain: DomainSample, grid: CellGrid = CellGrid()) -> DqReport:
    labels = [s.config.label for s in domain.scenarios]
    counts = Counter(labels)
    total = len(labels)
    cond = 0.0
    for label in sorted(counts):
        pooled = [(t, s.config.bounds) for s in domain.scenarios if s.config.label == label for t in s.tasks]
        cond += counts[label] / total * start_goal_entropy(pooled, grid)
    return DqReport(domain.name, env_entropy(labels), cond, grid.cells_per_side,
                    tuple(sorted(counts.items())))
