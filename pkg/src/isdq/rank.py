"""Source/target selection with the ISDQ estimate: is_mean + lambda * dq."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

DEFAULT_LAMBDA = 0.1


@dataclass(frozen=True)
class RankConfig:
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lambda must be >= 0")


@dataclass(frozen=True)
class PairEstimate:
    source: str
    target: str
    is_mean: float
    dq: float
    isdq: float


def isdq(is_mean: float, dq_value: float, cfg: RankConfig = RankConfig()) -> float:
    return is_mean + cfg.lam * dq_value


def _dq_of(v) -> float:
    return float(getattr(v, "dq", v))


def select_source(sources, target=None) -> str:
    """Name of the source with the smallest DQ; the target does not matter."""
    items = [(name, _dq_of(v)) for name, v in sources]
    if not items:
        raise ValueError("no sources")
    return min(items, key=lambda x: (x[1], x[0]))[0]


def select_target(targets) -> str:
    items = [(name, float(v)) for name, v in targets]
    if not items:
        raise ValueError("no targets")
    return min(items, key=lambda x: (x[1], x[0]))[0]


def rank_pairs(sources, targets, cfg: RankConfig = RankConfig()) -> list[PairEstimate]:
    sources = [(name, _dq_of(v)) for name, v in sources]
    targets = [(name, float(v)) for name, v in targets]
    if not sources or not targets:
        raise ValueError("rank_pairs needs at least one source and one target")
    out = [PairEstimate(s, t, im, d, isdq(im, d, cfg)) for s, d in sources for t, im in targets]
    out.sort(key=lambda p: (p.isdq, p.source, p.target))
    return out


_COLUMNS = ("source", "target", "is_mean", "dq", "isdq", "rank")


def ranking_rows(pairs) -> list[dict]:
    return [{"source": p.source, "target": p.target, "is_mean": p.is_mean, "dq": p.dq, "isdq": p.isdq, "rank": k + 1}
            for k, p in enumerate(pairs)]


def ranking_json(pairs) -> str:
    return json.dumps(ranking_rows(pairs), indent=2) + "\n"


def ranking_csv(pairs) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(ranking_rows(pairs))
    return buf.getvalue()
