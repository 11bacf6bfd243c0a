"""Trajectory differences and their abstraction into mode indices.

Each agent's interactive trajectories (one per parameter sample) are compared
with its solo trajectory by exact DTW.  The resulting row of distances is
grouped into modes, either by equal-count percentile bins or by 1-D DBSCAN,
and the per-agent labels are stacked into a ModeTable whose rows keep the
cross-agent co-occurrence of each simulation run.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import JIT
from .sim.engine import Trajectory

PERCENTILE = "percentile"
DBSCAN = "dbscan"
METHODS = (PERCENTILE, DBSCAN)
DEFAULT_ALPHA = 0.5
DEFAULT_EPS = 10.0
DEFAULT_MIN_SAMPLES = 5


@njit(**JIT)
def _dtw(a, b):
    la = a.shape[0]
    lb = b.shape[0]
    prev = np.full(lb + 1, np.inf)
    cur = np.full(lb + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, la + 1):
        cur[0] = np.inf
        ax = a[i - 1, 0]
        ay = a[i - 1, 1]
        for j in range(1, lb + 1):
            dx = ax - b[j - 1, 0]
            dy = ay - b[j - 1, 1]
            c = np.sqrt(dx * dx + dy * dy)
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = c + best
        prev, cur = cur, prev
    return prev[lb]


def _positions(x) -> np.ndarray:
    if isinstance(x, Trajectory):
        x = x.positions
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected an (k, 2) position sequence")
    if len(arr) == 0:
        raise ValueError("DTW needs non-empty sequences")
    return arr


def dtw(a, b) -> float:
    """Sum-cost DTW with Euclidean point cost over the full alignment grid."""
    return float(_dtw(_positions(a), _positions(b)))


def mode_count(values, alpha: float = DEFAULT_ALPHA, m: int | None = None) -> int:
    """c = clamp(round(alpha * mean(values)), 1, m); halves round to even."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    v = np.asarray(values, dtype=np.float64)
    if m is None:
        m = len(v)
    c = int(round(alpha * float(np.mean(v))))
    return max(1, min(c, m))


def percentile_cluster(values, c: int) -> np.ndarray:
    """Equal-count bins: sample with 1-based stable rank r gets floor((r-1)*c/m) + 1."""
    v = np.asarray(values, dtype=np.float64)
    m = len(v)
    if not 1 <= c <= m:
        raise ValueError(f"c={c} outside 1..{m}")
    order = np.argsort(v, kind="stable")
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m)
    return rank * c // m + 1


def dbscan_cluster_1d(values, eps: float = DEFAULT_EPS, min_samples: int = DEFAULT_MIN_SAMPLES) -> np.ndarray:
    """Density clustering of scalar values.

    A core point has at least ``min_samples`` values (itself included) within
    ``eps``.  Core points closer than ``eps`` share a cluster; a border point
    joins the cluster of its nearest core point.  Clusters are numbered 1..k by
    ascending minimum value and outliers get 0.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    v = np.asarray(values, dtype=np.float64)
    m = len(v)
    labels = np.zeros(m, dtype=np.int64)
    if m == 0:
        return labels
    order = np.argsort(v, kind="stable")
    s = v[order]
    counts = np.searchsorted(s, s + eps, side="right") - np.searchsorted(s, s - eps, side="left")
    core = counts >= min_samples
    sorted_labels = np.zeros(m, dtype=np.int64)
    core_idx = np.flatnonzero(core)
    if len(core_idx):
        # in 1-D, sorted core points chain into one cluster while gaps stay within eps
        breaks = np.diff(s[core_idx]) > eps
        cl = np.concatenate(([1], 1 + np.cumsum(breaks)))
        sorted_labels[core_idx] = cl
        core_vals = s[core_idx]
        for k in np.flatnonzero(~core):
            pos = np.searchsorted(core_vals, s[k])
            best, bd = 0, np.inf
            for q in (pos - 1, pos):
                if 0 <= q < len(core_vals):
                    d = abs(core_vals[q] - s[k])
                    if d <= eps and d < bd:
                        best, bd = cl[q], d
            sorted_labels[k] = best
    labels[order] = sorted_labels
    # renumber by ascending cluster minimum (already ascending by construction, kept explicit)
    present = [c for c in np.unique(labels) if c > 0]
    mins = sorted(present, key=lambda c: (v[labels == c].min(), c))
    remap = {c: k + 1 for k, c in enumerate(mins)}
    return np.array([remap.get(int(x), 0) for x in labels], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class ModeTable:
    indices: np.ndarray  # (m, n) ints
    mode_counts: tuple[int, ...]
    param_index: tuple[int, ...]
    agent_ids: tuple[int, ...]
    method: str = PERCENTILE

    @property
    def m(self) -> int:
        return self.indices.shape[0]

    @property
    def n(self) -> int:
        return self.indices.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.indices[:, i]

    def outliers(self) -> tuple[int, ...]:
        """Per-agent count of DBSCAN outlier samples (index 0)."""
        return tuple(int(np.count_nonzero(self.indices[:, i] == 0)) for i in range(self.n))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param_index"] + [f"k_{a}" for a in self.agent_ids])
        w.writerow(["mode_counts"] + list(self.mode_counts))
        for j, row in zip(self.param_index, self.indices):
            w.writerow([j] + [int(x) for x in row])
        return buf.getvalue()


def mode_table(indices, mode_counts=None, param_index=None, agent_ids=None, method: str = PERCENTILE) -> ModeTable:
    """Wrap a raw (m, n) index array; defaults fill in counts and labels."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 2:
        raise ValueError("indices must be 2-D (m rows, n agents)")
    m, n = idx.shape
    if mode_counts is None:
        mode_counts = tuple(int(len(np.unique(idx[:, i]))) for i in range(n))
    if param_index is None:
        param_index = tuple(range(1, m + 1))
    if agent_ids is None:
        agent_ids = tuple(range(n))
    idx = idx.copy()
    idx.setflags(write=False)
    return ModeTable(idx, tuple(int(c) for c in mode_counts), tuple(param_index), tuple(agent_ids), method)


def dtw_matrix(results, solos) -> np.ndarray:
    """(m, n) array of DTW(t_i^j, s_i); a ``None`` solo gives a zero column."""
    m = len(results)
    n = len(solos)
    out = np.zeros((m, n))
    for j, res in enumerate(results):
        if res.n != n:
            raise ValueError(f"run {res.param_index} has {res.n} trajectories, expected {n}")
        for i, (tr, solo) in enumerate(zip(res.trajectories, solos)):
            if solo is not None and tr.planned:
                out[j, i] = dtw(tr.positions, solo.positions)
    return out


def table_from_dtw(values, method: str = PERCENTILE, alpha: float = DEFAULT_ALPHA, eps: float = DEFAULT_EPS,
                   min_samples: int = DEFAULT_MIN_SAMPLES, param_index=None, agent_ids=None) -> ModeTable:
    d = np.asarray(values, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("DTW values must be (m, n)")
    m, n = d.shape
    cols = []
    counts = []
    for i in range(n):
        if method == PERCENTILE:
            c = mode_count(d[:, i], alpha, m)
            cols.append(percentile_cluster(d[:, i], c))
        elif method == DBSCAN:
            lab = dbscan_cluster_1d(d[:, i], eps, min_samples)
            c = int(len(np.unique(lab)))
            cols.append(lab)
        else:
            raise ValueError(f"unknown clustering method {method!r}")
        counts.append(c)
    idx = np.stack(cols, axis=1) if cols else np.zeros((m, 0), dtype=np.int64)
    return mode_table(idx, counts, param_index, agent_ids, method)


def build_mode_table(results, solos, method: str = PERCENTILE, alpha: float = DEFAULT_ALPHA, eps: float = DEFAULT_EPS,
                     min_samples: int = DEFAULT_MIN_SAMPLES) -> ModeTable:
    """Cluster each agent's DTW row; table rows follow the order of ``results``."""
    results = list(results)
    if not results:
        raise ValueError("no simulation results")
    d = dtw_matrix(results, solos)
    ids = tuple(t.agent_id for t in results[0].trajectories)
    return table_from_dtw(d, method, alpha, eps, min_samples, tuple(r.param_index for r in results), ids)
