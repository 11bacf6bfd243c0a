"""Standalone SVG figures: scenario views with trajectories, and box plots."""

from __future__ import annotations

import csv
import io
from collections import defaultdict

import numpy as np

from .scene.model import Scenario

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
           "#17becf")


def _f(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def read_trajectory_csv(text: str) -> dict:
    """{(param_index, agent_id): (k, 2) array} from the trajectory CSV."""
    tracks = defaultdict(list)
    for row in csv.DictReader(io.StringIO(text)):
        tracks[(int(row["param_index"]), int(row["agent_id"]))].append((float(row["x"]), float(row["y"])))
    return {k: np.array(v) for k, v in sorted(tracks.items())}


def read_mode_csv(text: str) -> dict:
    """{(param_index, agent_id): mode index} from a ModeTable CSV."""
    rows = list(csv.reader(io.StringIO(text)))
    ids = [int(h.split("_", 1)[1]) for h in rows[0][1:]]
    out = {}
    for row in rows[2:]:
        j = int(row[0])
        for a, k in zip(ids, row[1:]):
            out[(j, a)] = int(k)
    return out


def scenario_svg(scenario: Scenario, tracks: dict | None = None, modes: dict | None = None, scale: float = 20.0) -> str:
    """Obstacles, start/goal markers and one polyline per (run, agent).

    Polylines are colored by mode index when ``modes`` is given, otherwise by agent.
    """
    xmin, ymin, xmax, ymax = scenario.config.bounds
    w = (xmax - xmin) * scale
    h = (ymax - ymin) * scale

    def pt(x, y):
        return f"{_f((x - xmin) * scale)},{_f((ymax - y) * scale)}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(w)}" height="{_f(h)}" viewBox="0 0 {_f(w)} {_f(h)}">',
        f'<rect x="0" y="0" width="{_f(w)}" height="{_f(h)}" fill="white" stroke="black"/>',
    ]
    for poly in scenario.config.polygons:
        out.append(f'<polygon class="obstacle" points="{" ".join(pt(x, y) for x, y in poly)}" fill="#555"/>')
    for (j, aid), xy in sorted((tracks or {}).items()):
        key = modes.get((j, aid), 0) if modes else aid
        color = PALETTE[key % len(PALETTE)]
        pts = " ".join(pt(x, y) for x, y in xy)
        out.append(f'<polyline class="trajectory" data-run="{j}" data-agent="{aid}" points="{pts}" fill="none" '
                   f'stroke="{color}" stroke-width="1" stroke-opacity="0.6"/>')
    for t in scenario.tasks:
        r = _f(t.radius * scale)
        sx, sy = pt(*t.start).split(",")
        gx, gy = pt(*t.goal).split(",")
        out.append(f'<circle class="start" cx="{sx}" cy="{sy}" r="{r}" fill="none" stroke="black"/>')
        out.append(f'<rect class="goal" x="{_f(float(gx) - float(r))}" y="{_f(float(gy) - float(r))}" '
                   f'width="{_f(2 * float(r))}" height="{_f(2 * float(r))}" fill="none" stroke="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def boxplot_svg(groups, ylabel: str = "IS (bits)", width: float = 640.0, height: float = 360.0) -> str:
    """One box (quartiles, median, 1.5 IQR whiskers) per (name, values) group."""
    groups = [(name, np.asarray(v, dtype=float)) for name, v in groups]
    if not groups:
        raise ValueError("no groups to plot")
    allv = np.concatenate([v for _, v in groups])
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    left, right, top, bottom = 60.0, 20.0, 20.0, 50.0
    pw = width - left - right
    ph = height - top - bottom

    def y(v):
        return top + (hi - v) / (hi - lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(width)}" height="{_f(height)}" '
        f'viewBox="0 0 {_f(width)} {_f(height)}">',
        f'<rect x="0" y="0" width="{_f(width)}" height="{_f(height)}" fill="white"/>',
        f'<line x1="{_f(left)}" y1="{_f(top)}" x2="{_f(left)}" y2="{_f(top + ph)}" stroke="black"/>',
        f'<text x="15" y="{_f(top + ph / 2)}" transform="rotate(-90 15 {_f(top + ph / 2)})" '
        f'text-anchor="middle" font-size="12">{ylabel}</text>',
    ]
    for tick in np.linspace(lo, hi, 5):
        out.append(f'<text x="{_f(left - 5)}" y="{_f(y(tick) + 4)}" text-anchor="end" font-size="10">{tick:.2f}</text>')
    slot = pw / len(groups)
    for k, (name, v) in enumerate(groups):
        cx = left + slot * (k + 0.5)
        bw = slot * 0.5
        q1, med, q3 = np.percentile(v, [25, 50, 75])
        iqr = q3 - q1
        wlo = float(v[v >= q1 - 1.5 * iqr].min())
        whi = float(v[v <= q3 + 1.5 * iqr].max())
        color = PALETTE[k % len(PALETTE)]
        out.append(f'<g class="box" data-name="{name}">')
        out.append(f'<line x1="{_f(cx)}" y1="{_f(y(whi))}" x2="{_f(cx)}" y2="{_f(y(wlo))}" stroke="black"/>')
        out.append(f'<rect x="{_f(cx - bw / 2)}" y="{_f(y(q3))}" width="{_f(bw)}" height="{_f(max(y(q1) - y(q3), 0.5))}" '
                   f'fill="{color}" fill-opacity="0.5" stroke="black"/>')
        out.append(f'<line x1="{_f(cx - bw / 2)}" y1="{_f(y(med))}" x2="{_f(cx + bw / 2)}" y2="{_f(y(med))}" '
                   f'stroke="black" stroke-width="2"/>')
        for o in v[(v < wlo) | (v > whi)]:
            out.append(f'<circle cx="{_f(cx)}" cy="{_f(y(o))}" r="2" fill="none" stroke="black"/>')
        out.append("</g>")
        out.append(f'<text x="{_f(cx)}" y="{_f(height - bottom + 18)}" text-anchor="middle" font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
