"""Command-line interface.

    isdq gen exsd evac1 --count 5 --seed 7 --out scenarios/
    isdq validate scenarios/*.json
    isdq score --method is --m 100 scenarios/evac1-7-0.json --out reports/
    isdq dq scenarios/
    isdq rank --source exsd/ --source egrd/ --target exsd/ --target egrd/ --m 100
    isdq plot --scenario s.json --trajectories s.trajectories.csv --out s.svg

Shared options may go before or after the subcommand.  Exit status: 0 on success, 1 on a
runtime or IO failure, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .diversity import DEFAULT_CELLS_PER_SIDE, CellGrid, dq
from .nav import DEFAULT_CELL_SIZE
from .plot import boxplot_svg, read_mode_csv, read_trajectory_csv, scenario_svg
from .rank import DEFAULT_LAMBDA, RankConfig, rank_pairs, ranking_csv, ranking_json
from .scene import (
    EXSD_BENCHMARKS,
    HYPOTHESIS_TESTS,
    DomainSample,
    ScenarioError,
    gen_egrd,
    gen_exsd,
    gen_gap_study,
    gen_hypothesis,
    read_scenario,
    save_scenario,
)
from .score import BlConfig, IsConfig, baseline_bl, is_from_dtw, pool, report_json, scenario_dtw
from .sim.engine import DEFAULT_DT, TRAJECTORY_HEADER, trajectory_rows
from .sim.params import DEFAULT_M
from .traj import DEFAULT_ALPHA, DEFAULT_EPS, DEFAULT_MIN_SAMPLES, METHODS, PERCENTILE

log = logging.getLogger("isdq")


class UsageError(Exception):
    pass


_SHARED = (
    (("--seed",), dict(type=int, default=0)),
    (("--m",), dict(type=int, default=DEFAULT_M, help="parameter samples per scenario (default %(default)s)")),
    (("--alpha",), dict(type=float, default=DEFAULT_ALPHA)),
    (("--lambda",), dict(dest="lam", type=float, default=DEFAULT_LAMBDA)),
    (("--dt",), dict(type=float, default=DEFAULT_DT)),
    (("--cell-size",), dict(type=float, default=DEFAULT_CELL_SIZE)),
    (("--cells-per-side",), dict(type=int, default=DEFAULT_CELLS_PER_SIDE)),
    (("--cluster",), dict(choices=METHODS, default=PERCENTILE)),
    (("--eps",), dict(type=float, default=DEFAULT_EPS)),
    (("--min-samples",), dict(type=int, default=DEFAULT_MIN_SAMPLES)),
    (("--eps-d",), dict(type=float, default=BlConfig().eps_d)),
    (("--eps-t",), dict(type=float, default=BlConfig().eps_t)),
    (("--workers",), dict(type=int, default=1, help="threads for the parameter sweep")),
    (("--out",), dict(default=".", help="output directory (or file for rank/plot)")),
    (("-v", "--verbose"), dict(action="store_true", default=False)),
)


def _common(top: bool) -> argparse.ArgumentParser:
    """Shared options, accepted before or after the subcommand.

    The subcommand copy uses SUPPRESS defaults so it never masks a value
    given before the subcommand.
    """
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("shared options")
    for names, kw in _SHARED:
        kw = dict(kw)
        if not top:
            kw["default"] = argparse.SUPPRESS
        g.add_argument(*names, **kw)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common(top=False)
    ap = argparse.ArgumentParser(prog="isdq", description="Interaction and diversity scores for crowd scenarios.",
                                 parents=[_common(top=True)])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", parents=[common], help="write generated scenario files")
    g.add_argument("family", choices=("exsd", "egrd", "hypothesis", "gap-study"))
    g.add_argument("name", nargs="?", help="benchmark (exsd) or test id (hypothesis)")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--gaps", default="3,4,5,6,8,10", help="comma-separated gaps in meters (gap-study)")
    g.add_argument("--agents", type=int, default=None, help="agents per scenario (egrd)")
    g.add_argument("--obstacles", type=int, default=None, help="obstacle count (egrd)")

    v = sub.add_parser("validate", parents=[common], help="check scenario files")
    v.add_argument("files", nargs="+")

    s = sub.add_parser("score", parents=[common], help="score scenario files")
    s.add_argument("files", nargs="+")
    s.add_argument("--method", choices=("is", "bl", "both"), default="is")
    s.add_argument("--dump-trajectories", action="store_true", help="also write trajectory and mode-table CSVs")

    d = sub.add_parser("dq", parents=[common], help="diversity of a domain (files or directories)")
    d.add_argument("paths", nargs="+")
    d.add_argument("--name", default=None, help="domain name (default: first path's name)")

    r = sub.add_parser("rank", parents=[common], help="rank source/target domain pairs")
    r.add_argument("--source", action="append", required=True, help="source domain directory (repeatable)")
    r.add_argument("--target", action="append", required=True, help="target domain directory (repeatable)")
    r.add_argument("--exclude-failed", action="store_true", help="drop agents that missed their goal from IS means")

    pl = sub.add_parser("plot", parents=[common], help="render SVG figures")
    pl.add_argument("--scenario", help="scenario file for a trajectory view")
    pl.add_argument("--trajectories", help="trajectory CSV from score --dump-trajectories")
    pl.add_argument("--modes", help="mode-table CSV to color trajectories by mode index")
    pl.add_argument("--reports", nargs="+", help="score reports for a box plot")
    pl.add_argument("--group", choices=("prefix", "file"), default="prefix",
                    help="box per scenario-name prefix (before the first '-') or per report file")
    return ap


def _is_config(a) -> IsConfig:
    return IsConfig(m=a.m, alpha=a.alpha, dt=a.dt, seed=a.seed, method=a.cluster, eps=a.eps,
                    min_samples=a.min_samples, cell_size=a.cell_size, workers=a.workers)


def _scenario_files(path: str) -> list[Path]:
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise UsageError(f"no scenario files in {p}")
        return files
    if not p.exists():
        raise FileNotFoundError(p)
    return [p]


def _out_dir(a) -> Path:
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_gen(a) -> int:
    if a.family == "exsd":
        if a.name not in EXSD_BENCHMARKS:
            raise UsageError(f"gen exsd needs a benchmark: {', '.join(EXSD_BENCHMARKS)}")
        if a.count < 1:
            raise UsageError("--count must be >= 1")
        scenarios = gen_exsd(a.name, a.seed, a.count)
    elif a.family == "egrd":
        if a.count < 1:
            raise UsageError("--count must be >= 1")
        params = {}
        if a.agents is not None:
            params["n_agents"] = a.agents
        if a.obstacles is not None:
            params["obstacle_count"] = a.obstacles
        scenarios = gen_egrd(a.seed, a.count, params)
    elif a.family == "hypothesis":
        if a.name not in HYPOTHESIS_TESTS:
            raise UsageError(f"gen hypothesis needs a test: {', '.join(HYPOTHESIS_TESTS)}")
        scenarios = list(gen_hypothesis(a.name))
    else:
        try:
            gaps = [float(x) for x in a.gaps.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"bad --gaps {a.gaps!r}") from None
        if not gaps:
            raise UsageError("--gaps is empty")
        try:
            scenarios = gen_gap_study(gaps)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out = _out_dir(a)
    for s in scenarios:
        path = out / f"{s.name}.json"
        path.write_text(save_scenario(s), encoding="utf-8")
        print(path)
    return 0


def cmd_validate(a) -> int:
    bad = 0
    for f in a.files:
        try:
            s = read_scenario(f)
            print(f"{f}: ok ({s.n} tasks, {len(s.config.polygons)} obstacles)")
        except (ScenarioError, OSError, UnicodeDecodeError) as exc:
            print(f"{f}: {exc}")
            bad += 1
    return 1 if bad else 0


def cmd_score(a) -> int:
    cfg = _is_config(a)
    bl_cfg = BlConfig(eps_d=a.eps_d, eps_t=a.eps_t)
    out = _out_dir(a)
    failures = 0
    for f in a.files:
        try:
            s = read_scenario(f)
            stem = Path(f).stem
            if a.method in ("is", "both"):
                data = scenario_dtw(s, cfg, keep_results=a.dump_trajectories)
                rep = is_from_dtw(data, cfg)
                (out / f"{stem}.is.json").write_text(report_json(rep), encoding="utf-8")
                print(f"{f}: IS mean {rep.scenario_mean:.4f} bits over {s.n} agents")
                if a.dump_trajectories:
                    buf = io.StringIO()
                    w = csv.writer(buf, lineterminator="\n")
                    w.writerow(TRAJECTORY_HEADER)
                    for row in trajectory_rows(s.name, data.results):
                        w.writerow(row[:3] + tuple(repr(v) for v in row[3:6]) + row[6:])
                    (out / f"{stem}.trajectories.csv").write_text(buf.getvalue(), encoding="utf-8")
                    (out / f"{stem}.modes.csv").write_text(rep.table.to_csv(), encoding="utf-8")
            if a.method in ("bl", "both"):
                rep = baseline_bl(s, bl_cfg, a.cell_size)
                (out / f"{stem}.bl.json").write_text(report_json(rep), encoding="utf-8")
                print(f"{f}: BL mean {rep.scenario_mean:.4f} over {s.n} agents")
        except (ScenarioError, OSError, RuntimeError, ValueError) as exc:
            print(f"{f}: FAILED: {exc}", file=sys.stderr)
            failures += 1
    return 1 if failures else 0


def _load_domain(paths, name=None) -> DomainSample:
    files = [f for p in paths for f in _scenario_files(p)]
    return DomainSample(name or Path(paths[0]).name or "domain", tuple(read_scenario(f) for f in files))


def cmd_dq(a) -> int:
    dom = _load_domain(a.paths, a.name)
    rep = dq(dom, CellGrid(a.cells_per_side))
    text = rep.to_json()
    out = Path(a.out)
    if out.suffix == ".json":
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    else:
        _out_dir(a)
        (out / f"{dom.name}.dq.json").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0


def cmd_rank(a) -> int:
    cfg = _is_config(a)
    grid = CellGrid(a.cells_per_side)
    sources = []
    for p in a.source:
        dom = _load_domain([p])
        sources.append((dom.name, dq(dom, grid).dq))
    targets = []
    for p in a.target:
        dom = _load_domain([p])
        reports = [is_from_dtw(scenario_dtw(s, cfg), cfg) for s in dom.scenarios]
        targets.append((dom.name, pool(dom.name, reports, a.exclude_failed).mean))
    pairs = rank_pairs(sources, targets, RankConfig(a.lam))
    out = _out_dir(a)
    (out / "ranking.json").write_text(ranking_json(pairs), encoding="utf-8")
    (out / "ranking.csv").write_text(ranking_csv(pairs), encoding="utf-8")
    sys.stdout.write(ranking_csv(pairs))
    return 0


def cmd_plot(a) -> int:
    out = Path(a.out)
    if out.suffix != ".svg":
        raise UsageError("plot --out must name an .svg file")
    if a.reports:
        groups: dict[str, list[float]] = {}
        for f in a.reports:
            doc = json.loads(Path(f).read_text(encoding="utf-8"))
            key = Path(f).stem if a.group == "file" else doc["scenario"].split("-")[0]
            field = "is_bits" if doc.get("method") == "is" else "bl_count"
            groups.setdefault(key, []).extend(float(x[field]) for x in doc["per_agent"])
        ylabel = "IS (bits)" if all(json.loads(Path(f).read_text())["method"] == "is" for f in a.reports) else "score"
        svg = boxplot_svg(list(groups.items()), ylabel=ylabel)
    elif a.scenario:
        s = read_scenario(a.scenario)
        tracks = read_trajectory_csv(Path(a.trajectories).read_text(encoding="utf-8")) if a.trajectories else None
        modes = read_mode_csv(Path(a.modes).read_text(encoding="utf-8")) if a.modes else None
        svg = scenario_svg(s, tracks, modes)
    else:
        raise UsageError("plot needs --reports or --scenario")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, encoding="utf-8")
    print(out)
    return 0


COMMANDS = {"gen": cmd_gen, "validate": cmd_validate, "score": cmd_score, "dq": cmd_dq, "rank": cmd_rank,
            "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[a.cmd](a)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ScenarioError, OSError, ValueError, RuntimeError) as exc:
        print(f"isdq {a.cmd}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
