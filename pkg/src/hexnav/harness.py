"""Experiment orchestration: configs, seeded multi-run execution, metrics,
theorem checks and CSV / JSON / SVG output."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path as FsPath
from typing import Optional, Sequence

import numpy as np

from .errors import HexNavError, NoPathError
from .hexgrid import HexMap, load_map, read_map, render_ascii
from .learners import (
    ExplorationStrategy,
    RurlConfig,
    Schedule,
    build_rule_space,
    derive_seeds,
    train,
)
from .navenv import NavEnv
from .planners import AcoParams, aco, astar, bfs_length
from .wallrules import Trajectory, closed_region

METHODS = ("rurl", "rl_plain", "rl_count", "rl_ucb", "astar", "aco")
LEARNING_METHODS = METHODS[:4]
BASELINE = "rl_plain"


class ConfigError(HexNavError):
    pass


# ---------------------------------------------------------------------------
# maps

def bundled_maps() -> list[str]:
    root = resources.files("hexnav") / "maps"
    return sorted(p.name[: -len(".hexmap")] for p in root.iterdir() if p.name.endswith(".hexmap"))


def resolve_map(ref: str, base: Optional[FsPath] = None) -> HexMap:
    """Load ``ref`` as a file path (relative to ``base`` if given) or a bundled map name."""
    candidates = [FsPath(ref)]
    if base is not None and not FsPath(ref).is_absolute():
        candidates.insert(0, base / ref)
    for cand in candidates:
        if cand.is_file():
            return read_map(cand)
    bundled = resources.files("hexnav") / "maps" / f"{ref}.hexmap"
    if bundled.is_file():
        return load_map(bundled.read_text(encoding="utf-8"))
    raise ConfigError(f"map {ref!r} is neither a file nor a bundled map ({', '.join(bundled_maps())})")


# ---------------------------------------------------------------------------
# metrics

def direction_switches(path: Trajectory) -> int:
    """Number of consecutive action pairs that differ."""
    acts = path.actions
    return sum(1 for a, b in zip(acts, acts[1:]) if a != b)


@dataclass(frozen=True)
class PathMetrics:
    length: int
    direction_switches: int

    @classmethod
    def of(cls, path: Trajectory) -> "PathMetrics":
        return cls(path.length, direction_switches(path))


# ---------------------------------------------------------------------------
# config

@dataclass(frozen=True)
class ExperimentConfig:
    map_ref: str
    method: str = "rurl"
    runs: int = 50
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    methods: tuple[str, ...] = ("rurl", "rl_plain")
    rurl: RurlConfig = field(default_factory=RurlConfig)
    aco: AcoParams = field(default_factory=AcoParams)
    base_dir: Optional[str] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for m in (self.method, *self.methods):
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")

    def load_map(self) -> HexMap:
        return resolve_map(self.map_ref, FsPath(self.base_dir) if self.base_dir else None)

    def output_dir(self) -> FsPath:
        return FsPath(os.environ.get("HEXNAV_OUT") or self.out_dir)


def _optional_int(v: str) -> Optional[int]:
    return None if v.lower() in ("none", "") else int(v)


# dotted key -> (section, field, parser)
_KEYS = {
    "map": ("top", "map_ref", str),
    "method": ("top", "method", str),
    "methods": ("top", "methods", lambda v: tuple(x.strip() for x in v.split(",") if x.strip())),
    "runs": ("top", "runs", int),
    "seed": ("top", "seed", int),
    "out": ("top", "out_dir", str),
    "workers": ("top", "workers", int),
    "rurl.k": ("rurl", "k", int),
    "rurl.n": ("rurl", "n_pledge", int),
    "rurl.omega": ("rurl", "omega", float),
    "rurl.b": ("rurl", "b", float),
    "rurl.heading": ("rurl", "pledge_heading", int),
    "rl.algo": ("rurl", "algo", str),
    "rl.alpha": ("rurl", "alpha", float),
    "rl.gamma": ("rurl", "gamma", float),
    "rl.max_steps": ("rurl", "max_steps", int),
    "rl.max_episodes": ("rurl", "max_episodes", int),
    "explore.kind": ("explore", "kind", str),
    "explore.beta": ("explore", "beta", float),
    "explore.damping": ("explore", "damping", float),
    "explore.c": ("explore", "c_explore", float),
    "explore.schedule": ("schedule", "kind", str),
    "explore.rate": ("schedule", "rate", float),
    "explore.scale": ("schedule", "scale", float),
    "explore.offset": ("schedule", "offset", float),
    "explore.cutoff": ("schedule", "cutoff", _optional_int),
    "explore.after": ("schedule", "after", float),
    "aco.ants": ("aco", "n_ants", int),
    "aco.iterations": ("aco", "iterations", int),
    "aco.alpha": ("aco", "alpha", float),
    "aco.beta": ("aco", "beta", float),
    "aco.rho": ("aco", "rho", float),
    "aco.deposit": ("aco", "deposit", float),
}


def parse_config(text: str, base_dir: Optional[str] = None) -> ExperimentConfig:
    """Parse the flat ``key = value`` format; ``#`` starts a comment."""
    sections: dict[str, dict] = {s: {} for s in ("top", "rurl", "explore", "schedule", "aco")}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (p.strip() for p in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        section, name, parse = _KEYS[key]
        if name in sections[section]:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            sections[section][name] = parse(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    top = sections["top"]
    if "map_ref" not in top:
        raise ConfigError("config needs a 'map' entry")
    try:
        schedule = Schedule(**{**_DEFAULT_SCHEDULE, **sections["schedule"]})
        strategy = ExplorationStrategy(schedule=schedule, **sections["explore"])
        rurl = RurlConfig(strategy=strategy, **sections["rurl"])
        aco_params = AcoParams(**sections["aco"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(rurl=rurl, aco=aco_params, base_dir=base_dir, **top)


_DEFAULT_SCHEDULE = {"kind": "exp", "rate": 0.001, "scale": 1.0, "cutoff": 3500}


def read_config(path) -> ExperimentConfig:
    path = FsPath(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path.parent))


# ---------------------------------------------------------------------------
# running

@dataclass
class RunResult:
    index: int
    seed: int
    steps: np.ndarray
    pledge_used: np.ndarray
    metrics: Optional[PathMetrics]
    path: Optional[Trajectory]
    converged: bool
    region_size: int

    @property
    def total_steps(self) -> int:
        return int(self.steps.sum())


@dataclass
class ExperimentReport:
    method: str
    map_name: str
    root_seed: int
    runs: list[RunResult]
    curve: np.ndarray
    reduction_vs_baseline: Optional[float] = None

    @property
    def totals(self) -> list[int]:
        return [r.total_steps for r in self.runs]

    @property
    def mean_total(self) -> float:
        return float(np.mean(self.totals)) if self.curve.size else 0.0

    def summary(self) -> dict:
        out = {
            "method": self.method,
            "map": self.map_name,
            "root_seed": self.root_seed,
            "runs": len(self.runs),
            "mean_total_steps": self.mean_total,
            "per_run": [
                {
                    "run": r.index,
                    "seed": r.seed,
                    "total_steps": r.total_steps,
                    "converged": r.converged,
                    "region_size": r.region_size,
                    "path_length": r.metrics.length if r.metrics else None,
                    "direction_switches": r.metrics.direction_switches if r.metrics else None,
                    "final_path": [[s.i, s.j] for s in r.path.states] if r.path else None,
                }
                for r in self.runs
            ],
        }
        if self.reduction_vs_baseline is not None:
            out["reduction_vs_" + BASELINE] = self.reduction_vs_baseline
        return out


def method_config(base: RurlConfig, method: str) -> tuple[RurlConfig, bool, bool]:
    """Training config and (rules, pledge) switches for a learning method."""
    if method == "rurl":
        return base, True, True
    if method == "rl_plain":
        return base, False, False
    kind = {"rl_count": "count", "rl_ucb": "ucb"}[method]
    return replace(base, strategy=replace(base.strategy, kind=kind)), False, False


def _learning_run(hmap: HexMap, cfg: RurlConfig, rules: bool, pledge: bool, index: int, seed: int) -> RunResult:
    res = train(replace(cfg, seed=seed), NavEnv(hmap, max_steps=cfg.max_steps), rules, pledge)
    path = res.final_greedy_path
    return RunResult(index, seed, res.steps_per_episode, res.pledge_used,
                     PathMetrics.of(path) if path else None, path, res.converged, res.region_size)


def _planner_run(hmap: HexMap, method: str, params: AcoParams, index: int, seed: int) -> RunResult:
    path = astar(hmap, hmap.edge_cm or 1.0) if method == "astar" else aco(hmap, replace(params, seed=seed))
    if path is None:
        raise NoPathError("planner found no path")
    empty = np.zeros(0, dtype=np.int64)
    return RunResult(index, seed, empty, empty, PathMetrics.of(path), path, True, hmap.free_count)


def _one_run(args):
    hmap, method, cfg, aco_params, index, seed = args
    try:
        if method in LEARNING_METHODS:
            mcfg, rules, pledge = method_config(cfg, method)
            return _learning_run(hmap, mcfg, rules, pledge, index, seed)
        return _planner_run(hmap, method, aco_params, index, seed)
    except HexNavError as exc:
        raise HexNavError(f"{method} run {index} (seed {seed}) failed: {exc}") from exc


def _execute(jobs: list, workers: int) -> list[RunResult]:
    # results come back in job order whatever the pool width
    if workers == 1 or len(jobs) == 1:
        return [_one_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_one_run, jobs))


def _report(method: str, hmap: HexMap, root: int, runs: list[RunResult]) -> ExperimentReport:
    if method in LEARNING_METHODS:
        curve = np.mean([r.steps for r in runs], axis=0)
    else:
        curve = np.zeros(0)
    return ExperimentReport(method, hmap.name, root, runs, curve)


def _check_solvable(hmap: HexMap) -> None:
    if bfs_length(hmap) is None:
        raise NoPathError(f"goal of map {hmap.name or '<unnamed>'} is unreachable from the start")


def run_methods(cfg: ExperimentConfig, methods: Sequence[str], write: bool = True) -> dict[str, ExperimentReport]:
    """Run ``methods`` with identical per-run seeds; optionally write outputs."""
    hmap = cfg.load_map()
    _check_solvable(hmap)
    seeds = derive_seeds(cfg.seed, cfg.runs)
    jobs = [(hmap, m, cfg.rurl, cfg.aco, i, s) for m in methods for i, s in enumerate(seeds)]
    results = _execute(jobs, cfg.workers)
    reports = {}
    for m in methods:
        reports[m] = _report(m, hmap, cfg.seed, [r for (_, jm, *_), r in zip(jobs, results) if jm == m])
    if BASELINE in reports:
        base = reports[BASELINE].mean_total
        for m, rep in reports.items():
            if m != BASELINE and m in LEARNING_METHODS and base > 0:
                rep.reduction_vs_baseline = 100.0 * (1.0 - rep.mean_total / base)
    if write:
        out = cfg.output_dir()
        for rep in reports.values():
            write_report(rep, out / rep.method)
        curves = {m: r.curve for m, r in reports.items() if r.curve.size}
        if len(methods) > 1:
            write_bench_tables(reports, out)
            if curves:
                (out / "curves.svg").write_text(emit_svg(curves), encoding="utf-8")
    return reports


def run_experiment(cfg: ExperimentConfig, write: bool = True) -> ExperimentReport:
    return run_methods(cfg, [cfg.method], write)[cfg.method]


def run_bench(cfg: ExperimentConfig, write: bool = True) -> dict[str, ExperimentReport]:
    return run_methods(cfg, list(cfg.methods), write)


# ---------------------------------------------------------------------------
# output

def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run_csv(run: RunResult) -> str:
    rows = ((e, int(s), int(u)) for e, (s, u) in enumerate(zip(run.steps, run.pledge_used), 1))
    return _csv_text(("episode", "steps", "pledge_used"), rows)


def write_report(rep: ExperimentReport, out: FsPath) -> None:
    out.mkdir(parents=True, exist_ok=True)
    if rep.curve.size:
        for r in rep.runs:
            (out / f"run_{r.index:03d}.csv").write_text(run_csv(r), encoding="utf-8")
        (out / "curve.svg").write_text(emit_svg({rep.method: rep.curve}), encoding="utf-8")
    (out / "summary.json").write_text(json.dumps(rep.summary(), indent=2) + "\n", encoding="utf-8")


def write_bench_tables(reports: dict[str, ExperimentReport], out: FsPath) -> None:
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for m, rep in reports.items():
        for r in rep.runs:
            length = r.metrics.length if r.metrics else ""
            switches = r.metrics.direction_switches if r.metrics else ""
            rows.append((m, r.index, r.seed, r.total_steps, length, switches, int(r.converged)))
    header = ("method", "run", "seed", "total_steps", "path_length", "direction_switches", "converged")
    (out / "bench.csv").write_text(_csv_text(header, rows), encoding="utf-8")
    summary = {
        m: {
            "mean_total_steps": rep.mean_total,
            "reduction_vs_" + BASELINE: rep.reduction_vs_baseline,
        }
        for m, rep in reports.items()
    }
    (out / "bench.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def emit_svg(curves: dict[str, np.ndarray]) -> str:
    """Mean steps per episode against episode, one line per method, as SVG text.

    Each line is wrapped in a group with id ``curve-<k>`` (k = position in
    ``curves``), which keeps the output easy to inspect programmatically.
    """
    if not curves:
        raise ValueError("need at least one curve")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "hexnav", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        try:
            for k, (label, y) in enumerate(curves.items()):
                y = np.asarray(y, dtype=float)
                (line,) = ax.plot(np.arange(1, y.size + 1), y, label=label, linewidth=1.0)
                line.set_gid(f"curve-{k}")
            ax.set_xlabel("episode")
            ax.set_ylabel("mean steps per episode")
            ax.legend()
            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# theorem checks

@dataclass
class TheoremReport:
    """Outcome of :func:`check_theorems` for one ``k``.

    ``loop_length`` is the BFS length inside the loop of the *unreduced*
    trajectories.  When that loop already misses every shortest path
    (``premise_holds`` is false) a mismatch says nothing about the reduction.
    """

    k: int
    full_length: Optional[int]
    loop_length: Optional[int]
    region_length: Optional[int]
    region_size: int
    free_count: int
    splices: int
    bad_splices: list
    dump: str = ""

    @property
    def premise_holds(self) -> bool:
        return self.loop_length == self.full_length

    @property
    def optimal_kept(self) -> bool:
        return self.region_length == self.full_length

    @property
    def passed(self) -> bool:
        return self.optimal_kept and not self.bad_splices

    @property
    def reduction_lost_optimum(self) -> bool:
        """A genuine counterexample: the unreduced loop held a shortest path, the reduced one does not."""
        return self.premise_holds and not self.optimal_kept

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "passed": self.passed,
            "full_length": self.full_length,
            "loop_length": self.loop_length,
            "region_length": self.region_length,
            "premise_holds": self.premise_holds,
            "region_size": self.region_size,
            "free_cells": self.free_count,
            "splices": self.splices,
            "bad_splices": [[list(s.start), list(s.end), s.replaced] for s in self.bad_splices],
        }


def check_theorems(hmap: HexMap, k: int) -> TheoremReport:
    """Check that the reduced region keeps a shortest path and every splice shortened the trajectory.

    On failure ``dump`` holds the map, both reduced trajectories and the region overlay.
    """
    space = build_rule_space(hmap, k)
    full = bfs_length(hmap)
    loop = bfs_length(hmap, closed_region(hmap, space.left, space.right))
    inside = bfs_length(hmap, space.region)
    bad = [s for s in space.splices if not s.replaced > s.k]
    rep = TheoremReport(k, full, loop, inside, len(space.region), hmap.free_count, len(space.splices), bad)
    if not rep.passed:
        rep.dump = "\n".join([
            f"K={k}: BFS full={full} unreduced-loop={loop} region={inside}; "
            f"splices violating K<J: {len(bad)}",
            render_ascii(hmap),
            "left:  " + json.dumps(space.left_reduced.to_json()),
            "right: " + json.dumps(space.right_reduced.to_json()),
            render_ascii(hmap, overlay=set(space.region)),
        ])
    return rep
