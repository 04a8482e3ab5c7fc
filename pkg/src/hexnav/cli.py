"""Command-line entry point ``hexnav``.

Exit codes: 0 success, 1 domain error (bad map, unreachable goal, failed
check), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import HexNavError
from .harness import (
    METHODS,
    PathMetrics,
    check_theorems,
    read_config,
    resolve_map,
    run_bench,
    run_experiment,
)
from .hexgrid import AbsDir, rasterize_dims, render_ascii
from .learners import build_rule_space
from .mapgen import PRESETS, generate
from .planners import AcoParams, aco, astar, bfs_shortest
from .wallrules import Hand, reduce_trajectory, wall_follow


def _heading(text: str) -> int:
    try:
        return int(AbsDir[text.upper()])
    except KeyError:
        raise argparse.ArgumentTypeError(f"heading must be one of {', '.join(d.name for d in AbsDir)}") from None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _emit(obj) -> None:
    print(json.dumps(obj, separators=(",", ":")))


def cmd_rasterize(args) -> None:
    n, m = rasterize_dims(args.length, args.width, args.edge)
    print(f"{n} {m}")


def cmd_trace_wall(args) -> None:
    hmap = resolve_map(args.map)
    _emit(wall_follow(hmap, Hand(args.hand), heading=args.heading).to_json())


def cmd_reduce(args) -> None:
    hmap = resolve_map(args.map)
    hands = [Hand.LEFT, Hand.RIGHT] if args.hand == "both" else [Hand(args.hand)]
    for hand in hands:
        traj = wall_follow(hmap, hand, heading=args.heading)
        _emit(reduce_trajectory(hmap, traj, args.k).to_json())


def cmd_region(args) -> None:
    hmap = resolve_map(args.map)
    space = build_rule_space(hmap, args.k, args.heading)
    sys.stdout.write(render_ascii(hmap, overlay=set(space.region), mark="*"))


def cmd_plan(args) -> None:
    hmap = resolve_map(args.map)
    if args.algo == "bfs":
        path = bfs_shortest(hmap)
    elif args.algo == "astar":
        path = astar(hmap, hmap.edge_cm or 1.0)
    else:
        path = aco(hmap, AcoParams(n_ants=args.ants, iterations=args.iterations, seed=args.seed))
    if path is None:
        raise HexNavError("goal is unreachable from the start")
    metrics = PathMetrics.of(path)
    _emit({**path.to_json(), "length": metrics.length, "direction_switches": metrics.direction_switches})


def _config(args):
    cfg = read_config(args.config)
    overrides = {}
    if args.runs is not None:
        overrides["runs"] = args.runs
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = replace(cfg, **overrides)
    return cfg


def cmd_train(args) -> None:
    cfg = _config(args)
    if args.method:
        cfg = replace(cfg, method=args.method)
    rep = run_experiment(cfg)
    print(f"{rep.method}: {len(rep.runs)} runs, mean total steps {rep.mean_total:.1f}")
    print(f"outputs in {cfg.output_dir() / rep.method}")


def cmd_bench(args) -> None:
    cfg = _config(args)
    reports = run_bench(cfg)
    for m, rep in reports.items():
        line = f"{m:9s}"
        if rep.curve.size:
            line += f" mean total steps {rep.mean_total:14.1f}"
        if rep.reduction_vs_baseline is not None:
            line += f"  reduction vs rl_plain {rep.reduction_vs_baseline:6.2f}%"
        lengths = sorted({r.metrics.length for r in rep.runs if r.metrics})
        if lengths:
            line += f"  path lengths {lengths}"
        print(line)
    print(f"outputs in {cfg.output_dir()}")


def cmd_check_theorems(args) -> int:
    hmap = resolve_map(args.map)
    failed = False
    for k in args.k:
        rep = check_theorems(hmap, k)
        _emit(rep.as_dict())
        if not rep.passed:
            failed = True
            print(rep.dump, file=sys.stderr)
    return 1 if failed else 0


def cmd_gen_map(args) -> None:
    text = render_ascii(generate(args.preset, args.seed))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hexnav", description="Hex-grid navigation with rule-guided tabular RL.")
    p.add_argument("--version", action="version", version=f"hexnav {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("rasterize", help="grid size for a room of the given size")
    s.add_argument("--length", type=float, required=True, help="room length in cm (gives the rows)")
    s.add_argument("--width", type=float, required=True, help="room width in cm (gives the columns)")
    s.add_argument("--edge", type=float, required=True, help="hexagon edge length in cm")
    s.set_defaults(func=cmd_rasterize)

    def map_arg(sp):
        sp.add_argument("--map", required=True, help="map file or bundled map name")
        sp.add_argument("--heading", type=_heading, default=int(AbsDir.N), help="initial heading (default N)")

    s = sub.add_parser("trace-wall", help="wall-following trajectory as a JSON line")
    map_arg(s)
    s.add_argument("--hand", choices=["left", "right"], required=True)
    s.set_defaults(func=cmd_trace_wall)

    s = sub.add_parser("reduce", help="reduced wall-following trajectories as JSON lines (left, then right)")
    map_arg(s)
    s.add_argument("--k", type=_positive, required=True)
    s.add_argument("--hand", choices=["left", "right", "both"], default="both")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("region", help="map with the reduced exploration region marked '*'")
    map_arg(s)
    s.add_argument("--k", type=_positive, required=True)
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("plan", help="plan a path with bfs, astar or aco")
    s.add_argument("--map", required=True, help="map file or bundled map name")
    s.add_argument("--algo", choices=["bfs", "astar", "aco"], required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--ants", type=_positive, default=100)
    s.add_argument("--iterations", type=_positive, default=100)
    s.set_defaults(func=cmd_plan)

    for name, func, helptext in (
        ("train", cmd_train, "run one method from a config"),
        ("bench", cmd_bench, "run the config's methods with paired seeds"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", required=True, help="config file")
        s.add_argument("--runs", type=_positive)
        s.add_argument("--workers", type=_positive)
        s.add_argument("--seed", type=int, help="root seed")
        s.add_argument("--out", help="output directory (HEXNAV_OUT takes precedence)")
        if name == "train":
            s.add_argument("--method", choices=METHODS)
        s.set_defaults(func=func)

    s = sub.add_parser("check-theorems", help="check region optimality and splice lengths")
    s.add_argument("--map", required=True, help="map file or bundled map name")
    s.add_argument("--k", type=_positive, nargs="+", required=True)
    s.set_defaults(func=cmd_check_theorems)

    s = sub.add_parser("gen-map", help="generate a synthetic map")
    s.add_argument("--preset", choices=sorted(PRESETS), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="write to this file instead of stdout")
    s.set_defaults(func=cmd_gen_map)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except (HexNavError, ValueError, OSError) as exc:
        print(f"hexnav: error: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
