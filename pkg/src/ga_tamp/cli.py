"""Command line: ``ga-tamp plan``, ``ga-tamp bench`` and ``ga-tamp validate``.

Exit codes: 0 success, 1 input error, 2 regrasp needed, 3 failure (or, for
``validate``, a failed check).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import itertools
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import scenes
from .aspace import OrientationBasis
from .errors import ConfigurationError, InvalidArgumentError
from .grrt import RRTParams
from .planfile import document_from_result, read_plan, validate_plan, write_plan
from .planner import TIMING_KEYS, PlannerParams, plan_assembly
from .scene import scene_from_dict

EXIT = {"success": 0, "input-error": 1, "regrasp-needed": 2, "failure": 3}
BASIS_CHOICES = [b.value for b in OrientationBasis]
BENCH_AXES = ("basis", "rolls", "positions", "selection_order", "contact_samples", "roll_samples")
BENCH_COLUMNS = list(BENCH_AXES) + list(TIMING_KEYS) + ["total", "discovery_rate", "t_discover", "runs"]

log = logging.getLogger("ga_tamp")


def resolve_scene(ref, overrides=None):
    """Load a scene path, or ``builtin:<name>`` for one of the bundled scenes."""
    if str(ref).startswith("builtin:"):
        name = str(ref).split(":", 1)[1]
        if name not in scenes.BUILTIN:
            raise ConfigurationError(f"scene: unknown builtin {name!r} (have {sorted(scenes.BUILTIN)})", "scene")
        doc = scenes.BUILTIN[name]()
        base = "."
    else:
        path = Path(ref)
        try:
            doc = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"scene: cannot read {path}: {exc.strerror}", "scene") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"scene: malformed JSON at line {exc.lineno}: {exc.msg}", "scene") from None
        base = path.parent
    if overrides:
        doc.setdefault("grasp", {}).update(overrides)
    return scene_from_dict(doc, base)


def _params(args) -> PlannerParams:
    d = RRTParams()
    rrt = RRTParams(step_size=args.rrt_step if args.rrt_step is not None else d.step_size,
                    goal_bias=args.rrt_goal_bias if args.rrt_goal_bias is not None else d.goal_bias,
                    max_iterations=args.rrt_max_iterations or d.max_iterations,
                    edge_resolution=args.rrt_resolution if args.rrt_resolution is not None else d.edge_resolution)
    return PlannerParams(selection_order=args.selection_order, basis=args.icosphere_level, rolls=args.rolls,
                         positions=args.positions, rrt=rrt, seed=args.seed)


def _add_plan_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--selection-order", type=int, choices=(1, 2), default=1)
    p.add_argument("--icosphere-level", choices=BASIS_CHOICES, default="octa",
                   help="orientation basis: Platonic solid or icosphere level")
    p.add_argument("--rolls", type=int, default=6, help="rolls per basis vertex")
    p.add_argument("--positions", type=int, default=2, help="assembly positions sampled in the region")
    p.add_argument("--rrt-step", type=float, default=None, help="RRT extension step (rad)")
    p.add_argument("--rrt-goal-bias", type=float, default=None)
    p.add_argument("--rrt-max-iterations", type=int, default=None)
    p.add_argument("--rrt-resolution", type=float, default=None, help="edge check resolution (rad)")


def cmd_plan(args) -> int:
    try:
        scene = resolve_scene(args.scene)
        params = _params(args)
    except (ConfigurationError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["input-error"]
    result = plan_assembly(scene, params)
    doc = document_from_result(result, scene, params)
    write_plan(args.out, doc)
    if args.stats:
        Path(args.stats).write_text(json.dumps(doc.stats, indent=1) + "\n")
    print(f"{result.outcome}: {len(result.segments)} segments in {result.total_time:.2f} s"
          + (f" ({result.message})" if result.message else ""))
    return EXIT[result.outcome]


def cmd_validate(args) -> int:
    try:
        scene = resolve_scene(args.scene)
        doc = read_plan(args.plan)
        problems = validate_plan(doc, scene, args.resolution)
    except (ConfigurationError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["input-error"]
    for p in problems:
        print(p)
    if problems:
        return EXIT["failure"]
    print(f"ok: {len(doc.segments)} segments")
    return 0


# ---------------------------------------------------------------- bench


def load_bench_spec(path):
    """Bench spec JSON: {"scene": ref, "seeds": n or [..], "axes": {name: [values]}, "out": csv path}."""
    try:
        spec = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"bench: cannot read {path}: {exc.strerror}", "bench") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"bench: malformed JSON at line {exc.lineno}: {exc.msg}", "bench") from None
    return normalize_bench_spec(spec)


def normalize_bench_spec(spec):
    if "scene" not in spec:
        raise ConfigurationError("scene: missing", "scene")
    seeds = spec.get("seeds", 1)
    seeds = list(range(seeds)) if isinstance(seeds, int) else list(seeds)
    if not seeds:
        raise ConfigurationError("seeds: need at least one seed per cell", "seeds")
    axes = spec.get("axes", {})
    for k, v in axes.items():
        if k not in BENCH_AXES:
            raise ConfigurationError(f"axes.{k}: unknown axis (have {', '.join(BENCH_AXES)})", f"axes.{k}")
        if not isinstance(v, list) or not v:
            raise ConfigurationError(f"axes.{k}: must be a nonempty list", f"axes.{k}")
    return {"scene": spec["scene"], "seeds": seeds, "axes": axes, "out": spec.get("out", "bench.csv"),
            "defaults": spec.get("defaults", {})}


def bench_cells(spec):
    names = list(spec["axes"])
    for combo in itertools.product(*(spec["axes"][n] for n in names)):
        cell = dict(spec["defaults"])
        cell.update(zip(names, combo))
        yield cell


def _run_cell_seed(scene_ref, cell, seed):
    overrides = {}
    if "contact_samples" in cell:
        overrides["contact_samples_per_facet"] = int(cell["contact_samples"])
    if "roll_samples" in cell:
        overrides["roll_samples_per_contact"] = int(cell["roll_samples"])
    scene = resolve_scene(scene_ref, overrides)
    params = PlannerParams(selection_order=int(cell.get("selection_order", 1)), basis=cell.get("basis", "octa"),
                           rolls=int(cell.get("rolls", 6)), positions=int(cell.get("positions", 2)), seed=seed)
    t0 = time.perf_counter()
    result = plan_assembly(scene, params)
    return {"outcome": result.outcome, "timings": result.timings, "total": time.perf_counter() - t0}


def _mean(xs):
    xs = [x for x in xs if x is not None]
    return sum(xs) / len(xs) if xs else None


def summarize_cell(cell, runs):
    row = {k: cell.get(k, "") for k in BENCH_AXES}
    for k in TIMING_KEYS:
        row[k] = _mean([r["timings"].get(k) for r in runs])
    row["total"] = _mean([r["total"] for r in runs])
    wins = [r["total"] for r in runs if r["outcome"] == "success"]
    row["discovery_rate"] = len(wins) / len(runs)
    row["t_discover"] = _mean(wins)
    row["runs"] = len(runs)
    return row


def bench_threads():
    env = os.environ.get("GA_TAMP_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigurationError("GA_TAMP_THREADS: must be an integer", "GA_TAMP_THREADS") from None
    return cap


def run_bench(spec, threads=None):
    """Rows in cell order, one per cell; runs (cell, seed) jobs in a process pool."""
    cells = list(bench_cells(spec))
    jobs = [(ci, seed) for ci in range(len(cells)) for seed in spec["seeds"]]
    threads = threads or bench_threads()
    results = {}
    if threads <= 1:
        for ci, seed in jobs:
            results[(ci, seed)] = _run_cell_seed(spec["scene"], cells[ci], seed)
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
            futs = {pool.submit(_run_cell_seed, spec["scene"], cells[ci], seed): (ci, seed) for ci, seed in jobs}
            for f in concurrent.futures.as_completed(futs):
                results[futs[f]] = f.result()
    return [summarize_cell(cell, [results[(ci, s)] for s in spec["seeds"]]) for ci, cell in enumerate(cells)]


def write_bench_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row[k] is None else row[k]) for k in BENCH_COLUMNS})


def cmd_bench(args) -> int:
    try:
        spec = load_bench_spec(args.spec)
        if args.out:
            spec["out"] = args.out
        resolve_scene(spec["scene"])
        rows = run_bench(spec)
    except (ConfigurationError, InvalidArgumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT["input-error"]
    write_bench_csv(spec["out"], rows)
    for row in rows:
        cell = ", ".join(f"{k}={row[k]}" for k in BENCH_AXES if row[k] != "")
        print(f"{cell or 'default'}: discovery {row['discovery_rate']:.2f}, mean total {row['total']:.2f} s")
    return 0


# ---------------------------------------------------------------- entry point


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 (input error) rather than argparse's 2, which means regrasp-needed here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT["input-error"], f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="ga-tamp", description="Dual-arm assembly planning over G-A spaces.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("plan", help="plan one assembly and write a plan file")
    p.add_argument("--scene", required=True, help="scene JSON path or builtin:<name>")
    p.add_argument("--out", default="plan.json")
    p.add_argument("--stats", default=None, help="also write timings and selection reports here")
    _add_plan_flags(p)
    p.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="run a parameter sweep and write a CSV table")
    b.add_argument("--spec", required=True, help="bench spec JSON")
    b.add_argument("--out", default=None, help="CSV path (overrides the bench spec file)")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("validate", help="replay a plan file against its scene")
    v.add_argument("--plan", required=True)
    v.add_argument("--scene", required=True)
    v.add_argument("--resolution", type=float, default=None,
                   help="joint-space check resolution (default: a tenth of the plan's RRT resolution)")
    v.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
