"""Command-line entry point: ``nstraffic run | validate | plot``.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .errors import ConfigError, StepFailure
from .params import ModelParams
from .roe import run
from .scenario import (
    ScenarioConfig,
    SnapshotWriter,
    blockade_scenario,
    dump_config,
    load_config,
    parse_config,
    read_snapshot_dir,
    with_overrides,
)
from .validation import validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
RESOLVED_CONFIG = "config.resolved.ini"

log = logging.getLogger("nstraffic")


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
        overrides = {}
        if args.cells is not None:
            overrides["cells"] = args.cells
        if args.cfl is not None:
            overrides["cfl"] = args.cfl
        if args.t_end is not None:
            overrides["t_end"] = args.t_end
        if args.snapshot_every is not None:
            overrides["snapshot_interval"] = args.snapshot_every
        if args.parallel:
            overrides["parallel"] = True
        if args.backend:
            overrides["backend"] = args.backend
        out_dir = Path(args.out) if args.out else Path(cfg.out_dir)
        overrides["out_dir"] = str(out_dir)
        cfg = with_overrides(cfg, **overrides)
        cfg.solver.kernels()
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / RESOLVED_CONFIG).write_text(dump_config(cfg))
    writer = SnapshotWriter(out_dir)
    field = blockade_scenario(cfg)
    start = time.perf_counter()
    try:
        result = run(field, cfg.solver, cfg.params, writer)
    except StepFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    stats = result.stats
    summary = stats.as_dict()
    summary.update(
        drift=stats.drift(result.field),
        floor_mass_relative=stats.floor_mass / stats.initial_vehicles,
        snapshots=writer.count,
        wall_time_s=time.perf_counter() - start,
        backend=cfg.solver.kernels().name,
    )
    (out_dir / "run_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(
        f"t={stats.t:g} s, {stats.steps} steps, {writer.count} snapshots -> {out_dir} "
        f"(drift {summary['drift']:.2e}, max Courant {stats.max_courant:.3f})"
    )
    return EXIT_OK


def _cmd_validate(args) -> int:
    overrides = {}
    if args.config:
        try:
            overrides = vars(load_config(args.config).params)
        except ConfigError as exc:
            if exc.field == "model":
                report = [{"suite": "parameters", "passed": False, "error": str(exc)}]
                print(json.dumps({"passed": False, "suites": report}, indent=2))
                return EXIT_VALIDATION
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    if args.alpha is not None:
        overrides = dict(overrides, alpha=args.alpha)
    try:
        results = validate(args.suite, overrides)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_CONFIG
    ok = all(r.passed for r in results)
    report = {"passed": ok, "suites": [r.as_dict() for r in results]}
    text = json.dumps(report, indent=2)
    if args.report:
        Path(args.report).write_text(text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_plot(args) -> int:
    from .plotting import emit_plots

    in_dir = Path(args.in_dir)
    params = ModelParams()
    resolved = in_dir / RESOLVED_CONFIG
    if resolved.exists():
        try:
            params = parse_config(resolved.read_text(), str(resolved)).params
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    snaps = read_snapshot_dir(in_dir)
    if not snaps:
        print(f"no snapshot_*.csv files in {in_dir}", file=sys.stderr)
        return EXIT_CONFIG
    for path in emit_plots(snaps, args.out, params):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nstraffic", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate the blockade-removal scenario")
    r.add_argument("--config", help="scenario config file (defaults if omitted)")
    r.add_argument("--out", help="output directory (overrides output.dir)")
    r.add_argument("--cells", type=int)
    r.add_argument("--cfl", type=float)
    r.add_argument("--t-end", type=float, help="horizon [s]")
    r.add_argument("--snapshot-every", type=float, help="snapshot interval [s]")
    r.add_argument("--parallel", action="store_true", help="multi-threaded kernels")
    r.add_argument("--backend", choices=("numpy", "numba", "numba-parallel"))
    r.set_defaults(func=_cmd_run)

    v = sub.add_parser("validate", help="run the closure and solver self-checks")
    v.add_argument("--suite", choices=("all", "orthonormality", "moments", "ce-grad", "roe"), default="all")
    v.add_argument("--config", help="take model parameters from this config")
    v.add_argument("--alpha", type=float, help="override the shape parameter")
    v.add_argument("--report", help="also write the JSON report here")
    v.set_defaults(func=_cmd_validate)

    pl = sub.add_parser("plot", help="render SVG figures from a run directory")
    pl.add_argument("--in", dest="in_dir", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=_cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
