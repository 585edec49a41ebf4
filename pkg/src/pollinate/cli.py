"""Command-line front end.

Exit codes: 0 success, 2 invalid input (config, landscape or CSV), 1 any
other failure. Diagnostics go to stderr. Files are written only inside the
output directory (``--out``, else ``$POLLINATE_OUT``, else ``./out``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .errors import DuplicatePlatform, EmptyDataset, InvalidLandscape, MalformedRow, PollinateError
from .expectation import (
    compare_evaluators,
    expected_time_recursive,
    finite_difference_sensitivity,
    marginal_sensitivity,
)
from .heterogeneity import convergence_sim, median_media_length, trajectory_to_csv
from .revenue import (
    RevenueParams,
    depth_chart_to_csv,
    ingest_usage_csv,
    revenue_table,
    usage_2023,
    table_to_csv,
    table_to_json,
)
from .scenario import SCHEMA_VERSION, ConfigError, RunParams, load_config
from .trips import iter_trip_records, run_monte_carlo, run_pool_comparison, write_trace

OUT_ENV = "POLLINATE_OUT"
EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


class UsageError(PollinateError, ValueError):
    code = "UsageError"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text, encoding="utf-8")
    return path


def _apply_run_overrides(args, run: RunParams) -> tuple:
    """Flag values win over the config; every changed value is reported."""
    changes = {}
    for flag, attr in (("seed", "master_seed"), ("trips", "n_trips"),
                       ("cutoff", "depth_cutoff"), ("jobs", "n_jobs")):
        value = getattr(args, flag, None)
        if value is None:
            continue
        old = getattr(run, attr)
        if old != value:
            changes[attr] = {"config": old, "flag": value}
            print(f"override: run.{attr} {old} -> {value}", file=sys.stderr)
        run = replace(run, **{attr: value})
    if run.n_trips < 1 or run.depth_cutoff < 0:
        raise UsageError(f"invalid run parameters: {run}")
    return run, changes


def _load(args):
    if not args.config:
        raise UsageError("--config is required for this command")
    return load_config(args.config)


def cmd_simulate(args) -> int:
    cfg = _load(args)
    run, changes = _apply_run_overrides(args, cfg.run)
    report = run_monte_carlo(cfg.landscape, cfg.start_personality, cfg.start_platform,
                             run.n_trips, run.master_seed, run.depth_cutoff, run.n_jobs)
    out = _out_dir(args)
    payload = report.to_dict()
    payload["start"] = {"personality": cfg.start_personality, "platform": cfg.start_platform}
    payload["overrides"] = changes
    path = _write(out, "simulate_report.json", _dump(payload))
    if args.trace:
        write_trace(out / "trips.jsonl", iter_trip_records(
            cfg.landscape, cfg.start_personality, cfg.start_platform,
            run.n_trips, run.master_seed, run.depth_cutoff))
    print(path)
    return EXIT_OK


def cmd_expect(args) -> int:
    cfg = _load(args)
    run, changes = _apply_run_overrides(args, cfg.run)
    result = compare_evaluators(cfg.landscape, cfg.start_personality, cfg.start_platform,
                                run.depth_cutoff)
    payload = {"schema_version": SCHEMA_VERSION, **result, "overrides": changes}
    out = _out_dir(args)
    if args.sweep:
        sweep = [
            {"depth_cutoff": c,
             "recursive": expected_time_recursive(cfg.landscape, cfg.start_personality,
                                                  cfg.start_platform, c).value_seconds}
            for c in range(run.depth_cutoff + 1)
        ]
        payload["sweep"] = sweep
        lines = ["depth_cutoff,recursive"] + [f"{r['depth_cutoff']},{r['recursive']!r}" for r in sweep]
        _write(out, "expect_sweep.csv", "\n".join(lines) + "\n")
    path = _write(out, "expect.json", _dump(payload))
    print(path)
    return EXIT_OK


def cmd_revenue(args) -> int:
    params = RevenueParams(
        cpc=2.0 if args.cpc is None else args.cpc,
        cpm=7.0 if args.cpm is None else args.cpm,
    )
    if args.config:
        cfg = _load(args)
        params = RevenueParams(
            cpc=cfg.revenue.cpc if args.cpc is None else args.cpc,
            cpm=cfg.revenue.cpm if args.cpm is None else args.cpm,
        )
    rows = ingest_usage_csv(args.csv) if args.csv else usage_2023()
    table = revenue_table(rows, params)
    out = _out_dir(args)
    _write(out, "revenue_table.csv", table_to_csv(table))
    _write(out, "depth_chart.csv", depth_chart_to_csv(table))
    path = _write(out, "revenue_report.json", table_to_json(table, params))
    print(path)
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    cfg = _load(args)
    run, changes = _apply_run_overrides(args, cfg.run)
    ls, person, start = cfg.landscape, cfg.start_personality, cfg.start_platform
    platforms = [args.platform] if args.platform else [p.id for p in ls.platforms]
    results = []
    for pid in platforms:
        analytic = marginal_sensitivity(ls, pid, person, start)
        fd_col = finite_difference_sensitivity(ls, pid, args.step, "collapsed", person, start)
        fd_rec = finite_difference_sensitivity(ls, pid, args.step, "recursive", person, start,
                                               run.depth_cutoff)
        denom = max(abs(analytic.derivative), 1e-300)
        results.append({
            "platform": pid,
            "analytic": analytic.derivative,
            "finite_difference_collapsed": fd_col.derivative,
            "finite_difference_recursive": fd_rec.derivative,
            "relative_error": abs(fd_col.derivative - analytic.derivative) / denom
            if analytic.derivative != 0 else abs(fd_col.derivative),
            "diagnostics": list(analytic.diagnostics),
        })
        for d in analytic.diagnostics:
            print(f"{pid}: {d}", file=sys.stderr)
    payload = {"schema_version": SCHEMA_VERSION, "step_seconds": args.step,
               "depth_cutoff": run.depth_cutoff, "results": results, "overrides": changes}
    path = _write(_out_dir(args), "sensitivity.json", _dump(payload))
    print(path)
    return EXIT_OK


def cmd_hetero(args) -> int:
    cfg = _load(args)
    spec = cfg.heterogeneity
    if spec is None or not spec.profiles:
        raise ConfigError(["MissingSection: config has no heterogeneity profiles"])
    best = median_media_length(spec.profiles, spec.search_interval, spec.grid_resolution)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "median_media_length": best.length,
        "joint_engagement": best.joint_engagement,
        "grid_resolution": best.grid_resolution,
    }
    out = _out_dir(args)
    if len(spec.profiles) >= 2:
        a, b = spec.profiles[0], spec.profiles[1]
        traj = convergence_sim(a, b, spec.pool_lengths, spec.learning_rate, spec.steps)
        _write(out, "hetero_trajectory.csv", trajectory_to_csv(traj))
        final = [replace(a, preferred_length=traj[-1].mu_a), replace(b, preferred_length=traj[-1].mu_b)]
        after = median_media_length(final, spec.search_interval, spec.grid_resolution)
        payload["final_gap"] = traj[-1].gap
        payload["final_median_media_length"] = after.length
        payload["final_joint_engagement"] = after.joint_engagement
    path = _write(out, "hetero_report.json", _dump(payload))
    print(path)
    return EXIT_OK


def cmd_pool_compare(args) -> int:
    cfg = _load(args)
    run, changes = _apply_run_overrides(args, cfg.run)
    off, on = run_pool_comparison(cfg.landscape, (cfg.start_personality, cfg.start_platform),
                                  run.n_trips, run.master_seed, run.depth_cutoff, run.n_jobs)
    shares = {}
    for pid in off.platforms:
        a, b = off.platforms[pid], on.platforms[pid]
        shares[pid] = {"disabled": a.share_of_landings, "enabled": b.share_of_landings,
                       "difference": b.share_of_landings - a.share_of_landings}
    payload = {
        "schema_version": SCHEMA_VERSION,
        "pools_disabled": off.to_dict(),
        "pools_enabled": on.to_dict(),
        "share_comparison": shares,
        "mean_time_ratio": on.mean_trip_seconds / off.mean_trip_seconds,
        "overrides": changes,
    }
    path = _write(_out_dir(args), "pool_compare.json", _dump(payload))
    print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pollinate", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    run_flags = argparse.ArgumentParser(add_help=False)
    run_flags.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    run_flags.add_argument("--trips", type=int, help="number of trips")
    run_flags.add_argument("--cutoff", type=int, help="depth cutoff (extensions allowed)")
    run_flags.add_argument("--jobs", type=int, help="worker processes")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common, run_flags], help="Monte Carlo traffic report")
    p.add_argument("--trace", action="store_true", help="also write trips.jsonl")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("expect", parents=[common, run_flags], help="recursive vs collapsed expectation")
    p.add_argument("--sweep", action="store_true", help="recursive value for every cutoff 0..N")
    p.set_defaults(func=cmd_expect)

    p = sub.add_parser("revenue", parents=[common], help="revenue index table")
    p.add_argument("csv", nargs="?", help="usage CSV (default: bundled 2023 dataset)")
    p.add_argument("--cpc", type=float)
    p.add_argument("--cpm", type=float)
    p.set_defaults(func=cmd_revenue)

    p = sub.add_parser("sensitivity", parents=[common, run_flags], help="marginal dwell-time effect")
    p.add_argument("--platform", help="platform id (default: every platform)")
    p.add_argument("--step", type=float, default=1e-3, help="finite-difference step in seconds")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("hetero", parents=[common], help="media-length homogenisation")
    p.set_defaults(func=cmd_hetero)

    p = sub.add_parser("pool-compare", parents=[common, run_flags], help="pools off vs on")
    p.set_defaults(func=cmd_pool_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidLandscape) as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_INVALID
    except (EmptyDataset, MalformedRow, DuplicatePlatform, UsageError, FileNotFoundError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
