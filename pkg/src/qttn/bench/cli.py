"""``qttn-bench``: run, grid, report and verify ground-state benchmarks.

Exit codes: 0 success, 1 verification tolerance breached, 2 invalid input
(configuration, unknown baseline, unreadable records), 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from ..backends import host_cores
from .config import ConfigError, config_schema, expand_grid, load_config_file, parse_config
from .records import append_records, exact_energy, execute, read_records
from .report import DEFAULT_EPSILON, build_report, plot_csv, report_csv, report_text

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_BREACH, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2, 3
MAX_VERIFY_N = 4

log = logging.getLogger("qttn.bench")


def _load(path, allow_lists=False):
    raw = load_config_file(path)
    if allow_lists:
        return expand_grid(raw)
    return parse_config(raw)


def cmd_run(args) -> int:
    cfg = _load(args.config)
    rec = execute(cfg)
    append_records(args.out, [rec])
    if not rec.ok:
        print(f"{rec.label}: FAILED after {len(rec.sweeps)} sweeps: {rec.error}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"{rec.label}: E = {rec.final_energy:.12f}  time = {rec.total_wall_time_s:.3f} s  -> {args.out}")
    return EXIT_OK


def _clamp_workers(requested: int, cells) -> int:
    threads = max(c.effective_threads for c in cells)
    limit = max(1, host_cores() // threads)
    return max(1, min(requested, limit, len(cells)))


def cmd_grid(args) -> int:
    cells = _load(args.config, allow_lists=True)
    workers = _clamp_workers(args.workers, cells)
    if workers != args.workers:
        log.info("using %d workers (workers x threads must not exceed %d cores)", workers, host_cores())
    if workers == 1:
        records = []
        for cfg in cells:
            rec = execute(cfg)
            append_records(args.out, [rec])
            records.append(rec)
            print(f"{rec.label}: {rec.status}")
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(execute, cells))
        append_records(args.out, records)
    failed = [r for r in records if not r.ok]
    print(f"grid: {len(records)} cells, {len(records) - len(failed)} ok, {len(failed)} failed -> {args.out}")
    for r in failed:
        print(f"  failed: {r.label}: {r.error}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def cmd_report(args) -> int:
    try:
        records = read_records(args.records)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        rows = build_report(records, args.baseline, args.epsilon)
    except KeyError:
        labels = sorted({r.label for r in records})
        print(f"error: unknown baseline label {args.baseline!r}; labels: {labels}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    sys.stdout.write(report_text(rows))
    stem = Path(args.out) if args.out else Path(args.records).with_suffix("")
    csv_path = stem.with_name(stem.name + ".report.csv")
    plot_path = stem.with_name(stem.name + ".plot.csv")
    csv_path.write_text(report_csv(rows), encoding="utf-8", newline="")
    plot_path.write_text(plot_csv(rows), encoding="utf-8", newline="")
    print(f"wrote {csv_path} and {plot_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _load(args.config)
    if cfg.N > MAX_VERIFY_N:
        raise ConfigError("N", f"verify compares against exact diagonalization and needs N <= {MAX_VERIFY_N}")
    rec = execute(cfg)
    if args.out:
        append_records(args.out, [rec])
    if not rec.ok:
        print(f"solver failed: {rec.error}", file=sys.stderr)
        return EXIT_SOLVER
    e_exact = exact_energy(cfg)
    rel = abs(rec.final_energy - e_exact) / abs(e_exact)
    passed = rel <= cfg.verify_tolerance
    print(f"TTN   energy: {rec.final_energy:.15f}")
    print(f"exact energy: {e_exact:.15f}")
    print(f"relative error {rel:.3e} vs bound {cfg.verify_tolerance:.1e}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_BREACH


def cmd_schema(args) -> int:
    print(json.dumps(config_schema(), indent=2, ensure_ascii=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qttn-bench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one configuration and append its record")
    run.add_argument("--config", required=True)
    run.add_argument("--out", default="records.jsonl", help="JSON-lines file to append to")
    run.set_defaults(func=cmd_run)

    grid = sub.add_parser("grid", help="run the cartesian product of list-valued fields")
    grid.add_argument("--config", required=True)
    grid.add_argument("--out", default="records.jsonl")
    grid.add_argument("--workers", type=int, default=1)
    grid.set_defaults(func=cmd_grid)

    rep = sub.add_parser("report", help="energy-above-best and speedup table")
    rep.add_argument("records")
    rep.add_argument("--baseline", default=None, help="label of the reference record for speedups")
    rep.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    rep.add_argument("--out", default=None, help="output stem for the .report.csv and .plot.csv files")
    rep.set_defaults(func=cmd_report)

    ver = sub.add_parser("verify", help="compare against exact diagonalization (N <= 4)")
    ver.add_argument("--config", required=True)
    ver.add_argument("--out", default=None)
    ver.set_defaults(func=cmd_verify)

    sch = sub.add_parser("schema", help="print the configuration schema")
    sch.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
