"""Command-line entry point: ``radcom run <spec.cfg> --out <dir>``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from .experiments import run_experiment, with_first_seed
from .spec import SCENARIOS, SpecError, parse_spec

log = logging.getLogger("radcom")

EXIT_OK = 0
EXIT_SPEC_ERROR = 1
EXIT_PARTIAL = 2

SEED_ENV = "RADCOM_SEED"


def _versions() -> dict:
    from .. import __version__

    return {
        "radcom": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radcom", description="Dual-function radar-communication waveform benchmarks.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a spec file")
    run.add_argument("spec", type=Path, help="experiment spec (key = value lines)")
    run.add_argument("--out", type=Path, required=True, help="output directory")
    run.add_argument("--threads", type=int, default=1, help="worker threads for the seed x sweep grid")
    run.add_argument("--scenario", choices=SCENARIOS, help="override the spec's scenario")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load(args):
    spec = parse_spec(args.spec, scenario=args.scenario)
    seed = os.environ.get(SEED_ENV)
    if seed:
        try:
            value = int(seed)
        except ValueError:
            raise SpecError(f"{SEED_ENV} must be an integer, got {seed!r}") from None
        if value < 0:
            raise SpecError(f"{SEED_ENV} must be non-negative, got {seed!r}")
        spec = with_first_seed(spec, value)
    return spec


def cmd_run(args) -> int:
    try:
        spec = _load(args)
    except FileNotFoundError as exc:
        log.error("spec file not found: %s", exc.filename)
        return EXIT_SPEC_ERROR
    except SpecError as exc:
        log.error("spec error: %s", exc)
        return EXIT_SPEC_ERROR
    if args.threads < 1:
        log.error("--threads must be >= 1")
        return EXIT_SPEC_ERROR

    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / f"{spec.scenario}.csv"
    started = time.time()
    log.info("running %s: %d seeds x %d sweep points x %d methods",
             spec.scenario, len(spec.seeds), len(spec.sweep), len(spec.methods))
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        summary = run_experiment(spec, fh, threads=args.threads)

    manifest = args.out / "manifest.jsonl"
    with open(manifest, "a", encoding="utf-8") as fh:
        record = {
            "started": started,
            "spec_file": str(args.spec),
            "spec": spec.echo(),
            "versions": _versions(),
            "csv": csv_path.name,
            "rows": len(summary.rows),
            "failures": summary.failures,
            "wall_time_s": round(summary.wall_time, 3),
        }
        fh.write(json.dumps(record, sort_keys=True) + "\n")

    log.info("wrote %d rows to %s in %.1f s", len(summary.rows), csv_path, summary.wall_time)
    if summary.failures:
        log.warning("%d run(s) failed; see %s", summary.n_failures, manifest)
        return EXIT_PARTIAL
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    if args.command == "run":
        return cmd_run(args)
    return EXIT_SPEC_ERROR


if __name__ == "__main__":
    sys.exit(main())
