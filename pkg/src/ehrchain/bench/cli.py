"""``ehr-bench`` entry point.

    ehr-bench run --doctors 2 --patients 5 --rounds 4 --seed 7 \
        --populations 5,20,80,320 --mode inprocess --out results.csv
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import EhrChainError, SetupFailure
from .scenario import (
    ScenarioConfig,
    emit_report,
    in_process_driver,
    http_driver,
    run_scenario,
    run_sweep,
)


def _parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="ehr-bench",
                                     description="EHR access-control experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario or a population sweep")
    run.add_argument("--doctors", type=int, default=2)
    run.add_argument("--patients", type=int, default=5)
    run.add_argument("--rounds", type=int, default=4)
    run.add_argument("--seed", type=int, default=7)
    run.add_argument("--populations", default=None,
                     help="comma-separated patient counts, e.g. 5,20,80,320")
    run.add_argument("--mode", choices=("inprocess", "http"), default="inprocess")
    run.add_argument("--concurrency", type=int, default=1,
                     help="parallel request issuance (default sequential)")
    run.add_argument("--out", default=None, help="write CSV here")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = _parse_args(argv)
    base = ScenarioConfig(n_doctors=args.doctors, n_patients=args.patients,
                          rounds=args.rounds, seed=args.seed,
                          concurrency=args.concurrency)
    try:
        if args.populations:
            populations = [int(p) for p in args.populations.split(",") if p]
            results = run_sweep(populations, base, mode=args.mode)
        else:
            factory = in_process_driver if args.mode == "inprocess" else http_driver
            with factory(seed=args.seed) as driver:
                results = [run_scenario(base, driver)]
    except (SetupFailure, EhrChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    samples = [s for result in results for s in result.samples]
    granted = sum(r.granted_events for r in results)
    rejected = sum(r.rejected_events for r in results)
    print(emit_report(samples, "table"), end="")
    print(f"events on chain: {granted} GRANTED, {rejected} REJECTED")
    if args.out:
        Path(args.out).write_text(emit_report(samples, "csv"))
        print(f"wrote {len(samples)} samples to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
