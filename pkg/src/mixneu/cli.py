"""Command-line entry point.

    mixneu <task> --config <file> [--out <dir>] [--seed <u64>]

Exit codes: 0 success, 2 config error, 3 hypothesis violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import TASKS, load_config
from .errors import MixneuError
from .reports import emit, run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mixneu",
        description="Mixed local/nonlocal Neumann problems on an interval: "
                    "spectra, source solves, inequality audits and reports.",
    )
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", required=True, help="path to the JSON run configuration")
    parser.add_argument("--out", default="mixneu-out", help="output directory (default: mixneu-out)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed (u64)")
    args = parser.parse_args(argv)

    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config, seed_override=args.seed, task_override=args.task)
        report = run(cfg)
        report.timing = time.perf_counter() - t0
        paths = emit(report, args.out)
    except MixneuError as exc:
        print(f"error[{type(exc).__name__}]: {exc}", file=sys.stderr)
        return exc.exit_code

    print(f"{cfg.task}: wrote {len(paths)} files to {args.out} "
          f"in {report.timing:.2f}s")
    if report.warnings:
        for w in report.warnings:
            print(f"warning: {w}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
