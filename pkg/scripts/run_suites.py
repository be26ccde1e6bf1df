#!/usr/bin/env python3
"""Run every verification suite and summarize pass counts and timings."""

import argparse
import sys
import time

from geombound.suites import orders_suite, simulation_suite, soundness_suite, stein_suite

SUITES = {
    "soundness": soundness_suite,
    "stein": stein_suite,
    "orders": orders_suite,
    "simulation": simulation_suite,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--only", choices=sorted(SUITES), action="append")
    ap.add_argument("-v", "--verbose", action="store_true", help="list failing checks")
    args = ap.parse_args()
    failed = 0
    for name in args.only or SUITES:
        start = time.perf_counter()
        checks = SUITES[name](seed=args.seed)
        bad = [c for c in checks if not c.ok]
        failed += len(bad)
        print(f"{name:<11} {len(checks) - len(bad):>4}/{len(checks):<4} {time.perf_counter() - start:6.1f}s")
        if args.verbose:
            for c in bad:
                print(f"  FAIL {c.name} {c.detail}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
