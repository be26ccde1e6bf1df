#!/usr/bin/env python3
"""Print the urn-occupancy and Erlang busy-period tables as CSV."""

import argparse
import time
from pathlib import Path

from geombound.cli import render_erlang, render_polya
from geombound.tables import ERLANG_GRID, POLYA_ROWS


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, help="directory for polya.csv and erlang.csv (default: stdout)")
    args = ap.parse_args()
    start = time.perf_counter()
    tables = {"polya.csv": render_polya(POLYA_ROWS, False), "erlang.csv": render_erlang(ERLANG_GRID, False)}
    elapsed = time.perf_counter() - start
    for name, text in tables.items():
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / name).write_text(text, newline="")
        else:
            print(f"# {name}")
            print(text, end="")
    print(f"# built in {elapsed:.2f}s")


if __name__ == "__main__":
    main()
