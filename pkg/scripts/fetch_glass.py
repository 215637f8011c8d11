#!/usr/bin/env python3
"""Download the UCI forensic glass data file for the optional tests.

Writes ``data/glass.csv`` under the repository root (the raw comma
layout: id, refractive index, eight oxide percentages, type code).  The
loader accepts that layout directly; nothing is rewritten beyond a
structural check of what arrived.
"""

import argparse
import sys
import urllib.error
import urllib.request
from pathlib import Path

URL = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
       "glass/glass.data")
EXPECTED_ROWS = 214
EXPECTED_CELLS = 11
TYPE_CODES = {"1", "2", "3", "5", "6", "7"}


def validate(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != EXPECTED_ROWS:
        raise ValueError(f"expected {EXPECTED_ROWS} rows, got {len(lines)}")
    for i, line in enumerate(lines, start=1):
        cells = line.split(",")
        if len(cells) != EXPECTED_CELLS:
            raise ValueError(
                f"row {i}: expected {EXPECTED_CELLS} cells, got {len(cells)}"
            )
        for cell in cells[:-1]:
            float(cell)
        if cells[-1].strip() not in TYPE_CODES:
            raise ValueError(
                f"row {i}: unknown type code {cells[-1].strip()!r}"
            )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--url", default=URL)
    parser.add_argument(
        "--dest",
        default=Path(__file__).resolve().parent.parent / "data" / "glass.csv",
        type=Path,
    )
    args = parser.parse_args(argv)

    print(f"downloading {args.url}")
    try:
        with urllib.request.urlopen(args.url, timeout=60) as response:
            text = response.read().decode("ascii")
    except (urllib.error.URLError, OSError, UnicodeDecodeError) as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return 1
    try:
        validate(text)
    except ValueError as exc:
        print(f"unexpected file contents: {exc}", file=sys.stderr)
        return 1

    args.dest.parent.mkdir(parents=True, exist_ok=True)
    args.dest.write_text(text)
    print(f"wrote {args.dest} ({EXPECTED_ROWS} rows)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
