#!/usr/bin/env python3
"""Run every verification suite for the unit cube and collect the reports."""
import pathlib
import sys

from cavitytherm.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"


def run():
    OUT.mkdir(exist_ok=True)
    worst = 0
    for which in ("appendix", "modes", "direct", "matsubara", "massive"):
        code = main(["oracle", which, "--output", str(OUT / f"oracle_{which}.json")])
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run())
