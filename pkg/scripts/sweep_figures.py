#!/usr/bin/env python3
"""Reproduce the standard sweep data for the three reference boxes.

Writes one CSV + JSON pair per geometry (cube, pizza box 1:100:100,
waveguide 1:0.1:0.1) over xi in [0.01, 5].  Plot f/s/e/p columns against xi
to overlay the reference figures.
"""
import pathlib
import sys

from cavitytherm.cli import main

OUT = pathlib.Path(__file__).resolve().parent.parent / "out"

GEOMETRIES = {
    "cube": (1.0, 1.0, 1.0),
    "pizza_box": (1.0, 100.0, 100.0),
    "waveguide": (1.0, 0.1, 0.1),
}


def run():
    OUT.mkdir(exist_ok=True)
    for name, (a1, a2, a3) in GEOMETRIES.items():
        code = main([
            "sweep",
            "--a1", str(a1), "--a2", str(a2), "--a3", str(a3),
            "--xi-min", "0.01", "--xi-max", "5.0",
            "--xi-points", "120", "--xi-spacing", "log",
            "--output-csv", str(OUT / f"sweep_{name}.csv"),
            "--output-json", str(OUT / f"sweep_{name}.json"),
        ])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
