#!/usr/bin/env python3
"""Writes the bundled benchmark CSVs into data/.

mux6:   6-input multiplexer truth table (address A0 A1 selects one of D0..D3),
        each of the 64 rows listed twice (128 rows).
corral: 160 rows of the corral concept: target = (A0 and A1) or (B0 and B1),
        one irrelevant random bit, and a bit that agrees with the target on
        75% of the rows. Sampled with a fixed seed.
"""

import csv
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def write(name, header, rows):
    with open(DATA / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def mux6():
    rows = []
    for bits in range(64):
        a0, a1, d0, d1, d2, d3 = ((bits >> (5 - i)) & 1 for i in range(6))
        target = (d0, d1, d2, d3)[2 * a0 + a1]
        rows.append([a0, a1, d0, d1, d2, d3, target])
    write("mux6.csv", ["A0", "A1", "D0", "D1", "D2", "D3", "target"], rows + rows)


def corral():
    rng = random.Random(1)
    rows = []
    for _ in range(160):
        a0, a1, b0, b1, irr = (rng.randint(0, 1) for _ in range(5))
        target = int((a0 and a1) or (b0 and b1))
        corr = target if rng.random() < 0.75 else 1 - target
        rows.append([a0, a1, b0, b1, irr, corr, target])
    write("corral.csv", ["A0", "A1", "B0", "B1", "Irrelevant", "Correlated", "target"], rows)


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    mux6()
    corral()
