#!/usr/bin/env python3
"""Reference great-circle distances on a sphere of radius 6371 km.

Usage: scripts/haversine_oracle.py > crates/core/tests/data/haversine_expected.json

Draws 100 coordinate pairs from a fixed seed and evaluates the haversine
formula with mpmath at 60 significant digits, plus the (0,0)-(0,1) case.
"""
import json
import random
import sys

from mpmath import mp, mpf, asin, cos, radians, sin, sqrt

mp.dps = 60
R = mpf(6371)


def distance(lat1, lon1, lat2, lon2):
    p1, p2 = radians(mpf(lat1)), radians(mpf(lat2))
    dp = p2 - p1
    dl = radians(mpf(lon2) - mpf(lon1))
    h = sin(dp / 2) ** 2 + cos(p1) * cos(p2) * sin(dl / 2) ** 2
    return 2 * R * asin(sqrt(h))


def main():
    rng = random.Random(1234)
    pairs = [(0.0, 0.0, 0.0, 1.0)]
    for _ in range(100):
        pairs.append(tuple(round(v, 6) for v in (
            rng.uniform(-90, 90), rng.uniform(-180, 180),
            rng.uniform(-90, 90), rng.uniform(-180, 180),
        )))
    out = [
        {"lat1": a, "lon1": b, "lat2": c, "lon2": d, "km": float(distance(a, b, c, d))}
        for a, b, c, d in pairs
    ]
    json.dump(out, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
