#!/usr/bin/env python3
"""Generate the hourly reference traces shipped in data/traces/.

The series are synthetic but shaped like real inputs: a diurnal workload
with a weekday bump, a summer dry-bulb profile with day-to-day drift, and a
grid carbon intensity that dips while solar generation is high.
"""

import argparse
import datetime as dt
import math
import pathlib

import numpy as np


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/traces"))
    parser.add_argument("--start", default="2023-07-01T00:00:00Z")
    parser.add_argument("--days", type=int, default=32)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    start = dt.datetime.fromisoformat(args.start.replace("Z", "+00:00"))
    n = args.days * 24 + 1
    stamps = [start + dt.timedelta(hours=h) for h in range(n)]

    hours = np.array([s.hour for s in stamps], dtype=float)
    weekday = np.array([s.weekday() < 5 for s in stamps], dtype=float)

    workload = 0.35 + 0.25 * np.clip(np.sin(math.pi * (hours - 7.0) / 14.0), 0.0, None)
    workload += 0.08 * weekday + rng.normal(0.0, 0.03, n)
    workload = np.clip(workload, 0.05, 0.95)

    drift = np.cumsum(rng.normal(0.0, 0.15, n))
    drift -= np.linspace(0.0, drift[-1], n)
    ambient = 24.0 + 6.0 * np.sin(2.0 * math.pi * (hours - 9.0) / 24.0) + drift + rng.normal(0.0, 0.4, n)

    solar = np.clip(np.sin(math.pi * (hours - 6.0) / 12.0), 0.0, None)
    carbon = 410.0 - 150.0 * solar + rng.normal(0.0, 12.0, n)
    carbon = np.clip(carbon, 50.0, None)

    args.out.mkdir(parents=True, exist_ok=True)
    for name, values, digits in (
        ("workload.csv", workload, 4),
        ("ambient_drybulb.csv", ambient, 2),
        ("carbon_intensity.csv", carbon, 1),
    ):
        with open(args.out / name, "w", newline="\n", encoding="utf-8") as f:
            f.write("timestamp,value\n")
            for s, v in zip(stamps, values):
                f.write(f"{s.strftime('%Y-%m-%dT%H:%M:%SZ')},{round(float(v), digits)}\n")


if __name__ == "__main__":
    main()
