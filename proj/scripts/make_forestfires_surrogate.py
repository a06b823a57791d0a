#!/usr/bin/env python3
"""Generate a deterministic stand-in for the UCI Forest Fires table.

The real file (517 rows, 13 columns) cannot be redistributed from this
repository's build environment. This script produces a table with the same
shape, column order, integer-coded month/day, similar marginal ranges and a
heavily zero-inflated burned-area target that depends on weather columns.
Replace it with the real data via prepare_forestfires.py when available.
"""
import argparse

import numpy as np

COLUMNS = ["X", "Y", "month", "day", "FFMC", "DMC", "DC", "ISI",
           "temp", "RH", "wind", "rain", "area"]


def generate(rows: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    x = rng.integers(1, 10, rows)
    y = rng.integers(2, 10, rows)
    # fire season is concentrated in august/september
    month = rng.choice(np.arange(1, 13), rows,
                       p=np.array([2, 20, 54, 9, 2, 17, 32, 184, 172, 15, 1, 9]) / 517)
    day = rng.integers(1, 8, rows)
    season = np.cos((month - 8) / 12 * 2 * np.pi)
    temp = np.clip(19 + 7 * season + rng.normal(0, 4, rows), 2.2, 33.3)
    rh = np.clip(44 - 1.2 * (temp - 19) + rng.normal(0, 12, rows), 15, 100)
    wind = np.clip(rng.gamma(4, 1.0, rows), 0.4, 9.4)
    rain = np.where(rng.random(rows) < 0.03, rng.exponential(1.0, rows), 0.0)
    ffmc = np.clip(92 - 0.08 * (rh - 44) - 6 * rain + rng.normal(0, 2.5, rows), 18.7, 96.2)
    dmc = np.clip(110 + 60 * season + 3 * (temp - 19) + rng.normal(0, 40, rows), 1.1, 291.3)
    dc = np.clip(550 + 250 * season + rng.normal(0, 90, rows), 7.9, 860.6)
    isi = np.clip(0.09 * np.exp(0.05 * ffmc) * (1 + wind / 5) + rng.normal(0, 1.5, rows), 0, 56.1)
    burn = rng.random(rows) < 1 / (1 + np.exp(-(0.08 * (temp - 19) - 0.02 * (rh - 44))))
    log_area = 0.6 + 0.09 * (temp - 19) - 0.015 * (rh - 44) + 0.1 * wind + rng.normal(0, 1.3, rows)
    area = np.where(burn, np.clip(np.expm1(np.maximum(log_area, 0.01)), 0.01, 1090.84), 0.0)
    table = np.column_stack([x, y, month, day, ffmc, dmc, dc, isi, temp, rh, wind, rain, area])
    return table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rows", type=int, default=517)
    parser.add_argument("--seed", type=int, default=20160517)
    parser.add_argument("--output", default="forestfires_surrogate.csv")
    args = parser.parse_args()
    table = generate(args.rows, args.seed)
    with open(args.output, "w") as out:
        out.write(",".join(COLUMNS) + "\n")
        for row in table:
            cells = [str(int(v)) for v in row[:4]] + [f"{v:.2f}" for v in row[4:]]
            out.write(",".join(cells) + "\n")


if __name__ == "__main__":
    main()
