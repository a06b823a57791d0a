#!/usr/bin/env python3
"""Convert the UCI forestfires.csv into the all-numeric layout the toolkit reads.

month (jan..dec) and day (mon..sun) are replaced by integer codes 1..12 and
1..7; every other column is copied unchanged.
"""
import argparse
import csv

MONTHS = ["jan", "feb", "mar", "apr", "may", "jun",
          "jul", "aug", "sep", "oct", "nov", "dec"]
DAYS = ["mon", "tue", "wed", "thu", "fri", "sat", "sun"]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input")
    parser.add_argument("--output", default="forestfires.csv")
    args = parser.parse_args()
    with open(args.input, newline="") as src, open(args.output, "w", newline="") as dst:
        reader = csv.reader(src)
        writer = csv.writer(dst, lineterminator="\n")
        header = next(reader)
        writer.writerow(header)
        month, day = header.index("month"), header.index("day")
        for row in reader:
            row[month] = str(MONTHS.index(row[month].strip().lower()) + 1)
            row[day] = str(DAYS.index(row[day].strip().lower()) + 1)
            writer.writerow(row)


if __name__ == "__main__":
    main()
