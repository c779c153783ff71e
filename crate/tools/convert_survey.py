#!/usr/bin/env python3
"""Convert the New Jersey / Pennsylvania fast-food survey file to otcic CSV.

The original distribution (njmin.zip) ships `public.dat`, a whitespace
separated file with one store per line and "." for missing values.

    python3 tools/convert_survey.py public.dat survey.csv
    python3 tools/convert_survey.py njmin.zip survey.csv
"""

import argparse
import csv
import io
import sys
import zipfile

# Column order of public.dat, from the distribution codebook.
RAW_COLUMNS = [
    "SHEET", "CHAIN", "CO_OWNED", "STATE", "SOUTHJ", "CENTRALJ", "NORTHJ",
    "PA1", "PA2", "SHORE", "NCALLS", "EMPFT", "EMPPT", "NMGRS", "WAGE_ST",
    "INCTIME", "FIRSTINC", "BONUS", "PCTAFF", "MEALS", "OPEN", "HRSOPEN",
    "PSODA", "PFRY", "PENTREE", "NREGS", "NREGS11", "TYPE2", "STATUS2",
    "DATE2", "NCALLS2", "EMPFT2", "EMPPT2", "NMGRS2", "WAGE_ST2", "INCTIME2",
    "FIRSTIN2", "SPECIAL2", "MEALS2", "OPEN2R", "HRSOPEN2", "PSODA2", "PFRY2",
    "PENTREE2", "NREGS2", "NREGS112",
]

FIELDS = [
    "EMPFT", "EMPPT", "PCTAFF", "NMGRS", "INCTIME",
    "PENTREE", "PSODA", "NREGS", "OPEN", "HRSOPEN",
]

# Wave-2 names that differ from FIELDS + "2". The second wave did not ask
# for the affected share, so PCTAFF2 repeats the first-wave answer.
WAVE2_SOURCE = {"OPEN2": "OPEN2R", "PCTAFF2": "PCTAFF"}


def read_lines(path):
    if path.endswith(".zip"):
        with zipfile.ZipFile(path) as z:
            name = next(n for n in z.namelist() if n.lower().endswith("public.dat"))
            return io.TextIOWrapper(z.open(name), encoding="ascii").read().splitlines()
    with open(path, encoding="ascii") as f:
        return f.read().splitlines()


def convert(lines):
    header = ["SHEET", "STATE"] + FIELDS + [f + "2" for f in FIELDS]
    rows = []
    for lineno, line in enumerate(lines, 1):
        tokens = line.split()
        if not tokens:
            continue
        if len(tokens) != len(RAW_COLUMNS):
            raise ValueError(f"line {lineno}: expected {len(RAW_COLUMNS)} fields, got {len(tokens)}")
        raw = dict(zip(RAW_COLUMNS, tokens))
        state = {"1": "NJ", "0": "PA"}.get(raw["STATE"])
        if state is None:
            raise ValueError(f"line {lineno}: unknown STATE {raw['STATE']!r}")
        row = [raw["SHEET"], state]
        row += [raw[f] for f in FIELDS]
        row += [raw[WAVE2_SOURCE.get(f + "2", f + "2")] for f in FIELDS]
        rows.append(["" if v == "." else v for v in row])
    return header, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", help="public.dat or njmin.zip")
    ap.add_argument("output", help="CSV to write, or - for stdout")
    args = ap.parse_args()
    header, rows = convert(read_lines(args.source))
    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if out is not sys.stdout:
        out.close()
    print(f"wrote {len(rows)} stores", file=sys.stderr)


if __name__ == "__main__":
    main()
