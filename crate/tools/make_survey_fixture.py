#!/usr/bin/env python3
"""Write a small synthetic survey CSV in the documented layout.

The values are simulated; they only exercise parsing, filtering and the
analysis plumbing. Treated restaurants gain full-time and lose part-time
staff between waves.
"""
import argparse
import csv
import random

FIELDS = ["EMPFT", "EMPPT", "PCTAFF", "NMGRS", "INCTIME", "PENTREE", "PSODA", "NREGS", "OPEN", "HRSOPEN"]


def draw(rng):
    ft = max(0.0, round(rng.gammavariate(2.0, 4.0) * 2) / 2)
    pt = max(0.0, round(rng.gammavariate(4.0, 4.5)))
    return {
        "EMPFT": ft,
        "EMPPT": pt,
        "PCTAFF": round(rng.uniform(0, 100)),
        "NMGRS": rng.randint(2, 5),
        "INCTIME": round(rng.uniform(5, 30), 1),
        "PENTREE": round(rng.uniform(0.9, 3.9), 2),
        "PSODA": round(rng.uniform(0.8, 1.3), 2),
        "NREGS": rng.randint(3, 6),
        "OPEN": rng.choice([6, 6.5, 7, 8, 10, 10.5, 11]),
        "HRSOPEN": rng.choice([12, 14, 15, 16, 17, 18, 24]),
    }


def second_wave(rng, w1, treated):
    w2 = dict(w1)
    w2["EMPFT"] = max(0.0, w1["EMPFT"] + rng.choice([-1, 0, 0, 1]) + (2 if treated else 0))
    w2["EMPPT"] = max(0.0, w1["EMPPT"] + rng.choice([-2, -1, 0, 1, 2]) - (2 if treated else 0))
    w2["NMGRS"] = max(1, w1["NMGRS"] + rng.choice([-1, 0, 0, 1]))
    w2["INCTIME"] = round(w1["INCTIME"] + rng.uniform(-2, 2), 1)
    w2["PENTREE"] = round(w1["PENTREE"] * rng.uniform(1.0, 1.06), 2)
    w2["PSODA"] = round(w1["PSODA"] * rng.uniform(1.0, 1.05), 2)
    w2["NREGS"] = max(1, w1["NREGS"] + rng.choice([0, 0, 0, 1]))
    w2["HRSOPEN"] = w1["HRSOPEN"] + rng.choice([0, 0, 0, -1, 1])
    return w2


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--control", type=int, default=30)
    ap.add_argument("--treated", type=int, default=90)
    ap.add_argument("--seed", type=int, default=1992)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    header = ["SHEET", "STATE"] + FIELDS + [f + "2" for f in FIELDS]
    rows = []
    for i in range(args.control + args.treated):
        treated = i >= args.control
        w1 = draw(rng)
        w2 = second_wave(rng, w1, treated)
        row = {"SHEET": str(i + 1), "STATE": "NJ" if treated else "PA"}
        for f in FIELDS:
            for key, w in ((f, w1), (f + "2", w2)):
                missing = rng.random() < (0.02 if f in ("EMPFT", "EMPPT") else 0.03)
                row[key] = "" if missing else w[f]
        rows.append(row)
    # a repeated sheet number and a record missing only its second-wave part-time count
    rows[-1]["SHEET"] = rows[-2]["SHEET"]
    rows[5]["EMPPT2"] = ""
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=header, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
