#!/usr/bin/env python3
"""Build data/*.csv and data/*.schema.json from locally available copies of
the UCI tables.

Sources (all redistribute the original UCI files):
  wine        scikit-learn's bundled wine_data.csv (sklearn.datasets.load_wine)
  sonar       keel_ds wheel, keel_ds/data/balanced/raw/sonar.dat
  ionosphere  orange3 wheel, Orange/tests/datasets/ionosphere.tab
  abalone     weka fixtures, abalone.arff

Abalone's label is the 3-class ring grouping (<= 8, 9-10, >= 11).

usage: prepare_datasets.py --sonar PATH --ionosphere PATH --abalone PATH [--out data]
"""
import argparse
import csv
import json
from pathlib import Path


def write(out, name, header, rows, label, categorical):
    with open(out / f"{name}.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    with open(out / f"{name}.schema.json", "w") as f:
        json.dump({"label": label, "categorical": categorical}, f, indent=2)
        f.write("\n")
    print(f"{name}: {len(rows)} rows, {len(header) - 1} features")


def wine(out):
    from sklearn.datasets import load_wine

    b = load_wine()
    header = [n.replace("/", "_") for n in b.feature_names] + ["class"]
    rows = [[repr(float(v)) for v in x] + [f"c{int(y)}"] for x, y in zip(b.data, b.target)]
    write(out, "wine", header, rows, "class", [])


def sonar(out, path):
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip() or line.startswith("@"):
            continue
        cells = [c.strip() for c in line.split(",")]
        rows.append([repr(float(c)) for c in cells[:-1]] + [cells[-1]])
    header = [f"band{i + 1}" for i in range(len(rows[0]) - 1)] + ["class"]
    write(out, "sonar", header, rows, "class", [])


def ionosphere(out, path):
    lines = Path(path).read_text().splitlines()
    names = lines[0].split("\t")
    rows = [line.split("\t") for line in lines[3:] if line.strip()]
    write(out, "ionosphere", names[:-1] + ["class"], rows, "class", ["a1", "a2"])


def abalone(out, path):
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line[0] in "%@":
            continue
        cells = line.split(",")
        rings = int(cells[-1])
        group = "young" if rings <= 8 else ("middle" if rings <= 10 else "old")
        rows.append(cells[:-1] + [group])
    header = ["sex", "length", "diameter", "height", "whole_weight", "shucked_weight",
              "viscera_weight", "shell_weight", "age_group"]
    write(out, "abalone", header, rows, "age_group", ["sex"])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sonar", required=True)
    ap.add_argument("--ionosphere", required=True)
    ap.add_argument("--abalone", required=True)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wine(out)
    sonar(out, args.sonar)
    ionosphere(out, args.ionosphere)
    abalone(out, args.abalone)


if __name__ == "__main__":
    main()
