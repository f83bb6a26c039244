"""Writes data/breast_cancer.csv from the copy bundled with scikit-learn."""
import csv
import pathlib
import sys

from sklearn.datasets import load_breast_cancer


def main(out: pathlib.Path) -> None:
    d = load_breast_cancer()
    names = [n.replace(" ", "_") for n in d.feature_names]
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", *names, "target"])
        for i, (row, y) in enumerate(zip(d.data, d.target)):
            w.writerow([f"bc{i:04d}", *[repr(float(v)) for v in row], int(y)])


if __name__ == "__main__":
    main(pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/breast_cancer.csv"))
