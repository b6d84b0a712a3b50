#!/usr/bin/env python3
"""Write the 8x8 handwritten digits set as CSV: 64 features in [0, 1], then the label."""
import sys

from sklearn.datasets import load_digits


def main(path):
    digits = load_digits()
    with open(path, "w") as out:
        out.write(",".join(f"p{i}" for i in range(64)) + ",label\n")
        for row, label in zip(digits.data, digits.target):
            out.write(",".join(f"{v / 16.0:.4g}" for v in row) + f",{label}\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/digits.csv")
