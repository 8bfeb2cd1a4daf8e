#!/usr/bin/env python3
"""Success-probability sweep for regularized regression on diluted 5x5
grids across the coupling range where learning degrades."""
import argparse

from isinglearn.experiments import reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/grid-sweep")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    files = reproduce("grid-sweep", args.out, seed=args.seed)
    print("wrote:", *map(str, files))


if __name__ == "__main__":
    main()
