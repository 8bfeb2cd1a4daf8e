#!/usr/bin/env python3
"""Show the double-hub family mimicking a single edge: hub-hub correlation
at theta = sqrt(0.5/p) versus tanh(0.5), for growing p."""
import argparse

from isinglearn.experiments import reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/toy-match")
    args = ap.parse_args()
    files = reproduce("toy-match", args.out)
    print("wrote:", *map(str, files))


if __name__ == "__main__":
    main()
