#!/usr/bin/env python3
"""Tabulate the analytic breakdown thresholds (crossing couplings,
large-degree constants) into CSV + markdown."""
import argparse

from isinglearn.experiments import reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/thresholds")
    args = ap.parse_args()
    files = reproduce("thresholds", args.out)
    print("wrote:", *map(str, files))


if __name__ == "__main__":
    main()
