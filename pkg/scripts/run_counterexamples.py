#!/usr/bin/env python3
"""Adversarial single-outlier constructions and distributional checks.

Prints the three counterexample scenarios (outlier capture, broken local
minimality with an explicit witness direction, great-circle arc) followed by
the Monte Carlo property checks.
"""

import argparse
import sys

from lpsubspace import experiments as ex


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    ok = True
    for r in ex.counterexample_suite(args.seed):
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}")
        ok = ok and r.passed
    for r in ex.lemma_property_suite(args.seed):
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}")
        ok = ok and r.passed
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
