#!/usr/bin/env python3
"""Run the lemma suite on a built-in family and write a JSON report."""

import argparse
import json

from kurepa import make_family, parse_ordinal
from kurepa.lemmas import run_lemma_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="f3")
    ap.add_argument("--omega", default="w^2")
    ap.add_argument("--bound", default="w^4")
    ap.add_argument("--cap", type=int, default=4)
    ap.add_argument("--out", help="write the JSON report here")
    args = ap.parse_args()
    fam = make_family(args.family, parse_ordinal(args.omega))
    res = run_lemma_suite(fam, parse_ordinal(args.bound), cap=args.cap)
    for r in res:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name:15} checked={r.checked} "
              f"violations={r.violation_count} {r.seconds:.2f}s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump([r.to_dict() for r in res], fh, indent=2)


if __name__ == "__main__":
    main()
