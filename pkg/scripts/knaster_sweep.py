#!/usr/bin/env python3
"""Run the Knaster harness over several seeds and sample sizes and tabulate the outcome."""

import argparse
import csv
import sys

from kurepa import make_family, parse_ordinal
from kurepa.deltasys import knaster_harness
from kurepa.posets import P, Q


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="250,500,1000")
    ap.add_argument("--seeds", default="0,1,2,42")
    ap.add_argument("--omega", default="w^2")
    args = ap.parse_args()
    fam = make_family("f3", parse_ordinal(args.omega))
    out = csv.writer(sys.stdout)
    out.writerow(["variant", "n", "seed", "buckets", "refined", "pairs", "incompatible",
                  "amalgamated", "skipped", "failed", "seconds", "ok"])
    for variant in (Q, P):
        for n in map(int, args.sizes.split(",")):
            for seed in map(int, args.seeds.split(",")):
                r = knaster_harness(n, seed, variant, fam)
                out.writerow([variant.name, n, seed, r.buckets, r.refined_size, r.pairs_checked,
                              len(r.incompatible), r.amalgamated, sum(r.amalgamation_skipped.values()),
                              len(r.amalgamation_failures), f"{r.seconds:.2f}", r.ok])


if __name__ == "__main__":
    main()
