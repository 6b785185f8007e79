#!/usr/bin/env python3
"""Search-failure and merge statistics for both projection constructions.

Prints per-clause failure counts and the fraction of merges that are valid
common extensions, so the two constructions can be compared across seeds.
"""

import argparse
from collections import Counter

from kurepa.experiments import TrialConfig, below_projection_trials, countable_projection_trials
from kurepa.posets import Q, extends, is_condition


def summarize(name, trials, fam):
    fails = Counter(t.failure_clause for t in trials if t.projection is None)
    merges = [(t, r, s) for t in trials if t.projection for r, s in t.merges]
    good = sum(is_condition(s, Q, fam) and extends(s, r) and extends(s, t.condition) for t, r, s in merges)
    print(f"{name}: {len(trials)} conditions, search failures {sum(fails.values())} {dict(fails)}, "
          f"valid merges {good}/{len(merges)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--descents", type=int, default=100)
    ap.add_argument("--seeds", default="5")
    ap.add_argument("--omega", default="w^2")
    args = ap.parse_args()
    for seed in map(int, args.seeds.split(",")):
        cfg = TrialConfig(omega=args.omega, trials=args.trials, descents=args.descents, seed=seed)
        fam = cfg.build()
        print(f"seed {seed}")
        summarize("  project_to_countable", countable_projection_trials(cfg, fam), fam)
        summarize("  project_below", below_projection_trials(cfg, fam), fam)


if __name__ == "__main__":
    main()
