"""Delta-systems, the rho-gap refinement, and an empirical Knaster harness.

The theorems behind this module quantify over uncountable families. Here
"uncountable" is read as "a large finite sample": the harness stresses the
amalgamation pipeline and can never prove the property.
"""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Sequence

from .csequences import CSequenceFamily
from .ordinals import OMEGA, ZERO, Ordinal, format_ordinal, nat, ord_add, ord_mul
from .posets import (
    AmalgamationError, Condition, Variant, amalgamate_delta_pair, compatible,
    delta_pair_hypotheses, extends, is_condition, signature, validate_condition,
)
from .walks import walker_for

HEADER = ("Empirical check on a finite sample: a clean run stresses the amalgamation "
          "construction but proves nothing about uncountable families.")


# -- sunflowers ------------------------------------------------------------------

def _max_packing(petals: list[tuple[int, frozenset]], budget: int) -> tuple[list[int], bool]:
    """Largest pairwise-disjoint subfamily of petals; exact unless ``budget`` nodes run out."""
    best: list[int] = []
    nodes = 0
    exhausted = False

    def rec(i: int, used: frozenset, picked: list[int]):
        nonlocal best, nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        if len(picked) + len(petals) - i <= len(best):
            return
        if i == len(petals):
            best = list(picked)
            return
        idx, pet = petals[i]
        if not pet & used:
            rec(i + 1, used | pet, picked + [idx])
        rec(i + 1, used, picked)

    rec(0, frozenset(), [])
    return best, not exhausted


def delta_system_indices(sets: Sequence[Iterable[Hashable]], budget: int = 20_000) -> tuple[frozenset, list[int]]:
    """Root and member indices of a largest sunflower.

    Candidate roots are the sets themselves and all pairwise intersections.
    For each root the members containing it are packed so their petals stay
    disjoint: greedily first, then by an exact search while the node budget
    lasts. The largest result wins, ties going to the smaller root.
    """
    fs = [frozenset(s) for s in sets]
    if not fs:
        return frozenset(), []
    distinct = list(dict.fromkeys(fs))
    roots = set(distinct)
    for a, b in itertools.combinations(distinct, 2):
        roots.add(a & b)
    best: tuple[int, frozenset, list[int]] | None = None
    for r in sorted(roots, key=lambda x: (len(x), sorted(map(repr, x)))):
        petals = [(i, s - r) for i, s in enumerate(fs) if r <= s]
        if best is not None and len(petals) <= best[0]:
            continue
        used: set = set()
        picked = []
        for i, petal in petals:
            if petal & used:
                continue
            used |= petal
            picked.append(i)
        if len(petals) > len(picked) and budget:
            # empty petals are always compatible; pack the rest exactly
            empty = [i for i, pet in petals if not pet]
            exact, _ = _max_packing([(i, pet) for i, pet in petals if pet], budget)
            if len(empty) + len(exact) > len(picked):
                picked = sorted(empty + exact)
        if best is None or len(picked) > best[0]:
            best = (len(picked), r, picked)
    return best[1], best[2]


def delta_system(sets: Sequence[Iterable[Hashable]]) -> tuple[frozenset, list[frozenset]]:
    root, idx = delta_system_indices(sets)
    return root, [frozenset(sets[i]) for i in idx]


def is_sunflower(sets: Sequence[Iterable[Hashable]], root: frozenset) -> bool:
    fs = [frozenset(s) for s in sets]
    return all(a & b == root for a, b in itertools.combinations(fs, 2))


# -- the rho gap ---------------------------------------------------------------------

@dataclass
class RefinedFamily:
    members: list
    root: frozenset
    gap: Ordinal
    report: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.members)


def _domain(m) -> frozenset:
    return frozenset(m.dom) if isinstance(m, Condition) else frozenset(m)


def cross_pair_ok(x: Ordinal, y: Ordinal, root: Iterable[Ordinal], nu: Ordinal,
                  family: CSequenceFamily) -> Optional[str]:
    """None if the pair (x, y) satisfies both gap bullets, else the failing one."""
    w = walker_for(family)
    r = w.rho_sym(x, y)
    if not r > nu:
        return "gap"
    for g in root:
        if r < min(w.rho_sym(g, x), w.rho_sym(g, y)):
            return "min_inequality"
    return None


def rho_gap_refine(fam: Sequence, nu: Ordinal, family: CSequenceFamily) -> RefinedFamily:
    """Greedy subfamily whose private points pairwise satisfy the gap bullets.

    Both bullets are demanded for every cross pair of private points, in both
    directions, which is at least as strong as the one-sided form.
    """
    doms = [_domain(m) for m in fam]
    root = frozenset.intersection(*doms) if doms else frozenset()
    kept: list[int] = []
    rejected = {"gap": 0, "min_inequality": 0}
    for i, d in enumerate(doms):
        bad = None
        for j in kept:
            for x in d - root:
                for y in doms[j] - root:
                    bad = cross_pair_ok(x, y, root, nu, family)
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            rejected[bad] += 1
        else:
            kept.append(i)
    return RefinedFamily(
        [fam[i] for i in kept], root, nu,
        {"enforced": ["gap", "min_inequality"], "input_size": len(fam),
         "output_size": len(kept), "rejected": rejected},
    )


# -- the harness -------------------------------------------------------------------------

@dataclass
class HarnessConfig:
    root_points: int = 2          # size of the pool of shared domain points
    private_points: int = 2       # max private points per condition
    shared_values: int = 2        # size of the pool of shared low values
    private_values: int = 2       # max private values per point


def _sample(rng: random.Random, family: CSequenceFamily, variant: Variant, i: int,
            cfg: HarnessConfig, root_pool: list[Ordinal], low_vals: list[Ordinal]) -> Condition:
    """Condition number i: root points from a fixed pool, private points and values in block i."""
    tier = family.tier
    for _ in range(100):
        entries: dict[Ordinal, set] = {}
        for g in rng.sample(root_pool, rng.randint(1, len(root_pool))):
            entries[g] = set(rng.sample(low_vals, rng.randint(0, len(low_vals))))
        # private domain points live in the i-th tier block above the root pool
        base = ord_mul(tier, nat(i + 2)) if tier is not None else ord_mul(OMEGA, nat(i + 2))
        offs = sorted(rng.sample(range(1, 6), rng.randint(1, cfg.private_points)))
        for k in offs:
            x = ord_add(base, ord_mul(OMEGA, nat(k)) if rng.random() < 0.5 else nat(k))
            vals = set(rng.sample(low_vals, rng.randint(0, len(low_vals))))
            entries[x] = vals
        # private values: a block of w-windows indexed by i, shared by points of this condition
        block = [ord_add(ord_mul(OMEGA, nat(10 + cfg.private_values * i + j)), nat(rng.randint(0, 3)))
                 for j in range(cfg.private_values)]
        holders = rng.sample(list(entries), rng.randint(1, len(entries)))
        for h in holders:
            entries[h] |= set(block[: rng.randint(1, len(block))])
        p = Condition(entries)
        if is_condition(p, variant, family):
            return p
    raise RuntimeError(f"could not sample condition {i}")


@dataclass
class HarnessReport:
    header: str
    n: int
    seed: int
    variant: str
    buckets: int
    largest_bucket: int
    refined_size: int
    refined_root: list[str]
    gap: str
    pairs_checked: int = 0
    incompatible: list[dict] = field(default_factory=list)
    amalgamated: int = 0
    amalgamation_skipped: dict = field(default_factory=dict)
    amalgamation_failures: list[dict] = field(default_factory=list)
    refine_report: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.refined_size >= 2 and not self.incompatible and not self.amalgamation_failures

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["ok"] = self.ok
        d["seconds"] = round(self.seconds, 3)
        return d

    def summary(self) -> str:
        lines = [
            self.header,
            f"variant={self.variant} n={self.n} seed={self.seed}",
            f"buckets={self.buckets} largest={self.largest_bucket} refined={self.refined_size} gap={self.gap}",
            f"pairs checked={self.pairs_checked} incompatible={len(self.incompatible)}",
            f"amalgamated={self.amalgamated} skipped={sum(self.amalgamation_skipped.values())} "
            f"failed={len(self.amalgamation_failures)}",
            "PASS" if self.ok else "FAIL",
        ]
        return "\n".join(lines)


def knaster_harness(n: int, seed: int, variant: Variant, family: CSequenceFamily,
                    cfg: HarnessConfig | None = None) -> HarnessReport:
    if n < 2:
        raise ValueError("need n >= 2")
    cfg = cfg or HarnessConfig()
    t0 = time.perf_counter()
    rng = random.Random(seed)
    tier = family.tier
    step = tier if tier is not None else OMEGA
    root_pool = [ord_add(step, ord_mul(OMEGA, nat(k + 1))) for k in range(cfg.root_points)]
    low_vals = [nat(k) for k in range(cfg.shared_values)]
    conds = [_sample(rng, family, variant, i, cfg, root_pool, low_vals) for i in range(n)]

    # bucket by isomorphism type, keeping the root-pool part and the low values verbatim
    buckets: dict[tuple, list[Condition]] = {}
    for p in conds:
        fixed = tuple((g, p.get(g, None)) for g in root_pool)
        low = frozenset(v for v in p.values_union() if v in low_vals)
        buckets.setdefault((signature(p, family), fixed, low), []).append(p)
    ordered = sorted(buckets.values(), key=len, reverse=True)

    best: Optional[RefinedFamily] = None
    for members in ordered:
        if best is not None and len(members) <= len(best):
            break
        root, idx = delta_system_indices([m.dom for m in members])
        sub = [members[i] for i in idx]
        vals = [m.values_union() for m in sub]
        vroot = frozenset.intersection(*vals) if vals else frozenset()
        nu = max(vroot) if vroot else ZERO
        ref = rho_gap_refine(sub, nu, family)
        if best is None or len(ref) > len(best):
            best = ref
    assert best is not None

    rep = HarnessReport(
        HEADER, n, seed, variant.name, len(buckets), len(ordered[0]), len(best),
        [format_ordinal(x) for x in sorted(best.root)], format_ordinal(best.gap),
        refine_report=best.report,
    )
    for p, q in itertools.combinations(best.members, 2):
        rep.pairs_checked += 1
        res = compatible(p, q, variant, family)
        if not res:
            rep.incompatible.append({"p": p.to_json(), "q": q.to_json(),
                                     "certificate": res.certificate.to_dict()})
            continue
        _, _, problems = delta_pair_hypotheses(p, q, best.root, family)
        if problems:
            key = problems[0].split(":")[0]
            rep.amalgamation_skipped[key] = rep.amalgamation_skipped.get(key, 0) + 1
            continue
        try:
            r = amalgamate_delta_pair(p, q, best.root, family, variant)
        except AmalgamationError as exc:
            rep.amalgamation_failures.append({"p": p.to_json(), "q": q.to_json(), "error": str(exc)})
            continue
        if not (validate_condition(r, variant, family).ok and extends(r, p) and extends(r, q)
                and compatible(r, p, variant, family) and compatible(r, q, variant, family)):
            rep.amalgamation_failures.append({"p": p.to_json(), "q": q.to_json(), "error": "witness rejected"})
            continue
        rep.amalgamated += 1
    rep.seconds = time.perf_counter() - t0
    return rep
