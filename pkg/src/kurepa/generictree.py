"""Finite stand-ins for generic filters and the tree they induce.

A filter is a descending chain of conditions meeting a list of requirements.
Branch ``b_xi`` is the union of the chain's values at ``xi``; node ``t`` sits
on level ``g`` when ``t`` lies in the aligned block ``[w*g, w*g + w)``.

Tree order is not given explicitly by the construction being modelled; here
``s`` lies below ``t`` when some branch contains both with ``s < t``. The
intersection invariants make that order well defined.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .csequences import CSequenceFamily
from .ordinals import OMEGA, Ordinal, div_omega, format_ordinal, nat, ord_add, ord_mul, parse_ordinal
from .posets import (
    EMPTY, Condition, Variant, extends, forced_closure, is_initial_segment, validate_condition,
)
from .walks import walker_for


class BudgetExhausted(RuntimeError):
    pass


class TreeInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class DenseRequirement:
    kind: str                        # "touch" or "grow"
    xi: Ordinal
    level: Optional[Ordinal] = None

    def __post_init__(self):
        if self.kind not in ("touch", "grow"):
            raise ValueError(f"unknown requirement kind {self.kind!r}")
        if self.kind == "grow" and self.level is None:
            raise ValueError("grow needs a level")

    def met_by(self, p: Condition) -> bool:
        if self.xi not in p:
            return False
        if self.kind == "touch":
            return True
        return any(div_omega(t) == self.level for t in p[self.xi])

    def __str__(self) -> str:
        if self.kind == "touch":
            return f"touch {format_ordinal(self.xi)}"
        return f"grow {format_ordinal(self.xi)} {format_ordinal(self.level)}"


def touch(xi) -> DenseRequirement:
    return DenseRequirement("touch", _o(xi))


def grow(xi, level) -> DenseRequirement:
    return DenseRequirement("grow", _o(xi), _o(level))


def _o(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        return nat(x)
    return parse_ordinal(x)


def parse_requirements(text: str) -> list[DenseRequirement]:
    """One requirement per line: ``touch XI`` or ``grow XI LEVEL``; ``#`` starts a comment."""
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "touch" and len(parts) == 2:
            out.append(touch(parts[1]))
        elif parts[0] == "grow" and len(parts) == 3:
            out.append(grow(parts[1], parts[2]))
        else:
            raise ValueError(f"line {n}: expected 'touch XI' or 'grow XI LEVEL', got {line!r}")
    return out


@dataclass
class GenericFilter:
    chain: list[Condition]
    met: list[DenseRequirement] = field(default_factory=list)
    unmet: list[tuple[DenseRequirement, str]] = field(default_factory=list)
    variant: Optional[Variant] = None
    family: Optional[CSequenceFamily] = None

    @property
    def last(self) -> Condition:
        return self.chain[-1]

    def to_dict(self) -> dict:
        return {
            "chain": [p.to_json() for p in self.chain],
            "met": [str(r) for r in self.met],
            "unmet": [{"requirement": str(r), "reason": why} for r, why in self.unmet],
        }


def _closed_extension(p: Condition, xi: Ordinal, vals: Iterable[Ordinal]) -> Condition:
    r = {k: set(v) for k, v in p.items()}
    r.setdefault(xi, set()).update(vals)
    forced_closure(r)
    return Condition(r)


def _candidates(p: Condition, req: DenseRequirement, rng: random.Random) -> list[Ordinal]:
    lvl = req.level
    shared = sorted({t for a, vs in p.items() if a != req.xi for t in vs if div_omega(t) == lvl})
    rng.shuffle(shared)
    used = {t for vs in (p[a] for a in p) for t in vs}
    base = ord_mul(OMEGA, lvl)
    fresh = []
    k = 0
    while len(fresh) < 2:
        t = ord_add(base, nat(k))
        if t not in used:
            fresh.append(t)
        k += 1
    return shared + fresh if rng.random() < 0.7 else fresh + shared


def _meet(p: Condition, req: DenseRequirement, rng: random.Random, variant: Variant,
          family: CSequenceFamily) -> tuple[Optional[Condition], str]:
    if req.met_by(p):
        return p, ""
    if not variant.allows_point(req.xi, family):
        return None, f"{format_ordinal(req.xi)} is not allowed in {variant.name}"
    if req.kind == "touch":
        cand = _closed_extension(p, req.xi, ())
        return cand, ""
    reasons = []
    for t in _candidates(p, req, rng):
        cand = _closed_extension(p, req.xi, (t,))
        rep = validate_condition(cand, variant, family, first_only=True)
        if rep.ok:
            return cand, ""
        reasons.append(f"{format_ordinal(t)}: {rep.violations[0].clause}")
    return None, "no valid value on this level (" + "; ".join(reasons) + ")"


def build_filter(reqs: list[DenseRequirement], seed: int, budget: int, variant: Variant,
                 family: CSequenceFamily) -> GenericFilter:
    """Meet ``reqs`` in order, then spend the remaining budget on random grow steps.

    Each step appends the closure of the smallest change that meets the
    requirement, so the chain is decreasing and every element is minimal over
    its predecessor. ``budget`` bounds the number of steps.
    """
    if budget < len(reqs):
        raise BudgetExhausted(f"budget {budget} is below the {len(reqs)} requirements")
    rng = random.Random(seed)
    f = GenericFilter([EMPTY], variant=variant, family=family)
    steps = 0
    for req in reqs:
        steps += 1
        nxt, why = _meet(f.last, req, rng, variant, family)
        if nxt is None:
            f.unmet.append((req, why))
            continue
        if nxt != f.last:
            f.chain.append(nxt)
        f.met.append(req)
    # extra steps make the chain look more generic on the touched points
    while steps < budget and len(f.last):
        steps += 1
        xi = rng.choice(f.last.dom)
        top = max((div_omega(t) for t in f.last[xi]), default=None)
        lvl = nat(0) if top is None else ord_add(top, nat(rng.randint(1, 2)))
        nxt, _ = _meet(f.last, grow(xi, lvl), rng, variant, family)
        if nxt is not None and nxt != f.last:
            f.chain.append(nxt)
    for a, b in zip(f.chain, f.chain[1:]):
        if not extends(b, a):
            raise TreeInvariantError("chain is not decreasing")
    return f


# -- the tree ------------------------------------------------------------------

@dataclass
class LeveledTree:
    branch_map: dict[Ordinal, tuple[Ordinal, ...]]

    @property
    def nodes(self) -> list[Ordinal]:
        return sorted({t for b in self.branch_map.values() for t in b})

    def level(self, t: Ordinal) -> Ordinal:
        return div_omega(t)

    def predecessors(self, t: Ordinal) -> tuple[Ordinal, ...]:
        for b in self.branch_map.values():
            if t in b:
                return tuple(s for s in b if s < t)
        raise KeyError(t)

    def parent(self, t: Ordinal) -> Optional[Ordinal]:
        pr = self.predecessors(t)
        return pr[-1] if pr else None

    def edges(self) -> list[tuple[Ordinal, Ordinal]]:
        out = set()
        for b in self.branch_map.values():
            out.update(zip(b, b[1:]))
        return sorted(out)

    def label(self, t: Ordinal) -> str:
        return f"{format_ordinal(t)}@{format_ordinal(self.level(t))}"

    def to_dot(self) -> str:
        lines = ["digraph T {", "  rankdir=BT;"]
        for t in self.nodes:
            lines.append(f'  "{self.label(t)}";')
        for s, t in self.edges():
            lines.append(f'  "{self.label(s)}" -> "{self.label(t)}";')
        for xi, b in self.branch_map.items():
            if b:
                lines.append(f'  "b_{format_ordinal(xi)}" [shape=plaintext];')
                lines.append(f'  "{self.label(b[-1])}" -> "b_{format_ordinal(xi)}" [style=dotted];')
        lines.append("}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        f = format_ordinal
        return {
            "nodes": [{"node": f(t), "level": f(self.level(t))} for t in self.nodes],
            "branches": {f(xi): [f(t) for t in b] for xi, b in self.branch_map.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def tree_of(filt: GenericFilter) -> LeveledTree:
    """Branches of the filter; invariants are checked and any breach raises."""
    bm: dict[Ordinal, set] = {}
    for p in filt.chain:
        for xi, vs in p.items():
            bm.setdefault(xi, set()).update(vs)
    tree = LeveledTree({xi: tuple(sorted(v)) for xi, v in sorted(bm.items())})
    if filt.family is not None and filt.variant is not None:
        rep = check_tree(tree, filt.family, filt.variant)
        if not rep.ok:
            raise TreeInvariantError(json.dumps(rep.to_dict()["violations"][:3]))
    return tree


@dataclass
class TreeReport:
    violations: list[dict] = field(default_factory=list)
    pairs: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "pairs": self.pairs}


def check_tree(tree: LeveledTree, family: CSequenceFamily, variant: Variant) -> TreeReport:
    """Recheck block, predecessor, initial-segment and cap invariants from the branch map."""
    f = format_ordinal
    rep = TreeReport()
    w = walker_for(family)
    for xi, b in tree.branch_map.items():
        lv = [div_omega(t) for t in b]
        if len(set(lv)) != len(lv):
            rep.violations.append({"clause": "block", "xi": f(xi), "detail": "two nodes on one level"})
    for (xi, b1), (eta, b2) in itertools.combinations(tree.branch_map.items(), 2):
        s1, s2 = frozenset(b1), frozenset(b2)
        shared = s1 & s2
        r = w.rho(xi, eta)
        entry = {"xi": f(xi), "eta": f(eta), "rho": f(r)}
        if shared:
            top = max(shared)
            entry["delta_level"] = f(div_omega(top))
            entry["max_shared"] = f(top)
            if any(tuple(x for x in b1 if x < t) != tuple(x for x in b2 if x < t) for t in shared):
                rep.violations.append({"clause": "predecessors", "xi": f(xi), "eta": f(eta),
                                       "detail": "a shared node has different predecessors"})
            elif not (is_initial_segment(shared, s1) and is_initial_segment(shared, s2)):
                rep.violations.append({"clause": "initial_segment", "xi": f(xi), "eta": f(eta)})
            if not variant.cap_ok(top, r):
                rep.violations.append({"clause": "rho_cap", "xi": f(xi), "eta": f(eta),
                                       "detail": f"max shared {f(top)} vs rho {f(r)}"})
        rep.pairs.append(entry)
    return rep
