"""Walks from beta down to alpha and the rho function over a C-sequence family.

``rho(alpha, beta)`` for ``alpha < beta`` is the max of

* ``otp(C_beta ∩ alpha)``,
* ``rho(alpha, min(C_beta \\ alpha))``,
* ``rho(xi, alpha)`` for ``xi`` in ``C_beta ∩ [Lambda(alpha, beta), alpha)``,

with ``rho(alpha, alpha) = 0`` and an empty candidate set contributing 0.
Unrolling the middle term along the walk gives the iterative form used by
:class:`Walker`; :func:`rho_naive` keeps the literal recursion as an oracle.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional
from weakref import WeakKeyDictionary

from .csequences import CSequenceFamily, FamilyError
from .ordinals import ZERO, Ordinal, format_ordinal, sweep

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class RecursionBudgetExceeded(RuntimeError):
    """The walk recursion went deeper than allowed (pathological family)."""


@dataclass
class WalkTrace:
    alpha: Ordinal
    beta: Ordinal
    upper: list[Ordinal]
    lower: list[Ordinal]
    lambdas: list[Ordinal]
    rho: Ordinal

    def to_dict(self) -> dict:
        f = format_ordinal
        return {
            "alpha": f(self.alpha),
            "beta": f(self.beta),
            "upper": [f(x) for x in self.upper],
            "lower": [f(x) for x in self.lower],
            "lambdas": [f(x) for x in self.lambdas],
            "rho": f(self.rho),
        }


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0

    def to_dict(self) -> dict:
        return {"hits": self.hits, "misses": self.misses}


class Walker:
    """Memoized rho over one family. The cache maps ``(alpha, beta)`` to rho."""

    def __init__(self, family: CSequenceFamily, max_depth: int = 5000):
        self.family = family
        self.cache: dict[tuple[Ordinal, Ordinal], Ordinal] = {}
        self.stats = CacheStats()
        self.max_depth = max_depth
        self._depth = 0

    def _check(self, alpha: Ordinal, beta: Ordinal) -> None:
        self.family.check(alpha, beta)
        if alpha > beta:
            raise ValueError(f"need alpha <= beta, got {alpha} > {beta}")

    def upper_trace(self, alpha: Ordinal, beta: Ordinal) -> list[Ordinal]:
        self._check(alpha, beta)
        out = [beta]
        cur = beta
        while cur != alpha:
            nxt = self.family.cset(cur).min_above(alpha)
            if nxt is None or nxt >= cur:
                raise FamilyError(f"walk from {beta} to {alpha} stuck at {cur}")
            out.append(nxt)
            cur = nxt
        return out

    def rho(self, alpha: Ordinal, beta: Ordinal) -> Ordinal:
        if alpha == beta:
            self._check(alpha, beta)
            return ZERO
        hit = self.cache.get((alpha, beta))
        if hit is not None:
            self.stats.hits += 1
            return hit
        self._check(alpha, beta)
        self.stats.misses += 1
        self._depth += 1
        try:
            if self._depth > self.max_depth:
                raise RecursionBudgetExceeded(f"rho({alpha}, {beta}) exceeded depth {self.max_depth}")
            return self._rho_walk(alpha, beta)
        except RecursionError as exc:
            raise RecursionBudgetExceeded(f"rho({alpha}, {beta}) exhausted the interpreter stack") from exc
        finally:
            self._depth -= 1

    def _rho_walk(self, alpha: Ordinal, beta: Ordinal) -> Ordinal:
        fam = self.family
        steps: list[tuple[Ordinal, Ordinal]] = []
        cur = beta
        tail = ZERO
        while cur != alpha:
            known = self.cache.get((alpha, cur))
            if known is not None:
                tail = known
                break
            c = fam.cset(cur)
            val = c.otp_below(alpha)
            lam = c.max_limit_point_le(alpha)
            for xi in c.between(ZERO if lam is None else lam, alpha):
                r = self.rho(xi, alpha)
                if r > val:
                    val = r
            steps.append((cur, val))
            nxt = c.min_above(alpha)
            if nxt is None or nxt >= cur:
                raise FamilyError(f"walk from {beta} to {alpha} stuck at {cur}")
            cur = nxt
        for node, val in reversed(steps):
            if val > tail:
                tail = val
            self.cache[(alpha, node)] = tail
        return tail

    def lower_trace(self, alpha: Ordinal, beta: Ordinal) -> list[Ordinal]:
        """Running maxima of max(C_{beta_i} ∩ alpha) along the upper trace.

        Steps where the intersection is empty or has no maximum are skipped;
        only strict increases are recorded.
        """
        if alpha >= beta:
            raise ValueError(f"need alpha < beta, got {alpha} >= {beta}")
        out: list[Ordinal] = []
        for node in self.upper_trace(alpha, beta)[:-1]:
            m = self.family.cset(node).max_below(alpha)
            if m is not None and (not out or m > out[-1]):
                out.append(m)
        return out

    def trace(self, alpha: Ordinal, beta: Ordinal) -> WalkTrace:
        upper = self.upper_trace(alpha, beta)
        lambdas = []
        for node in upper[:-1]:
            lp = self.family.cset(node).max_limit_point_le(alpha)
            lambdas.append(ZERO if lp is None else lp)
        lower = self.lower_trace(alpha, beta) if alpha < beta else []
        return WalkTrace(alpha, beta, upper, lower, lambdas, self.rho(alpha, beta))

    def rho_sym(self, a: Ordinal, b: Ordinal) -> Ordinal:
        """rho of the unordered pair {a, b}."""
        return self.rho(a, b) if a <= b else self.rho(b, a)


_walkers: "WeakKeyDictionary[CSequenceFamily, Walker]" = WeakKeyDictionary()


def walker_for(family: CSequenceFamily) -> Walker:
    w = _walkers.get(family)
    if w is None:
        w = _walkers[family] = Walker(family)
    return w


def rho(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> Ordinal:
    return walker_for(family).rho(alpha, beta)


def upper_trace(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> list[Ordinal]:
    return walker_for(family).upper_trace(alpha, beta)


def lower_trace(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> list[Ordinal]:
    return walker_for(family).lower_trace(alpha, beta)


def walk(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> WalkTrace:
    return walker_for(family).trace(alpha, beta)


def rho_naive(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> Ordinal:
    """The defining recursion, literally, with no cache."""
    if alpha == beta:
        return ZERO
    c = family.cset(beta)
    cands = [c.otp_below(alpha)]
    nxt = c.min_above(alpha)
    if nxt is None:
        raise FamilyError(f"C_{beta} has no element >= {alpha}")
    cands.append(rho_naive(alpha, nxt, family))
    lam = c.max_limit_point_le(alpha)
    for xi in c.between(ZERO if lam is None else lam, alpha):
        cands.append(rho_naive(xi, alpha, family))
    return max(cands)


@dataclass
class RhoTable:
    ordinals: list[Ordinal]
    values: dict[tuple[Ordinal, Ordinal], Ordinal] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, pair: tuple[Ordinal, Ordinal]) -> Ordinal:
        a, b = pair
        if a == b:
            return ZERO
        return self.values[pair] if a < b else self.values[(b, a)]

    def rows(self) -> Iterable[tuple[Ordinal, Ordinal, Ordinal]]:
        for (a, b), v in self.values.items():
            yield a, b, v

    def rank_matrix(self):
        """Integer matrix M with M[i, j] = order-rank of rho(U_i, U_j), i <= j; -1 below."""
        import numpy as np

        distinct = sorted(set(self.values.values()) | {ZERO})
        rank = {v: i for i, v in enumerate(distinct)}
        n = len(self.ordinals)
        m = np.full((n, n), -1, dtype=np.int32)
        idx = {a: i for i, a in enumerate(self.ordinals)}
        for (a, b), v in self.values.items():
            m[idx[a], idx[b]] = rank[v]
        np.fill_diagonal(m, 0)
        return m, distinct


def rho_table(bound: Ordinal, family: CSequenceFamily, cap: int = 4, depth: int = 0,
              limit: int = 20_000, walker: Optional[Walker] = None) -> RhoTable:
    """rho on every pair ``alpha < beta`` of swept ordinals below ``bound``.

    Iteration order is ascending in beta, then alpha.
    """
    from .ordinals import EnumerationCapExceeded

    universe = sweep(bound, cap, depth, limit=limit)
    if len(universe) > limit:
        raise EnumerationCapExceeded(f"{len(universe)} ordinals exceed the cap {limit}")
    w = walker or walker_for(family)
    table = RhoTable(universe)
    for j, b in enumerate(universe):
        for a in universe[:j]:
            table.values[(a, b)] = w.rho(a, b)
    return table
