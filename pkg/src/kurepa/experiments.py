"""Seeded trial drivers shared by the scripts and the acceptance suite.

Each driver returns raw records; judging them is left to the caller.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .csequences import CSequenceFamily, make_family
from .generictree import GenericFilter, build_filter, grow, touch
from .ordinals import Ordinal, nat, omega_power, ord_add, ord_mul, parse_ordinal, sweep
from .posets import (
    Condition, Projection, ProjectionSearchFailed, Q, Q_c, Q_mu, Variant, compatible,
    is_condition, project_below, project_to_countable, random_condition, random_extension,
    suborder_counterexample,
)

VALUE_POOL = ("0", "1", "2", "w", "w+1", "w*2", "w*2+3", "w*3", "w*4+1")


@dataclass
class TrialConfig:
    family: str = "f3"
    omega: str = "w^2"
    cap: int = 3
    trials: int = 200
    descents: int = 100
    descent_steps: int = 3
    seed: int = 0
    max_points: int = 3
    max_vals: int = 3

    def build(self) -> CSequenceFamily:
        return make_family(self.family, parse_ordinal(self.omega))


@dataclass
class ProjectionTrial:
    condition: Condition
    projection: Optional[Projection] = None
    failure: Optional[str] = None
    failure_clause: str = ""
    mu: Optional[Ordinal] = None
    merges: list[tuple[Condition, Condition]] = field(default_factory=list)   # (r, merged s)


def _pools(family: CSequenceFamily, cap: int):
    dom = [a for a in sweep(family.bound, cap) if a]
    vals = [parse_ordinal(v) for v in VALUE_POOL]
    if family.tier is not None:
        vals = [v for v in vals if v < family.tier]
    return dom, vals


def countable_projection_trials(cfg: TrialConfig, family: Optional[CSequenceFamily] = None) -> list[ProjectionTrial]:
    """Random Q-conditions with a tier-class point, projected to Q_c, then random descents merged back."""
    fam = family or cfg.build()
    rng = random.Random(cfg.seed)
    dom, vals = _pools(fam, cfg.cap)
    out = []
    while len(out) < cfg.trials:
        q = random_condition(rng, fam, Q, dom, vals, cfg.max_points, cfg.max_vals)
        if not any(fam.is_tier_class(a) for a in q.dom):
            continue
        t = ProjectionTrial(q)
        try:
            t.projection = project_to_countable(q, fam)
        except ProjectionSearchFailed as exc:
            t.failure, t.failure_clause = str(exc), exc.clause
            out.append(t)
            continue
        for _ in range(cfg.descents):
            r = random_extension(t.projection.projected, rng, fam, Q_c, dom, vals, cfg.descent_steps)
            t.merges.append((r, t.projection.merge(r)))
        out.append(t)
    return out


def below_projection_trials(cfg: TrialConfig, family: Optional[CSequenceFamily] = None) -> list[ProjectionTrial]:
    """Random Q-conditions with a point at or above a random tier-class mu, projected below mu."""
    fam = family or cfg.build()
    rng = random.Random(cfg.seed)
    dom, vals = _pools(fam, cfg.cap)
    universe = sweep(fam.bound, cfg.cap + 1)
    mus = [a for a in dom if fam.is_tier_class(a)]
    out = []
    while len(out) < cfg.trials:
        mu = rng.choice(mus)
        q = random_condition(rng, fam, Q, dom, vals, cfg.max_points, cfg.max_vals)
        if not any(a >= mu for a in q.dom):
            continue
        t = ProjectionTrial(q, mu=mu)
        try:
            t.projection, _ = project_below(q, mu, fam, universe)
        except ProjectionSearchFailed as exc:
            t.failure, t.failure_clause = str(exc), exc.clause
            out.append(t)
            continue
        pool = [a for a in universe if a < mu]
        for _ in range(cfg.descents):
            r = random_extension(t.projection.projected, rng, fam, Q_mu(mu), pool, vals, cfg.descent_steps)
            t.merges.append((r, t.projection.merge(r)))
        out.append(t)
    return out


@dataclass
class NegativeTrial:
    mu: Ordinal
    beta: Ordinal
    p: Condition
    pbar: Condition
    q: Condition
    certificate: object


def negative_fact_trials(n: int = 50, seed: int = 0) -> list[NegativeTrial]:
    """Triples (mu, beta, p) inside F3 with Omega = w^3, where C_mu has cofinal limit points.

    ``mu = Omega*k + w^2*j``, ``beta = mu + d`` a limit above mu in the same
    tier block, and ``p = {mu0: {nu}}`` with ``nu = otp(C_beta)`` placed in the
    previous block so that ``rho(mu0, beta) >= nu``.
    """
    fam = make_family("f3", parse_ordinal("w^3"), parse_ordinal("w^6"))
    om = fam.tier
    rng = random.Random(seed)
    tails = [parse_ordinal(x) for x in ("w", "w*3", "w^2", "w^2+w", "w^2*2", "w^2+w*2")]
    out = []
    while len(out) < n:
        k, j = rng.randint(1, 4), rng.randint(1, 3)
        mu = ord_add(ord_mul(om, nat(k)), ord_mul(omega_power(2), nat(j)))
        beta = ord_add(mu, rng.choice(tails))
        nu = fam.cset(beta).otp()
        mu0 = ord_add(ord_mul(om, nat(k - 1)), ord_add(nu, nat(rng.randint(0, 4))))
        p = Condition({mu0: {nu}})
        if rng.random() < 0.5:
            # a second point below mu0 sharing nothing keeps p non-trivial
            p = p.with_entries({ord_add(ord_mul(om, nat(k - 1)), nat(rng.randint(1, 3))): {nat(1)}})
        if not is_condition(p, Q_mu(mu), fam):
            continue
        pbar, cert = suborder_counterexample(mu, beta, p, fam)
        out.append(NegativeTrial(mu, beta, p, pbar, Condition({beta: {nu}}), cert))
    return out


def negative_family() -> CSequenceFamily:
    return make_family("f3", parse_ordinal("w^3"), parse_ordinal("w^6"))


def filter_trials(n: int = 100, seed: int = 0, family: Optional[CSequenceFamily] = None) -> list[tuple[Variant, GenericFilter]]:
    """Filters for alternating Q and P with varied seeds, budgets and requirement lists."""
    from .posets import P
    fam = family or make_family("f3", parse_ordinal("w^2"))
    rng = random.Random(seed)
    pts = [a for a in sweep(fam.bound, 2) if a and not fam.is_tier_class(a)]
    out = []
    for i in range(n):
        v = (Q, P)[i % 2]
        xs = rng.sample(pts, rng.randint(2, 6))
        reqs = [touch(x) for x in xs[:2]]
        reqs += [grow(rng.choice(xs), rng.randint(0, 6)) for _ in range(rng.randint(5, 20))]
        budget = len(reqs) + rng.randint(0, 20)
        out.append((v, build_filter(reqs, rng.randrange(2**31), budget, v, fam)))
    return out
