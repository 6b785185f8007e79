"""Finite conditions of the posets Q, P and their restrictions Q_c, Q_A, Q_mu.

A condition maps finitely many ordinals (domain points) to finite sets of
ordinals (values) subject to

* window: two distinct values of one set differ by at least w,
* initial segment: ``p(a) ∩ p(b)`` is an initial segment of both sets,
* rho cap: ``max(p(a) ∩ p(b)) <= rho(a, b)`` for ``a < b`` (``<`` in P).

``q`` extends ``p`` when ``dom(p) ⊆ dom(q)`` and ``p(a) ⊆ q(a)`` pointwise.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Optional

from .csequences import CSequenceFamily
from .ordinals import OMEGA, ONE, ZERO, Ordinal, format_ordinal, omega_power, ord_add, parse_ordinal, sweep
from .walks import walker_for


# -- conditions ----------------------------------------------------------------

class Condition:
    """Immutable finite map ``Ordinal -> frozenset[Ordinal]``."""

    __slots__ = ("_d", "_hash")

    def __init__(self, entries: Mapping[Ordinal, Iterable[Ordinal]] | None = None):
        d = {}
        for k, v in (entries or {}).items():
            d[_ord(k)] = frozenset(_ord(x) for x in v)
        self._d = dict(sorted(d.items()))
        self._hash = None

    @classmethod
    def parse(cls, data: Mapping[str, Iterable[str]]) -> "Condition":
        return cls({parse_ordinal(k): [parse_ordinal(x) for x in v] for k, v in data.items()})

    def __getitem__(self, a: Ordinal) -> frozenset:
        return self._d[a]

    def get(self, a: Ordinal, default=frozenset()) -> frozenset:
        return self._d.get(a, default)

    def __contains__(self, a) -> bool:
        return a in self._d

    def __len__(self) -> int:
        return len(self._d)

    def __iter__(self) -> Iterator[Ordinal]:
        return iter(self._d)

    def items(self):
        return self._d.items()

    @property
    def dom(self) -> list[Ordinal]:
        return list(self._d)

    def values_union(self) -> frozenset:
        out = set()
        for v in self._d.values():
            out |= v
        return frozenset(out)

    def with_entries(self, extra: Mapping[Ordinal, Iterable[Ordinal]]) -> "Condition":
        """Pointwise union with ``extra`` (new points allowed)."""
        d = {k: set(v) for k, v in self._d.items()}
        for k, v in extra.items():
            d.setdefault(k, set()).update(v)
        return Condition(d)

    def restrict(self, keep: Callable[[Ordinal], bool]) -> "Condition":
        return Condition({k: v for k, v in self._d.items() if keep(k)})

    def __eq__(self, other) -> bool:
        return isinstance(other, Condition) and self._d == other._d

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._d.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{format_ordinal(k)}: {{{', '.join(format_ordinal(x) for x in sorted(v))}}}"
            for k, v in self._d.items()
        )
        return f"Condition({{{inner}}})"

    def to_json(self) -> dict:
        return {"entries": [
            {"dom": format_ordinal(k), "vals": [format_ordinal(x) for x in sorted(v)]}
            for k, v in self._d.items()
        ]}

    @classmethod
    def from_json(cls, data: dict | str) -> "Condition":
        if isinstance(data, str):
            data = json.loads(data)
        entries: dict[Ordinal, set] = {}
        for e in data["entries"]:
            k = parse_ordinal(e["dom"])
            if k in entries:
                raise ValueError(f"duplicate domain point {e['dom']}")
            entries[k] = {parse_ordinal(x) for x in e["vals"]}
        return cls(entries)


EMPTY = Condition()


def _ord(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        from .ordinals import nat
        return nat(x)
    if isinstance(x, str):
        return parse_ordinal(x)
    raise TypeError(f"not an ordinal: {x!r}")


def extends(q: Condition, p: Condition) -> bool:
    """q <= p."""
    return all(a in q and v <= q[a] for a, v in p.items())


# -- variants ------------------------------------------------------------------

@dataclass(frozen=True)
class Variant:
    name: str
    strict: bool = False
    countable_only: bool = False
    mu: Optional[Ordinal] = None
    domain: Optional[Callable[[Ordinal], bool]] = field(default=None, compare=False)

    def allows_point(self, a: Ordinal, family: CSequenceFamily) -> bool:
        if self.countable_only and family.is_tier_class(a):
            return False
        if self.mu is not None and not a < self.mu:
            return False
        if self.domain is not None and not self.domain(a):
            return False
        return True

    def cap_ok(self, shared_max: Ordinal, r: Ordinal) -> bool:
        return shared_max < r if self.strict else shared_max <= r


Q = Variant("Q")
P = Variant("P", strict=True)
Q_c = Variant("Q_c", countable_only=True)


def Q_A(pred: Callable[[Ordinal], bool] | Iterable[Ordinal], name: str = "Q_A") -> Variant:
    if not callable(pred):
        allowed = frozenset(pred)
        pred = allowed.__contains__
    return Variant(name, domain=pred)


def Q_mu(mu: Ordinal) -> Variant:
    return Variant(f"Q_mu({format_ordinal(mu)})", mu=mu)


def variant_by_name(name: str, mu: Optional[Ordinal] = None) -> Variant:
    key = name.lower().replace("_", "")
    if key == "q":
        return Q
    if key == "p":
        return P
    if key == "qc":
        return Q_c
    if key == "qmu":
        if mu is None:
            raise ValueError("Q_mu needs --mu")
        return Q_mu(mu)
    raise ValueError(f"unknown poset variant {name!r}")


# -- validation ----------------------------------------------------------------

@dataclass
class ConditionViolation:
    clause: str
    alpha: Ordinal
    beta: Optional[Ordinal] = None
    detail: str = ""

    def to_dict(self) -> dict:
        d = {"clause": self.clause, "alpha": format_ordinal(self.alpha), "detail": self.detail}
        if self.beta is not None:
            d["beta"] = format_ordinal(self.beta)
        return d


@dataclass
class ConditionReport:
    variant: str
    violations: list[ConditionViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def clauses(self) -> set[str]:
        return {v.clause for v in self.violations}

    def to_dict(self) -> dict:
        return {"variant": self.variant, "ok": self.ok, "violations": [v.to_dict() for v in self.violations]}


def window_ok(vals: Iterable[Ordinal]) -> Optional[tuple[Ordinal, Ordinal]]:
    """None if any two values differ by >= w, else an offending (x, y)."""
    s = sorted(vals)
    for x, y in zip(s, s[1:]):
        if ord_add(x, OMEGA) > y:
            return x, y
    return None


def is_initial_segment(part: frozenset, whole: frozenset) -> bool:
    if not part:
        return True
    top = max(part)
    return all(x in part for x in whole if x <= top)


def validate_condition(p: Condition, variant: Variant, family: CSequenceFamily,
                       first_only: bool = False) -> ConditionReport:
    rep = ConditionReport(variant.name)
    w = walker_for(family)
    tier = family.tier

    def add(*a):
        rep.violations.append(ConditionViolation(*a))
        return first_only

    for a, vals in p.items():
        if a >= family.bound:
            if add("domain", a, None, f"{a} is outside the family bound"):
                return rep
            continue
        if not variant.allows_point(a, family):
            if add("domain", a, None, f"{a} not allowed in {variant.name}"):
                return rep
        if tier is not None:
            big = [x for x in vals if not x < tier]
            if big and add("value_range", a, None, f"value {big[0]} is not below {tier}"):
                return rep
        bad = window_ok(vals)
        if bad and add("window", a, None, f"{bad[0]} and {bad[1]} lie within one w-window"):
            return rep
    dom = [a for a in p.dom if a < family.bound]
    for a, b in itertools.combinations(dom, 2):
        shared = p[a] & p[b]
        if not shared:
            continue
        if not (is_initial_segment(shared, p[a]) and is_initial_segment(shared, p[b])):
            if add("initial_segment", a, b, "p(a) ∩ p(b) is not an initial segment of both"):
                return rep
        m = max(shared)
        r = w.rho(a, b)
        if not variant.cap_ok(m, r):
            op = "<" if variant.strict else "<="
            if add("rho_cap", a, b, f"max shared {m} violates {op} rho = {r}"):
                return rep
    return rep


def is_condition(p: Condition, variant: Variant, family: CSequenceFamily) -> bool:
    return validate_condition(p, variant, family, first_only=True).ok


# -- compatibility ---------------------------------------------------------------

@dataclass(frozen=True)
class ClosureStep:
    """``value`` joined ``point`` because ``via_value`` is shared by ``point`` and ``via``."""

    point: Ordinal
    value: Ordinal
    via: Ordinal
    via_value: Ordinal


@dataclass
class IncompatibilityCertificate:
    clause: str                # "rho_cap" or "window"
    alpha: Ordinal
    beta: Ordinal
    shared_value: Ordinal
    rho_at_pair: Optional[Ordinal] = None
    other_value: Optional[Ordinal] = None
    steps: tuple[ClosureStep, ...] = ()

    def to_dict(self) -> dict:
        f = format_ordinal
        d = {"clause": self.clause, "alpha": f(self.alpha), "beta": f(self.beta),
             "shared_value": f(self.shared_value)}
        if self.rho_at_pair is not None:
            d["rho_at_pair"] = f(self.rho_at_pair)
        if self.other_value is not None:
            d["other_value"] = f(self.other_value)
        d["forced_steps"] = [
            {"point": f(s.point), "value": f(s.value), "via": f(s.via), "via_value": f(s.via_value)}
            for s in self.steps
        ]
        return d


def verify_certificate(cert: IncompatibilityCertificate, p: Condition, q: Condition,
                       variant: Variant, family: CSequenceFamily) -> bool:
    """Replay the forced additions from the raw union and re-check the violated clause."""
    r = _union(p, q)
    for s in cert.steps:
        if s.point not in r or s.via not in r:
            return False
        if not (s.via_value in r[s.point] and s.via_value in r[s.via]):
            return False
        if not (s.value in r[s.via] and s.value < s.via_value):
            return False
        r[s.point].add(s.value)
    a, b = cert.alpha, cert.beta
    if a not in r or b not in r:
        return False
    if cert.clause == "window":
        x, y = cert.shared_value, cert.other_value
        return a == b and x in r[a] and y in r[a] and x < y < ord_add(x, OMEGA)
    if cert.clause == "rho_cap":
        if not (a < b and cert.shared_value in r[a] and cert.shared_value in r[b]):
            return False
        rr = walker_for(family).rho(a, b)
        return rr == cert.rho_at_pair and not variant.cap_ok(cert.shared_value, rr)
    return False


def _union(p: Condition, q: Condition) -> dict[Ordinal, set]:
    r: dict[Ordinal, set] = {}
    for c in (p, q):
        for a, v in c.items():
            r.setdefault(a, set()).update(v)
    return r


def forced_closure(r: dict[Ordinal, set], budget: int = 100_000) -> list[ClosureStep]:
    """Close ``r`` in place under the initial-segment rule; returns the additions made."""
    steps: list[ClosureStep] = []
    points = sorted(r)
    changed = True
    while changed:
        changed = False
        for a in points:
            for b in points:
                if a == b:
                    continue
                shared = r[a] & r[b]
                if not shared:
                    continue
                t = max(shared)
                for s in sorted(r[a]):
                    if s >= t:
                        break
                    if s not in r[b]:
                        r[b].add(s)
                        steps.append(ClosureStep(b, s, a, t))
                        changed = True
                        if len(steps) > budget:
                            raise RuntimeError("closure budget exceeded")
    return steps


@dataclass
class Compatibility:
    witness: Optional[Condition] = None
    certificate: Optional[IncompatibilityCertificate] = None

    @property
    def compatible(self) -> bool:
        return self.witness is not None

    def __bool__(self) -> bool:
        return self.compatible

    def to_dict(self) -> dict:
        if self.witness is not None:
            return {"compatible": True, "witness": self.witness.to_json()}
        return {"compatible": False, "certificate": self.certificate.to_dict()}


def compatible(p: Condition, q: Condition, variant: Variant, family: CSequenceFamily) -> Compatibility:
    """Decide compatibility via the forced closure of the pointwise union."""
    r = _union(p, q)
    steps = tuple(forced_closure(r))
    cand = Condition(r)
    rep = validate_condition(cand, variant, family, first_only=True)
    if rep.ok:
        return Compatibility(witness=cand)
    v = rep.violations[0]
    if v.clause == "window":
        x, y = window_ok(cand[v.alpha])
        return Compatibility(certificate=IncompatibilityCertificate("window", v.alpha, v.alpha, x, None, y, steps))
    if v.clause == "rho_cap":
        m = max(cand[v.alpha] & cand[v.beta])
        rr = walker_for(family).rho(v.alpha, v.beta)
        return Compatibility(certificate=IncompatibilityCertificate("rho_cap", v.alpha, v.beta, m, rr, None, steps))
    raise ValueError(f"inputs are not both conditions of {variant.name}: {v.to_dict()}")


def compatible_bruteforce(p: Condition, q: Condition, variant: Variant,
                          family: CSequenceFamily) -> Optional[Condition]:
    """Exhaustive search for a common extension on ``dom(p) ∪ dom(q)`` with values from the union's pool.

    Restricting any common extension to that domain and value pool is again a
    common extension, so the search is exact. Returns a witness or None.
    """
    req = _union(p, q)
    points = sorted(req)
    pool = sorted(set().union(*req.values())) if req else []
    w = walker_for(family)
    # cheap monotone refutations: windows and caps already broken by required values
    for a in points:
        if window_ok(req[a]):
            return None
    for a, b in itertools.combinations(points, 2):
        sh = req[a] & req[b]
        if sh and not variant.cap_ok(max(sh), w.rho(a, b)):
            return None
    options: list[list[frozenset]] = []
    for a in points:
        extra = [x for x in pool if x not in req[a]]
        opts = []
        for k in range(len(extra) + 1):
            for sub in itertools.combinations(extra, k):
                s = frozenset(req[a]) | frozenset(sub)
                if not window_ok(s):
                    opts.append(s)
        options.append(opts)
    rho_ab = {(a, b): w.rho(a, b) for a, b in itertools.combinations(points, 2)}
    chosen: list[frozenset] = []

    def pair_ok(a, sa, b, sb) -> bool:
        sh = sa & sb
        if not sh:
            return True
        if not (is_initial_segment(sh, sa) and is_initial_segment(sh, sb)):
            return False
        return variant.cap_ok(max(sh), rho_ab[(a, b)])

    def future_ok(i: int, s: frozenset) -> bool:
        a = points[i]
        for j in range(i + 1, len(points)):
            b = points[j]
            sh = s & req[b]
            if sh and not variant.cap_ok(max(sh), rho_ab[(a, b)]):
                return False
        return True

    def dfs(i: int) -> bool:
        if i == len(points):
            return True
        a = points[i]
        for s in options[i]:
            if all(pair_ok(points[j], chosen[j], a, s) for j in range(i)) and future_ok(i, s):
                chosen.append(s)
                if dfs(i + 1):
                    return True
                chosen.pop()
        return False

    if dfs(0):
        return Condition(dict(zip(points, chosen)))
    return None


# -- isomorphism types -----------------------------------------------------------

def signature(p: Condition, family: CSequenceFamily, nu_bar: Optional[Ordinal] = None) -> tuple:
    """Order-isomorphism type of (domain, value sets, rho on domain pairs truncated at nu_bar)."""
    w = walker_for(family)
    dom = p.dom
    vals = sorted(p.values_union())
    pos = {v: i for i, v in enumerate(vals)}
    sets = tuple(tuple(sorted(pos[x] for x in p[a])) for a in dom)
    rhos = []
    for a, b in itertools.combinations(dom, 2):
        r = w.rho(a, b)
        rhos.append(r if nu_bar is None or r < nu_bar else nu_bar)
    return (len(dom), len(vals), sets, tuple(rhos))


def isomorphic_fixing_root(p: Condition, q: Condition, root: Iterable[Ordinal],
                           value_root: Iterable[Ordinal], family: CSequenceFamily,
                           nu_bar: Optional[Ordinal] = None) -> bool:
    if signature(p, family, nu_bar) != signature(q, family, nu_bar):
        return False
    dp, dq = p.dom, q.dom
    for g in root:
        if g not in p or g not in q or dp.index(g) != dq.index(g):
            return False
    vp, vq = sorted(p.values_union()), sorted(q.values_union())
    for c in value_root:
        if c not in vp or c not in vq or vp.index(c) != vq.index(c):
            return False
    return True


# -- amalgamation of a Delta-pair ------------------------------------------------

class AmalgamationError(ValueError):
    pass


def delta_pair_hypotheses(p: Condition, q: Condition, root: Iterable[Ordinal],
                          family: CSequenceFamily) -> tuple[Condition, Condition, list[str]]:
    """Check the pair layout needed by :func:`amalgamate_delta_pair`.

    Returns ``(p, q, problems)`` with p, q ordered so p's private values lie
    below q's.
    """
    d = frozenset(root)
    problems = []
    if set(p.dom) & set(q.dom) != d:
        problems.append("delta_system: dom(p) ∩ dom(q) differs from the root")
    vp, vq = p.values_union(), q.values_union()
    c = vp & vq
    a, b = vp - c, vq - c
    if a and b and max(b) < min(a):
        p, q = q, p
        a, b = b, a
    if a and b and not max(a) < min(b):
        problems.append("value_blocks: private value blocks are not separated (need a < b)")
    if c and (a | b) and not max(c) < min(a | b):
        problems.append("value_root: root values are not below the private values (need c < a, b)")
    for g1, g2 in itertools.combinations(sorted(d), 2):
        for s in (p, q):
            if not (s[g1] & s[g2]) <= c:
                problems.append(f"root_intersections: values shared by root points {g1}, {g2} leave the value root")
                break
    if not isomorphic_fixing_root(p, q, d, c, family):
        problems.append("isomorphism: p and q are not isomorphic over the root")
    w = walker_for(family)
    top_c = max(c) if c else None
    for x in set(p.dom) - d:
        for y in set(q.dom) - d:
            r = w.rho_sym(x, y)
            if top_c is not None and not r > top_c:
                problems.append(f"rho_gap: rho({x}, {y}) = {r} is not above max(c) = {top_c}")
            for g in d:
                if r < min(w.rho_sym(g, x), w.rho_sym(g, y)):
                    problems.append(f"rho_min: rho({x}, {y}) < min(rho({g}, {x}), rho({g}, {y}))")
    return p, q, problems


def amalgamate_delta_pair(p: Condition, q: Condition, root: Iterable[Ordinal],
                          family: CSequenceFamily, variant: Variant = Q) -> Condition:
    """The explicit common extension of an isomorphic Delta-pair.

    On the root ``r(g) = p(g) ∪ q(g)``; on p's private points ``r = p``; on a
    private point ``y`` of q, ``r(y) = q(y)`` unless some root point g has
    ``max(q(g) ∩ q(y))`` among q's private values, in which case (g is then
    unique) ``r(y) = p(g) ∪ q(y)``.
    """
    d = frozenset(root)
    p, q, problems = delta_pair_hypotheses(p, q, d, family)
    if problems:
        raise AmalgamationError("; ".join(problems))
    c = p.values_union() & q.values_union()
    b = q.values_union() - c
    r: dict[Ordinal, set] = {}
    for g in d:
        r[g] = set(p[g]) | set(q[g])
    for x in set(p.dom) - d:
        r[x] = set(p[x])
    for y in set(q.dom) - d:
        hits = [g for g in d if (q[g] & q[y]) and max(q[g] & q[y]) in b]
        if len(hits) > 1:
            raise AmalgamationError(f"several root points reach q's private values at {y}")
        r[y] = set(q[y]) | (set(p[hits[0]]) if hits else set())
    out = Condition(r)
    rep = validate_condition(out, variant, family)
    if not rep.ok or not extends(out, p) or not extends(out, q):
        raise AmalgamationError(f"construction is not a common extension: {rep.to_dict()}")
    return out


# -- projections -------------------------------------------------------------------

class ProjectionSearchFailed(RuntimeError):
    def __init__(self, msg: str, clause: str = "", point: Optional[Ordinal] = None):
        super().__init__(msg)
        self.clause = clause
        self.point = point


@dataclass
class Projection:
    original: Condition
    projected: Condition
    moved: dict[Ordinal, Ordinal]          # original high point -> replacement

    def merge(self, r: Condition) -> Condition:
        """Common-extension candidate of ``r`` (below the projection) and the original."""
        extra = {}
        for b, b2 in self.moved.items():
            top = max(self.original[b]) if self.original[b] else None
            extra[b] = {x for x in r.get(b2) if top is not None and x <= top}
        out = {k: set(v) for k, v in r.items()}
        for k, v in extra.items():
            out.setdefault(k, set()).update(v)
        return Condition(out)

    def to_json(self) -> dict:
        return {
            "original": self.original.to_json(),
            "projected": self.projected.to_json(),
            "moved": {format_ordinal(k): format_ordinal(v) for k, v in self.moved.items()},
        }


def project_to_countable(q: Condition, family: CSequenceFamily, budget: int = 256) -> Projection:
    """Replace each tier-class point by the least qualifying limit point of its C-set.

    For tier-class ``b`` the replacement ``x`` must be a limit point of ``C_b``,
    lie above ``dom(q) ∩ b``, satisfy ``rho(x, a) = rho(b, a)`` for every
    ``a > b`` in ``dom(q)``, and have ``otp(C_x) > max(q(b))``.
    """
    w = walker_for(family)
    high = [b for b in q.dom if family.is_tier_class(b)]
    if not high:
        return Projection(q, q, {})
    moved: dict[Ordinal, Ordinal] = {}
    for b in high:
        cb = family.cset(b)
        below = [a for a in q.dom if a < b]
        above = [a for a in q.dom if a > b]
        top = max(q[b]) if q[b] else None
        x = cb.next_limit_point_above(max(below) if below else ZERO)
        tried = 0
        last_fail = "limit_point"
        found = None
        while x is not None and tried < budget:
            tried += 1
            if top is not None and not family.cset(x).otp() > top:
                last_fail = "otp"
            elif any(w.rho(x, a) != w.rho(b, a) for a in above):
                last_fail = "rho_agreement"
            else:
                found = x
                break
            x = cb.next_limit_point_above(x)
        if found is None:
            raise ProjectionSearchFailed(
                f"no replacement for {b} among {tried} limit points of C_{b} (last failing clause: {last_fail})",
                last_fail, b)
        moved[b] = found
    proj = {a: v for a, v in q.items() if a not in moved}
    for b, x in moved.items():
        proj[x] = q[b]
    return Projection(q, Condition(proj), moved)


@dataclass
class BelowSearch:
    """Data computed while projecting below mu (for inspection and reports)."""

    nu_bar: Ordinal
    mu0: Ordinal
    low: list[Ordinal]
    high: list[Ordinal]
    replacement: list[Ordinal]


def local_universe(mu: Ordinal, universe: Iterable[Ordinal], fine_cap: int = 12) -> list[Ordinal]:
    """Points of ``universe`` below ``mu`` plus a finer sweep of the last block below it.

    With ``mu = lam + w^e`` the block ``[lam, mu)`` is refilled with ``lam + d``
    for ``d`` in a sweep below ``w^e`` with coefficients up to ``fine_cap``.
    """
    pts = {x for x in universe if x < mu}
    if mu.is_limit():
        e, c = mu[-1]
        lam = Ordinal(mu[:-1] + (((e, c - 1),) if c > 1 else ()))
        pts.update(ord_add(lam, d) for d in sweep(omega_power(e), fine_cap))
    return sorted(pts)


def project_below(q: Condition, mu: Ordinal, family: CSequenceFamily, universe: list[Ordinal],
                  max_tuples: int = 200_000, fine_cap: int = 12) -> tuple[Projection, Optional[BelowSearch]]:
    """Move the points of ``dom(q)`` at or above ``mu`` below ``mu``.

    Finds ``nu_bar`` above every value and every rho on ``dom(q)``, a cut
    ``mu0 < mu`` above ``dom(q) ∩ mu`` beyond which ``rho(., b) > nu_bar`` for
    each high ``b``, and replacements ``b'_i`` in ``(mu0, mu)``, increasing,
    with the same small-rho fibres below ``mu0`` and the same mutual rho.
    Quantifiers over ordinals range over :func:`local_universe`.
    """
    w = walker_for(family)
    low = [a for a in q.dom if a < mu]
    high = [a for a in q.dom if a >= mu]
    if not high:
        return Projection(q, q, {}), None
    cands = list(q.values_union())
    for a, b in itertools.combinations(q.dom, 2):
        cands.append(w.rho(a, b))
    nu_bar = ord_add(max(cands, default=ZERO), ONE)
    U = local_universe(mu, universe, fine_cap)
    start = max(low) if low else None
    mu0 = None
    for i, g in enumerate(U):
        if start is not None and g <= start:
            continue
        if all(w.rho(x, b) > nu_bar for b in high for x in U[i:]):
            mu0 = g
            break
    if mu0 is None:
        raise ProjectionSearchFailed(f"no cut mu0 below {mu} with rho(., high) > {nu_bar} beyond it", "mu0")
    below_mu0 = [x for x in U if x < mu0]
    slots = [x for x in U if x > mu0]

    def fibre(b):
        return tuple(w.rho(x, b) if w.rho(x, b) < nu_bar else None for x in below_mu0)

    targets = [fibre(b) for b in high]
    per_point = []
    for i, b in enumerate(high):
        per_point.append([s for s in slots if fibre(s) == targets[i]])
        if not per_point[-1]:
            raise ProjectionSearchFailed(f"no point in ({mu0}, {mu}) copies the rho fibres of {b}", "fibres", b)
    mutual = {(i, j): w.rho(high[i], high[j]) for i, j in itertools.combinations(range(len(high)), 2)}
    tried = 0

    def search(i: int, chosen: list[Ordinal]) -> Optional[list[Ordinal]]:
        nonlocal tried
        if i == len(high):
            return chosen
        for s in per_point[i]:
            if chosen and s <= chosen[-1]:
                continue
            tried += 1
            if tried > max_tuples:
                return None
            if all(w.rho(chosen[j], s) == mutual[(j, i)] for j in range(i)):
                got = search(i + 1, chosen + [s])
                if got is not None:
                    return got
        return None

    repl = search(0, [])
    if repl is None:
        raise ProjectionSearchFailed(f"no increasing replacement tuple for {high} below {mu}", "mutual_rho")
    moved = dict(zip(high, repl))
    proj = {a: q[a] for a in low}
    for b, s in moved.items():
        proj[s] = q[b]
    return Projection(q, Condition(proj), moved), BelowSearch(nu_bar, mu0, low, high, repl)


# -- the negative witness -------------------------------------------------------------

class PreconditionError(ValueError):
    pass


def suborder_counterexample(mu: Ordinal, beta: Ordinal, p: Condition,
                            family: CSequenceFamily) -> tuple[Condition, IncompatibilityCertificate]:
    """Extend ``p`` in Q_mu to a condition incompatible with ``{beta: {otp(C_beta)}}``.

    Needs mu of countable class with limit points cofinal in mu, mu a limit
    point of C_beta, p in Q_mu compatible with that singleton and holding
    ``nu = otp(C_beta)`` in some value set.
    """
    w = walker_for(family)
    if family.cof_class(mu).value != "omega-class":
        raise PreconditionError(f"{mu} is not an omega-class limit")
    if family.is_tier_class(beta):
        raise PreconditionError(f"{beta} is tier-class")
    if not family.is_limit_point(mu, beta):
        raise PreconditionError(f"{mu} is not a limit point of C_{beta}")
    cm = family.cset(mu)
    if any(a >= mu for a in p.dom):
        raise PreconditionError("p is not in Q_mu")
    start = max(p.dom) if len(p) else ZERO
    alpha = cm.next_limit_point_above(start)
    if alpha is None:
        raise PreconditionError(f"limit points of C_{mu} are not cofinal above {start}")
    nu = family.cset(beta).otp()
    q = Condition({beta: [nu]})
    if not is_condition(p, Q_mu(mu), family):
        raise PreconditionError("p is not a condition of Q_mu")
    if not compatible(p, q, Q, family):
        raise PreconditionError("p is already incompatible with {(beta, {otp(C_beta)})}")
    holders = [x for x in p.dom if nu in p[x]]
    if not holders:
        raise PreconditionError(f"no value set of p contains otp(C_beta) = {nu}")
    xi = holders[0]
    pbar = p.with_entries({alpha: {x for x in p[xi] if x <= nu}})
    r = w.rho(alpha, beta)
    cert = IncompatibilityCertificate("rho_cap", alpha, beta, nu, r)
    return pbar, cert


# -- random generation ----------------------------------------------------------------

def random_values(rng: random.Random, pool: list[Ordinal], k: int) -> set:
    """Up to k values from ``pool`` with at most one per w-window."""
    vals: list[Ordinal] = []
    for x in rng.sample(pool, min(len(pool), k * 3)):
        if len(vals) >= k:
            break
        if not window_ok(vals + [x]):
            vals.append(x)
    return set(vals)


def random_condition(rng: random.Random, family: CSequenceFamily, variant: Variant,
                     dom_pool: list[Ordinal], val_pool: list[Ordinal],
                     max_points: int = 3, max_vals: int = 3, tries: int = 200) -> Condition:
    """A random valid condition, built by rejection sampling point by point."""
    pts = [a for a in dom_pool if variant.allows_point(a, family)]
    for _ in range(tries):
        n = rng.randint(1, max_points)
        entries: dict[Ordinal, set] = {}
        for a in rng.sample(pts, min(n, len(pts))):
            trial = dict(entries)
            trial[a] = random_values(rng, val_pool, rng.randint(1, max_vals))
            if is_condition(Condition(trial), variant, family):
                entries = trial
        if entries:
            return Condition(entries)
    raise RuntimeError("could not sample a valid condition")


def random_extension(p: Condition, rng: random.Random, family: CSequenceFamily, variant: Variant,
                     dom_pool: list[Ordinal], val_pool: list[Ordinal], steps: int = 4) -> Condition:
    """Random descent below p: add points or values, keeping only valid moves."""
    cur = p
    pts = [a for a in dom_pool if variant.allows_point(a, family)]
    for _ in range(steps * 4):
        if steps <= 0:
            break
        if rng.random() < 0.5 or not len(cur):
            a = rng.choice(pts)
        else:
            a = rng.choice(cur.dom)
        add = {rng.choice(val_pool)}
        if rng.random() < 0.4 and len(cur):
            # grow along an existing value set so shared prefixes appear
            src = cur[rng.choice(cur.dom)]
            if src:
                add = {x for x in src if x <= rng.choice(sorted(src))}
        r = cur.with_entries({a: add})
        closed = _union(r, EMPTY)
        forced_closure(closed)
        cand = Condition(closed)
        if cand != cur and is_condition(cand, variant, family):
            cur = cand
            steps -= 1
    return cur
