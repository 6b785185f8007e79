"""C-sequence families: a club ``C_alpha`` for each ordinal below a bound.

Each ``C_alpha`` is a :class:`CSet` answering the handful of queries the walk
recursion needs without materializing infinite sets. Built-in families:

* ``F1`` -- canonical fundamental sequences (every limit gets a type-w set);
* ``F2`` -- full intervals ``C_alpha = (0, alpha)``;
* ``F3`` -- the two-tier coherent family with tier parameter ``Omega``.

Every family uses ``C_{a+1} = {a}`` and ``C_0 = {}``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterator, Mapping, Optional

from .ordinals import (
    OMEGA,
    ONE,
    ZERO,
    Ordinal,
    format_ordinal,
    fundamental,
    is_power_of_omega,
    nat,
    ord_add,
    ord_mul,
    ord_sub,
    parse_ordinal,
    split_two_tier,
    sweep,
)


class FamilyError(ValueError):
    """A query fell outside the family or hit a malformed C-set."""


# -- C-set shapes --------------------------------------------------------------

class CSet:
    """Query interface for one ``C_beta``; ``sup`` is the ordinal it lives in."""

    sup: Ordinal

    def contains(self, x: Ordinal) -> bool:
        raise NotImplementedError

    def min_above(self, a: Ordinal) -> Optional[Ordinal]:
        """Least element >= a, or None."""
        raise NotImplementedError

    def otp_below(self, a: Ordinal) -> Ordinal:
        raise NotImplementedError

    def otp(self) -> Ordinal:
        raise NotImplementedError

    def max_limit_point_le(self, a: Ordinal) -> Optional[Ordinal]:
        """Largest limit point of the set that is <= a."""
        raise NotImplementedError

    def next_limit_point_above(self, x: Ordinal) -> Optional[Ordinal]:
        """Least limit point of the set (below ``sup``) strictly above x."""
        raise NotImplementedError

    def between(self, lo: Ordinal, hi: Ordinal) -> list[Ordinal]:
        """Elements in ``[lo, hi)`` in increasing order; must be finite."""
        raise NotImplementedError

    def max_below(self, a: Ordinal) -> Optional[Ordinal]:
        """max(C ∩ a) when it exists."""
        raise NotImplementedError

    def is_closed(self) -> bool:
        raise NotImplementedError

    def is_cofinal_in(self, a: Ordinal) -> bool:
        raise NotImplementedError

    def restrict(self, a: Ordinal) -> "CSet":
        """C ∩ a (a must be a limit point, or a finite cut)."""
        raise NotImplementedError

    def sample(self, limit: int = 8) -> list[Ordinal]:
        raise NotImplementedError


@dataclass(frozen=True)
class Finite(CSet):
    elems: tuple[Ordinal, ...]
    sup: Ordinal = ZERO

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(sorted(set(self.elems))))

    def contains(self, x):
        return x in self.elems

    def min_above(self, a):
        for x in self.elems:
            if x >= a:
                return x
        return None

    def otp_below(self, a):
        return nat(sum(1 for x in self.elems if x < a))

    def otp(self):
        return nat(len(self.elems))

    def max_limit_point_le(self, a):
        return None

    def next_limit_point_above(self, x):
        return None

    def between(self, lo, hi):
        return [x for x in self.elems if lo <= x < hi]

    def max_below(self, a):
        below = [x for x in self.elems if x < a]
        return below[-1] if below else None

    def is_closed(self):
        return True

    def is_cofinal_in(self, a):
        if not a:
            return not self.elems
        if a.is_successor():
            return bool(self.elems) and self.elems[-1] == a.pred()
        return False

    def restrict(self, a):
        return Finite(tuple(x for x in self.elems if x < a), a)

    def sample(self, limit=8):
        return list(self.elems[:limit])


@dataclass(frozen=True)
class Interval(CSet):
    """The open interval ``(lo, sup)`` of ordinals."""

    lo: Ordinal
    sup: Ordinal

    def _start(self) -> Ordinal:
        return ord_add(self.lo, ONE)

    def contains(self, x):
        return self.lo < x < self.sup

    def min_above(self, a):
        x = max(a, self._start())
        return x if x < self.sup else None

    def otp_below(self, a):
        a = min(a, self.sup)
        s = self._start()
        return ord_sub(a, s) if a > s else ZERO

    def otp(self):
        return self.otp_below(self.sup)

    def max_limit_point_le(self, a):
        lim = min(a, self.sup).limit_part() if a < self.sup else None
        if lim is None:
            return None
        return lim if lim > self.lo and lim.is_limit() else None

    def next_limit_point_above(self, x):
        y = ord_add(max(x, self.lo).limit_part(), OMEGA)
        return y if y < self.sup else None

    def between(self, lo, hi):
        lo = max(lo, self._start())
        hi = min(hi, self.sup)
        if lo >= hi:
            return []
        span = ord_sub(hi, lo)
        if not span.is_finite():
            raise FamilyError(f"C-set segment [{lo}, {hi}) is infinite")
        return [ord_add(lo, nat(k)) for k in range(span.to_int())]

    def max_below(self, a):
        a = min(a, self.sup)
        if a <= self._start():
            return None
        return a.pred() if a.is_successor() else None

    def is_closed(self):
        return True

    def is_cofinal_in(self, a):
        return self.sup == a and self.lo < a

    def restrict(self, a):
        return _normal(Interval(self.lo, min(a, self.sup)))

    def sample(self, limit=8):
        out, x = [], self._start()
        while x < self.sup and len(out) < limit:
            out.append(x)
            x = ord_add(x, ONE)
        return out


@dataclass(frozen=True)
class OmegaSeq(CSet):
    """A strictly increasing sequence ``term(0) < term(1) < ...`` with supremum ``sup``."""

    term: Callable[[int], Ordinal] = field(compare=False)
    sup: Ordinal
    key: str = ""

    def _index(self, a: Ordinal) -> Optional[int]:
        """Least n with term(n) >= a (None if a >= sup)."""
        if a >= self.sup:
            return None
        if self.term(0) >= a:
            return 0
        lo, hi = 0, 1
        while self.term(hi) < a:
            lo, hi = hi, hi * 2
            if hi > 1 << 40:
                raise FamilyError(f"sequence for {self.sup} does not pass {a}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.term(mid) < a:
                lo = mid
            else:
                hi = mid
        return hi

    def contains(self, x):
        n = self._index(x)
        return n is not None and self.term(n) == x

    def min_above(self, a):
        n = self._index(a)
        return None if n is None else self.term(n)

    def otp_below(self, a):
        n = self._index(a)
        return OMEGA if n is None else nat(n)

    def otp(self):
        return OMEGA

    def max_limit_point_le(self, a):
        return None

    def next_limit_point_above(self, x):
        return None

    def between(self, lo, hi):
        if hi >= self.sup:
            raise FamilyError(f"C-set segment [{lo}, {hi}) is infinite")
        i, j = self._index(lo), self._index(hi)
        return [self.term(n) for n in range(i, j)]

    def max_below(self, a):
        if a >= self.sup:
            return None
        n = self._index(a)
        return self.term(n - 1) if n else None

    def is_closed(self):
        return True

    def is_cofinal_in(self, a):
        return self.sup == a

    def restrict(self, a):
        if a >= self.sup:
            return self
        return Finite(tuple(self.between(ZERO, a)), a)

    def sample(self, limit=8):
        return [self.term(n) for n in range(limit)]

    def __eq__(self, other):
        if not isinstance(other, OmegaSeq):
            return NotImplemented
        return self.sup == other.sup and self.sample(16) == other.sample(16)

    def __hash__(self):
        return hash((self.sup, tuple(self.sample(4))))


def _normal(c: CSet) -> CSet:
    """Canonical shape so equal sets compare equal."""
    if isinstance(c, Interval):
        if c.sup <= c.lo:
            return Finite((), c.sup)
        span = ord_sub(c.sup, c.lo)
        if span.is_finite():
            return Finite(tuple(c.between(ZERO, c.sup)), c.sup)
    if isinstance(c, Finite):
        return Finite(c.elems, ZERO)
    return c


def same_set(a: CSet, b: CSet) -> bool:
    return _normal(a) == _normal(b)


# -- families ------------------------------------------------------------------

class CofinalityClass(enum.Enum):
    ZERO = "zero"
    SUCCESSOR = "successor"
    OMEGA = "omega-class"
    TIER = "tier-class"


class CSequenceFamily:
    """Base class: subclasses implement :meth:`_limit_cset` for limit ordinals."""

    name = "family"

    def __init__(self, bound: Ordinal, tier: Optional[Ordinal] = None):
        self.bound = bound
        self.tier = tier
        self._cache: dict[Ordinal, CSet] = {}

    def __repr__(self):
        tier = f", tier={self.tier}" if self.tier is not None else ""
        return f"{type(self).__name__}(bound={self.bound}{tier})"

    def check(self, *xs: Ordinal) -> None:
        for x in xs:
            if not isinstance(x, Ordinal):
                raise TypeError(f"expected Ordinal, got {type(x).__name__}")
            if x >= self.bound:
                raise FamilyError(f"{x} is outside the family bound {self.bound}")

    def cset(self, beta: Ordinal) -> CSet:
        c = self._cache.get(beta)
        if c is None:
            self.check(beta)
            if not beta:
                c = Finite((), ZERO)
            elif beta.is_successor():
                c = Finite((beta.pred(),), beta)
            else:
                c = self._limit_cset(beta)
            self._cache[beta] = c
        return c

    def _limit_cset(self, beta: Ordinal) -> CSet:
        raise NotImplementedError

    def cof_class(self, a: Ordinal) -> CofinalityClass:
        if not a:
            return CofinalityClass.ZERO
        if a.is_successor():
            return CofinalityClass.SUCCESSOR
        if self.tier is not None and self.cset(a).otp() == self.tier:
            return CofinalityClass.TIER
        return CofinalityClass.OMEGA

    def is_tier_class(self, a: Ordinal) -> bool:
        return self.cof_class(a) is CofinalityClass.TIER

    def is_limit_point(self, a: Ordinal, beta: Ordinal) -> bool:
        """a ∈ lim(C_beta)."""
        if not a.is_limit() or a >= beta:
            return False
        c = self.cset(beta)
        lp = c.max_limit_point_le(a)
        return lp == a

    def describe(self) -> dict:
        d = {"family": self.name, "bound": format_ordinal(self.bound)}
        if self.tier is not None:
            d["omega"] = format_ordinal(self.tier)
        return d


class FundamentalFamily(CSequenceFamily):
    """F1: ``C_alpha`` is the canonical fundamental sequence of alpha."""

    name = "f1"

    def _limit_cset(self, beta):
        return OmegaSeq(lambda n, b=beta: fundamental(b, n), beta, key=f"fund:{beta}")


class IntervalFamily(CSequenceFamily):
    """F2: ``C_alpha = (0, alpha)``; coherent but with ``otp(C_alpha) = alpha``."""

    name = "f2"

    def _limit_cset(self, beta):
        return Interval(ZERO, beta)


class TwoTierFamily(CSequenceFamily):
    """F3: the two-tier coherent family below ``Omega*Omega``.

    For ``alpha = Omega*q + r``:

    * ``0 < r < Omega`` limit: ``C_alpha = (Omega*q, alpha)``, type ``r``;
    * ``r = 0``, q successor: ``C_alpha = (Omega*(q-1), alpha)``, type ``Omega``;
    * ``r = 0``, q limit: ``C_alpha = {Omega*q[n] + 1 : n}``, type ``w``.
    """

    name = "f3"

    def __init__(self, omega_param: Ordinal, bound: Optional[Ordinal] = None):
        if not is_power_of_omega(omega_param) or omega_param.is_finite():
            raise ValueError(f"tier parameter {omega_param} must be an infinite power of w")
        top = ord_mul(omega_param, omega_param)
        if bound is not None and bound > top:
            raise ValueError(f"bound {bound} exceeds Omega*Omega = {top}")
        super().__init__(bound if bound is not None else top, omega_param)
        self.omega = omega_param

    def _limit_cset(self, beta):
        om = self.omega
        q, r = split_two_tier(beta, om)
        base = ord_mul(om, q)
        if r:
            return Interval(base, beta)
        if q.is_successor():
            return Interval(ord_mul(om, q.pred()), beta)
        return OmegaSeq(lambda n, q=q: ord_add(ord_mul(om, fundamental(q, n)), ONE), beta,
                        key=f"tier:{beta}")


class OverrideFamily(CSequenceFamily):
    """A base family with some ``C_alpha`` replaced (experiments, fault injection)."""

    def __init__(self, base: CSequenceFamily, overrides: Mapping[Ordinal, CSet], name: str = "override"):
        super().__init__(base.bound, base.tier)
        self.base = base
        self.overrides = dict(overrides)
        self.name = name

    def cset(self, beta):
        if beta in self.overrides:
            self.check(beta)
            return self.overrides[beta]
        return self.base.cset(beta)


class ExplicitFamily(CSequenceFamily):
    """Only explicitly listed finite C-sets; unlisted limits have empty C."""

    name = "explicit"

    def __init__(self, sets: Mapping[Ordinal, tuple[Ordinal, ...]], bound: Ordinal,
                 tier: Optional[Ordinal] = None):
        super().__init__(bound, tier)
        self.sets = {k: Finite(tuple(v), k) for k, v in sets.items()}

    def cset(self, beta):
        if beta in self.sets:
            self.check(beta)
            return self.sets[beta]
        return super().cset(beta)

    def _limit_cset(self, beta):
        return Finite((), beta)


def make_family(name: str, omega: Optional[Ordinal] = None, bound: Optional[Ordinal] = None) -> CSequenceFamily:
    name = name.lower()
    if name == "f1":
        return FundamentalFamily(bound if bound is not None else parse_ordinal("w^w"))
    if name == "f2":
        return IntervalFamily(bound if bound is not None else parse_ordinal("w^w"))
    if name == "f3":
        return TwoTierFamily(omega if omega is not None else parse_ordinal("w^2"), bound)
    raise ValueError(f"unknown family {name!r} (expected f1, f2 or f3)")


_LINE = re.compile(r"^\s*([^:#]+?)\s*:\s*(.*?)\s*$")


def load_family(path: str | Path) -> CSequenceFamily:
    """Read a family file.

    Lines are ``KEY: v1, v2, ...`` giving an explicit finite ``C_KEY``. Optional
    header lines ``base f3 w^2`` (a built-in to fall back on) and ``bound ORD``.
    ``#`` starts a comment.
    """
    sets: dict[Ordinal, tuple[Ordinal, ...]] = {}
    base: Optional[CSequenceFamily] = None
    bound: Optional[Ordinal] = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "base":
            omega = parse_ordinal(words[2]) if len(words) > 2 else None
            base = make_family(words[1], omega)
            continue
        if words[0] == "bound":
            bound = parse_ordinal(words[1])
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"{path}:{lineno}: expected 'KEY: values'")
        key = parse_ordinal(m.group(1))
        vals = tuple(parse_ordinal(v) for v in m.group(2).split(",") if v.strip())
        sets[key] = vals
    if base is not None:
        fam = OverrideFamily(base, {k: Finite(v, k) for k, v in sets.items()}, name=f"file:{Path(path).name}")
        if bound is not None:
            fam.bound = min(bound, base.bound)
        return fam
    if bound is None:
        bound = ord_add(max(sets, default=ZERO), ONE)
    return ExplicitFamily(sets, bound)


# -- the five queries ----------------------------------------------------------

def c_min_above(beta: Ordinal, alpha: Ordinal, family: CSequenceFamily) -> Ordinal:
    """min(C_beta \\ alpha)."""
    family.check(alpha, beta)
    if alpha >= beta:
        raise ValueError(f"need alpha < beta, got {alpha} >= {beta}")
    x = family.cset(beta).min_above(alpha)
    if x is None:
        raise FamilyError(f"C_{beta} has no element >= {alpha}; not cofinal")
    return x


def c_otp_below(beta: Ordinal, alpha: Ordinal, family: CSequenceFamily) -> Ordinal:
    family.check(alpha, beta)
    return family.cset(beta).otp_below(alpha)


def c_lambda(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> Ordinal:
    """Largest limit point of C_beta ∩ (alpha+1), or 0 if there is none."""
    family.check(alpha, beta)
    lp = family.cset(beta).max_limit_point_le(alpha)
    return ZERO if lp is None else lp


def c_segment(alpha: Ordinal, beta: Ordinal, family: CSequenceFamily) -> list[Ordinal]:
    """C_beta ∩ [Lambda(alpha, beta), alpha), increasing."""
    lam = c_lambda(alpha, beta, family)
    return family.cset(beta).between(lam, alpha)


# -- validation ----------------------------------------------------------------

@dataclass
class Violation:
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
class FamilyReport:
    family: dict
    sample_bound: Ordinal
    checked_limits: int = 0
    checked_coherence_pairs: int = 0
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def clauses(self) -> set[str]:
        return {v.clause for v in self.violations}

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "sample_bound": format_ordinal(self.sample_bound),
            "checked_limits": self.checked_limits,
            "checked_coherence_pairs": self.checked_coherence_pairs,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
        }


CLAUSES = ("club", "otp_bound", "element_class", "coherence")


def validate_family(family: CSequenceFamily, sample_bound: Ordinal, cap: int = 4,
                    depth: int = 0) -> FamilyReport:
    """Check the four square-sequence clauses on every swept limit below ``sample_bound``.

    * club: C_alpha closed and cofinal in alpha;
    * otp_bound: with a tier ``Omega``, otp(C_alpha) <= Omega and < Omega off
      the tier class; without one, otp(C_alpha) < alpha for alpha > w
      (every club in w has type w);
    * element_class: no element of C_alpha is tier-class;
    * coherence: C_beta ∩ alpha = C_alpha for every alpha ∈ lim(C_beta).

    Infinite quantifiers range over the swept ordinals.
    """
    if sample_bound > family.bound:
        raise ValueError(f"sample bound {sample_bound} exceeds family bound {family.bound}")
    universe = sweep(sample_bound, cap, depth)
    limits = [a for a in universe if a.is_limit()]
    rep = FamilyReport(family.describe(), sample_bound)
    tier = family.tier
    for a in limits:
        rep.checked_limits += 1
        c = family.cset(a)
        if not (c.is_closed() and c.is_cofinal_in(a)):
            rep.violations.append(Violation("club", a, detail="C_alpha is not club in alpha"))
        o = c.otp()
        if tier is not None:
            if o > tier:
                rep.violations.append(Violation("otp_bound", a, detail=f"otp {o} > {tier}"))
        elif a > OMEGA and not o < a:
            rep.violations.append(Violation("otp_bound", a, detail=f"otp(C_alpha) = {o} is not < alpha"))
        if tier is not None:
            for x in universe:
                if x >= a:
                    break
                if c.contains(x) and family.is_tier_class(x):
                    rep.violations.append(Violation("element_class", a, detail=f"{x} ∈ C_alpha is tier-class"))
    for b in limits:
        cb = family.cset(b)
        for a in limits:
            if a >= b:
                break
            if cb.max_limit_point_le(a) != a:
                continue
            rep.checked_coherence_pairs += 1
            if not same_set(cb.restrict(a), family.cset(a)):
                rep.violations.append(Violation("coherence", a, b, "C_beta ∩ alpha != C_alpha"))
    return rep
