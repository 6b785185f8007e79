"""Property checks of the rho lemmas over a finite sweep of ordinals.

Quantifiers over "all ordinals" range over the swept universe. Quantifiers over
cofinal subsets of a limit ``alpha`` are approximated with the canonical
fundamental sequence ``alpha[n]``, read in two windows: a near window fixes a
candidate bound, a far window confirms the values have not outgrown it.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .csequences import CSequenceFamily
from .ordinals import OMEGA, ZERO, Ordinal, format_ordinal, fundamental, omega_power, ord_add, ord_mul, nat
from .walks import RhoTable, Walker, rho_table, walker_for

NEAR = range(4, 8)
FAR = range(40, 44)


@dataclass
class LemmaResult:
    name: str
    checked: int = 0
    violations: list[dict] = field(default_factory=list)
    violation_count: int = 0
    unresolved: list[dict] = field(default_factory=list)
    seconds: float = 0.0
    required_rate: Optional[float] = None
    note: str = ""

    def add(self, **info) -> None:
        self.violation_count += 1
        if len(self.violations) < 25:
            self.violations.append({k: _fmt(v) for k, v in info.items()})

    @property
    def resolved_rate(self) -> float:
        if not self.checked:
            return 1.0
        return 1.0 - len(self.unresolved) / self.checked

    @property
    def passed(self) -> bool:
        if self.violation_count:
            return False
        if self.required_rate is not None:
            return self.resolved_rate >= self.required_rate
        return True

    def to_dict(self) -> dict:
        d = {
            "lemma": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "violations": self.violation_count,
            "violation_samples": self.violations,
            "seconds": round(self.seconds, 3),
        }
        if self.required_rate is not None:
            d["resolved_rate"] = round(self.resolved_rate, 5)
            d["unresolved"] = len(self.unresolved)
            d["unresolved_samples"] = [{k: _fmt(v) for k, v in u.items()} for u in self.unresolved[:25]]
        if self.note:
            d["note"] = self.note
        return d


def _fmt(v):
    return format_ordinal(v) if isinstance(v, Ordinal) else v


class LemmaSuite:
    def __init__(self, family: CSequenceFamily, bound: Ordinal, cap: int = 4, depth: int = 0):
        self.family = family
        self.bound = bound
        self.walker: Walker = walker_for(family)
        self.table: RhoTable = rho_table(bound, family, cap, depth, walker=self.walker)
        self.U = self.table.ordinals
        self.index = {a: i for i, a in enumerate(self.U)}
        self.R, self.values = self.table.rank_matrix()
        # symmetric version for unordered-pair lookups
        self.S = np.maximum(self.R, self.R.T)

    def rho(self, a: Ordinal, b: Ordinal) -> Ordinal:
        return self.walker.rho(a, b)

    def _timed(self, name: str, fn: Callable[[LemmaResult], None], **kw) -> LemmaResult:
        res = LemmaResult(name, **kw)
        t0 = time.perf_counter()
        fn(res)
        res.seconds = time.perf_counter() - t0
        return res

    # -- individual lemmas --------------------------------------------------

    def coherence(self) -> LemmaResult:
        def run(res):
            fam, U, R = self.family, self.U, self.R
            for j, b in enumerate(U):
                for i in range(j):
                    a = U[i]
                    if not fam.is_limit_point(a, b):
                        continue
                    res.checked += i
                    bad = np.nonzero(R[:i, i] != R[:i, j])[0]
                    for k in bad:
                        res.add(xi=U[k], alpha=a, beta=b, rho_xi_alpha=self.rho(U[k], a), rho_xi_beta=self.rho(U[k], b))
        return self._timed("coherence", run)

    def cofinal_limit(self) -> LemmaResult:
        def run(res):
            U = self.U
            for i, a in enumerate(U):
                if not a.is_limit():
                    continue
                near = [fundamental(a, n) for n in NEAR]
                far = [fundamental(a, n) for n in FAR]
                for b in U[i + 1:]:
                    near_max = max(self.rho(x, b) for x in near)
                    far_max = max(self.rho(x, b) for x in far)
                    ceiling = ord_add(near_max.limit_part(), OMEGA)
                    if far_max <= near_max:
                        nu = near_max
                    elif far_max < ceiling:
                        # growth confined below the next multiple of w: that multiple bounds the tail
                        nu = ceiling
                    else:
                        continue
                    res.checked += 1
                    r = self.rho(a, b)
                    if r > nu:
                        res.add(alpha=a, beta=b, nu=nu, rho=r)
        return self._timed("cofinal_limit", run,
                           note="cofinal sets sampled as alpha[n], n in 4..7 and 40..43")

    def small_preimage(self) -> LemmaResult:
        """Search each {xi < alpha : rho(xi, alpha) <= nu} for an order-embedded Omega-grid.

        With ``Omega = w^k`` a grid is ``base + w^e1*n1 + ... + w^ek*nk`` (e1 > ... > ek),
        a copy of ``Omega`` under lexicographic order. It counts as a witness of
        otp >= Omega when its rho values over the box ``n_i < 4`` have maximum m
        and over the box ``n_i < 9`` stay below ``limit_part(m) + w``.
        """
        def run(res):
            fam = self.family
            om = fam.tier
            if om is None or not om[0][0].is_finite():
                res.note = "needs a tier Omega = w^k with finite k"
                return
            k = om[0][0].to_int()
            for a in self.U:
                if not a:
                    continue
                res.checked += 1
                w = self._grid_witness(a, k)
                if w is not None:
                    res.add(alpha=a, **w)
        return self._timed("small_preimage", run)

    def _grid_witness(self, a: Ordinal, k: int) -> Optional[dict]:
        lead = a.lead_exponent()
        if not lead.is_finite():
            return None
        top = lead.to_int()
        for exps in itertools.combinations(range(top, -1, -1), k):
            e1 = exps[0]
            step = omega_power(nat(e1 + 1))
            for base in self._bases(a, e1, step):
                small = self._grid_max(a, base, exps, 4)
                if small is None:
                    continue
                ceiling = ord_add(small.limit_part(), OMEGA)
                big = self._grid_max(a, base, exps, 9)
                if big is not None and big < ceiling:
                    return {"nu": ceiling, "base": base,
                            "grid": "+".join(f"w^{e}*n{i + 1}" for i, e in enumerate(exps)),
                            "max_rho_on_box": big}
        return None

    def _bases(self, a: Ordinal, e1: int, step: Ordinal):
        for b in self.U:
            if b >= a:
                break
            if any(e.is_finite() and e.to_int() <= e1 for e, _ in b):
                continue
            if ord_add(b, step) <= a:
                yield b

    def _grid_max(self, a, base, exps, size) -> Optional[Ordinal]:
        m = ZERO
        for ns in itertools.product(range(size), repeat=len(exps)):
            x = base
            for e, n in zip(exps, ns):
                if n:
                    x = ord_add(x, ord_mul(omega_power(nat(e)), nat(n)))
            if x >= a:
                return None
            r = self.rho(x, a)
            if r > m:
                m = r
        return m

    def subadditivity(self) -> LemmaResult:
        def run(res):
            R, U = self.R, self.U
            n = len(U)
            for j in range(n):
                A = R[:j + 1, j][:, None]          # rho(alpha, beta), alpha <= beta
                B = R[j, j:][None, :]              # rho(beta, gamma), beta <= gamma
                AC = R[:j + 1, j:]                 # rho(alpha, gamma)
                res.checked += A.size * B.size * 2
                bad1 = np.argwhere(AC > np.maximum(A, B))
                bad2 = np.argwhere(A > np.maximum(AC, B))
                for form, bad in (("first", bad1), ("second", bad2)):
                    for ia, ig in bad[:5]:
                        res.add(form=form, alpha=U[ia], beta=U[j], gamma=U[j + ig])
                    res.violation_count += max(0, len(bad) - min(5, len(bad)))
        return self._timed("subadditivity", run)

    def equality(self) -> LemmaResult:
        def run(res):
            R, U = self.R, self.U
            n = len(U)
            for j in range(1, n - 1):
                A = R[:j, j][:, None]
                B = R[j, j + 1:][None, :]
                AC = R[:j, j + 1:]
                hyp = B < np.maximum(A, AC)
                res.checked += int(hyp.sum())
                bad = np.argwhere(hyp & (AC != A))
                for ia, ig in bad[:5]:
                    res.add(alpha=U[ia], beta=U[j], gamma=U[j + 1 + ig])
                res.violation_count += max(0, len(bad) - min(5, len(bad)))
        return self._timed("equality", run)

    def limit_in_trace(self, max_m: int = 16) -> LemmaResult:
        """For limit beta < gamma find beta' = beta[m] with rho(., gamma) >= rho(., beta) on (beta', beta).

        Tested alphas: swept ordinals in (beta', beta) plus ``beta[n]`` and
        ``beta[n]+1`` for the next four n. Failure to find m <= max_m is reported
        as unresolved.
        """
        def run(res):
            U, R = self.U, self.R
            for j, b in enumerate(U):
                if not b.is_limit():
                    continue
                seq = [fundamental(b, m) for m in range(max_m + 5)]
                for g_i in range(j + 1, len(U)):
                    g = U[g_i]
                    res.checked += 1
                    bad = np.nonzero(R[:j, g_i] < R[:j, j])[0]
                    floor = U[bad[-1]] if len(bad) else None
                    witness = None
                    for m in range(max_m + 1):
                        if floor is not None and seq[m] < floor:
                            continue
                        extra = [x for n in range(m + 1, m + 5) for x in (seq[n], ord_add(seq[n], nat(1)))]
                        if all(self.rho(x, g) >= self.rho(x, b) for x in extra if x < b):
                            witness = seq[m]
                            break
                    if witness is None:
                        res.unresolved.append({"beta": b, "gamma": g})
        return self._timed("limit_in_trace", run, required_rate=0.99)

    def run_all(self) -> list[LemmaResult]:
        return [
            self.coherence(),
            self.cofinal_limit(),
            self.small_preimage(),
            self.subadditivity(),
            self.equality(),
            self.limit_in_trace(),
        ]


def run_lemma_suite(family: CSequenceFamily, bound: Ordinal, cap: int = 4, depth: int = 0) -> list[LemmaResult]:
    return LemmaSuite(family, bound, cap, depth).run_all()
