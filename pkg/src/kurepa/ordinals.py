"""Ordinals below epsilon_0 in Cantor normal form.

An ordinal is stored as a tuple of ``(exponent, coefficient)`` pairs with
strictly decreasing exponents, each exponent itself an :class:`Ordinal`.
Lexicographic tuple comparison on that layout coincides with the ordinal
order, so comparison and hashing run at native tuple speed.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Iterator


class OrdinalSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        super().__init__(f"{msg} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


class Ordinal(tuple):
    """Immutable CNF ordinal ``w^e1*c1 + ... + w^ek*ck``.

    Compare only against other Ordinals; ints must be wrapped with
    :func:`nat` first.
    """

    __slots__ = ()

    def __new__(cls, terms: Iterable[tuple["Ordinal", int]] = ()):
        return super().__new__(cls, terms)

    # -- structure ---------------------------------------------------------
    @property
    def terms(self) -> tuple:
        return tuple(self)

    def is_zero(self) -> bool:
        return not self

    def is_finite(self) -> bool:
        return not self or (len(self) == 1 and not self[0][0])

    def is_successor(self) -> bool:
        return bool(self) and not self[-1][0]

    def is_limit(self) -> bool:
        return bool(self) and bool(self[-1][0])

    def finite_part(self) -> int:
        return self[-1][1] if self and not self[-1][0] else 0

    def limit_part(self) -> "Ordinal":
        """Largest limit ordinal (or 0) that is <= self."""
        return Ordinal(self[:-1]) if self.is_successor() else self

    def to_int(self) -> int:
        if not self.is_finite():
            raise ValueError(f"{self} is not finite")
        return self.finite_part()

    def lead_exponent(self) -> "Ordinal":
        return self[0][0] if self else ZERO

    def pred(self) -> "Ordinal":
        if not self.is_successor():
            raise ValueError(f"{self} has no immediate predecessor")
        e, c = self[-1]
        return Ordinal(self[:-1] + (((e, c - 1),) if c > 1 else ()))

    def succ(self) -> "Ordinal":
        return ord_add(self, ONE)

    # -- arithmetic sugar ----------------------------------------------------
    def __add__(self, other):  # type: ignore[override]
        return ord_add(self, _coerce(other))

    def __radd__(self, other):
        return ord_add(_coerce(other), self)

    def __mul__(self, other):  # type: ignore[override]
        return ord_mul(self, _coerce(other))

    def __rmul__(self, other):
        return ord_mul(_coerce(other), self)

    def __str__(self) -> str:
        return format_ordinal(self)

    def __repr__(self) -> str:
        return f"Ordinal({format_ordinal(self)!r})"

    def __getnewargs__(self):
        return (tuple(self),)


def _coerce(x) -> Ordinal:
    if isinstance(x, Ordinal):
        return x
    if isinstance(x, int):
        return nat(x)
    if isinstance(x, str):
        return parse_ordinal(x)
    raise TypeError(f"cannot use {type(x).__name__} as an ordinal")


ZERO = Ordinal()


@lru_cache(maxsize=4096)
def nat(n: int) -> Ordinal:
    if n < 0:
        raise ValueError("ordinals are non-negative")
    return Ordinal(((ZERO, n),)) if n else ZERO


ONE = nat(1)


def omega_power(e: Ordinal | int) -> Ordinal:
    """w^e."""
    return Ordinal(((_coerce(e), 1),))


OMEGA = omega_power(ONE)


def ord_add(a: Ordinal, b: Ordinal) -> Ordinal:
    if not b:
        return a
    if not a:
        return b
    e0, c0 = b[0]
    head = []
    for e, c in a:
        if e > e0:
            head.append((e, c))
        elif e == e0:
            head.append((e, c + c0))
            return Ordinal(tuple(head) + tuple(b[1:]))
        else:
            break
    return Ordinal(tuple(head) + tuple(b))


def ord_sub(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique d with ``b + d == a`` (requires b <= a)."""
    if b > a:
        raise ValueError(f"{b} > {a}: left subtraction undefined")
    for i, (ta, tb) in enumerate(zip(a, b)):
        if ta == tb:
            continue
        (ea, ca), (eb, cb) = ta, tb
        if ea > eb:
            return Ordinal(a[i:])
        return Ordinal(((ea, ca - cb),) + tuple(a[i + 1:]))
    return Ordinal(a[len(b):])


def ord_mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if not a or not b:
        return ZERO
    lead_e, lead_c = a[0]
    out = ZERO
    for e, c in b:
        if e:
            piece = Ordinal(((ord_add(lead_e, e), c),))
        else:
            piece = Ordinal(((lead_e, lead_c * c),) + tuple(a[1:]))
        out = ord_add(out, piece)
    return out


def div_omega(a: Ordinal) -> Ordinal:
    """The g with ``a`` in ``[w*g, w*g + w)``."""
    out = []
    for e, c in a:
        if e:
            out.append((ord_sub(e, ONE), c))
    return Ordinal(out)


def is_power_of_omega(a: Ordinal) -> bool:
    return len(a) == 1 and a[0][1] == 1


def split_two_tier(a: Ordinal, omega_param: Ordinal) -> tuple[Ordinal, Ordinal]:
    """Write ``a = omega_param*q + r`` with ``r < omega_param``."""
    if not is_power_of_omega(omega_param):
        raise ValueError(f"{omega_param} is not a power of w")
    if a >= ord_mul(omega_param, omega_param):
        raise ValueError(f"{a} is not below {omega_param}*{omega_param}")
    k = omega_param[0][0]
    hi = [(ord_sub(e, k), c) for e, c in a if e >= k]
    lo = [(e, c) for e, c in a if e < k]
    return Ordinal(hi), Ordinal(lo)


def fundamental(a: Ordinal, n: int) -> Ordinal:
    """n-th term of the canonical fundamental sequence of a limit ordinal.

    With ``a = g + w^e``: ``g + w^d*n`` when ``e = d+1``, else ``g + w^(e[n])``.
    """
    if not a.is_limit():
        raise ValueError(f"{a} is not a limit ordinal")
    e, c = a[-1]
    g = Ordinal(a[:-1] + (((e, c - 1),) if c > 1 else ()))
    if e.is_successor():
        return ord_add(g, ord_mul(omega_power(e.pred()), nat(n)))
    return ord_add(g, omega_power(fundamental(e, n)))


# -- notation ----------------------------------------------------------------

def format_ordinal(a: Ordinal) -> str:
    if not a:
        return "0"
    parts = []
    for e, c in a:
        if not e:
            parts.append(str(c))
            continue
        if e == ONE:
            s = "w"
        else:
            s = "w^" + _format_exponent(e)
        if c > 1:
            s += f"*{c}"
        parts.append(s)
    return "+".join(parts)


def _format_exponent(e: Ordinal) -> str:
    if e.is_finite() or is_power_of_omega(e):
        return format_ordinal(e)
    return "(" + format_ordinal(e) + ")"


class _Parser:
    # expr  := term ("+" term)*
    # term  := "w" ("^" exp)? ("*" nat)? | nat
    # exp   := nat | "w" ("^" exp)? | "(" expr ")"
    def __init__(self, text: str):
        self.text = text
        self.s = text.replace("ω", "w")
        self.i = 0

    def error(self, msg: str):
        raise OrdinalSyntaxError(msg, self.text, self.i)

    def peek(self) -> str:
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1
        return self.s[self.i] if self.i < len(self.s) else ""

    def eat(self, ch: str) -> bool:
        if self.peek() == ch:
            self.i += 1
            return True
        return False

    def nat(self) -> int:
        self.peek()
        j = self.i
        while j < len(self.s) and self.s[j].isdigit():
            j += 1
        if j == self.i:
            self.error("expected a natural number")
        n = int(self.s[self.i:j])
        self.i = j
        return n

    def parse(self) -> Ordinal:
        if not self.peek():
            self.error("empty ordinal notation")
        out = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return out

    def expr(self) -> Ordinal:
        out = self.term()
        while self.eat("+"):
            out = ord_add(out, self.term())
        return out

    def term(self) -> Ordinal:
        ch = self.peek()
        if ch.isdigit():
            return nat(self.nat())
        if not self.eat("w"):
            self.error("expected 'w' or a natural number")
        e = self.exp() if self.eat("^") else ONE
        c = self.nat() if self.eat("*") else 1
        return Ordinal(((e, c),)) if c else ZERO

    def exp(self) -> Ordinal:
        ch = self.peek()
        if ch.isdigit():
            return nat(self.nat())
        if self.eat("("):
            e = self.expr()
            if not self.eat(")"):
                self.error("expected ')'")
            return e
        if self.eat("w"):
            return omega_power(self.exp()) if self.eat("^") else OMEGA
        self.error("expected an exponent")


@lru_cache(maxsize=65536)
def parse_ordinal(text: str) -> Ordinal:
    """Parse notation such as ``w^2*3+w+5``; non-CNF input is normalized."""
    return _Parser(text).parse()


# -- enumeration ---------------------------------------------------------------

class EnumerationCapExceeded(RuntimeError):
    pass


def sweep(bound: Ordinal, cap: int = 4, depth: int = 0, limit: int = 200_000) -> list[Ordinal]:
    """All CNF ordinals below ``bound`` with every coefficient <= ``cap``.

    Exponents are naturals <= ``cap``, plus (for ``depth > 0``) ordinals from a
    recursive sweep of depth ``depth - 1``. Sorted ascending.
    """
    if cap < 1:
        raise ValueError("cap must be positive")
    exps = {nat(i) for i in range(cap + 1)}
    if depth > 0:
        lead = bound.lead_exponent()
        exps |= set(sweep(ord_add(lead, ONE), cap, depth - 1, limit))
    exps = sorted((e for e in exps if omega_power(e) < bound or e == ZERO), reverse=True)
    out: list[Ordinal] = []

    def rec(i: int, prefix: tuple):
        if i == len(exps):
            a = Ordinal(prefix)
            if a < bound:
                out.append(a)
                if len(out) > limit:
                    raise EnumerationCapExceeded(f"more than {limit} ordinals below {bound}")
            return
        if Ordinal(prefix) >= bound:
            return
        for c in range(cap + 1):
            rec(i + 1, prefix + (((exps[i], c),) if c else ()))

    rec(0, ())
    out.sort()
    return out


def ordinals_between(lo: Ordinal, hi: Ordinal) -> Iterator[Ordinal]:
    """lo, lo+1, ... below hi; hi - lo must be finite."""
    span = ord_sub(hi, lo)
    if not span.is_finite():
        raise ValueError(f"[{lo}, {hi}) is infinite")
    for k in range(span.to_int()):
        yield ord_add(lo, nat(k))


def pairs_below(ordinals: list[Ordinal]) -> Iterator[tuple[Ordinal, Ordinal]]:
    return itertools.combinations(sorted(ordinals), 2)
