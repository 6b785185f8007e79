import itertools

import pytest
from hypothesis import given, strategies as st

from kurepa.ordinals import (
    ONE, OMEGA, ZERO, Ordinal, OrdinalSyntaxError, div_omega, format_ordinal, fundamental, nat,
    omega_power, ord_add, ord_mul, ord_sub, parse_ordinal, split_two_tier, sweep,
)

from conftest import o

# ordinals below w^5 built from small CNF terms
terms = st.lists(st.tuples(st.integers(0, 4), st.integers(1, 5)), max_size=4)


@st.composite
def ordinals(draw):
    ts = draw(terms)
    out = {}
    for e, c in ts:
        out[e] = c
    return Ordinal(tuple((nat(e), c) for e, c in sorted(out.items(), reverse=True)))


def pair_add(a, b):
    """Textbook sum for ordinals below w^2 written as (m, n) = w*m + n."""
    (m1, n1), (m2, n2) = a, b
    return (m1 + m2, n2) if m2 else (m1, n1 + n2)


def to_pair(a: Ordinal):
    d = dict(a)
    return d.get(ONE, 0), d.get(ZERO, 0)


@pytest.mark.parametrize("a,b,expected", [
    ("w^2+w", "w*5", "w^2+w*6"),
    ("3", "w", "w"),
    ("w", "3", "w+3"),
    ("w^2+5", "w^2", "w^2*2"),
    ("w^3+w", "w^2+1", "w^3+w^2+1"),
])
def test_addition_examples(a, b, expected):
    assert ord_add(o(a), o(b)) == o(expected)


@pytest.mark.parametrize("a,b,expected", [
    ("w", "2", "w*2"),
    ("2", "w", "w"),
    ("w+1", "w", "w^2"),
    ("w+1", "2", "w*2+1"),
    ("w^2", "w^2", "w^4"),
])
def test_multiplication_examples(a, b, expected):
    assert ord_mul(o(a), o(b)) == o(expected)


def test_addition_matches_pair_oracle():
    small = [Ordinal(((ONE, m),) if m else ()) + nat(n) for m in range(5) for n in range(5)]
    for a, b in itertools.product(small, repeat=2):
        assert to_pair(ord_add(a, b)) == pair_add(to_pair(a), to_pair(b))


@pytest.mark.parametrize("text", ["0", "7", "w", "w^w", "w^(w+1)*3+w^2+4", "w^w^2", "w^3*2+w*5+1"])
def test_notation_roundtrip(text):
    assert format_ordinal(parse_ordinal(text)) == text


@pytest.mark.parametrize("bad", ["", "w^", "x", "w+", "(w", "w**2"])
def test_bad_notation(bad):
    with pytest.raises(OrdinalSyntaxError):
        parse_ordinal(bad)


@given(ordinals())
def test_format_parse_roundtrip(a):
    assert parse_ordinal(format_ordinal(a)) == a


@given(ordinals(), ordinals(), ordinals())
def test_addition_associative(a, b, c):
    assert ord_add(ord_add(a, b), c) == ord_add(a, ord_add(b, c))


@given(ordinals(), ordinals(), ordinals())
def test_multiplication_left_distributes(a, b, c):
    assert ord_mul(a, ord_add(b, c)) == ord_add(ord_mul(a, b), ord_mul(a, c))


@given(ordinals(), ordinals())
def test_subtraction_inverts_addition(a, b):
    assert ord_sub(ord_add(a, b), a) == b


@given(ordinals(), ordinals(), ordinals())
def test_addition_strictly_monotone_on_right(a, b, c):
    if b < c:
        assert ord_add(a, b) < ord_add(a, c)


@given(ordinals())
def test_div_omega_brackets(a):
    g = div_omega(a)
    base = ord_mul(OMEGA, g)
    assert base <= a < ord_add(base, OMEGA)


@given(ordinals())
def test_split_two_tier(a):
    om = omega_power(3)
    if a >= ord_mul(om, om):
        return
    q, r = split_two_tier(a, om)
    assert r < om and ord_add(ord_mul(om, q), r) == a


@pytest.mark.parametrize("a", ["w", "w*3", "w^2", "w^3+w^2", "w^w", "w^(w+2)"])
def test_fundamental_sequence_cofinal(a):
    a = o(a)
    seq = [fundamental(a, n) for n in range(1, 40)]
    assert all(x < y for x, y in zip(seq, seq[1:]))
    assert all(x < a for x in seq)
    below = [x for x in sweep(a, 3) if x < a][-20:]
    for x in below:
        assert any(s > x for s in seq)


def test_sweep_counts():
    assert len(sweep(o("w^4"), 4)) == 5 ** 4
    assert sweep(o("w*2"), 2) == [nat(0), nat(1), nat(2), OMEGA, OMEGA + 1, OMEGA + 2]
    s = sweep(o("w^w"), 2, depth=1)
    assert all(x < o("w^w") for x in s) and s == sorted(s)


def test_ordering_is_cnf_ordering():
    xs = [o(t) for t in ["0", "1", "5", "w", "w+1", "w*2", "w^2", "w^2+w*9", "w^3", "w^w"]]
    assert sorted(reversed(xs)) == xs
