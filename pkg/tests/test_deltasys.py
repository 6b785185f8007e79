import itertools
import random

import pytest
from hypothesis import given, strategies as st

from kurepa.csequences import make_family
from kurepa.deltasys import (
    HEADER, HarnessConfig, cross_pair_ok, delta_system, is_sunflower, knaster_harness, rho_gap_refine,
)
from kurepa.ordinals import nat, sweep
from kurepa.posets import P, Q, Condition, compatible
from kurepa.walks import walker_for

from conftest import o

F3 = make_family("f3")


def best_sunflower_size(sets):
    """Exhaustive oracle: size of the largest sub-family with a common pairwise intersection."""
    fs = [frozenset(s) for s in sets]
    for k in range(len(fs), 0, -1):
        for sub in itertools.combinations(fs, k):
            if k == 1:
                return 1
            root = sub[0] & sub[1]
            if is_sunflower(sub, root):
                return k
    return 0


def test_examples():
    assert delta_system([{1, 2}] * 3) == (frozenset({1, 2}), [frozenset({1, 2})] * 3)
    root, sub = delta_system([{1}, {2}, {3}])
    assert root == frozenset() and len(sub) == 3
    root, sub = delta_system([{1, 2}, {1, 3}, {1, 4}, {2, 3}])
    assert root == frozenset({1})
    assert sub == [frozenset({1, 2}), frozenset({1, 3}), frozenset({1, 4})]


@given(st.lists(st.frozensets(st.integers(0, 6), min_size=1, max_size=3), min_size=1, max_size=7))
def test_output_is_sunflower_and_maximal(sets):
    root, sub = delta_system(sets)
    assert is_sunflower(sub, root) or len(sub) == 1
    assert all(s in sets for s in sub)
    assert len(sub) == best_sunflower_size(sets)


def test_refine_singleton():
    ref = rho_gap_refine([{o("w")}], nat(3), F3)
    assert len(ref) == 1


def test_refine_sample_passes_direct_checks():
    rng = random.Random(1)
    pool = [a for a in sweep(F3.bound, 3) if a.is_limit() or a > o("w^2")]
    root = {o("w^2+w")}
    doms = [root | set(rng.sample(pool, 2)) - root for _ in range(50)]
    doms = [d | root for d in doms]
    ref = rho_gap_refine(doms, nat(3), F3)
    assert len(ref) >= 2
    w = walker_for(F3)
    priv = [frozenset(d) - ref.root for d in ref.members]
    for a, b in itertools.combinations(priv, 2):
        for x in a:
            for y in b:
                r = w.rho_sym(x, y)
                assert r > nat(3)
                assert all(r >= min(w.rho_sym(g, x), w.rho_sym(g, y)) for g in ref.root)


def test_refine_all_small_rho_gives_one():
    # finite points pairwise have rho 0, never above the gap
    doms = [{nat(k)} for k in range(1, 12)]
    assert all(cross_pair_ok(nat(1), nat(k), [], nat(3), F3) == "gap" for k in range(2, 12))
    assert len(rho_gap_refine(doms, nat(3), F3)) == 1


def test_harness_two_identical():
    p = Condition({o("w"): [nat(1)]})
    assert compatible(p, p, Q, F3)
    rep = knaster_harness(2, 0, Q, F3)
    assert rep.header == HEADER and rep.pairs_checked <= 1


@pytest.mark.parametrize("variant", [Q, P])
def test_harness_small_run(variant):
    rep = knaster_harness(200, 42, variant, F3)
    assert rep.refined_size >= 2 and not rep.incompatible and not rep.amalgamation_failures
    assert rep.ok and "PASS" in rep.summary()


def test_harness_deterministic():
    a = knaster_harness(120, 9, Q, F3).to_dict()
    b = knaster_harness(120, 9, Q, F3).to_dict()
    a.pop("seconds"), b.pop("seconds")
    assert a == b


def test_harness_rejects_tiny_n():
    with pytest.raises(ValueError):
        knaster_harness(1, 0, Q, F3)
