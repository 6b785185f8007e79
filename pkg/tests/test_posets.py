import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from kurepa.csequences import make_family
from kurepa.ordinals import ZERO, nat, sweep
from kurepa.posets import (
    EMPTY, AmalgamationError, Condition, P, PreconditionError, Q, Q_A, Q_c, Q_mu,
    amalgamate_delta_pair, compatible, compatible_bruteforce, extends, is_condition,
    local_universe, project_below, project_to_countable, random_condition, random_extension,
    suborder_counterexample, validate_condition, verify_certificate,
)
from kurepa.walks import rho

from conftest import o

F1 = make_family("f1")
F3 = make_family("f3")
DOM = [a for a in sweep(F3.bound, 3) if a]
VALS = [o(v) for v in ("0", "1", "2", "w", "w+1", "w*2", "w*2+3", "w*3", "w*4+1")]


def C(d):
    return Condition.parse(d)


# -- validity --------------------------------------------------------------------

def test_single_entry_valid_everywhere():
    p = C({"w": ["5"]})
    assert is_condition(p, Q, F1) and is_condition(p, P, F1)


def test_window_violation():
    rep = validate_condition(C({"w": ["3", "5"]}), Q, F1)
    assert rep.clauses() == {"window"}


def test_rho_cap_violation_f1():
    rep = validate_condition(C({"w": ["4"], "w*2": ["4"]}), Q, F1)
    assert rep.clauses() == {"rho_cap"}
    assert is_condition(C({"w": ["4"], "w*2": ["7"]}), Q, F1)


def test_p_is_stricter_than_q():
    # rho(1, w) = 1 in F1: shared max 1 is allowed in Q, not in P
    p = C({"1": ["1"], "w": ["1"]})
    assert rho(nat(1), o("w"), F1) == nat(1)
    assert is_condition(p, Q, F1) and not is_condition(p, P, F1)


def test_initial_segment_clause():
    p = C({"w": ["1", "w+2"], "w*2": ["w+2"]})
    assert "initial_segment" in validate_condition(p, Q, F3).clauses()


def test_domain_restrictions():
    tier_pt = C({"w^2": ["1"]})
    assert not is_condition(tier_pt, Q_c, F3)
    assert is_condition(tier_pt, Q, F3)
    assert not is_condition(C({"w^2+1": ["1"]}), Q_mu(o("w^2")), F3)
    assert not is_condition(C({"w": ["1"]}), Q_A(lambda a: a.is_finite()), F3)
    assert "value_range" in validate_condition(C({"w": ["w^2"]}), Q, F3).clauses()


def test_extends_examples():
    p = C({"w": ["4", "w*3"]})
    assert extends(p, p)
    assert extends(p, C({"w": ["4"]}))
    assert not extends(C({"w*2": ["4"]}), C({"w": ["4"]}))


def test_json_roundtrip():
    p = C({"w*2": ["4", "w+3"], "5": ["0"]})
    text = json.dumps(p.to_json())
    assert json.loads(text) == {"entries": [{"dom": "5", "vals": ["0"]}, {"dom": "w*2", "vals": ["4", "w+3"]}]}
    assert Condition.from_json(text) == p
    with pytest.raises(ValueError):
        Condition.from_json({"entries": [{"dom": "1", "vals": []}, {"dom": "1", "vals": ["2"]}]})


# -- compatibility -----------------------------------------------------------------

def test_compatible_examples():
    p = C({"w": ["4", "w*3"]})
    assert compatible(p, p, Q, F1)
    res = compatible(p, C({"w": ["4"]}), Q, F1)
    assert res and res.witness == p
    a, b = C({"1": ["0"]}), C({"w": ["5"]})
    assert compatible(a, b, Q, F1).witness == C({"1": ["0"], "w": ["5"]})


def test_incompatible_example_certificate():
    p, q = C({"w": ["4"]}), C({"w*2": ["4"]})
    res = compatible(p, q, Q, F1)
    assert not res
    cert = res.certificate
    assert cert.clause == "rho_cap" and cert.shared_value == nat(4) and cert.rho_at_pair == ZERO
    assert verify_certificate(cert, p, q, Q, F1)
    assert compatible_bruteforce(p, q, Q, F1) is None


def test_forced_value_certificate():
    # 1 is forced into w*2 through the shared 3 at w, then caps fail
    p = C({"w": ["1", "w+3"]})
    q = C({"w*2": ["w+3"]})
    res = compatible(p, q, Q, F3)
    if not res:
        assert verify_certificate(res.certificate, p, q, Q, F3)
    assert bool(res) == (compatible_bruteforce(p, q, Q, F3) is not None)


@settings(max_examples=150)
@given(st.integers(0, 10**9), st.sampled_from([Q, P]))
def test_compatible_agrees_with_bruteforce(seed, variant):
    rng = random.Random(seed)
    p = random_condition(rng, F3, variant, DOM, VALS)
    q = random_condition(rng, F3, variant, DOM, VALS)
    res = compatible(p, q, variant, F3)
    brute = compatible_bruteforce(p, q, variant, F3)
    assert bool(res) == (brute is not None)
    if res:
        w = res.witness
        assert is_condition(w, variant, F3) and extends(w, p) and extends(w, q)
    else:
        assert verify_certificate(res.certificate, p, q, variant, F3)


@given(st.integers(0, 10**9))
def test_p_condition_is_q_condition(seed):
    rng = random.Random(seed)
    p = random_condition(rng, F3, P, DOM, VALS)
    assert is_condition(p, Q, F3)


@given(st.integers(0, 10**9))
def test_random_extension_descends(seed):
    rng = random.Random(seed)
    p = random_condition(rng, F3, Q, DOM, VALS)
    r = random_extension(p, rng, F3, Q, DOM, VALS, 3)
    assert extends(r, p) and is_condition(r, Q, F3)


def test_tampered_certificate_rejected():
    p, q = C({"w": ["4"]}), C({"w*2": ["4"]})
    cert = compatible(p, q, Q, F1).certificate
    cert.rho_at_pair = nat(9)
    assert not verify_certificate(cert, p, q, Q, F1)


# -- amalgamation ----------------------------------------------------------------------

def test_amalgamate_disjoint():
    p, q = C({"1": ["0"]}), C({"w": ["w*2"]})
    assert amalgamate_delta_pair(p, q, [], F3) == C({"1": ["0"], "w": ["w*2"]})


def test_amalgamate_rejects_gap_failure():
    # private points 1 and 2 have rho 0, not above the shared value 1
    p = C({"w^2+w": ["1"], "1": ["1", "w*3"]})
    q = C({"w^2+w": ["1"], "2": ["1", "w*4+1"]})
    with pytest.raises(AmalgamationError):
        amalgamate_delta_pair(p, q, [o("w^2+w")], F3)


def test_amalgamate_harness_pair():
    from kurepa.deltasys import knaster_harness
    rep = knaster_harness(400, 42, Q, F3)
    assert rep.amalgamated >= 1 and not rep.amalgamation_failures


# -- projections ---------------------------------------------------------------------------

def test_projection_identity_without_tier_points():
    q = C({"w": ["1"], "w^2+w": ["2"]})
    pr = project_to_countable(q, F3)
    assert pr.projected == q and pr.moved == {}
    pb, search = project_below(q, o("w^3"), F3, sweep(F3.bound, 4))
    assert pb.projected == q and search is None


def _scan_countable(b, vals, above):
    """Least limit point x of C_b with otp(C_x) > max(vals) and matching rho to points above."""
    cb = F3.cset(b)
    for x in sweep(b, 6):
        if not (x.is_limit() and cb.contains(x) and cb.max_limit_point_le(x) == x):
            continue
        if not F3.cset(x).otp() > max(vals):
            continue
        if all(rho(x, a, F3) == rho(b, a, F3) for a in above):
            return x
    return None


@pytest.mark.parametrize("q0", [0, 1, 2])
def test_countable_projection_example(q0):
    b = F3.tier * nat(q0 + 1)
    q = Condition({b: [nat(3)]})
    pr = project_to_countable(q, F3)
    x = _scan_countable(b, [nat(3)], [])
    assert pr.projected == Condition({x: [nat(3)]})
    assert is_condition(pr.projected, Q_c, F3)


def test_below_projection_example():
    mu = o("w^2*2")
    U = sweep(F3.bound, 4)
    q = C({"3": ["2"], "w^2*2+w": ["1"]})
    pr, s = project_below(q, mu, F3, U)
    assert pr.projected == C({"3": ["2"], "w^2+w": ["1"]})
    (b, b2), = pr.moved.items()
    # clause by clause
    assert max(s.low) < s.mu0 < b2 < mu
    L = local_universe(mu, U)
    for x in L:
        if x < s.mu0:
            r1, r2 = rho(x, b, F3), rho(x, b2, F3)
            assert (r1 if r1 < s.nu_bar else None) == (r2 if r2 < s.nu_bar else None)
        elif x < mu:
            assert rho(x, b, F3) > s.nu_bar
    assert is_condition(pr.projected, Q_mu(mu), F3)
    rng = random.Random(5)
    pool = [a for a in U if a < mu]
    for _ in range(100):
        r = random_extension(pr.projected, rng, F3, Q_mu(mu), pool, VALS, 3)
        s2 = pr.merge(r)
        assert is_condition(s2, Q, F3) and extends(s2, r) and extends(s2, q)


def test_countable_projection_merge_can_fail():
    # the projected condition has extensions incompatible with the original
    q = C({"w^2": ["1"]})
    pr = project_to_countable(q, F3)
    assert pr.projected == C({"w": ["1"]})
    r = pr.projected.with_entries({o("w^2+1"): [nat(1)]})
    assert is_condition(r, Q_c, F3) and extends(r, pr.projected)
    assert not compatible(r, q, Q, F3)


# -- negative witness -------------------------------------------------------------------------

def test_suborder_counterexample():
    fam = make_family("f3", o("w^3"), o("w^6"))
    mu, beta = o("w^3+w^2"), o("w^3+w^2*2")
    nu = fam.cset(beta).otp()
    p = Condition({nu + 2: [nu]})
    pbar, cert = suborder_counterexample(mu, beta, p, fam)
    q = Condition({beta: [nu]})
    assert is_condition(pbar, Q_mu(mu), fam) and extends(pbar, p)
    assert verify_certificate(cert, pbar, q, Q, fam)
    assert not compatible(pbar, q, Q, fam)
    assert compatible_bruteforce(pbar, q, Q, fam) is None


def test_suborder_counterexample_preconditions():
    fam = make_family("f3", o("w^3"), o("w^6"))
    mu, beta = o("w^3+w^2"), o("w^3+w^2*2")
    with pytest.raises(PreconditionError):
        suborder_counterexample(mu, beta, Condition({o("w^3+w^2+1"): [nat(1)]}), fam)
    with pytest.raises(PreconditionError):
        suborder_counterexample(mu, beta, Condition({o("5"): [nat(1)]}), fam)
    with pytest.raises(PreconditionError):
        suborder_counterexample(o("w^3"), beta, Condition({o("5"): [nat(1)]}), fam)
