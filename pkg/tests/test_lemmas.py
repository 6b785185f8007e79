import pytest

from kurepa.csequences import OmegaSeq, OverrideFamily, make_family
from kurepa.lemmas import LemmaSuite, run_lemma_suite
from kurepa.ordinals import nat, ord_add

from conftest import o

GATING = {"coherence", "cofinal_limit", "subadditivity", "equality", "limit_in_trace"}


@pytest.fixture(scope="module")
def f3_results():
    return {r.name: r for r in run_lemma_suite(make_family("f3"), o("w^3+w^2*2"), cap=3)}


def test_suite_names(f3_results):
    assert set(f3_results) == GATING | {"small_preimage"}


@pytest.mark.parametrize("name", sorted(GATING))
def test_gating_lemmas_hold_on_f3(f3_results, name):
    r = f3_results[name]
    assert r.passed, r.to_dict()
    assert r.checked > 0


def test_f1_suite_passes():
    res = run_lemma_suite(make_family("f1"), o("w^3"), cap=3)
    assert all(r.passed for r in res), [r.to_dict() for r in res if not r.passed]


def test_small_preimage_reports_data(f3_results):
    # with a non-regular tier the bound is expected to break somewhere; the
    # result must still carry concrete witnesses
    r = f3_results["small_preimage"]
    assert r.checked > 0
    if not r.passed:
        assert r.violations and "alpha" in r.violations[0]


def test_broken_family_breaks_coherence_lemma():
    alpha = o("w^2+w*2")
    bad = OmegaSeq(lambda n: ord_add(o("w^2+w"), nat(n + 1)), alpha)
    fam = OverrideFamily(make_family("f3"), {alpha: bad})
    r = LemmaSuite(fam, o("w^2*2"), cap=3).coherence()
    assert not r.passed


def test_result_dict_shape(f3_results):
    d = f3_results["coherence"].to_dict()
    assert {"lemma", "passed", "checked", "violations", "seconds"} <= set(d)
