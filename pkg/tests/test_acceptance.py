"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Failure logs for the randomized criteria are written under ``artifacts/``.
"""

import json
import random
import time
from pathlib import Path

import pytest

from conftest import ACCEPTANCE, o
from kurepa.csequences import OmegaSeq, OverrideFamily, make_family, validate_family
from kurepa.deltasys import knaster_harness
from kurepa.experiments import (
    TrialConfig, below_projection_trials, countable_projection_trials, filter_trials,
    negative_fact_trials, negative_family,
)
from kurepa.generictree import check_tree, tree_of
from kurepa.lemmas import run_lemma_suite
from kurepa.ordinals import OMEGA, ZERO, nat, ord_add, sweep
from kurepa.posets import (
    P, Q, Q_c, Q_mu, compatible, compatible_bruteforce, extends, is_condition, random_condition,
    verify_certificate,
)
from kurepa.walks import Walker, rho_naive

ARTIFACTS = Path(__file__).resolve().parent.parent / "artifacts"

pytestmark = pytest.mark.slow


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE[n] = line
    print(line)


def log(name: str, rows: list[dict]) -> Path:
    ARTIFACTS.mkdir(exist_ok=True)
    path = ARTIFACTS / name
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))
    return path


def test_criterion_1_rho_base_values():
    t0 = time.perf_counter()
    f1, f3 = make_family("f1"), make_family("f3")
    w1, w3 = Walker(f1), Walker(f3)
    rng = random.Random(0)
    pool = sweep(f3.bound, 4)
    diag = all(w3.rho(a, a) == ZERO for a in rng.sample(pool, 500))
    diag = diag and all(w1.rho(a, a) == ZERO for a in rng.sample(sweep(o("w^4"), 4), 500))
    bad = []
    for n in range(64):
        v = w1.rho(nat(n), OMEGA)
        if not (v == nat(n) == rho_naive(nat(n), OMEGA, f1)):
            bad.append(("w", n, v))
        for m in range(n):
            v = w1.rho(nat(m), nat(n))
            if not (v == ZERO == rho_naive(nat(m), nat(n), f1)):
                bad.append((m, n, v))
    secs = time.perf_counter() - t0
    ok = diag and not bad and secs < 5
    record(1, ok, f"diagonal={'ok' if diag else 'broken'} mismatches={len(bad)} time={secs:.2f}s")
    assert ok, bad[:5]


def test_criterion_2_lemma_suite():
    t0 = time.perf_counter()
    res = run_lemma_suite(make_family("f3"), o("w^4"), cap=4)
    secs = time.perf_counter() - t0
    failed = [r.name for r in res if not r.passed]
    summary = ", ".join(f"{r.name}:{'ok' if r.passed else r.violation_count}" for r in res)
    ok = len(res) == 6 and not failed and secs < 120
    record(2, ok, f"{6 - len(failed)}/6 lemmas clean [{summary}] time={secs:.1f}s")
    if failed:
        log("criterion2_violations.jsonl", [r.to_dict() for r in res if not r.passed])
    assert ok, failed


def test_criterion_3_compatibility_oracle():
    f3 = make_family("f3")
    dom = [a for a in sweep(f3.bound, 3) if a]
    vals = [o(v) for v in ("0", "1", "2", "w", "w+1", "w*2", "w*2+3", "w*3", "w*4+1")]
    rng = random.Random(3)
    t0 = time.perf_counter()
    stats = {}
    problems = []
    for variant in (Q, P):
        agree = 0
        for _ in range(10_000):
            p = random_condition(rng, f3, variant, dom, vals)
            q = random_condition(rng, f3, variant, dom, vals)
            res = compatible(p, q, variant, f3)
            brute = compatible_bruteforce(p, q, variant, f3)
            if bool(res) != (brute is not None):
                problems.append({"variant": variant.name, "p": p.to_json(), "q": q.to_json(), "why": "disagree"})
                continue
            if res:
                w = res.witness
                if not (is_condition(w, variant, f3) and extends(w, p) and extends(w, q)):
                    problems.append({"variant": variant.name, "p": p.to_json(), "q": q.to_json(), "why": "witness"})
                    continue
            elif not verify_certificate(res.certificate, p, q, variant, f3):
                problems.append({"variant": variant.name, "p": p.to_json(), "q": q.to_json(), "why": "certificate"})
                continue
            agree += 1
        stats[variant.name] = agree
    secs = time.perf_counter() - t0
    ok = not problems
    if problems:
        log("criterion3_problems.jsonl", problems)
    record(3, ok, f"agreement Q={stats['Q']}/10000 P={stats['P']}/10000 time={secs:.1f}s")
    assert ok, problems[:3]


@pytest.mark.parametrize("variant", [Q, P], ids=["Q", "P"])
def test_criterion_4_knaster(variant):
    rep = knaster_harness(1000, 42, variant, make_family("f3"))
    confirmed = rep.amalgamated == rep.pairs_checked - sum(rep.amalgamation_skipped.values()) - len(rep.incompatible)
    ok = rep.refined_size >= 2 and not rep.incompatible and not rep.amalgamation_failures \
        and confirmed and rep.seconds < 60
    prev = ACCEPTANCE.get(4, "")
    part = (f"{variant.name}: refined={rep.refined_size} incompatible={len(rep.incompatible)} "
            f"amalgamated={rep.amalgamated}/{rep.pairs_checked} time={rep.seconds:.1f}s")
    both_ok = ok and (not prev or "PASS" in prev)
    record(4, both_ok, (prev.split(" ", 3)[-1] + "; " if prev else "") + part)
    assert ok, rep.to_dict()


def _judge_projection(trials, target_variant_for, family):
    fail_rows, bad_merge_rows, invalid_out = [], [], 0
    merges = good = 0
    for t in trials:
        if t.projection is None:
            fail_rows.append({"condition": t.condition.to_json(), "clause": t.failure_clause,
                              "mu": None if t.mu is None else str(t.mu), "error": t.failure})
            continue
        if not is_condition(t.projection.projected, target_variant_for(t), family):
            invalid_out += 1
        for r, s in t.merges:
            merges += 1
            if is_condition(s, Q, family) and extends(s, r) and extends(s, t.condition):
                good += 1
            elif len(bad_merge_rows) < 200:
                bad_merge_rows.append({"condition": t.condition.to_json(), "r": r.to_json(), "merge": s.to_json()})
    return fail_rows, bad_merge_rows, invalid_out, merges, good


def test_criterion_5_projections():
    cfg = TrialConfig(trials=200, descents=100, seed=5)
    fam = cfg.build()
    t0 = time.perf_counter()
    qc = _judge_projection(countable_projection_trials(cfg, fam), lambda t: Q_c, fam)
    below = _judge_projection(below_projection_trials(cfg, fam), lambda t: Q_mu(t.mu), fam)
    secs = time.perf_counter() - t0
    parts, oks = [], []
    for name, (fails, bad, invalid, merges, good) in (("project_to_countable", qc), ("project_below", below)):
        log(f"criterion5_{name}_search_failures.jsonl", fails)
        log(f"criterion5_{name}_bad_merges.jsonl", bad)
        rate = len(fails) / cfg.trials
        ok = rate < 0.05 and invalid == 0 and good == merges
        oks.append(ok)
        parts.append(f"{name}: search failures {len(fails)}/{cfg.trials} ({rate:.0%}), "
                     f"invalid outputs {invalid}, valid merges {good}/{merges}")
    record(5, all(oks), "; ".join(parts) + f" time={secs:.1f}s")
    assert all(oks), parts


def test_criterion_6_negative_witness():
    fam = negative_family()
    trials = negative_fact_trials(50, seed=6)
    bad = []
    for t in trials:
        preconds = (fam.cof_class(t.mu).value == "omega-class" and fam.is_limit_point(t.mu, t.beta)
                    and is_condition(t.p, Q_mu(t.mu), fam) and compatible(t.p, t.q, Q, fam))
        ok = (preconds and is_condition(t.pbar, Q_mu(t.mu), fam) and extends(t.pbar, t.p)
              and verify_certificate(t.certificate, t.pbar, t.q, Q, fam)
              and compatible_bruteforce(t.pbar, t.q, Q, fam) is None
              and not compatible(t.pbar, t.q, Q, fam))
        if not ok:
            bad.append({"mu": str(t.mu), "beta": str(t.beta), "p": t.p.to_json()})
    ok = len(trials) == 50 and not bad
    record(6, ok, f"{50 - len(bad)}/50 triples confirmed incompatible (Omega=w^3)")
    assert ok, bad[:3]


def test_criterion_7_generic_tree():
    f3 = make_family("f3")
    t0 = time.perf_counter()
    violations, strict_bad = 0, 0
    runs = filter_trials(100, seed=7, family=f3)
    for variant, filt in runs:
        tree = tree_of(filt)
        violations += len(check_tree(tree, f3, variant).violations)
        if variant is P:
            w = Walker(f3)
            for xi, b1 in tree.branch_map.items():
                for eta, b2 in tree.branch_map.items():
                    sh = set(b1) & set(b2)
                    if xi < eta and sh and not max(sh) < w.rho(xi, eta):
                        strict_bad += 1
    secs = time.perf_counter() - t0
    ok = len(runs) == 100 and violations == 0 and strict_bad == 0
    nodes = sum(len(tree_of(f).nodes) for _, f in runs)
    record(7, ok, f"100 filters, {nodes} nodes, violations={violations} strictness breaches={strict_bad} time={secs:.1f}s")
    assert ok


def test_criterion_8_family_validator():
    f3, f1 = make_family("f3"), make_family("f1")
    r3 = validate_family(f3, o("w^4"), cap=4)
    r1 = validate_family(f1, o("w^4"), cap=4)
    alpha = o("w^2+w*2")
    broken = OverrideFamily(f3, {alpha: OmegaSeq(lambda n: ord_add(o("w^2+w"), nat(n + 1)), alpha)})
    rb = validate_family(broken, o("w^4"), cap=4)
    exact = rb.clauses() == {"coherence"} and {v.alpha for v in rb.violations} == {alpha}
    ok = r3.ok and r3.checked_coherence_pairs > 0 and r1.ok and r1.checked_coherence_pairs == 0 and exact
    record(8, ok, f"F3 ok={r3.ok} ({r3.checked_coherence_pairs} coherence pairs); F1 ok={r1.ok} (vacuous); "
                  f"corrupted C_{alpha} flagged as {sorted(rb.clauses())}")
    assert ok
