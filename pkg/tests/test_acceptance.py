"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from causalglue.amalgamation import IdentificationMap, glue
from causalglue.harness import replay, run_suite
from causalglue.ladder import check_distinguishing_reflective
from causalglue.minkowski import fixture
from causalglue.space import diamond, future_union_check


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}: {title} ({detail})")

    return emit


def test_1_simplified_formula_equivalence(report):
    t0 = time.perf_counter()
    rep = run_suite("tau_simplified_equiv", 1000, base_seed=1)
    elapsed = time.perf_counter() - t0
    delta = rep.stats["max_delta"]["max"]
    ok = rep.accepted == 1000 and not rep.counterexamples and delta <= 1e-9 and elapsed <= 60
    report(1, "simplified tau equals chain supremum", ok, f"{rep.accepted} instances, max |delta| = {delta:.3g}, {elapsed:.1f} s")
    assert rep.accepted == 1000
    assert not rep.counterexamples
    assert delta <= 1e-9
    assert elapsed <= 60


def _continuum_sweep(samples=200001):
    # best crossing point on the t-axis for (-1, 0) -> (1, 3)
    t = np.linspace(1, 2, samples)
    vals = np.sqrt(t**2 - 1) + np.sqrt((3 - t) ** 2 - 1)
    k = int(np.argmax(vals))
    return float(vals[k]), float(t[k])


def test_2_half_plane_gluing_recovers_minkowski(report):
    best, at = _continuum_sweep()
    assert best == pytest.approx(math.sqrt(5), abs=1e-9)
    assert at == pytest.approx(1.5, abs=1e-4)

    errors = []
    for h in (0.5, 0.25, 0.125):
        fx = fixture("half_plane_pair", h)
        s1, s2 = fx.spaces
        g = glue(s1, s2, IdentificationMap(fx.identify), eps=2 * h)
        x = g.class_of(1, s1.index_of(-1, 0))
        y = g.class_of(2, s2.index_of(1, 3))
        errors.append(abs(g.tauq[x, y] - best))
    ok = errors[0] >= errors[1] >= errors[2] and errors[2] <= 0.05
    report(2, "glued half-planes converge to sqrt(5)", ok, "errors " + ", ".join(f"{e:.3g}" for e in errors))
    assert errors[0] >= errors[1] >= errors[2]
    assert errors[2] <= 0.05


def test_3_double_flagpole(report):
    fx = fixture("flagpole_pair")
    s1, s2 = fx.spaces
    comps = [check_distinguishing_reflective(s) for s in (s1, s2)]
    comps_ok = all(r.distinguishing and r.reflective for r in comps)

    g = glue(s1, s2, IdentificationMap(fx.identify), unsafe=True)
    cx = g.class_of(1, s1.index_of(-0.5, 1.5))
    cy = g.class_of(2, s2.index_of(0.5, 1.5))
    dg = check_distinguishing_reflective(g.as_space(), max_witnesses=10**6)
    shared = cx != cy and np.array_equal(g.llq[cx], g.llq[cy]) and g.llq[cx].any()
    glued_ok = not dg.future_distinguishing and shared

    detail = (
        f"components distinguishing/reflective: {[(r.distinguishing, r.reflective) for r in comps]}, "
        f"glued future-distinguishing: {dg.future_distinguishing}, classes {cx}, {cy} share future: {shared}"
    )
    report(3, "double flagpole", comps_ok and glued_ok, detail)
    assert glued_ok
    assert comps_ok


def test_4_removed_rectangle(report):
    s = fixture("removed_rectangle", 0.25).spaces[0]
    x, w = s.index_of(1, 0), s.index_of(0.5, 1)
    r = future_union_check(s, x, "timelike")
    timelike_fails = not r.holds and w in r.witnesses
    causal_bad = [i for i in range(s.n) if not future_union_check(s, i, "causal").holds]
    ok = timelike_fails and not causal_bad
    report(4, "removed rectangle", ok, f"witness found: {w in r.witnesses}, causal failures: {len(causal_bad)}, empty diamond: {not diamond(s, x, w)}")
    assert timelike_fails
    assert not causal_bad


PRESERVATION = ("chronology", "causality", "enti", "strong_causality", "distinguishing", "global_hyperbolicity")


def test_5_preservation_suites(report):
    t0 = time.perf_counter()
    results = {name: run_suite(name, 1000, base_seed=2) for name in PRESERVATION}
    elapsed = time.perf_counter() - t0
    enti_ratio = results["enti"].stats["ratio"]["max"]
    clean = all(r.ok and r.accepted > 0 for r in results.values())

    sharp = run_suite("distinguishing", 200, base_seed=3, hypothesis_breaker="flagpole_like")
    replayable = False
    if sharp.counterexamples:
        out, identical = replay("distinguishing", sharp.counterexamples[0])
        replayable = out.status == "fail" and identical

    summary = ", ".join(f"{n} {r.accepted}/{len(r.counterexamples)}" for n, r in results.items())
    ok = clean and enti_ratio <= 1 + 1e-9 and elapsed <= 300 and replayable
    report(
        5,
        "preservation suites",
        ok,
        f"accepted/counterexamples: {summary}; enti max ratio {enti_ratio:.3f}; {elapsed:.0f} s; "
        f"flagpole_like counterexamples {len(sharp.counterexamples)}/200, replayable {replayable}",
    )
    for name, r in results.items():
        assert r.accepted > 0, name
        assert r.ok, (name, r.counterexamples[:1])
    assert enti_ratio <= 1 + 1e-9
    assert elapsed <= 300
    assert sharp.counterexamples
    assert replayable


def test_6_relation_reformulation_and_decomposition(report):
    rel = run_suite("relation_reformulation", 1000, base_seed=4)
    dec = run_suite("decomposition", 1000, base_seed=5)
    ok = rel.accepted == dec.accepted == 1000 and rel.ok and dec.ok
    report(6, "relation reformulation and decomposition", ok, f"mismatching instances {len(rel.counterexamples)}, {len(dec.counterexamples)}")
    assert rel.accepted == dec.accepted == 1000
    assert rel.ok and dec.ok


def test_7_monotonicity(report):
    rep = run_suite("monotonicity", 1000, base_seed=6)
    ok = rep.accepted == 1000 and rep.ok
    report(7, "tau does not drop and d does not grow under gluing", ok, f"{len(rep.counterexamples)} violations")
    assert rep.accepted == 1000
    assert rep.ok


def test_8_levin_constraints(report):
    rep = run_suite("levin_constraints", 1000, base_seed=7)
    cycles = rep.stats["cycle"]["count_nonzero"]
    ok = rep.accepted == 1000 and rep.ok and cycles > 0
    report(8, "isotone function constraints", ok, f"{len(rep.counterexamples)} violations, {cycles} spaces with K-cycles")
    assert rep.accepted == 1000
    assert rep.ok
    assert cycles > 0


def test_9_recover_subsets(report):
    rep = run_suite("recover_subsets", 500, base_seed=8)
    ok = rep.accepted == 500 and rep.ok
    report(9, "recover subsets", ok, f"{len(rep.counterexamples)} failures")
    assert rep.accepted == 500
    assert rep.ok
