import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalglue.harness import GenParams, random_space, random_space_with_cycle
from causalglue.ladder import (
    CheckParams,
    check_distinguishing_reflective,
    check_strong_causality,
    extrinsic_nti_bound,
    isotone_violations,
    k_closure,
    ladder_report,
    levin_isotone,
    ntli_check,
    time_observing_check,
)
from causalglue.space import cone, minkowski_space


def brute_nti(s):
    n = s.n
    if any(s.leq[i, j] and s.leq[j, i] for i in range(n) for j in range(n) if i != j):
        return math.inf
    best = 0.0

    def extend(path, total):
        nonlocal best
        best = max(best, total)
        for k in range(n):
            if k not in path and s.leq[path[-1], k]:
                extend(path + [k], total + s.d[path[-1], k])

    for i in range(n):
        extend([i], 0.0)
    return best


@pytest.mark.parametrize("seed", range(30))
def test_nti_bound_matches_enumeration(seed):
    s = random_space(GenParams(n=7, edge_prob=0.4, seed=seed, a_size=0))
    rep = extrinsic_nti_bound(s)
    assert rep.bound == pytest.approx(brute_nti(s))
    seq = rep.achieving_sequence
    assert all(s.leq[a, b] for a, b in zip(seq, seq[1:]))
    assert sum(s.d[a, b] for a, b in zip(seq, seq[1:])) == pytest.approx(rep.bound)


def test_nti_infinite_on_cycle():
    s, closing = random_space_with_cycle(GenParams(n=6, edge_prob=0.6, seed=3, a_size=0))
    assert closing is not None
    assert not extrinsic_nti_bound(s).finite


def brute_sc_radius(s, p):
    """Max distance from p over the intersection of every timelike cone containing p."""
    n = s.n
    cones = [cone(s, x, "future") for x in range(n) if s.ll[x, p]]
    cones += [cone(s, y, "past") for y in range(n) if s.ll[p, y]]
    if not cones:
        return math.inf
    S = set.intersection(*map(set, cones))
    return max(s.d[p, q] for q in S)


@pytest.mark.parametrize("seed", range(30))
def test_strong_causality_radius_matches_sets(seed):
    s = random_space(GenParams(n=8, edge_prob=0.4, null_prob=0.3, seed=seed, a_size=0))
    rep = check_strong_causality(s, eps=0.5)
    radius = [brute_sc_radius(s, p) for p in range(s.n)]
    assert np.allclose(rep.radius, radius)
    assert rep.passed == all(r <= 0.5 + 1e-9 for r in radius)


def test_minkowski_grid_is_strongly_causal_at_zero():
    h = 0.5
    pts = [(x, t) for x in np.arange(-2, 2.01, h) for t in np.arange(-2, 2.01, h)]
    s = minkowski_space(pts)
    # every grid point has a timelike neighbour and S(p) = {p}
    rep = check_strong_causality(s, eps=0.0)
    assert rep.passed


def test_uncovered_point_fails_at_any_scale():
    s = minkowski_space([(0, 0), (0, 1), (5, 0)])
    rep = check_strong_causality(s, eps=math.inf)
    assert not rep.passed
    assert [p for p, _ in rep.failures] == [2]


def brute_distinction(s):
    fut = [frozenset(cone(s, i, "future")) for i in range(s.n)]
    past = [frozenset(cone(s, i, "past")) for i in range(s.n)]
    pairs = list(itertools.combinations(range(s.n), 2))
    fd = not any(fut[a] and fut[a] == fut[b] for a, b in pairs)
    pd = not any(past[a] and past[a] == past[b] for a, b in pairs)
    refl = True
    for x, y in itertools.product(range(s.n), repeat=2):
        if fut[x] and fut[x] <= fut[y] and not past[y] <= past[x]:
            refl = False
        if past[x] and past[x] <= past[y] and not fut[y] <= fut[x]:
            refl = False
    return fd, pd, refl


@pytest.mark.parametrize("seed", range(40))
def test_distinction_matches_sets(seed):
    s = random_space(GenParams(n=8, edge_prob=0.5, null_prob=0.3, seed=seed, a_size=0))
    rep = check_distinguishing_reflective(s)
    assert (rep.future_distinguishing, rep.past_distinguishing, rep.reflective) == brute_distinction(s)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 10), st.floats(0.1, 0.9))
def test_levin_isotone_constraints(seed, n, p):
    params = GenParams(n=n, edge_prob=p, seed=seed, a_size=0)
    s, _ = random_space_with_cycle(params) if seed % 2 else (random_space(params), None)
    T = levin_isotone(s)
    assert isotone_violations(s, T) == []
    K = k_closure(s)
    for x, y in itertools.product(range(n), repeat=2):
        if K[x, y]:
            assert T[x] <= T[y]
            assert (T[x] == T[y]) == bool(K[y, x])


def test_isotone_violations_detects_constant_function():
    s = minkowski_space([(0, 0), (0, 1)])
    assert isotone_violations(s, np.zeros(2)) == [(0, 1)]


def test_ntli_and_time_observing():
    s = minkowski_space([(0, 0), (0, 1), (0, 2), (0, 3)])
    assert ntli_check(s, [0, 1, 2, 3], eps=1.0).passed
    assert not ntli_check(s, [0, 3], eps=1.0).passed
    assert ntli_check(s, [0, 3], eps=3.0).passed
    tob = time_observing_check(s, [0, 3])
    assert tob.passed and tob.sufficient


def test_ladder_report_rungs():
    rep = ladder_report(minkowski_space([(0, 0), (0, 1), (1, 2)]), CheckParams(eps=math.inf))
    assert rep.passed("chronological") and rep.passed("causal")
    assert rep["causally_simple"].status == "trivialized"
    s, _ = random_space_with_cycle(GenParams(n=6, edge_prob=0.6, seed=3, a_size=0))
    bad = ladder_report(s)
    assert not bad.passed("causal")
    assert not bad.passed("K_causal")
