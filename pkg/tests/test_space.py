import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalglue.space import (
    FiniteCausalSpace,
    StructuralError,
    cone,
    diamond,
    future_union_check,
    minkowski_space,
    subspace,
    tau_completion,
    validate_space,
)
from conftest import brute_longest, random_edges


def brute_axioms(s):
    """Axiom names violated, by direct loops over all tuples."""
    n, bad = s.n, set()
    T = 1e-9
    for i, j in itertools.product(range(n), repeat=2):
        if abs(s.d[i, j] - s.d[j, i]) > T:
            bad.add("metric-symmetry")
        if i != j and s.d[i, j] <= 0:
            bad.add("metric-positivity")
        if s.ll[i, j] and not s.leq[i, j]:
            bad.add("ll-in-leq")
        if (s.tau[i, j] > T) != bool(s.ll[i, j]):
            bad.add("positivity-equivalence")
        if not s.leq[i, j] and s.tau[i, j] > T:
            bad.add("tau-zero-off-leq")
    for i in range(n):
        if not s.leq[i, i]:
            bad.add("leq-reflexive")
    for i, j, k in itertools.product(range(n), repeat=3):
        if s.d[i, k] > s.d[i, j] + s.d[j, k] + T:
            bad.add("triangle")
        if s.leq[i, j] and s.leq[j, k]:
            if not s.leq[i, k]:
                bad.add("leq-transitive")
            if s.tau[i, k] < s.tau[i, j] + s.tau[j, k] - T:
                bad.add("reverse-triangle")
        if s.ll[i, j] and s.ll[j, k] and not s.ll[i, k]:
            bad.add("ll-transitive")
        if ((s.leq[i, j] and s.ll[j, k]) or (s.ll[i, j] and s.leq[j, k])) and not s.ll[i, k]:
            bad.add("push-up")
    return bad


def _grid(h=0.5, r=1.0):
    xs = np.arange(-r, r + h / 2, h)
    return minkowski_space([(x, t) for x in xs for t in xs])


def test_minkowski_grid_is_valid():
    s = _grid()
    assert validate_space(s).ok
    assert brute_axioms(s) == set()


def test_light_cone_values():
    s = minkowski_space([(0, 0), (1, 1), (0, 2), (3, 1)])
    assert s.leq[0, 1] and not s.ll[0, 1]
    assert s.tau[0, 2] == pytest.approx(2.0)
    assert s.tau[1, 2] == 0 and s.leq[1, 2]
    assert not s.leq[0, 3] and not s.leq[3, 0]
    assert cone(s, 0) == {2}
    assert cone(s, 0, kind="causal") == {0, 1, 2}
    assert diamond(s, 0, 2, kind="causal") == {0, 1, 2}


def _perturb(s, rng):
    """Random single-entry damage to one of the four matrices."""
    d, leq, ll, tau = (np.array(m) for m in (s.d, s.leq, s.ll, s.tau))
    i, j = rng.integers(0, s.n, size=2)
    which = rng.integers(0, 4)
    if which == 0:
        d[i, j] = rng.uniform(0, 3)
    elif which == 1:
        leq[i, j] = ~leq[i, j]
    elif which == 2:
        ll[i, j] = ~ll[i, j]
    else:
        tau[i, j] = rng.choice([0.0, rng.uniform(0, 3)])
    return FiniteCausalSpace(d=d, leq=leq, ll=ll, tau=tau)


@pytest.mark.parametrize("seed", range(60))
def test_validator_agrees_with_loops(seed):
    rng = np.random.default_rng(seed)
    base = minkowski_space(rng.integers(-2, 3, size=(int(rng.integers(2, 7)), 2)).astype(float) * 0.5)
    base = subspace(base, _unique_rows(base))
    s = _perturb(base, rng)
    assert validate_space(s).axioms() - {"metric-zero-diagonal"} == brute_axioms(s)


def _unique_rows(s):
    _, idx = np.unique(s.coords, axis=0, return_index=True)
    return sorted(idx)


@pytest.mark.parametrize("seed", range(40))
def test_tau_completion_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 9))
    edges = random_edges(rng, n, cyclic=seed % 3 == 0)
    comp = tau_completion(n, edges)
    reach, best = brute_longest(n, edges)
    assert np.array_equal(comp.leq, reach)
    expect = np.where(reach, np.maximum(best, 0.0), 0.0)
    assert np.array_equal(np.isinf(comp.tau), np.isinf(expect))
    fin = np.isfinite(expect)
    assert np.allclose(comp.tau[fin], expect[fin])
    if not np.isinf(comp.tau).any():
        s = comp.with_metric(np.where(np.eye(n, dtype=bool), 0.0, 1.0))
        assert validate_space(s).ok


def test_tau_completion_rejects_negative_weight():
    with pytest.raises(ValueError):
        tau_completion(2, [(0, 1, -0.5)])


def test_structural_errors():
    with pytest.raises(StructuralError):
        FiniteCausalSpace(d=np.zeros((2, 2)), leq=np.eye(3, dtype=bool), ll=np.zeros((2, 2)), tau=np.zeros((2, 2)))


def test_causal_union_check_on_full_grid_holds():
    s = _grid(0.5, 2.0)
    for k in range(s.n):
        assert future_union_check(s, k, "causal").holds
        assert future_union_check(s, k, "causal", "past").holds


def test_union_check_reports_missing_member():
    # (0,0) << (0,1) but nothing lies strictly between them
    s = minkowski_space([(0, 0), (0, 1), (0, 2)])
    uc = future_union_check(s, 0)
    assert not uc.holds
    assert uc.witnesses == {1}
    assert (0, 1) in uc.interpolative_failures


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=12, unique=True))
def test_minkowski_samples_satisfy_axioms(pts):
    s = minkowski_space(np.array(pts, dtype=float) / 2)
    assert validate_space(s).ok


def test_subspace_keeps_parent_indices():
    s = _grid()
    sub = subspace(s, [4, 1, 7])
    assert list(sub.parent_index) == [1, 4, 7]
    assert sub.tau[0, 2] == s.tau[1, 7]
    assert math.isclose(sub.d[1, 2], s.d[4, 7])
