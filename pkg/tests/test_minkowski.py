import json
import math

import numpy as np
import pytest

from causalglue.amalgamation import IdentificationMap, glue
from causalglue.ladder import check_distinguishing_reflective, check_strong_causality, minimal_neighborhoods
from causalglue.minkowski import (
    RegionError,
    SampleParams,
    chain_intrinsic_tau,
    evaluate_fixture,
    fixture,
    fixture_names,
    parse_region,
    region_from_dict,
    sample_region,
)
from causalglue.space import diamond, future_union_check, validate_space

RECT = {"base": {"kind": "rectangle", "x": [0, 2], "t": [0, 2]}}


def test_square_grid_sampling():
    s = sample_region(region_from_dict(RECT), SampleParams(h=0.5))
    assert s.n == 25
    assert s.tau[s.index_of(0, 0), s.index_of(1, 2)] == pytest.approx(math.sqrt(3))
    assert validate_space(s).ok


def test_boundary_exclusion_and_jitter():
    reg = region_from_dict(RECT)
    assert sample_region(reg, SampleParams(0.5, include_boundary=False)).n == 9
    a = sample_region(reg, SampleParams(0.5, jitter_seed=4))
    b = sample_region(reg, SampleParams(0.5, jitter_seed=4))
    assert np.array_equal(a.coords, b.coords)


@pytest.mark.parametrize(
    "bad",
    [
        {"base": {"kind": "hexagon"}},
        {"base": {"kind": "rectangle", "x": [0, 0], "t": [0, 1]}},
        {"nobase": 1},
        {"base": RECT["base"], "removed": [{"kind": "rectangle", "x": [5, 6], "t": [5, 6]}]},
    ],
)
def test_region_errors(bad):
    with pytest.raises(RegionError):
        region_from_dict(bad)


def test_parse_region_rejects_bad_json():
    with pytest.raises(RegionError):
        parse_region("{not json")
    assert parse_region(json.dumps(RECT)).contains((1, 1))


def test_open_removed_rectangle_keeps_edges():
    fx = fixture("removed_rectangle")
    s = fx.spaces[0]
    s.index_of(1, 0)
    s.index_of(0.5, 1)
    with pytest.raises(KeyError):
        s.index_of(1, 0.5)


def test_removed_rectangle_union_failure():
    s = fixture("removed_rectangle").spaces[0]
    x, w = s.index_of(1, 0), s.index_of(0.5, 1)
    r = future_union_check(s, x, "timelike")
    assert not r.holds and w in r.witnesses
    assert diamond(s, x, w) == frozenset()
    assert all(future_union_check(s, i, "causal").holds for i in range(s.n))


def test_null_slit():
    s = fixture("null_slit_future").spaces[0]
    x, y = s.index_of(1, 1), s.index_of(2, 2)
    assert s.leq[x, y] and not s.ll[x, y] and s.tau[x, y] == 0


def test_intrinsic_tau_on_convex_region_is_ambient():
    reg = region_from_dict(RECT)
    s = sample_region(reg, SampleParams(0.5))
    hat = chain_intrinsic_tau(s, reg)
    assert np.allclose(hat.tau, s.tau)


def test_intrinsic_tau_slit_diamond():
    fx = fixture("slit_diamond", 0.125)
    s = fx.spaces[0]
    p, q = s.index_of(6.25, 0.5), s.index_of(6.25, 2.5)
    hat = chain_intrinsic_tau(s, fx.regions[0])
    assert hat.tau[p, q] < s.tau[p, q] - 0.1
    assert hat.tau[p, q] > 0


def test_flagpole_edge_is_not_strongly_causal():
    s = fixture("flagpole_pair").spaces[0]
    p = s.index_of(-0.5, 1.5)
    assert not check_strong_causality(s, 0.39).passed
    S = minimal_neighborhoods(s)
    assert S[p, s.index_of(0, 2)]


def test_flagpole_glued_classes_share_future():
    fx = fixture("flagpole_pair")
    s1, s2 = fx.spaces
    g = glue(s1, s2, IdentificationMap(fx.identify), unsafe=True)
    cx, cy = g.class_of(1, s1.index_of(-0.5, 1.5)), g.class_of(2, s2.index_of(0.5, 1.5))
    assert cx != cy
    assert np.array_equal(g.llq[cx], g.llq[cy]) and g.llq[cx].any()
    assert not check_distinguishing_reflective(g.as_space()).future_distinguishing


def test_flagpole_components_fail_per_sign_distinction():
    # the flag makes several points share a future with pole points
    s1 = fixture("flagpole_pair").spaces[0]
    a, b = s1.index_of(-0.5, 1.5), s1.index_of(0, 2)
    assert np.array_equal(s1.ll[a], s1.ll[b])
    assert not check_distinguishing_reflective(s1).future_distinguishing


@pytest.mark.parametrize("name", ["removed_rectangle", "null_slit_future", "half_plane_pair"])
def test_fixture_assertions_hold(name):
    results = evaluate_fixture(fixture(name), with_glue=True)
    assert results and all(a.ok for a in results)


def test_unknown_fixture():
    assert "flagpole_pair" in fixture_names()
    with pytest.raises(KeyError):
        fixture("unknown")
