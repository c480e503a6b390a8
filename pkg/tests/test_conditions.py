import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoweight.conditions import (
    a1_a2_witness,
    cond1_value,
    cond2_constant,
    cond2_value,
    dorverbitsky_value,
    linearizing_allocation,
    maximal_norm,
    operator_norm,
    operator_norm_bruteforce,
    operator_norm_ratio,
    reduction_condition_bruteforce,
    reduction_condition_sup,
    reduction_condition_value,
    weak_cond_values,
)
from twoweight.errors import ZeroDenominator
from twoweight.grid import CubeId, GridSpec
from twoweight.measure import DisjointAllocation, LeafMeasure, lp_norm
from twoweight.operator import ExponentTriple
from twoweight.sparse import CubeFamily

from conftest import grids, leaf_arrays

ROOT, L0, L1 = CubeId(0, (0,)), CubeId(1, (0,)), CubeId(1, (1,))
E322 = ExponentTriple(3, 2, 2)
SEVEN_SIXTHS = 2 ** (7 / 6)


@pytest.fixture
def inst_a():
    g = GridSpec(1, 1)
    return (g, g.cube_array({ROOT: 1}), LeafMeasure(g, [1, 1], "sigma"), LeafMeasure(g, [1, 1]))


def test_cond1_examples(inst_a):
    g, lam, s, mu = inst_a
    G = CubeFamily(g, [ROOT], "mu")
    assert cond1_value(lam, s, mu, E322, G, {ROOT: 1}) == pytest.approx(SEVEN_SIXTHS, rel=1e-14)
    assert cond1_value(lam, s, mu, E322, G, {}) == 0
    assert cond1_value(g.cube_array({}), s, mu, E322, G, {ROOT: 1}) == 0


def test_cond1_drops_null_terms(inst_a):
    g, _, s, _ = inst_a
    mu = LeafMeasure(g, [0, 1])
    G = CubeFamily(g, [ROOT, L0], "mu")
    lam = g.cube_array({ROOT: 1, L0: 1})
    with_null = cond1_value(lam, s, mu, E322, G, {ROOT: 1, L0: 1}, check=False)
    assert with_null == pytest.approx(cond1_value(lam, s, mu, E322, G, {ROOT: 1}, check=False))


def test_cond2_examples(inst_a):
    g, lam, s, mu = inst_a
    F = CubeFamily(g, [ROOT])
    assert cond2_value(lam, s, mu, E322, F, {ROOT: 1}) == pytest.approx(SEVEN_SIXTHS, rel=1e-14)
    F0 = CubeFamily(g, [ROOT, L1])
    assert cond2_value(g.cube_array({L0: 1}), s, mu, E322, F0, {L1: 1}, local=True) == 0
    with pytest.raises(ZeroDenominator):
        cond2_value(lam, s, mu, E322, F, {ROOT: 0})


@given(st.floats(0.01, 100))
def test_cond2_scale_invariant_in_beta(t):
    g = GridSpec(1, 2)
    s = LeafMeasure(g, [1, 2, 3, 4], "sigma")
    mu = LeafMeasure(g, [2, 1, 1, 3])
    lam = g.cube_array({ROOT: 1, L0: 0.5, CubeId(2, (3,)): 2})
    F = CubeFamily(g, [ROOT, L1])
    beta = {ROOT: 1.0, L1: 0.3}
    scaled = {k: t * v for k, v in beta.items()}
    a = cond2_value(lam, s, mu, E322, F, beta)
    assert cond2_value(lam, s, mu, E322, F, scaled) == pytest.approx(a, rel=1e-12)


def test_cond2_constant_examples(inst_a):
    g, lam, s, mu = inst_a
    rep = cond2_constant(lam, s, mu, E322, CubeFamily(g, [ROOT]))
    assert rep.value == pytest.approx(SEVEN_SIXTHS, rel=1e-14) and rep.method == "given"
    rep = cond2_constant(g.cube_array({}), s, mu, E322, CubeFamily(g, [ROOT, L0]))
    assert rep.value == 0


def test_cond2_constant_certificate_replays():
    g = GridSpec(1, 2)
    s = LeafMeasure(g, [1, 2, 3, 4], "sigma")
    mu = LeafMeasure(g, [2, 1, 1, 3])
    lam = g.cube_array({ROOT: 1, L0: 0.5, L1: 2})
    F = CubeFamily(g, [ROOT, L0, L1])
    rep = cond2_constant(lam, s, mu, E322, F, seed=3)
    beta = dict(zip(F, rep.certificate))
    assert cond2_value(lam, s, mu, E322, F, beta) == pytest.approx(rep.value, rel=1e-9)


def test_cond2_bounded_by_operator_norm():
    g = GridSpec(1, 2)
    s = LeafMeasure(g, [1, 2, 3, 4], "sigma")
    mu = LeafMeasure(g, [2, 1, 1, 3])
    lam = g.cube_array({ROOT: 1, L0: 0.5, L1: 2, CubeId(2, (2,)): 1})
    F = CubeFamily(g, [ROOT, L0])
    beta = {ROOT: 1.0, L0: 2.0}
    # the numerator is ||T f_beta|| with f_beta = sum beta_F sigma(F)^{-1/p} chi_F
    f = np.zeros(4)
    for cube, b in beta.items():
        span = g.leaves_under(cube)
        f[span.start:span.stop] += b / s.cube_mass(cube) ** (1 / 3)
    ratio = operator_norm_ratio(lam, s, mu, E322, f)
    value = cond2_value(lam, s, mu, E322, F, beta)
    f_norm = lp_norm(f, 3, s)
    assert value == pytest.approx(ratio * f_norm / sum(b ** 3 for b in beta.values()) ** (1 / 3), rel=1e-12)
    norm = operator_norm(lam, s, mu, E322).value
    assert ratio <= norm * (1 + 1e-9)


def test_reduction_value_examples(inst_a):
    g, lam, s, mu = inst_a
    assert reduction_condition_value(lam, s, mu, E322) == pytest.approx(4 * 2 ** (1 / 3), rel=1e-14)
    assert reduction_condition_value(g.cube_array({}), s, mu, E322) == 0
    e = ExponentTriple(3, 2, 4)
    empty = DisjointAllocation(g, {ROOT: np.zeros(2)})
    assert reduction_condition_value(lam, s, mu, e, empty) == 0


def test_reduction_sup_examples(inst_a):
    g, lam, s, mu = inst_a
    rep = reduction_condition_sup(lam, s, mu, E322)
    assert rep.value == pytest.approx(reduction_condition_value(lam, s, mu, E322), rel=1e-12)
    assert reduction_condition_sup(g.cube_array({}), s, mu, E322).value == 0
    lam2 = g.cube_array({ROOT: 1, L0: 1})
    e = ExponentTriple(3, 2, math.inf)
    oracle = reduction_condition_bruteforce(lam2, s, mu, e)
    rep = reduction_condition_sup(lam2, s, mu, e, oracle_leaves=0)
    assert rep.value == pytest.approx(oracle.value, rel=1e-6)
    assert reduction_condition_value(lam2, s, mu, e, rep.certificate) == pytest.approx(rep.value, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.data(), st.sampled_from([2.5, 4.0, math.inf]))
def test_reduction_sup_matches_oracle(depth, data, s_exp):
    g = GridSpec(1, depth)
    sigma = LeafMeasure(g, data.draw(leaf_arrays(g, 0.2, 3.0, zeros=False)), "sigma")
    mu = LeafMeasure(g, data.draw(leaf_arrays(g, 0.2, 3.0, zeros=False)))
    lam = np.array(data.draw(st.lists(st.floats(0, 2), min_size=g.num_cubes, max_size=g.num_cubes)))
    e = ExponentTriple(3, 2, s_exp)
    rep = reduction_condition_sup(lam, sigma, mu, e, oracle_leaves=0)
    oracle = reduction_condition_bruteforce(lam, sigma, mu, e)
    assert rep.value >= oracle.value * (1 - 1e-6)
    assert reduction_condition_value(lam, sigma, mu, e, rep.certificate) == pytest.approx(rep.value, rel=1e-9)


def test_operator_norm_examples(inst_a):
    g, lam, s, mu = inst_a
    rep = operator_norm(lam, s, mu, E322)
    assert rep.value == pytest.approx(SEVEN_SIXTHS, rel=1e-9)
    assert operator_norm(g.cube_array({}), s, mu, E322).value == 0
    assert operator_norm(lam, s, LeafMeasure(g, [0, 0]), E322).value == 0
    brute = operator_norm_bruteforce(lam, s, mu, E322)
    assert brute.value == pytest.approx(SEVEN_SIXTHS, rel=1e-2)
    g0 = GridSpec(1, 0)
    one = LeafMeasure(g0, [2], "sigma")
    lam0 = g0.cube_array({ROOT: 1.5})
    ratio = operator_norm_ratio(lam0, one, LeafMeasure(g0, [3]), E322, np.ones(1))
    assert operator_norm(lam0, one, LeafMeasure(g0, [3]), E322).value == pytest.approx(ratio, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2), st.data(), st.integers(-3, 3))
def test_operator_norm_homogeneous(depth, data, k):
    g = GridSpec(1, depth)
    sigma = LeafMeasure(g, data.draw(leaf_arrays(g, 0.2, 3.0, zeros=False)), "sigma")
    mu = LeafMeasure(g, data.draw(leaf_arrays(g, 0.2, 3.0, zeros=False)))
    lam = np.array(data.draw(st.lists(st.floats(0.1, 2), min_size=g.num_cubes, max_size=g.num_cubes)))
    e = ExponentTriple(3, 2, 3)
    t = 2.0 ** k
    base = operator_norm(lam, sigma, mu, e).value
    assert operator_norm(t * lam, sigma, mu, e).value == pytest.approx(t * base, rel=1e-10)
    red = reduction_condition_value(lam, sigma, mu, e)
    assert reduction_condition_value(t * lam, sigma, mu, e) == pytest.approx(t ** 2 * red, rel=1e-10)


def test_operator_norm_certificate_replays():
    g = GridSpec(1, 2)
    s = LeafMeasure(g, [1, 2, 3, 4], "sigma")
    mu = LeafMeasure(g, [2, 1, 1, 3])
    lam = g.cube_array({ROOT: 1, L0: 0.5, CubeId(2, (3,)): 2})
    e = ExponentTriple(2.5, 1.5, math.inf)
    rep = operator_norm(lam, s, mu, e, seed=7)
    assert operator_norm_ratio(lam, s, mu, e, rep.certificate) == pytest.approx(rep.value, rel=1e-9)
    assert rep.value >= operator_norm_bruteforce(lam, s, mu, e).value * (1 - 1e-6)


def test_weak_cond_examples(inst_a):
    g, lam, s, mu = inst_a
    e = E322
    G, F = CubeFamily(g, [ROOT], "mu"), CubeFamily(g, [ROOT])
    out = weak_cond_values(lam, s, mu, e, 1.5, np.array([1.0, 0.0]), G, {ROOT: 1}, F, {ROOT: 1})
    assert out["cond1"] == pytest.approx(2 ** (2 / 3), rel=1e-12)
    assert out["cond2"] == pytest.approx(2 ** (2 / 3), rel=1e-12)
    full = weak_cond_values(lam, s, mu, e, 1.5, np.ones(2), G, {ROOT: 1}, F, {ROOT: 1}, printed=False)
    scale = 2 ** ((2 - 1.5) / (2 * 1.5))
    assert full["cond2"] == pytest.approx(cond2_value(lam, s, mu, e, F, {ROOT: 1}, q=1.5) / scale, rel=1e-12)
    assert weak_cond_values(lam, s, mu, e, 1.5, np.ones(2), G, {}, None, None)["cond1"] == 0


def test_witness_examples(inst_a):
    g, lam, _, mu = inst_a
    for s in (1.5, 2, 7):
        rep = a1_a2_witness(lam, mu, s)
        assert rep.a1 == pytest.approx(2) and rep.ratio == pytest.approx(2)
        assert rep.denominator == pytest.approx(1)
    assert a1_a2_witness(g.cube_array({}), mu, 2).a1 == 0
    assert a1_a2_witness(g.cube_array({L0: 3}), LeafMeasure(g, [0, 1]), 2).a1 == 0


@given(grids(), st.data(), st.floats(1.05, 8))
def test_witness_attains_a1(g, data, s):
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    Lam = np.array(data.draw(st.lists(st.one_of(st.just(0.0), st.floats(0, 5)),
                                      min_size=g.num_cubes, max_size=g.num_cubes)))
    rep = a1_a2_witness(Lam, mu, s)
    assert rep.numerator >= rep.a1 - 1e-9 * max(1, rep.a1)
    assert rep.denominator <= 1 + 1e-9


def test_dorverbitsky_examples():
    g = GridSpec(1, 1)
    mu = LeafMeasure(g, [1, 1])
    b = g.cube_array({ROOT: 1})
    E = DisjointAllocation(g, {ROOT: np.array([0.5, 0.0])})
    assert dorverbitsky_value(b, mu, 2, 4, E) == pytest.approx(1)
    assert dorverbitsky_value(b, mu, 2, 2) == pytest.approx(math.sqrt(2))
    assert dorverbitsky_value(g.cube_array({}), mu, 2, 3) == 0


@given(grids(), st.data(), st.floats(1.0, 4.0))
def test_dorverbitsky_endpoints(g, data, q):
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    b = np.array(data.draw(st.lists(st.one_of(st.just(0.0), st.floats(0, 5)),
                                    min_size=g.num_cubes, max_size=g.num_cubes)))
    E = linearizing_allocation(b, mu)
    assert dorverbitsky_value(b, mu, q, q, E) == dorverbitsky_value(b, mu, q, q)
    top = maximal_norm(b, mu, q)
    assert dorverbitsky_value(b, mu, q, math.inf, E) == pytest.approx(top, rel=1e-12, abs=1e-12)
    other = DisjointAllocation(g, {g.root: np.ones(g.num_leaves)})
    assert dorverbitsky_value(b, mu, q, math.inf, other) <= top * (1 + 1e-12) + 1e-12
