import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoweight.errors import EmptySet
from twoweight.grid import CubeId, GridSpec
from twoweight.measure import LeafMeasure
from twoweight.operator import (
    ExponentTriple,
    apply_T,
    apply_T_local,
    apply_T_star,
    kolmogorov_value,
    linf_ls_norm,
    maximal_multiplier,
    mixed_norm,
    multiplier_lhs,
    pairing,
    reduce_to_linear,
    s_eq_q_condition,
    weak_norm,
)
from twoweight.measure import lp_norm
from twoweight.oracles import naive_T, naive_T_star, naive_mixed_norm, naive_pairing_dual

from conftest import cube_arrays, grids, leaf_arrays

ROOT, L0, L1 = CubeId(0, (0,)), CubeId(1, (0,)), CubeId(1, (1,))


def arr(g, mapping):
    return g.cube_array(mapping)


def test_exponent_triple_derived_fields():
    e = ExponentTriple(3, 2, 4)
    assert e.r == pytest.approx(6)
    assert e.p_conj == pytest.approx(1.5)
    assert e.s_conj == pytest.approx(4 / 3)
    assert e.p_tilde == pytest.approx(1.5)
    assert ExponentTriple(3, 2, math.inf).s_conj == 1
    for bad in [(2, 2, 2), (3, 1, 2), (3, 2, 1.5)]:
        with pytest.raises(ValueError):
            ExponentTriple(*bad)


def test_apply_T_examples(line1):
    g, s, _ = line1
    out = apply_T(arr(g, {ROOT: 1}), s, np.ones(2))
    assert out.tolist() == [2, 0, 0]
    assert not apply_T(arr(g, {}), s, np.ones(2)).any()
    assert not apply_T(arr(g, {ROOT: 1}), s, np.zeros(2)).any()


def test_apply_T_local():
    g = GridSpec(1, 2)
    s = LeafMeasure(g, np.ones(4), "sigma")
    lam = arr(g, {ROOT: 1, L0: 1})
    f = np.ones(4)
    assert np.array_equal(apply_T_local(lam, s, f, ROOT), apply_T(lam, s, f))
    out = apply_T_local(lam, s, f, L0)
    assert out[g.flat(L0)] == 2 and out.sum() == 2
    assert not apply_T_local(lam, s, f, g.leaf(0)).any()


def test_apply_T_star_examples(line1):
    g, _, mu = line1
    lam = arr(g, {ROOT: 1})
    assert apply_T_star(lam, mu, arr(g, {ROOT: 1})).tolist() == [2, 2]
    assert not apply_T_star(lam, mu, arr(g, {})).any()
    assert not apply_T_star(arr(g, {}), mu, arr(g, {ROOT: 1})).any()


def test_mixed_norm_examples(line1):
    g, _, mu = line1
    assert mixed_norm(arr(g, {ROOT: 2}), mu, 2, 2) == pytest.approx(2 * math.sqrt(2), rel=1e-15)
    for q, s in [(1.5, 2), (2, math.inf), (3, 3)]:
        assert mixed_norm(arr(g, {L1: 1}), mu, q, s) == pytest.approx(1, rel=1e-15)
    assert mixed_norm(arr(g, {}), mu, 2, 2) == 0


def test_weak_norm_examples(line1):
    g, _, mu = line1
    assert weak_norm(np.array([3.0, 3.0]), 2, mu) == pytest.approx(18)
    assert weak_norm(np.array([2.0, 1.0]), 2, mu) == 4
    assert weak_norm(np.zeros(2), 2, mu) == 0


def test_kolmogorov_examples():
    g = GridSpec(1, 1)
    half = LeafMeasure(g, [0.5, 0.5])
    assert kolmogorov_value(np.ones(2), 2, 1, half, np.ones(2)) == pytest.approx(1)
    mu = LeafMeasure(g, [1, 1])
    assert kolmogorov_value(np.array([2.0, 1.0]), 2, 1, mu, np.ones(2)) == pytest.approx(3 / math.sqrt(2))
    with pytest.raises(EmptySet):
        kolmogorov_value(np.ones(2), 2, 1, mu, np.zeros(2))


def test_linf_ls_norm_examples(line1):
    g, _, mu = line1
    for sc in (1, 2, 5):
        assert linf_ls_norm(arr(g, {ROOT: 1}), mu, sc) == pytest.approx(1)
    assert linf_ls_norm(arr(g, {ROOT: 1, L0: 1}), mu, 2) == pytest.approx(math.sqrt(2))
    assert linf_ls_norm(arr(g, {L0: 7, L1: 1}), LeafMeasure(g, [0, 1]), 1) == 1


def test_pairing_examples(line1):
    g, s, mu = line1
    lam = arr(g, {ROOT: 1})
    assert pairing(lam, s, mu, np.ones(2), arr(g, {ROOT: 1})) == 4
    assert pairing(lam, s, mu, np.zeros(2), arr(g, {ROOT: 1})) == 0
    assert pairing(arr(g, {}), s, mu, np.ones(2), arr(g, {ROOT: 1})) == 0


def test_maximal_multiplier_examples():
    g = GridSpec(1, 1)
    assert maximal_multiplier(arr(g, {ROOT: 1, L0: 2}), g).tolist() == [2, 1]
    assert not maximal_multiplier(arr(g, {}), g).any()
    assert maximal_multiplier(arr(g, {L1: 3}), g).tolist() == [0, 3]


def test_multiplier_lhs_examples(line1):
    g, s, mu = line1
    lam = arr(g, {ROOT: 1})
    assert multiplier_lhs(lam, s, arr(g, {ROOT: 1}), mu, 2, 2) == pytest.approx(2 * math.sqrt(2))
    assert multiplier_lhs(lam, s, arr(g, {}), mu, 2, 2) == 0
    assert multiplier_lhs(arr(g, {}), s, arr(g, {ROOT: 1}), mu, 2, 2) == 0


def test_reduce_to_linear_examples(line1):
    g, s, _ = line1
    lam = arr(g, {ROOT: 1, L0: 0.25})
    assert np.allclose(reduce_to_linear(lam, s, 1), lam)
    assert reduce_to_linear(arr(g, {ROOT: 1}), s, 2).tolist() == [2, 0, 0]
    assert not reduce_to_linear(arr(g, {}), s, 2).any()


def test_s_eq_q_condition_examples(line1):
    g, s, mu = line1
    assert s_eq_q_condition(arr(g, {}), s, mu, 3, 2) == 0
    assert s_eq_q_condition(arr(g, {ROOT: 1}), s, mu, 3, 2) == pytest.approx(4 * 2 ** (1 / 3))
    one = LeafMeasure(g, [1, 0], "sigma")
    assert s_eq_q_condition(arr(g, {L1: 1}), one, mu, 3, 2) == 0


def _random_case(g, data, signed=False):
    lo = -5.0 if signed else 0.0
    lam = data.draw(cube_arrays(g))
    sigma = LeafMeasure(g, data.draw(leaf_arrays(g)), "sigma")
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    f = data.draw(leaf_arrays(g, lo, 5.0))
    gv = data.draw(cube_arrays(g, lo, 5.0))
    return lam, sigma, mu, f, gv


@given(grids(), st.data())
def test_adjoint_identity(g, data):
    lam, sigma, mu, f, gv = _random_case(g, data, signed=True)
    lhs = pairing(lam, sigma, mu, f, gv)
    rhs = naive_pairing_dual(f, sigma, apply_T_star(lam, mu, gv))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(grids(), st.data())
def test_T_and_T_star_match_naive(g, data):
    lam, sigma, mu, f, gv = _random_case(g, data)
    assert np.allclose(apply_T(lam, sigma, f), naive_T(lam, sigma, f), rtol=1e-12, atol=1e-12)
    assert np.allclose(apply_T_star(lam, mu, gv), naive_T_star(lam, mu, gv), rtol=1e-12, atol=1e-12)


@given(grids(), st.data(), st.floats(1.0, 4.0), st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]))
def test_mixed_norm_matches_naive(g, data, q, s):
    v = data.draw(cube_arrays(g))
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    s = max(s, q) if not math.isinf(s) else s
    assert mixed_norm(v, mu, q, s) == pytest.approx(naive_mixed_norm(v, mu, q, s), rel=1e-12, abs=1e-12)


@given(grids(), st.data(), st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_linearity_and_homogeneity(g, data, a, b):
    lam, sigma, mu, f, _ = _random_case(g, data)
    f2 = data.draw(leaf_arrays(g))
    lhs = apply_T(lam, sigma, a * f + b * f2)
    rhs = a * apply_T(lam, sigma, f) + b * apply_T(lam, sigma, f2)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)
    assert np.allclose(apply_T(a * lam, sigma, f), a * apply_T(lam, sigma, f), rtol=1e-12, atol=1e-9)
    v = apply_T(lam, sigma, f)
    assert mixed_norm(a * v, mu, 2, 3) == pytest.approx(a * mixed_norm(v, mu, 2, 3), rel=1e-12, abs=1e-12)


@given(grids(), st.data(), st.floats(1.0, 3.0))
def test_mixed_norm_nonincreasing_in_s(g, data, q):
    v = data.draw(cube_arrays(g))
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    values = [mixed_norm(v, mu, q, s) for s in (q, q + 0.5, 2 * q, 4 * q, math.inf)]
    for a, b in zip(values, values[1:]):
        assert b <= a * (1 + 1e-12) + 1e-12


@given(grids(), st.data(), st.floats(1.0, 4.0))
def test_weak_norm_chebyshev(g, data, q):
    mu = LeafMeasure(g, data.draw(leaf_arrays(g)))
    h = data.draw(leaf_arrays(g))
    # weak_norm is the q-th power sup_t t^q mu(|h| >= t), so compare with ||h||_q^q
    assert weak_norm(h, q, mu) <= lp_norm(h, q, mu) ** q * (1 + 1e-12) + 1e-12


@settings(max_examples=60)
@given(st.integers(1, 3), st.data(), st.floats(1.2, 4.0), st.floats(0.1, 0.95))
def test_kolmogorov_two_sided_band(depth, data, q, frac):
    g = GridSpec(1, depth)
    alpha = frac * q
    mu = LeafMeasure(g, data.draw(leaf_arrays(g, 0.1, 5.0, zeros=False)))
    h = data.draw(leaf_arrays(g, 0.0, 10.0))
    weak = weak_norm(h, q, mu) ** (1 / q)
    best = 0.0
    for bits in itertools.product([0.0, 1.0], repeat=g.num_leaves):
        if any(bits):
            best = max(best, kolmogorov_value(h, q, alpha, mu, np.array(bits)))
    upper = (q / (q - alpha)) ** (1 / alpha)
    assert weak <= best * (1 + 1e-12) + 1e-12
    assert best <= upper * weak * (1 + 1e-12) + 1e-12


@given(grids(), st.data())
def test_reduce_to_linear_identity_at_s_one(g, data):
    lam, sigma, *_ = _random_case(g, data)
    out = reduce_to_linear(lam, sigma, 1)
    masses = sigma.cube_masses
    assert np.allclose(out[masses > 0], lam[masses > 0])
