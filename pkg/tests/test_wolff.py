import numpy as np
import pytest
from hypothesis import given, strategies as st

from twoweight.errors import ZeroFunction
from twoweight.grid import CubeId, GridSpec
from twoweight.measure import LeafMeasure
from twoweight.operator import ExponentTriple
from twoweight.sparse import CubeFamily, family_carleson_check, is_sigma_sparse
from twoweight.wolff import (
    WolffParams,
    domination_ratio,
    wolff_condition_value,
    wolff_dyadic,
    wolff_sparse,
    wolff_sparse_family,
)

from conftest import grids, leaf_arrays

ROOT = CubeId(0, (0,))
HALF = WolffParams(0.5, 2)


def test_wolff_dyadic_examples():
    g = GridSpec(1, 1)
    assert wolff_dyadic(np.ones(2), HALF, g).tolist() == [1.5, 1.5]
    assert not wolff_dyadic(np.zeros(2), HALF, g).any()
    g0 = GridSpec(1, 0)
    assert wolff_dyadic(np.array([3.0]), HALF, g0).tolist() == [9.0]


def test_wolff_sparse_examples():
    g = GridSpec(1, 1)
    f = np.array([1.0, 2.0])
    assert np.array_equal(wolff_sparse(f, HALF, CubeFamily(g, list(g))), wolff_dyadic(f, HALF, g))
    assert not wolff_sparse(f, HALF, CubeFamily(g)).any()
    assert wolff_sparse(np.ones(2), HALF, CubeFamily(g, [ROOT])).tolist() == [1.0, 1.0]


def test_wolff_family_examples():
    g = GridSpec(1, 2)
    assert wolff_sparse_family(np.full(4, 2.0), g) == CubeFamily(g, [ROOT])
    # the parent of the spike leaf only doubles the root average, so it does not stop
    spike = wolff_sparse_family(np.array([0, 0, 0, 1.0]), g)
    assert spike == CubeFamily(g, [ROOT, CubeId(2, (3,))])
    g2 = GridSpec(2, 2)
    f = np.zeros(16)
    f[-1] = 1.0
    assert wolff_sparse_family(f, g2) == CubeFamily(g2, [g2.root, CubeId(1, (1, 1)), CubeId(2, (3, 3))])
    g0 = GridSpec(1, 0)
    F = wolff_sparse_family(np.ones(1), g0)
    assert F == CubeFamily(g0, [ROOT]) and domination_ratio(np.ones(1), HALF, F) == 1
    with pytest.raises(ZeroFunction):
        wolff_sparse_family(np.zeros(4), g)


def test_wolff_params_validated():
    g = GridSpec(1, 1)
    for bad in (WolffParams(1.0, 2), WolffParams(0.0, 2), WolffParams(0.5, 0)):
        with pytest.raises(ValueError):
            wolff_dyadic(np.ones(2), bad, g)


def test_wolff_condition_examples():
    g = GridSpec(1, 1)
    s = LeafMeasure(g, [1, 1], "sigma")
    mu = LeafMeasure(g, [1, 1])
    e = ExponentTriple(3, 2, 2)
    assert wolff_condition_value(s, mu, e, HALF, CubeFamily(g)) == 0
    assert wolff_condition_value(s, mu, e, HALF, CubeFamily(g, [ROOT])) == pytest.approx(4 * 2 ** (1 / 3))
    null = LeafMeasure(g, [0, 0], "sigma")
    assert wolff_condition_value(null, mu, e, HALF, CubeFamily(g, [ROOT])) == 0


def _params(g, data):
    alpha = data.draw(st.floats(0.1, 0.95)) * g.dimension
    return WolffParams(alpha, data.draw(st.floats(0.5, 3)))


@given(grids(), st.data())
def test_sparse_below_full(g, data):
    w = _params(g, data)
    f = data.draw(leaf_arrays(g))
    mask = np.array(data.draw(st.lists(st.booleans(), min_size=g.num_cubes, max_size=g.num_cubes)))
    part = wolff_sparse(f, w, CubeFamily.from_mask(g, mask))
    assert np.all(part <= wolff_dyadic(f, w, g) * (1 + 1e-12))


@given(grids(), st.data())
def test_monotone_and_homogeneous(g, data):
    w = _params(g, data)
    f = data.draw(leaf_arrays(g))
    bump = data.draw(leaf_arrays(g))
    full = wolff_dyadic(f, w, g)
    assert np.all(full <= wolff_dyadic(f + bump, w, g) * (1 + 1e-12))
    t = data.draw(st.floats(0.0, 10.0))
    assert np.allclose(wolff_dyadic(t * f, w, g), t ** w.s * full, rtol=1e-12, atol=0)


@given(grids(), st.data())
def test_stopping_family_is_lebesgue_sparse(g, data):
    f = data.draw(leaf_arrays(g))
    if not f.any():
        return
    F = wolff_sparse_family(f, g)
    leb = LeafMeasure.lebesgue(g, exact=True)
    assert is_sigma_sparse(F, leb)[0]
    assert family_carleson_check(F, leb, 2).ok
    w = _params(g, data)
    assert np.isfinite(domination_ratio(f, w, F))
