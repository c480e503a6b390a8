import numpy as np
import pytest
from hypothesis import strategies as st

from twoweight import GridSpec, LeafMeasure


@pytest.fixture
def line1():
    """One-dimensional grid of depth one with unit leaf masses."""
    g = GridSpec(1, 1)
    return g, LeafMeasure(g, [1.0, 1.0], "sigma"), LeafMeasure(g, [1.0, 1.0])


@st.composite
def grids(draw, max_leaves=256):
    n = draw(st.integers(1, 2))
    depth = draw(st.integers(0, 4 if n == 1 else 3))
    g = GridSpec(n, depth)
    return g if g.num_leaves <= max_leaves else GridSpec(1, depth)


def leaf_arrays(grid, min_value=0.0, max_value=10.0, zeros=True):
    element = st.floats(min_value, max_value, allow_nan=False, allow_infinity=False)
    if zeros:
        element = st.one_of(st.just(0.0), element)
    return st.lists(element, min_size=grid.num_leaves, max_size=grid.num_leaves).map(np.array)


def cube_arrays(grid, min_value=0.0, max_value=10.0):
    element = st.one_of(st.just(0.0), st.floats(min_value, max_value, allow_nan=False))
    return st.lists(element, min_size=grid.num_cubes, max_size=grid.num_cubes).map(np.array)
