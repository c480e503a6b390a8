"""Discrete non-atomic measures on the leaves of a dyadic grid.

A measure assigns a nonnegative mass to every leaf.  Leaves are divisible:
any fraction of a leaf is a measurable set carrying that fraction of the
leaf's mass, which is how "no point masses" is modelled.  A fractional set
is therefore just an array of per-leaf fractions in [0, 1].

Within a leaf, a fraction ``t`` is read as the initial segment ``[0, t)`` of
the leaf's mass coordinate.  Disjoint allocations stack such segments, so a
leaf's per-cube fractions may sum to at most 1.

Masses may be floats or :class:`fractions.Fraction` (exact mode); everything
that only adds, compares or divides masses stays exact in the latter case.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np

from .errors import OverlappingAllocation, ZeroMassCube
from .grid import CubeId, GridSpec


def as_exact(values) -> np.ndarray:
    """Object array of Fractions (strings such as ``"0.1"`` parse exactly)."""
    return np.array([v if isinstance(v, Fraction) else Fraction(str(v)) for v in values], dtype=object)


def is_exact(arr: np.ndarray) -> bool:
    return np.asarray(arr).dtype == object


class LeafMeasure:
    """Per-leaf masses with cached cube masses.

    Parameters
    ----------
    grid : GridSpec
    masses : array-like
        One nonnegative mass per leaf in canonical order.
    role : str
        Informational tag, ``"sigma"`` or ``"mu"``.
    exact : bool
        Store masses as Fractions.
    """

    def __init__(self, grid: GridSpec, masses, role: str = "mu", exact: bool | None = None):
        if exact is None:
            exact = any(isinstance(v, Fraction) for v in np.asarray(masses, dtype=object).ravel())
        arr = as_exact(masses) if exact else np.asarray(masses, dtype=float)
        if arr.shape != (grid.num_leaves,):
            raise ValueError(f"expected {grid.num_leaves} masses, got {arr.shape}")
        if not exact and not np.all(np.isfinite(arr)):
            raise ValueError("masses must be finite")
        if np.any(arr < 0):
            raise ValueError("masses must be nonnegative")
        arr.flags.writeable = False
        self.grid = grid
        self.masses = arr
        self.role = role
        self.exact = exact

    def __repr__(self):
        return f"LeafMeasure({self.role}, n={self.grid.dimension}, D={self.grid.depth}, total={self.total})"

    @cached_property
    def cube_masses(self) -> np.ndarray:
        out = self.grid.aggregate(self.masses)
        out.flags.writeable = False
        return out

    @property
    def total(self):
        return self.cube_masses[0]

    def cube_mass(self, cube: CubeId):
        return self.cube_masses[self.grid.flat(cube)]

    def zeros(self, size: int | None = None) -> np.ndarray:
        size = self.grid.num_leaves if size is None else size
        if self.exact:
            return np.array([Fraction(0)] * size, dtype=object)
        return np.zeros(size)

    def restrict(self, fractions: np.ndarray) -> "LeafMeasure":
        """The measure restricted to a fractional set."""
        return LeafMeasure(self.grid, self.masses * np.asarray(fractions), self.role, self.exact)

    def to_float(self) -> "LeafMeasure":
        if not self.exact:
            return self
        return LeafMeasure(self.grid, self.masses.astype(float), self.role, exact=False)

    @classmethod
    def lebesgue(cls, grid: GridSpec, exact: bool = False) -> "LeafMeasure":
        leaf = Fraction(1, grid.num_leaves) if exact else 1.0 / grid.num_leaves
        return cls(grid, [leaf] * grid.num_leaves, role="lebesgue", exact=exact)


def cube_mass(m: LeafMeasure, cube: CubeId):
    return m.cube_mass(cube)


def set_mass(m: LeafMeasure, fractions: np.ndarray):
    return (np.asarray(fractions) * m.masses).sum()


def integrate(f: np.ndarray, m: LeafMeasure, cube: CubeId):
    span = m.grid.leaves_under(cube)
    sl = slice(span.start, span.stop)
    return (np.asarray(f)[sl] * m.masses[sl]).sum()


def average(f: np.ndarray, m: LeafMeasure, cube: CubeId):
    mass = m.cube_mass(cube)
    if mass == 0:
        raise ZeroMassCube(cube)
    return integrate(f, m, cube) / mass


def lp_norm(f: np.ndarray, p: float, m: LeafMeasure) -> float:
    """``(sum |f|^p m)^(1/p)``; ``p = inf`` gives the m-essential supremum."""
    f = np.abs(np.asarray(f, dtype=float))
    w = np.asarray(m.masses, dtype=float)
    if math.isinf(p):
        live = w > 0
        return float(f[live].max()) if live.any() else 0.0
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    return float((f ** p * w).sum() ** (1.0 / p))


# -- fractional sets ------------------------------------------------------------


def empty_set(grid: GridSpec, exact: bool = False) -> np.ndarray:
    if exact:
        return np.array([Fraction(0)] * grid.num_leaves, dtype=object)
    return np.zeros(grid.num_leaves)


def full_set(grid: GridSpec, cube: CubeId | None = None, exact: bool = False) -> np.ndarray:
    out = empty_set(grid, exact)
    span = grid.leaves_under(cube or grid.root)
    out[span.start:span.stop] = Fraction(1) if exact else 1.0
    return out


class DisjointAllocation(Mapping):
    """Cube -> fractional set, with per-leaf totals at most one."""

    def __init__(self, grid: GridSpec, sets: Mapping[CubeId, np.ndarray] | None = None):
        self.grid = grid
        self._sets: dict[CubeId, np.ndarray] = {}
        for cube, fractions in (sets or {}).items():
            self[cube] = fractions

    def __setitem__(self, cube: CubeId, fractions) -> None:
        fractions = np.asarray(fractions)
        if fractions.shape != (self.grid.num_leaves,):
            raise ValueError(f"fractional set for {cube} has shape {fractions.shape}")
        span = self.grid.leaves_under(cube)
        outside = np.ones(self.grid.num_leaves, dtype=bool)
        outside[span.start:span.stop] = False
        if np.any(fractions[outside] != 0):
            raise ValueError(f"set for {cube} is not contained in the cube")
        if np.any(fractions < 0) or np.any(fractions > 1):
            raise ValueError(f"fractions for {cube} must lie in [0, 1]")
        self._sets[cube] = fractions

    def __getitem__(self, cube: CubeId) -> np.ndarray:
        return self._sets[cube]

    def __iter__(self) -> Iterator[CubeId]:
        return iter(self._sets)

    def __len__(self) -> int:
        return len(self._sets)

    def totals(self) -> np.ndarray:
        out = empty_set(self.grid, exact=any(is_exact(v) for v in self._sets.values()))
        for fractions in self._sets.values():
            out = out + fractions
        return out

    def is_disjoint(self, tol: float = 1e-9) -> bool:
        if not self._sets:
            return True
        return bool(np.all(self.totals() <= 1 + tol))

    def check_disjoint(self, tol: float = 1e-9) -> None:
        if not self._sets:
            return
        totals = self.totals()
        bad = np.flatnonzero(totals > 1 + tol)
        if bad.size:
            raise OverlappingAllocation(int(bad[0]), totals[bad[0]])

    def masses(self, m: LeafMeasure) -> dict[CubeId, object]:
        return {cube: set_mass(m, fractions) for cube, fractions in self._sets.items()}

    def mass_array(self, m: LeafMeasure) -> np.ndarray:
        """Cube-indexed array of allocated masses (zero where no set is given)."""
        out = m.zeros(self.grid.num_cubes)
        for cube, fractions in self._sets.items():
            out[self.grid.flat(cube)] = set_mass(m, fractions)
        return out

    def to_json(self) -> list[dict]:
        return [
            {"cube": cube.to_json(), "leaf_fractions": [_num_out(x) for x in fractions]}
            for cube, fractions in sorted(self._sets.items())
        ]

    @classmethod
    def from_json(cls, grid: GridSpec, items, exact: bool = False) -> "DisjointAllocation":
        sets = {}
        for item in items:
            values = item["leaf_fractions"]
            sets[CubeId.from_json(item["cube"])] = as_exact(values) if exact else np.asarray(values, dtype=float)
        return cls(grid, sets)


def _num_out(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    return float(x)
