"""Finite dyadic system on the unit root cube [0, 1)^n.

Cubes are addressed either by a :class:`CubeId` (level plus integer
coordinates) or by a *flat index*: the position of the cube in the
``(level, Morton index)`` ordering.  Cube-indexed data (coefficients,
vector functions) is stored as dense arrays of length ``grid.num_cubes``
in that flat order, and leaf-indexed data (measures, functions, fractional
sets) as arrays of length ``grid.num_leaves`` in canonical leaf order.

The canonical leaf order is depth-first lexicographic over children, where
the child number interleaves the coordinate bits with the first coordinate
most significant.  Leaves under any cube therefore form a contiguous block,
and the children of a cube are consecutive at the next level.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import numpy as np


@dataclass(frozen=True, order=True)
class CubeId:
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "index", tuple(int(j) for j in self.index))

    def to_json(self) -> dict:
        return {"level": self.level, "index": list(self.index)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "CubeId":
        return cls(int(obj["level"]), tuple(obj["index"]))

    def __str__(self):
        return f"Q{self.level}{list(self.index)}"


@dataclass(frozen=True)
class GridSpec:
    """Dyadic cubes of levels ``0..depth`` inside ``[0, 1)^dimension``."""

    dimension: int
    depth: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")

    # -- sizes ---------------------------------------------------------------

    @property
    def arity(self) -> int:
        return 1 << self.dimension

    @property
    def num_leaves(self) -> int:
        return 1 << (self.dimension * self.depth)

    def level_size(self, k: int) -> int:
        return 1 << (self.dimension * k)

    def offset(self, k: int) -> int:
        """Flat index of the first cube at level ``k``."""
        return (self.level_size(k) - 1) // (self.arity - 1)

    @property
    def num_cubes(self) -> int:
        return self.offset(self.depth + 1)

    @property
    def root(self) -> CubeId:
        return CubeId(0, (0,) * self.dimension)

    def volume(self, cube: CubeId) -> float:
        return 2.0 ** (-cube.level * self.dimension)

    # -- addressing ----------------------------------------------------------

    def morton(self, cube: CubeId) -> int:
        n = self.dimension
        code = 0
        for bit in range(cube.level - 1, -1, -1):
            for d in range(n):
                code = (code << 1) | ((cube.index[d] >> bit) & 1)
        return code

    def validate(self, cube: CubeId) -> None:
        if not 0 <= cube.level <= self.depth:
            raise ValueError(f"{cube} has level outside [0, {self.depth}]")
        if len(cube.index) != self.dimension:
            raise ValueError(f"{cube} does not have {self.dimension} coordinates")
        side = 1 << cube.level
        if any(not 0 <= j < side for j in cube.index):
            raise ValueError(f"{cube} has coordinates outside [0, {side})")

    def flat(self, cube: CubeId) -> int:
        self.validate(cube)
        return self.offset(cube.level) + self.morton(cube)

    def cube(self, flat: int) -> CubeId:
        return self._cubes[flat]

    def cube_at(self, level: int, morton: int) -> CubeId:
        n = self.dimension
        index = [0] * n
        for bit in range(level):
            for d in range(n - 1, -1, -1):
                index[d] |= (morton & 1) << bit
                morton >>= 1
        return CubeId(level, tuple(index))

    @cached_property
    def _cubes(self) -> tuple[CubeId, ...]:
        return tuple(
            self.cube_at(k, m)
            for k in range(self.depth + 1)
            for m in range(self.level_size(k))
        )

    def leaf(self, position: int) -> CubeId:
        return self.cube_at(self.depth, position)

    # -- structure -----------------------------------------------------------

    def enumerate_cubes(self) -> list[CubeId]:
        return list(self._cubes)

    def __iter__(self) -> Iterator[CubeId]:
        return iter(self._cubes)

    def leaves_under(self, cube: CubeId) -> range:
        shift = self.dimension * (self.depth - cube.level)
        m = self.morton(cube)
        return range(m << shift, (m + 1) << shift)

    def parent(self, cube: CubeId) -> CubeId | None:
        if cube.level == 0:
            return None
        return CubeId(cube.level - 1, tuple(j >> 1 for j in cube.index))

    def children(self, cube: CubeId) -> list[CubeId]:
        if cube.level == self.depth:
            return []
        m = self.morton(cube)
        return [self.cube_at(cube.level + 1, (m << self.dimension) | c) for c in range(self.arity)]

    def ancestors(self, leaf: CubeId | int) -> list[CubeId]:
        """Chain of cubes from the root down to ``leaf`` (inclusive)."""
        if isinstance(leaf, CubeId):
            if leaf.level != self.depth:
                raise ValueError(f"{leaf} is not a leaf of a depth-{self.depth} grid")
            position = self.morton(leaf)
        else:
            position = int(leaf)
        return [self.cube(f) for f in self.ancestor_table[position]]

    def contains(self, outer: CubeId, inner: CubeId) -> bool:
        if inner.level < outer.level:
            return False
        shift = inner.level - outer.level
        return all((j >> shift) == i for i, j in zip(outer.index, inner.index))

    # -- vectorised tables ----------------------------------------------------

    @cached_property
    def ancestor_table(self) -> np.ndarray:
        """``(num_leaves, depth + 1)`` flat indices; column ``k`` is the level-k ancestor."""
        leaves = np.arange(self.num_leaves)
        cols = [
            self.offset(k) + (leaves >> (self.dimension * (self.depth - k)))
            for k in range(self.depth + 1)
        ]
        table = np.stack(cols, axis=1)
        table.flags.writeable = False
        return table

    @cached_property
    def levels(self) -> np.ndarray:
        """Level of every cube, in flat order."""
        out = np.concatenate(
            [np.full(self.level_size(k), k) for k in range(self.depth + 1)]
        )
        out.flags.writeable = False
        return out

    @cached_property
    def leaf_spans(self) -> np.ndarray:
        """``(num_cubes, 2)`` half-open leaf ranges, in flat order."""
        spans = np.empty((self.num_cubes, 2), dtype=np.int64)
        for k in range(self.depth + 1):
            width = 1 << (self.dimension * (self.depth - k))
            m = np.arange(self.level_size(k))
            sl = slice(self.offset(k), self.offset(k + 1))
            spans[sl, 0] = m * width
            spans[sl, 1] = (m + 1) * width
        spans.flags.writeable = False
        return spans

    @cached_property
    def parents(self) -> np.ndarray:
        """Flat index of each cube's parent (``-1`` for the root)."""
        out = np.full(self.num_cubes, -1, dtype=np.int64)
        for k in range(1, self.depth + 1):
            m = np.arange(self.level_size(k))
            out[self.offset(k):self.offset(k + 1)] = self.offset(k - 1) + (m >> self.dimension)
        out.flags.writeable = False
        return out

    # -- dyadic aggregation ----------------------------------------------------

    def aggregate(self, leaf_values: np.ndarray) -> np.ndarray:
        """Sum leaf values over every cube, bottom-up one level at a time.

        Works for float and object (``Fraction``) arrays alike.
        """
        leaf_values = np.asarray(leaf_values)
        if leaf_values.shape != (self.num_leaves,):
            raise ValueError(
                f"expected {self.num_leaves} leaf values, got shape {leaf_values.shape}"
            )
        layers = [leaf_values]
        for _ in range(self.depth):
            layers.append(layers[-1].reshape(-1, self.arity).sum(axis=1))
        return np.concatenate(layers[::-1])

    def push_down(self, cube_values: np.ndarray) -> np.ndarray:
        """For each leaf, the sum of ``cube_values`` over the cubes containing it."""
        cube_values = np.asarray(cube_values)
        return cube_values[self.ancestor_table].sum(axis=1)

    def subtree_sums(self, cube_values: np.ndarray) -> np.ndarray:
        """For each cube P, the sum of ``cube_values`` over the cubes Q inside P."""
        out = np.array(cube_values, copy=True)
        for k in range(self.depth, 0, -1):
            sl = slice(self.offset(k), self.offset(k + 1))
            up = out[sl].reshape(-1, self.arity).sum(axis=1)
            out[self.offset(k - 1):self.offset(k)] = out[self.offset(k - 1):self.offset(k)] + up
        return out

    # -- conversions ---------------------------------------------------------

    def cube_array(self, values: Mapping[CubeId, object] | None = None, dtype=float) -> np.ndarray:
        """Dense cube-indexed array from a sparse ``{CubeId: value}`` mapping."""
        if dtype is object:
            from fractions import Fraction

            out = np.array([Fraction(0)] * self.num_cubes, dtype=object)
        else:
            out = np.zeros(self.num_cubes, dtype=dtype)
        for cube, value in (values or {}).items():
            out[self.flat(cube)] = value
        return out

    def support(self, cube_values: np.ndarray) -> dict[CubeId, object]:
        """Sparse view of the nonzero entries of a cube-indexed array."""
        return {self.cube(int(i)): cube_values[i] for i in np.flatnonzero(cube_values != 0)}

    def cube_mask(self, cubes: Iterable[CubeId]) -> np.ndarray:
        mask = np.zeros(self.num_cubes, dtype=bool)
        for cube in cubes:
            mask[self.flat(cube)] = True
        return mask
