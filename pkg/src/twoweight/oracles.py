"""Slow reference computations that walk cubes one by one.

They share no aggregation code with the vectorised evaluators and exist to
cross-check them.
"""

from __future__ import annotations

import math

from .grid import GridSpec
from .measure import LeafMeasure


def naive_T(lam, sigma: LeafMeasure, f) -> list[float]:
    grid = sigma.grid
    out = []
    for i, cube in enumerate(grid.enumerate_cubes()):
        total = 0.0
        for leaf in grid.leaves_under(cube):
            total += float(f[leaf]) * float(sigma.masses[leaf])
        out.append(float(lam[i]) * total)
    return out


def naive_T_star(lam, mu: LeafMeasure, g) -> list[float]:
    grid = mu.grid
    out = []
    for leaf in range(grid.num_leaves):
        total = 0.0
        for cube in grid.ancestors(leaf):
            i = grid.flat(cube)
            mass = sum(float(mu.masses[l]) for l in grid.leaves_under(cube))
            total += float(lam[i]) * float(g[i]) * mass
        out.append(total)
    return out


def naive_mixed_norm(v, mu: LeafMeasure, q: float, s: float) -> float:
    """Materialise the l^s aggregate leaf by leaf, then integrate its q-th power."""
    grid: GridSpec = mu.grid
    total = 0.0
    for leaf in range(grid.num_leaves):
        vals = [abs(float(v[grid.flat(c)])) for c in grid.ancestors(leaf)]
        if math.isinf(s):
            agg = max(vals)
        else:
            agg = math.fsum(x ** s for x in vals) ** (1.0 / s)
        total += agg ** q * float(mu.masses[leaf])
    return total ** (1.0 / q)


def naive_pairing_dual(f, sigma: LeafMeasure, h) -> float:
    """``int f h dsigma`` summed leaf by leaf."""
    return math.fsum(float(f[l]) * float(h[l]) * float(sigma.masses[l]) for l in range(len(f)))
