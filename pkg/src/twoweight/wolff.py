"""Dyadic Wolff potentials and their sparse counterparts.

``W(f)(x) = sum_{Q containing x} (int_Q f dx / |Q|^{1 - alpha/n})^s`` with
Lebesgue measure on the grid (every leaf has volume ``2^{-nD}``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroFunction
from .grid import GridSpec
from .measure import LeafMeasure
from .operator import ExponentTriple
from .sparse import CubeFamily, stopping_family


@dataclass(frozen=True)
class WolffParams:
    alpha: float
    s: float

    def check(self, grid: GridSpec) -> None:
        if not 0 < self.alpha < grid.dimension:
            raise ValueError(f"need 0 < alpha < n, got alpha={self.alpha}")
        if not self.s > 0:
            raise ValueError(f"need s > 0, got s={self.s}")

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "s": self.s}

    @classmethod
    def from_json(cls, obj) -> "WolffParams":
        return cls(float(obj["alpha"]), float(obj["s"]))


def cube_volumes(grid: GridSpec) -> np.ndarray:
    return 2.0 ** (-grid.dimension * grid.levels.astype(float))


def _terms(f: np.ndarray, w: WolffParams, grid: GridSpec) -> np.ndarray:
    w.check(grid)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.num_leaves,):
        raise ValueError(f"expected {grid.num_leaves} leaf values, got {f.shape}")
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    integrals = grid.aggregate(f) / grid.num_leaves
    # |Q|^{-(1 - alpha/n) s} = 2^{k (n - alpha) s}; exp2 keeps dyadic cases exact
    return integrals ** w.s * np.exp2(grid.levels * (grid.dimension - w.alpha) * w.s)


def wolff_dyadic(f: np.ndarray, w: WolffParams, grid: GridSpec) -> np.ndarray:
    return grid.push_down(_terms(f, w, grid))


def wolff_sparse(f: np.ndarray, w: WolffParams, S: CubeFamily) -> np.ndarray:
    grid = S.grid
    return grid.push_down(np.where(S.mask, _terms(f, w, grid), 0.0))


def wolff_sparse_family(f: np.ndarray, grid: GridSpec, threshold: float = 2.0) -> CubeFamily:
    """Lebesgue stopping cubes of ``f``: averages more than double along the family."""
    f = np.asarray(f, dtype=float)
    if not np.any(f > 0):
        raise ZeroFunction("f vanishes identically")
    return stopping_family(f, LeafMeasure.lebesgue(grid), threshold)


def domination_ratio(f: np.ndarray, w: WolffParams, S: CubeFamily) -> float:
    """``max_x W(f)(x) / W_S(f)(x)`` over leaves where the full potential is positive."""
    full = wolff_dyadic(f, w, S.grid)
    part = wolff_sparse(f, w, S)
    live = full > 0
    if not live.any():
        return 1.0
    if np.any(part[live] == 0):
        return float("inf")
    return float((full[live] / part[live]).max())


def wolff_condition_value(sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, w: WolffParams,
                          S: CubeFamily) -> float:
    """Linear testing condition with ``lambda_Q = |Q|^{alpha/n - 1}`` on ``S`` and ``E_Q = Q``.

    Equals ``||sum_{Q in S} (lambda_Q sigma(Q))^q mu(Q) sigma(Q)^{-1} chi_Q||_{L^{(p/q)'}(sigma)}``
    and does not depend on ``s``.
    """
    from .operator import s_eq_q_condition

    grid = sigma.grid
    w.check(grid)
    lam = np.where(S.mask, cube_volumes(grid) ** (w.alpha / grid.dimension - 1.0), 0.0)
    sm = np.asarray(sigma.cube_masses, dtype=float)
    lam[sm == 0] = 0.0
    return s_eq_q_condition(lam, sigma.to_float(), mu.to_float(), e.p, e.q)
