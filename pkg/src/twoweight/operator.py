"""The vector-valued positive operator T and the norms it is measured in.

``T f`` is the cube-indexed vector ``v_Q = lambda_Q * int_Q f dsigma`` standing
for the vector function ``(v_Q chi_Q)_Q``.  Its size is measured in the mixed
norm ``L^q_{l^s}(mu)``: take the pointwise l^s aggregate over the cubes
containing each leaf, then the L^q(mu) norm of the result.

Coefficients and vectors are dense float arrays of length ``grid.num_cubes``
(flat cube order, see :mod:`twoweight.grid`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptySet
from .grid import CubeId, GridSpec
from .measure import LeafMeasure, lp_norm, set_mass

INF = math.inf


def conjugate(x: float) -> float:
    if math.isinf(x):
        return 1.0
    if x == 1:
        return INF
    return x / (x - 1.0)


@dataclass(frozen=True)
class ExponentTriple:
    """Exponents ``(p, q, s)`` with ``1 < q < p < inf`` and ``q <= s <= inf``."""

    p: float
    q: float
    s: float = INF

    def __post_init__(self):
        if not 1 < self.q < self.p < INF:
            raise ValueError(f"need 1 < q < p < inf, got p={self.p}, q={self.q}")
        if not self.q <= self.s <= INF:
            raise ValueError(f"need q <= s <= inf, got q={self.q}, s={self.s}")

    @property
    def r(self) -> float:
        return 1.0 / (1.0 / self.q - 1.0 / self.p)

    @property
    def p_conj(self) -> float:
        return conjugate(self.p)

    @property
    def q_conj(self) -> float:
        return conjugate(self.q)

    @property
    def s_conj(self) -> float:
        return conjugate(self.s)

    @property
    def s_tilde(self) -> float:
        return self.s / self.q

    @property
    def p_tilde(self) -> float:
        return self.p / self.q

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "s": "inf" if math.isinf(self.s) else self.s}

    @classmethod
    def from_json(cls, obj) -> "ExponentTriple":
        s = obj.get("s", "inf")
        return cls(float(obj["p"]), float(obj["q"]), INF if s == "inf" else float(s))


def clean_coefficients(lam: np.ndarray, sigma: LeafMeasure) -> np.ndarray:
    """Validate ``lam >= 0`` and zero it on cubes of zero sigma-mass."""
    lam = np.array(lam, copy=True)
    if lam.shape != (sigma.grid.num_cubes,):
        raise ValueError(f"expected {sigma.grid.num_cubes} coefficients, got {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("coefficients must be nonnegative")
    lam[sigma.cube_masses == 0] = 0
    return lam


# -- T, T_P, T* -----------------------------------------------------------------


def apply_T(lam: np.ndarray, sigma: LeafMeasure, f: np.ndarray, allow_signed: bool = False) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if not allow_signed and np.any(f < 0):
        raise ValueError("T is defined on nonnegative functions (pass allow_signed=True)")
    sums = sigma.grid.aggregate(f * np.asarray(sigma.masses, dtype=float))
    return np.asarray(lam, dtype=float) * sums


def local_mask(grid: GridSpec, top: CubeId) -> np.ndarray:
    """Boolean cube mask of the cubes contained in ``top``."""
    mask = np.zeros(grid.num_cubes, dtype=bool)
    m = grid.morton(top)
    for k in range(top.level, grid.depth + 1):
        width = 1 << (grid.dimension * (k - top.level))
        start = grid.offset(k) + m * width
        mask[start:start + width] = True
    return mask


def apply_T_local(lam, sigma: LeafMeasure, f, top: CubeId, allow_signed: bool = False) -> np.ndarray:
    return apply_T(lam, sigma, f, allow_signed) * local_mask(sigma.grid, top)


def apply_T_star(lam: np.ndarray, mu: LeafMeasure, g: np.ndarray) -> np.ndarray:
    """Leaf function ``sum_{Q containing x} lambda_Q g_Q mu(Q)``."""
    weights = np.asarray(lam, dtype=float) * np.asarray(g, dtype=float) * np.asarray(mu.cube_masses, dtype=float)
    return mu.grid.push_down(weights)


def pairing(lam, sigma: LeafMeasure, mu: LeafMeasure, f, g) -> float:
    """``sum_Q lambda_Q (int_Q f dsigma) (int_Q g_Q dmu)``, summed cube by cube."""
    grid = sigma.grid
    f = np.asarray(f, dtype=float)
    s_m = np.asarray(sigma.masses, dtype=float)
    u_m = np.asarray(mu.masses, dtype=float)
    total = 0.0
    for i, (lo, hi) in enumerate(grid.leaf_spans):
        if lam[i] == 0 or g[i] == 0:
            continue
        total += lam[i] * float(np.dot(f[lo:hi], s_m[lo:hi])) * g[i] * float(u_m[lo:hi].sum())
    return total


# -- mixed norms -------------------------------------------------------------------


def ls_aggregate(v: np.ndarray, grid: GridSpec, s: float) -> np.ndarray:
    """Per-leaf ``(sum_{Q containing x} |v_Q|^s)^(1/s)``; maximum for ``s = inf``."""
    vals = np.abs(np.asarray(v, dtype=float))[grid.ancestor_table]
    if math.isinf(s):
        return vals.max(axis=1)
    if s == 1:
        return vals.sum(axis=1)
    top = vals.max(axis=1, keepdims=True)
    safe = np.where(top > 0, top, 1.0)
    # scale by the per-leaf maximum so large s does not overflow
    return safe[:, 0] * ((vals / safe) ** s).sum(axis=1) ** (1.0 / s) * (top[:, 0] > 0)


def mixed_norm(v: np.ndarray, mu: LeafMeasure, q: float, s: float) -> float:
    """``|| (sum_Q |v_Q|^s chi_Q)^(1/s) ||_{L^q(mu)}``."""
    return lp_norm(ls_aggregate(v, mu.grid, s), q, mu)


def mixed_norm_grad(v: np.ndarray, mu: LeafMeasure, q: float, s: float) -> tuple[float, np.ndarray]:
    """Mixed norm of a nonnegative ``v`` and a (super)gradient with respect to ``v``.

    For ``s = inf`` each leaf's mass is attributed to the deepest cube
    attaining its maximum.
    """
    grid = mu.grid
    v = np.asarray(v, dtype=float)
    w = np.asarray(mu.masses, dtype=float)
    anc = grid.ancestor_table
    a = ls_aggregate(v, grid, s)
    value = float((a ** q * w).sum() ** (1.0 / q))
    grad = np.zeros(grid.num_cubes)
    if value == 0:
        return 0.0, grad
    live = (a > 0) & (w > 0)
    if math.isinf(s):
        depth = anc.shape[1]
        pick = depth - 1 - np.argmax(v[anc][:, ::-1], axis=1)
        cols = anc[np.arange(grid.num_leaves), pick]
        contrib = np.where(live, a ** (q - 1) * w, 0.0)
        np.add.at(grad, cols, contrib)
    else:
        coef = np.where(live, np.where(live, a, 1.0) ** (q - s) * w, 0.0)
        per_cube = grid.aggregate(coef)
        grad = per_cube * v ** (s - 1) if s != 1 else per_cube
    return value, grad * value ** (1.0 - q)


def linf_ls_norm(g: np.ndarray, mu: LeafMeasure, s_conj: float) -> float:
    """mu-essential supremum of the per-leaf l^{s'} aggregate of ``g``."""
    return lp_norm(ls_aggregate(g, mu.grid, s_conj), INF, mu)


def weak_norm(h: np.ndarray, q: float, mu: LeafMeasure) -> float:
    """``sup_{t > 0} t^q mu(|h| > t)`` evaluated exactly over the level values of ``|h|``."""
    if q <= 0:
        raise ValueError("q must be positive")
    h = np.abs(np.asarray(h, dtype=float))
    w = np.asarray(mu.masses, dtype=float)
    live = (w > 0) & (h > 0)
    if not live.any():
        return 0.0
    h, w = h[live], w[live]
    order = np.argsort(-h, kind="stable")
    h, w = h[order], w[order]
    # mass of {|h| >= c} for each distinct level c, from the top down
    cum = np.cumsum(w)
    last = np.r_[h[1:] != h[:-1], True]
    return float((h[last] ** q * cum[last]).max())


def kolmogorov_value(h: np.ndarray, q: float, alpha: float, mu: LeafMeasure, E: np.ndarray) -> float:
    """``mu(E)^{(alpha - q)/(alpha q)} (int_E |h|^alpha dmu)^{1/alpha}``."""
    if not 0 < alpha < q:
        raise ValueError("need 0 < alpha < q")
    E = np.asarray(E, dtype=float)
    w = np.asarray(mu.masses, dtype=float)
    mass = float(set_mass(mu, E))
    if mass <= 0:
        raise EmptySet("the set has zero mu-mass")
    integral = float((np.abs(np.asarray(h, dtype=float)) ** alpha * E * w).sum())
    return mass ** ((alpha - q) / (alpha * q)) * integral ** (1.0 / alpha)


# -- multiplier form and the s <= q reductions ----------------------------------------


def maximal_multiplier(rho: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Per-leaf ``sup_Q rho_Q chi_Q``."""
    return np.asarray(rho, dtype=float)[grid.ancestor_table].max(axis=1)


def multiplier_lhs(lam, sigma: LeafMeasure, rho, mu: LeafMeasure, q: float, s: float) -> float:
    v = np.asarray(lam, dtype=float) * np.asarray(sigma.cube_masses, dtype=float) * np.asarray(rho, dtype=float)
    return mixed_norm(v, mu, q, s)


def reduce_to_linear(lam, sigma: LeafMeasure, s: float) -> np.ndarray:
    """Coefficients ``lambda_Q^s sigma(Q)^(s-1)`` realising the linearised operator."""
    if not 1 <= s < INF:
        raise ValueError("need 1 <= s < inf")
    lam = np.asarray(lam, dtype=float)
    sm = np.asarray(sigma.cube_masses, dtype=float)
    out = np.zeros_like(lam)
    live = sm > 0
    out[live] = lam[live] ** s * sm[live] ** (s - 1)
    return out


def s_eq_q_condition(lam, sigma: LeafMeasure, mu: LeafMeasure, p: float, q: float) -> float:
    """``|| sum_Q lambda_Q^q sigma(Q)^(q-1) mu(Q) chi_Q ||_{L^{(p/q)'}(sigma)}``."""
    coeff = reduce_to_linear(lam, sigma, q) * np.asarray(mu.cube_masses, dtype=float)
    return lp_norm(sigma.grid.push_down(coeff), conjugate(p / q), sigma)
