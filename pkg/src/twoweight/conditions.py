"""Testing conditions for the two-weight inequality and estimators of its best constant.

Every supremum over families, allocations or functions is realised either
by a supplied certificate, by seeded randomized ascent, or by exhaustive
search on tiny grids.  :class:`ConditionReport` records which, together with
the certificate that reproduces the value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ._optim import (
    compositions,
    count_compositions,
    local_simplex_grid,
    power_ascent,
    simplex_grid,
)
from .errors import DegenerateTerm, EmptySet, TooLarge, ZeroDenominator, ZeroMeasure
from .grid import GridSpec
from .measure import DisjointAllocation, LeafMeasure, lp_norm, set_mass
from .operator import (
    INF,
    ExponentTriple,
    apply_T,
    apply_T_star,
    clean_coefficients,
    conjugate,
    linf_ls_norm,
    local_mask,
    maximal_multiplier,
    mixed_norm,
    mixed_norm_grad,
)
from .sparse import CubeFamily, is_sigma_sparse, pi_table

RESTARTS = 8


@dataclass
class ConditionReport:
    value: float
    certificate: object = None
    method: str = "given"
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        cert = self.certificate
        if hasattr(cert, "to_json"):
            cert = cert.to_json()
        elif isinstance(cert, np.ndarray):
            cert = [float(x) for x in cert]
        return {"value": float(self.value), "certificate": cert, "method": self.method, "seed": self.seed}


def _as_cube_array(grid: GridSpec, values) -> np.ndarray:
    if isinstance(values, Mapping):
        return np.asarray(grid.cube_array(values), dtype=float)
    return np.asarray(values, dtype=float)


def _float_measure(m: LeafMeasure) -> LeafMeasure:
    return m.to_float()


def _warn_unless_sparse(family: CubeFamily, m: LeafMeasure, what: str) -> None:
    if not is_sigma_sparse(family, m)[0]:
        warnings.warn(f"family is not {what}-sparse", stacklevel=3)


# -- characterisation by sparse families ---------------------------------------------------


def cond1_value(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, G: CubeFamily, g,
                r: float | None = None, check: bool = True) -> float:
    """l^r aggregate over ``G`` of ``||T*(g_G)||_{p'} / (mu(G)^{1/q'} ||g_G||_{L^inf l^{s'}})``.

    ``g_G`` keeps the entries of ``g`` on cubes whose smallest ``G``-ancestor
    is ``G``.  Entries not covered by ``G`` are ignored.
    """
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    g = _as_cube_array(grid, g)
    if check:
        _warn_unless_sparse(G, mu, "mu")
    r = e.r if r is None else r
    pi = pi_table(G)
    if np.any((pi < 0) & (g != 0)):
        warnings.warn("entries of g outside every family cube are ignored", stacklevel=2)
    terms = []
    for top in G.flat_indices():
        members = (pi == top) & (g != 0)
        if not members.any():
            continue
        g_top = np.where(members, g, 0.0)
        num = lp_norm(apply_T_star(lam, mu, g_top), e.p_conj, sigma)
        if num == 0:
            continue
        den = float(mu.cube_masses[top]) ** (1.0 / e.q_conj) * linf_ls_norm(g_top, mu, e.s_conj)
        if den == 0:
            raise DegenerateTerm(grid.cube(int(top)))
        terms.append(num / den)
    if not terms:
        return 0.0
    return float(np.sum(np.asarray(terms) ** r) ** (1.0 / r))


def _cond2_columns(lam, sigma: LeafMeasure, F: CubeFamily, local: bool) -> tuple[np.ndarray, np.ndarray]:
    """Columns ``T(chi_F) / sigma(F)^{1/p}`` (or ``T_F(sigma)``), one per family cube of positive mass.

    The ``1/p`` scaling is applied by the caller; returned are the raw columns
    and the family flat indices they belong to.
    """
    grid = sigma.grid
    masses = np.asarray(sigma.masses, dtype=float)
    cube_masses = np.asarray(sigma.cube_masses, dtype=float)
    idx = [int(i) for i in F.flat_indices() if cube_masses[i] > 0]
    cols = np.zeros((grid.num_cubes, len(idx)))
    for j, i in enumerate(idx):
        top = grid.cube(i)
        if local:
            cols[:, j] = lam * cube_masses * local_mask(grid, top)
        else:
            lo, hi = grid.leaf_spans[i]
            chi = np.zeros(grid.num_leaves)
            chi[lo:hi] = 1.0
            cols[:, j] = lam * grid.aggregate(chi * masses)
    return cols, np.asarray(idx, dtype=np.int64)


def cond2_value(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, F: CubeFamily, beta,
                local: bool = False, q: float | None = None, s: float | None = None, check: bool = True) -> float:
    """``||sum_F beta_F sigma(F)^{-1/p} T(chi_F)||_{L^q l^s(mu)} / (sum beta_F^p)^{1/p}``.

    ``local=True`` uses ``T_F(sigma)`` (cubes inside ``F`` only) in place of
    ``T(chi_F)``; ``q`` and ``s`` override the norm's exponents.
    """
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    beta = _as_cube_array(grid, beta)
    if np.any(beta < 0):
        raise ValueError("beta must be nonnegative")
    beta = np.where(F.mask, beta, 0.0)
    if check:
        _warn_unless_sparse(F, sigma, "sigma")
    den = float((beta ** e.p).sum()) ** (1.0 / e.p)
    if den == 0:
        raise ZeroDenominator("all beta vanish")
    cube_masses = np.asarray(sigma.cube_masses, dtype=float)
    if np.any((beta > 0) & (cube_masses == 0)):
        raise ValueError("beta charges a family cube of zero sigma-mass")
    cols, idx = _cond2_columns(lam, sigma, F, local)
    weights = beta[idx] / cube_masses[idx] ** (1.0 / e.p) if idx.size else np.zeros(0)
    v = cols @ weights
    return mixed_norm(v, mu, e.q if q is None else q, e.s if s is None else s) / den


def cond2_constant(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, F: CubeFamily,
                   local: bool = False, restarts: int = RESTARTS, seed: int = 0,
                   grid_points: int = 24) -> ConditionReport:
    """Best ratio of :func:`cond2_value` over ``beta >= 0`` for a fixed family."""
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    cols, idx = _cond2_columns(lam, sigma, F, local)
    cube_masses = np.asarray(sigma.cube_masses, dtype=float)
    beta_out = np.zeros(grid.num_cubes)
    if idx.size == 0 or not np.any(cols):
        if idx.size:
            beta_out[idx[0]] = 1.0
        return ConditionReport(0.0, beta_out, "given", seed)
    A = cols / cube_masses[idx] ** (1.0 / e.p)
    if idx.size == 1:
        beta_out[idx[0]] = 1.0
        value = cond2_value(lam, sigma, mu, e, F, beta_out, local=local, check=False)
        return ConditionReport(value, beta_out, "given", seed)

    ones = np.ones(idx.size)

    def value_and_direction(b):
        val, grad = mixed_norm_grad(A @ b, mu, e.q, e.s)
        return val, A.T @ grad

    best_val, best_b, method = -1.0, None, "ascent"
    rng = np.random.default_rng(seed)
    starts = [ones] + [rng.exponential(size=idx.size) for _ in range(restarts)]
    for b0 in starts:
        val, b = power_ascent(value_and_direction, b0, e.p, ones)
        if val > best_val:
            best_val, best_b = val, b
    if idx.size <= 4:
        val, b = _simplex_search(A, mu, e.q, e.s, e.p, grid_points)
        if val > best_val:
            best_val, best_b, method = val, b, "bruteforce"
    beta_out[idx] = best_b
    value = cond2_value(lam, sigma, mu, e, F, beta_out, local=local, check=False)
    return ConditionReport(value, beta_out, method, seed)


def _batch_mixed_norm(V: np.ndarray, mu: LeafMeasure, q: float, s: float) -> np.ndarray:
    """Mixed norms of the rows of ``V`` (each a nonnegative cube vector)."""
    vals = V[:, mu.grid.ancestor_table]
    if math.isinf(s):
        agg = vals.max(axis=2)
    else:
        agg = (vals ** s).sum(axis=2) ** (1.0 / s)
    w = np.asarray(mu.masses, dtype=float)
    return (agg ** q * w).sum(axis=1) ** (1.0 / q)


def _simplex_search(A: np.ndarray, mu: LeafMeasure, q: float, s: float, p: float,
                    resolution: int, weights: np.ndarray | None = None) -> tuple[float, np.ndarray]:
    """Maximise ``N(A x) / ||x||_{p,weights}`` over a simplex grid plus one local refinement.

    Points are ``x_j = (w_j / weights_j)^{1/p}`` for ``w`` on the simplex, so
    every candidate has unit norm.
    """
    d = A.shape[1]
    weights = np.ones(d) if weights is None else weights

    def evaluate(W):
        X = (W / weights) ** (1.0 / p)
        return _batch_mixed_norm(X @ A.T, mu, q, s), X

    W = simplex_grid(d, resolution)
    vals, X = evaluate(W)
    k = int(np.argmax(vals))
    best_val, best_x, center = float(vals[k]), X[k], W[k]
    if d > 1:
        steps = {2: 200, 3: 30, 4: 8}.get(d, 4)
        W2 = local_simplex_grid(center, 1.0 / resolution, steps)
        vals2, X2 = evaluate(W2)
        k2 = int(np.argmax(vals2))
        if vals2[k2] > best_val:
            best_val, best_x = float(vals2[k2]), X2[k2]
    return best_val, best_x


# -- operator norm estimation --------------------------------------------------------------------


def operator_norm_ratio(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, f) -> float:
    """``||T f||_{L^q l^s(mu)} / ||f||_{L^p(sigma)}`` for one test function."""
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    lam = clean_coefficients(_as_cube_array(sigma.grid, lam), sigma)
    den = lp_norm(f, e.p, sigma)
    if den == 0:
        return 0.0
    return mixed_norm(apply_T(lam, sigma, f), mu, e.q, e.s) / den


def operator_norm(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple,
                  restarts: int = RESTARTS, seed: int = 0, tol: float = 1e-8, patience: int = 50) -> ConditionReport:
    """Lower estimate of the best constant of ``T: L^p(sigma) -> L^q l^s(mu)`` with its maximiser.

    Runs a damped nonlinear power iteration from ``f = 1`` and ``restarts``
    seeded random starts and keeps the best.  Coefficients are normalised
    to maximum one internally, so the estimate scales exactly with ``lam``.
    """
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    w = np.asarray(sigma.masses, dtype=float)
    if not np.any(w > 0):
        raise ZeroMeasure("sigma vanishes identically")
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    scale = float(lam.max()) if lam.size else 0.0
    f_one = np.where(w > 0, 1.0, 0.0)
    if scale == 0 or not np.any(np.asarray(mu.masses) > 0):
        return ConditionReport(0.0, f_one / lp_norm(f_one, e.p, sigma), "given", seed)
    lam_n = lam / scale

    def value_and_direction(f):
        val, grad = mixed_norm_grad(apply_T(lam_n, sigma, f), mu, e.q, e.s)
        return val, grid.push_down(lam_n * grad)

    rng = np.random.default_rng(seed)
    starts = [f_one] + [rng.exponential(size=grid.num_leaves) for _ in range(restarts)]
    best_val, best_f = -1.0, None
    for f0 in starts:
        val, f = power_ascent(value_and_direction, f0, e.p, w, tol=tol, patience=patience)
        if val > best_val:
            best_val, best_f = val, f
    value = operator_norm_ratio(lam, sigma, mu, e, best_f)
    return ConditionReport(value, best_f, "ascent", seed)


def operator_norm_bruteforce(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple,
                             grid_points: int = 40, max_leaves: int = 4) -> ConditionReport:
    """Grid search for the operator norm over nonnegative ``f`` on the unit sphere of ``L^p(sigma)``."""
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    if grid.num_leaves > max_leaves:
        raise TooLarge(f"{grid.num_leaves} leaves exceeds the budget of {max_leaves}")
    w = np.asarray(sigma.masses, dtype=float)
    live = np.flatnonzero(w > 0)
    if live.size == 0:
        raise ZeroMeasure("sigma vanishes identically")
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    f = np.zeros(grid.num_leaves)
    if not np.any(lam > 0) or not np.any(np.asarray(mu.masses) > 0):
        f[live] = 1.0
        return ConditionReport(0.0, f / lp_norm(f, e.p, sigma), "bruteforce")
    # column l is T applied to the indicator of live leaf l
    A = np.zeros((grid.num_cubes, live.size))
    for j, leaf in enumerate(live):
        chi = np.zeros(grid.num_leaves)
        chi[leaf] = w[leaf]
        A[:, j] = lam * grid.aggregate(chi)
    _, x = _simplex_search(A, mu, e.q, e.s, e.p, grid_points, weights=w[live])
    f[live] = x
    return ConditionReport(operator_norm_ratio(lam, sigma, mu, e, f), f, "bruteforce")


# -- reduction to a linear condition ----------------------------------------------------------------


def _reduction_parts(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple):
    """Per-cube coefficients ``c_Q`` and the exponent ``theta`` on ``mu(E_Q)``.

    The leaf function is ``sum_Q c_Q mu(E_Q)^theta chi_Q``.
    """
    grid = sigma.grid
    lam = clean_coefficients(_as_cube_array(grid, lam), sigma)
    sm = np.asarray(sigma.cube_masses, dtype=float)
    mm = np.asarray(mu.cube_masses, dtype=float)
    inv_s_tilde = 0.0 if math.isinf(e.s) else e.q / e.s
    c = np.zeros(grid.num_cubes)
    live = (lam > 0) & (sm > 0)
    c[live] = (lam[live] * sm[live]) ** e.q / sm[live]
    if inv_s_tilde > 0:
        c *= mm ** inv_s_tilde
    return c, 1.0 - inv_s_tilde


def _reduction_from_masses(c, theta, masses_E, sigma: LeafMeasure, r: float) -> float:
    factor = masses_E ** theta if theta > 0 else np.ones_like(c)
    return lp_norm(sigma.grid.push_down(c * factor), r, sigma)


def reduction_condition_value(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple,
                              E: DisjointAllocation | None = None) -> float:
    """``||sum_Q (lam_Q sigma(Q))^q mu(Q)^{q/s} mu(E_Q)^{1-q/s} sigma(Q)^{-1} chi_Q||_{L^{(p/q)'}(sigma)}``."""
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    E = DisjointAllocation(grid) if E is None else E
    E.check_disjoint()
    c, theta = _reduction_parts(lam, sigma, mu, e)
    masses_E = np.asarray(E.mass_array(mu), dtype=float)
    return _reduction_from_masses(c, theta, masses_E, sigma, conjugate(e.p_tilde))


class _AllocationGroups:
    """Leaves grouped by the supported cubes above them.

    The reduction objective depends on an allocation only through the masses
    ``mu(E_Q)``, and leaves under the same supported cubes are
    interchangeable, so it suffices to split each group's total mass over
    its cubes.  Variables are the concatenated per-group fraction vectors.
    """

    def __init__(self, c: np.ndarray, theta: float, r: float, sigma: LeafMeasure, mu: LeafMeasure):
        grid = sigma.grid
        self.grid = grid
        self.theta, self.r = theta, r
        self.supported = np.flatnonzero(c > 0)
        self.c = c[self.supported]
        pos = {int(q): j for j, q in enumerate(self.supported)}
        w_mu = np.asarray(mu.masses, dtype=float)
        groups: dict[tuple, list[int]] = {}
        for leaf in range(grid.num_leaves):
            if w_mu[leaf] <= 0:
                continue
            sig = tuple(pos[int(q)] for q in grid.ancestor_table[leaf] if c[q] > 0)
            if sig:
                groups.setdefault(sig, []).append(leaf)
        self.sigs = list(groups)
        self.members = [groups[sg] for sg in self.sigs]
        self.group_mass = np.array([w_mu[m].sum() for m in self.members])
        self.slices = []
        start = 0
        for sg in self.sigs:
            self.slices.append(slice(start, start + len(sg)))
            start += len(sg)
        self.nvar = start
        self.B = np.zeros((self.supported.size, self.nvar))
        for sg, sl, gm in zip(self.sigs, self.slices, self.group_mass):
            self.B[list(sg), np.arange(sl.start, sl.stop)] = gm
        self.P = np.zeros((self.supported.size, grid.num_leaves))
        for j, q in enumerate(self.supported):
            lo, hi = grid.leaf_spans[q]
            self.P[j, lo:hi] = 1.0
        self.w_sigma = np.asarray(sigma.masses, dtype=float)
        self.floor = 1e-12 * max(float(self.group_mass.sum()), 1e-300)

    def values(self, M: np.ndarray) -> np.ndarray:
        U = (self.c * M ** self.theta) @ self.P
        return (U ** self.r * self.w_sigma).sum(axis=-1) ** (1.0 / self.r)

    def value_and_grad(self, y: np.ndarray) -> tuple[float, np.ndarray]:
        m = np.maximum(self.B @ y, self.floor)
        u = (self.c * m ** self.theta) @ self.P
        val = float((u ** self.r * self.w_sigma).sum()) ** (1.0 / self.r)
        if val == 0:
            return 0.0, np.zeros_like(y)
        du = val ** (1.0 - self.r) * self.w_sigma * u ** (self.r - 1.0)
        dm = (self.P @ du) * self.theta * self.c * m ** (self.theta - 1.0)
        return val, self.B.T @ dm

    def vertex(self, choice) -> np.ndarray:
        y = np.zeros(self.nvar)
        for sl, k in zip(self.slices, choice):
            y[sl.start + k] = 1.0
        return y

    def normalise(self, y: np.ndarray) -> np.ndarray:
        y = np.clip(y, 0.0, 1.0)
        for sl in self.slices:
            total = y[sl].sum()
            if total > 1.0:
                y[sl] /= total
        return y

    def allocation(self, y: np.ndarray) -> DisjointAllocation:
        grid = self.grid
        sets: dict[int, np.ndarray] = {}
        for sg, sl, members in zip(self.sigs, self.slices, self.members):
            for j, t in zip(sg, y[sl]):
                if t <= 0:
                    continue
                q = int(self.supported[j])
                piece = sets.setdefault(q, np.zeros(grid.num_leaves))
                piece[members] = t
        return DisjointAllocation(grid, {grid.cube(q): v for q, v in sorted(sets.items())})


def _vertex_search(groups: _AllocationGroups, choice: list[int]) -> tuple[float, list[int]]:
    """Best whole-group assignment reachable by changing one group at a time."""
    best = float(groups.values(groups.B @ groups.vertex(choice)))
    improved = True
    while improved:
        improved = False
        for gi, sg in enumerate(groups.sigs):
            for k in range(len(sg)):
                if k == choice[gi]:
                    continue
                trial = list(choice)
                trial[gi] = k
                v = float(groups.values(groups.B @ groups.vertex(trial)))
                if v > best * (1 + 1e-15):
                    best, choice, improved = v, trial, True
    return best, choice


def _slsqp(groups: _AllocationGroups, y0: np.ndarray, max_iter: int) -> tuple[float, np.ndarray]:
    from scipy.optimize import minimize

    scale = groups.value_and_grad(y0)[0] or 1.0

    def fun(y):
        val, grad = groups.value_and_grad(y)
        return -val / scale, -grad / scale

    A = np.zeros((len(groups.slices), groups.nvar))
    for i, sl in enumerate(groups.slices):
        A[i, sl] = 1.0
    cons = {"type": "ineq", "fun": lambda y: 1.0 - A @ y, "jac": lambda y: -A}
    res = minimize(fun, y0, jac=True, method="SLSQP", bounds=[(0.0, 1.0)] * groups.nvar,
                   constraints=[cons], options={"maxiter": max_iter, "ftol": 1e-13})
    y = groups.normalise(res.x)
    return groups.value_and_grad(y)[0], y


def reduction_condition_sup(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple,
                            restarts: int = RESTARTS, seed: int = 0, max_iter: int = 200,
                            oracle_leaves: int = 8) -> ConditionReport:
    """Largest :func:`reduction_condition_value` over disjoint allocations found by search.

    Leaves are grouped as in :class:`_AllocationGroups`.  With ``s = inf``
    the objective is convex in the masses, so the search runs over whole
    group assignments by one-group-at-a-time improvement.  Otherwise each
    start is refined by SLSQP over the product of capped simplices.  Starts:
    even split, everything to the deepest cube, everything to the top
    cube, and ``restarts`` seeded random ones.  Grids with at most
    ``oracle_leaves`` leaves are also searched exhaustively.
    """
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    c, theta = _reduction_parts(lam, sigma, mu, e)
    empty = DisjointAllocation(grid)
    if theta == 0 or not np.any(c > 0):
        return ConditionReport(reduction_condition_value(lam, sigma, mu, e, empty), empty, "given", seed)
    groups = _AllocationGroups(c, theta, conjugate(e.p_tilde), sigma, mu)
    if not groups.sigs:
        return ConditionReport(0.0, empty, "given", seed)
    rng = np.random.default_rng(seed)
    sizes = [len(sg) for sg in groups.sigs]
    best_val, best_y = -1.0, None
    if theta == 1.0:
        choices = [[k - 1 for k in sizes], [0] * len(sizes)]
        choices += [[int(rng.integers(k)) for k in sizes] for _ in range(restarts)]
        for choice in choices:
            val, choice = _vertex_search(groups, choice)
            if val > best_val:
                best_val, best_y = val, groups.vertex(choice)
    else:
        starts = [np.concatenate([np.full(k, 1.0 / k) for k in sizes]),
                  groups.vertex([k - 1 for k in sizes]), groups.vertex([0] * len(sizes))]
        starts += [np.concatenate([rng.dirichlet(np.ones(k)) for k in sizes]) for _ in range(restarts)]
        for y0 in starts:
            val, y = _slsqp(groups, y0, max_iter)
            if val > best_val:
                best_val, best_y = val, y
    alloc, method = groups.allocation(best_y), "ascent"
    if grid.num_leaves <= oracle_leaves:
        oracle = reduction_condition_bruteforce(lam, sigma, mu, e)
        if oracle.value > best_val:
            alloc, method = oracle.certificate, "bruteforce"
    return ConditionReport(reduction_condition_value(lam, sigma, mu, e, alloc), alloc, method, seed)


def reduction_condition_bruteforce(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple,
                                   resolution: int = 12, budget: int = 200_000) -> ConditionReport:
    """Exhaustive search for the best allocation on a tiny grid.

    Each leaf group splits its mass over its cubes on a grid of step
    ``1/R``, where ``R`` is the largest value up to ``resolution`` keeping
    the product of the group grids within ``budget``; the objective grows
    with every allocated mass, so whole-mass splits suffice.  The best point
    is then polished by pairwise transfers of shrinking size.  With
    ``s = inf`` the objective is convex in the masses and ``R = 1``
    (whole-group assignments) is already exact.
    """
    sigma, mu = _float_measure(sigma), _float_measure(mu)
    grid = sigma.grid
    c, theta = _reduction_parts(lam, sigma, mu, e)
    empty = DisjointAllocation(grid)
    if theta == 0 or not np.any(c > 0):
        return ConditionReport(reduction_condition_value(lam, sigma, mu, e, empty), empty, "bruteforce")
    groups = _AllocationGroups(c, theta, conjugate(e.p_tilde), sigma, mu)
    if not groups.sigs:
        return ConditionReport(0.0, empty, "bruteforce")
    sizes = [len(sg) for sg in groups.sigs]
    convex = theta == 1.0
    R = 1
    if not convex:
        for cand in range(resolution, 0, -1):
            if math.prod(count_compositions(k, cand) for k in sizes) <= budget:
                R = cand
                break
    if math.prod(count_compositions(k, R) for k in sizes) > budget:
        raise TooLarge("allocation grid exceeds the search budget")
    grids = [compositions(k, R) / R for k in sizes]
    # cartesian product of per-group options, as rows of variables
    Y = np.zeros((1, 0))
    for opts in grids:
        Y = np.concatenate([np.repeat(Y, opts.shape[0], axis=0), np.tile(opts, (Y.shape[0], 1))], axis=1)
    vals = groups.values(Y @ groups.B.T)
    y = Y[int(np.argmax(vals))].copy()
    best = float(vals.max())
    if not convex:
        delta = 1.0 / R
        while delta > 1e-7:
            improved = False
            for sl in groups.slices:
                for a in range(sl.start, sl.stop):
                    for b in range(sl.start, sl.stop):
                        if a == b or y[a] <= 0:
                            continue
                        trial = y.copy()
                        moved = min(delta, trial[a])
                        trial[a] -= moved
                        trial[b] += moved
                        v = float(groups.values(groups.B @ trial))
                        if v > best:
                            best, y, improved = v, trial, True
            if not improved:
                delta *= 0.5
    alloc = groups.allocation(y)
    return ConditionReport(reduction_condition_value(lam, sigma, mu, e, alloc), alloc, "bruteforce")


# -- weak-type conditions -------------------------------------------------------------------------


def weak_cond_values(lam, sigma: LeafMeasure, mu: LeafMeasure, e: ExponentTriple, alpha: float, E,
                     G: CubeFamily | None = None, g=None, F: CubeFamily | None = None, beta=None,
                     printed: bool = True, local: bool = False, check: bool = True) -> dict[str, float]:
    """Both weak-type testing quantities on ``mu`` restricted to the fractional set ``E``.

    Each is divided by ``mu(E)^{(q - alpha)/(q alpha)}``.  The first uses the
    l^{r_alpha} aggregate with ``1/r_alpha = 1/alpha - 1/p``.  For the second,
    ``printed=True`` measures in ``L^q l^alpha(mu|E)``; otherwise in
    ``L^alpha l^s(mu|E)``.
    """
    if not 1 < alpha < e.q:
        raise ValueError("need 1 < alpha < q")
    mu = _float_measure(mu)
    E = np.asarray(E, dtype=float)
    mass = float(set_mass(mu, E))
    if mass <= 0:
        raise EmptySet("the set has zero mu-mass")
    mu_E = mu.restrict(E)
    scale = mass ** ((e.q - alpha) / (e.q * alpha))
    out = {}
    if G is not None and g is not None:
        r_alpha = 1.0 / (1.0 / alpha - 1.0 / e.p)
        out["cond1"] = cond1_value(lam, sigma, mu_E, e, G, g, r=r_alpha, check=check) / scale
    if F is not None and beta is not None:
        q, s = (e.q, alpha) if printed else (alpha, e.s)
        out["cond2"] = cond2_value(lam, sigma, mu_E, e, F, beta, local=local, q=q, s=s, check=check) / scale
    return out


# -- Carleson-type lemmas ---------------------------------------------------------------------------


@dataclass
class WitnessReport:
    a1: float
    witness: np.ndarray
    numerator: float
    denominator: float

    @property
    def ratio(self) -> float:
        return self.numerator / self.denominator if self.denominator > 0 else 0.0


def a1_a2_witness(Lam, mu: LeafMeasure, s: float) -> WitnessReport:
    """``A1 = int (sum Lam_Q^s chi_Q)^{1/s} dmu`` and the dual test sequence that nearly attains it.

    The witness is ``alpha_Q = Lam_Q^{s-1} int_Q S^{-1/s'} dmu`` with
    ``S = sum Lam_Q^s chi_Q``.  Its pairing with ``Lam`` is at least ``A1``
    while its Carleson-type norm is at most one.
    """
    if not 1 < s < INF:
        raise ValueError("need 1 < s < inf")
    mu = _float_measure(mu)
    grid = mu.grid
    Lam = _as_cube_array(grid, Lam)
    if np.any(Lam < 0):
        raise ValueError("coefficients must be nonnegative")
    s_conj = conjugate(s)
    w = np.asarray(mu.masses, dtype=float)
    mm = np.asarray(mu.cube_masses, dtype=float)
    S = grid.push_down(Lam ** s)
    a1 = float((S ** (1.0 / s) * w).sum())
    inv = np.zeros(grid.num_leaves)
    live = S > 0
    inv[live] = w[live] * S[live] ** (-1.0 / s_conj)
    alpha = np.where(Lam > 0, Lam ** (s - 1.0), 0.0) * grid.aggregate(inv)
    numerator = float((Lam * alpha).sum())
    t = np.zeros(grid.num_cubes)
    pos = mm > 0
    t[pos] = (alpha[pos] / mm[pos]) ** s_conj * mm[pos]
    below = grid.subtree_sums(t)
    denom = float(np.max(below[pos] / mm[pos])) ** (1.0 / s_conj) if pos.any() else 0.0
    return WitnessReport(a1, alpha, numerator, denom)


def dorverbitsky_value(b, mu: LeafMeasure, q: float, s: float, E: DisjointAllocation | None = None) -> float:
    """``(sum_Q b_Q^q mu(E_Q)^{1 - q/s} mu(Q)^{q/s})^{1/q}``; the ``E`` factor is one when ``s = q``."""
    if not 1 <= q <= s:
        raise ValueError("need 1 <= q <= s")
    mu = _float_measure(mu)
    grid = mu.grid
    b = _as_cube_array(grid, b)
    E = DisjointAllocation(grid) if E is None else E
    E.check_disjoint()
    inv = 0.0 if math.isinf(s) else q / s
    theta = 1.0 - inv
    terms = b ** q
    if theta > 0:
        terms = terms * np.asarray(E.mass_array(mu), dtype=float) ** theta
    if inv > 0:
        terms = terms * np.asarray(mu.cube_masses, dtype=float) ** inv
    return float(terms.sum()) ** (1.0 / q)


def linearizing_allocation(b, mu: LeafMeasure) -> DisjointAllocation:
    """Each leaf of positive mass goes wholly to the deepest ancestor maximising ``b``."""
    grid = mu.grid
    b = _as_cube_array(grid, b)
    anc = grid.ancestor_table
    vals = b[anc]
    depth = anc.shape[1]
    pick = depth - 1 - np.argmax(vals[:, ::-1], axis=1)
    alloc_sets: dict[int, np.ndarray] = {}
    w = np.asarray(mu.masses, dtype=float)
    for leaf in range(grid.num_leaves):
        q = int(anc[leaf, pick[leaf]])
        if w[leaf] > 0 and b[q] > 0:
            alloc_sets.setdefault(q, np.zeros(grid.num_leaves))[leaf] = 1.0
    return DisjointAllocation(grid, {grid.cube(q): v for q, v in sorted(alloc_sets.items())})


def maximal_norm(b, mu: LeafMeasure, q: float) -> float:
    """``||sup_Q b_Q chi_Q||_{L^q(mu)}``."""
    mu = _float_measure(mu)
    return lp_norm(maximal_multiplier(_as_cube_array(mu.grid, b), mu.grid), q, mu)
