"""Sparse and Carleson families, and disjoint allocations of prescribed mass.

The central routine is :func:`dor_allocate`: given Carleson coefficients it
builds pairwise disjoint sets ``E_Q`` inside ``Q`` with ``mu(E_Q) = lambda_Q / C``
by a single bottom-up pass.  Each set is cut from its cube as a prefix in the
canonical leaf order, skipping mass already handed to smaller cubes, with one
fractional boundary leaf (:func:`prefix_select`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import Infeasible, MassUnavailable, NotCovered, TooLarge, ZeroMassCube
from .grid import CubeId, GridSpec
from .measure import DisjointAllocation, LeafMeasure, empty_set, full_set, is_exact, lp_norm

FLOAT_SLACK = 1e-12


class CubeFamily:
    """A set of cubes of one grid, stored as a boolean mask over flat indices."""

    def __init__(self, grid: GridSpec, cubes: Iterable[CubeId] = (), role: str = "sigma"):
        self.grid = grid
        self.mask = grid.cube_mask(cubes)
        self.role = role

    @classmethod
    def from_mask(cls, grid: GridSpec, mask: np.ndarray, role: str = "sigma") -> "CubeFamily":
        fam = cls(grid, (), role)
        fam.mask = np.asarray(mask, dtype=bool).copy()
        return fam

    def __contains__(self, cube: CubeId) -> bool:
        return bool(self.mask[self.grid.flat(cube)])

    def __iter__(self) -> Iterator[CubeId]:
        return (self.grid.cube(int(i)) for i in np.flatnonzero(self.mask))

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, CubeFamily) and self.grid == other.grid and np.array_equal(self.mask, other.mask)

    def __repr__(self):
        return f"CubeFamily({[str(c) for c in self]})"

    def flat_indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def to_json(self) -> list[dict]:
        return [c.to_json() for c in self]

    @classmethod
    def from_json(cls, grid: GridSpec, items, role: str = "sigma") -> "CubeFamily":
        return cls(grid, (CubeId.from_json(c) for c in items), role)


# -- Carleson constants ---------------------------------------------------------------


@dataclass
class CarlesonReport:
    value: object
    witness: CubeId | None
    ratios: dict = field(default_factory=dict)


def carleson_constant(lam: np.ndarray, m: LeafMeasure) -> CarlesonReport:
    """``sup_P sum_{Q in P} lambda_Q / m(P)``, infinite if a null cube carries coefficients."""
    grid = m.grid
    below = grid.subtree_sums(np.asarray(lam))
    masses = m.cube_masses
    ratios = {}
    best, witness = 0, None
    for i in range(grid.num_cubes):
        if masses[i] == 0:
            if below[i] > 0:
                return CarlesonReport(float("inf"), grid.cube(i), ratios)
            continue
        ratio = below[i] / masses[i]
        ratios[grid.cube(i)] = ratio
        if ratio > best:
            best, witness = ratio, grid.cube(i)
    return CarlesonReport(best, witness, ratios)


class FamilyCheck(NamedTuple):
    ok: bool
    worst: CubeId | None
    ratio: object


def family_carleson_check(family: CubeFamily, m: LeafMeasure, c=2) -> FamilyCheck:
    """Whether ``sum_{Q in F, Q in P} m(Q) <= c m(P)`` for every ``P`` in the family."""
    grid = m.grid
    masses = m.cube_masses
    weights = np.where(family.mask, masses, 0 * masses)
    below = grid.subtree_sums(weights)
    ok, worst, worst_excess, worst_ratio = True, None, None, None
    for i in family.flat_indices():
        excess = below[i] - c * masses[i]
        if worst_excess is None or excess > worst_excess:
            worst_excess, worst = excess, grid.cube(int(i))
            worst_ratio = below[i] / masses[i] if masses[i] > 0 else (float("inf") if below[i] > 0 else 0)
        if excess > 0:
            ok = False
    return FamilyCheck(ok, worst, worst_ratio)


# -- canonical prefix selection -----------------------------------------------------------


def _prefix_cut(a, x, w, t, atomic, exact):
    """Per-leaf fractions of the shortest prefix of ``a`` whose mass outside ``x`` is ``t``."""
    h = a * 0
    gap = a - x
    gap = np.where(gap > 0, gap, 0 * gap)
    if atomic:
        gap = np.where(x == 0, a, 0 * a)
    avail = gap * w
    total = avail.sum()
    if t <= 0:
        return h
    if t > total:
        if exact or t - total > FLOAT_SLACK * max(1.0, float(total)):
            raise MassUnavailable(t, total)
        t = total
    cum = np.cumsum(avail)
    k = int(np.flatnonzero((cum >= t).astype(bool))[0])
    h[:k] = a[:k]
    if atomic:
        h[k] = a[k]
    else:
        before = cum[k] - avail[k]
        cut = x[k] + (t - before) / w[k]
        h[k] = cut if exact else min(cut, a[k])
    return h


def prefix_select(A, m: LeafMeasure, t, exclude=None, atomic: bool = False) -> np.ndarray:
    """Canonical subset ``H`` of ``A`` with ``m(H minus exclude) = t``.

    Leaves of ``A`` are walked in canonical order; excluded fractions are
    skipped and the boundary leaf is cut fractionally (whole leaves only in
    atomic mode, where the mass reached may exceed ``t``).  ``H`` grows with
    ``t`` and with ``exclude``.
    """
    A = np.asarray(A)
    exact = m.exact or is_exact(A)
    X = empty_set(m.grid, exact) if exclude is None else np.asarray(exclude)
    H = empty_set(m.grid, exact)
    nz = np.flatnonzero((A != 0).astype(bool))
    if nz.size == 0:
        if t > 0:
            raise MassUnavailable(t, 0)
        return H
    lo, hi = int(nz[0]), int(nz[-1]) + 1
    H[lo:hi] = _prefix_cut(A[lo:hi], X[lo:hi], m.masses[lo:hi], t, atomic, exact)
    return H


def set_difference(H, X) -> np.ndarray:
    """``H minus X`` for fractional sets read as initial segments of each leaf."""
    d = np.asarray(H) - np.asarray(X)
    return np.where(d > 0, d, 0 * d)


def dor_allocate(lam: np.ndarray, m: LeafMeasure, C, atomic_mode: bool = False) -> DisjointAllocation:
    """Disjoint ``E_Q`` inside ``Q`` with ``m(E_Q) = lambda_Q / C`` (at least that, in atomic mode).

    Cubes are processed from the finest level up; each takes its share from
    what smaller cubes left over.  Succeeds whenever the Carleson constant of
    ``lam`` is at most ``C``; otherwise raises :class:`Infeasible` at the first
    cube that runs short.
    """
    grid = m.grid
    lam = np.asarray(lam)
    alloc = DisjointAllocation(grid)
    if not np.any(lam != 0):
        return alloc
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    exact = m.exact
    used = empty_set(grid, exact)
    for k in range(grid.depth, -1, -1):
        for i in range(grid.offset(k), grid.offset(k + 1)):
            if lam[i] == 0:
                continue
            cube = grid.cube(i)
            need = lam[i] / C
            lo, hi = grid.leaf_spans[i]
            a = full_set(grid, cube, exact)[lo:hi]
            try:
                h = _prefix_cut(a, used[lo:hi], m.masses[lo:hi], need, atomic_mode, exact)
            except MassUnavailable as err:
                raise Infeasible(cube, need, err.available) from None
            piece = set_difference(h, used[lo:hi])
            E = empty_set(grid, exact)
            E[lo:hi] = piece
            alloc[cube] = E
            used[lo:hi] = used[lo:hi] + piece
    return alloc


def is_sigma_sparse(family: CubeFamily, m: LeafMeasure, delta=Fraction(1, 2)):
    """Try to give every ``F`` a disjoint ``E_F`` with ``m(E_F) >= delta m(F)``.

    Returns ``(ok, allocation)``; the allocation is ``None`` when no such sets
    exist.
    """
    delta = delta if m.exact else float(delta)
    lam = np.where(family.mask, m.cube_masses * delta, 0 * m.cube_masses)
    try:
        return True, dor_allocate(lam, m, 1)
    except Infeasible:
        return False, None


# -- minimal allocation constant --------------------------------------------------------------


def lambda2_bruteforce(lam: np.ndarray, m: LeafMeasure, max_leaves: int = 8, max_support: int = 7):
    """Best constant ``inf_E sup_Q lambda_Q / m(E_Q)`` over disjoint allocations, by exhaustion.

    Demands ``lambda_Q / t`` can be met by disjoint pieces of a divisible
    supply exactly when every subset ``S`` of demanding cubes satisfies
    ``sum_S lambda_Q <= t m(union S)``.  Enumerating all subsets of the
    support therefore gives the optimum without discretisation.
    """
    grid = m.grid
    if grid.num_leaves > max_leaves:
        raise TooLarge(f"{grid.num_leaves} leaves exceeds the budget of {max_leaves}")
    lam = np.asarray(lam)
    support = [int(i) for i in np.flatnonzero((lam != 0).astype(bool))]
    if len(support) > max_support:
        raise TooLarge(f"{len(support)} supported cubes exceeds the budget of {max_support}")
    if not support:
        return 0
    leaf_bits = []
    for i in support:
        lo, hi = grid.leaf_spans[i]
        leaf_bits.append(((1 << int(hi)) - 1) ^ ((1 << int(lo)) - 1))
    masses = list(m.masses)
    best = 0
    for size in range(1, len(support) + 1):
        for subset in itertools.combinations(range(len(support)), size):
            bits = 0
            for j in subset:
                bits |= leaf_bits[j]
            supply = sum(masses[l] for l in range(grid.num_leaves) if bits >> l & 1)
            demand = sum(lam[support[j]] for j in subset)
            if supply == 0:
                return float("inf")
            best = max(best, demand / supply)
    return best


def lambda2_lp(lam: np.ndarray, m: LeafMeasure) -> tuple[float, DisjointAllocation]:
    """Best allocation constant by linear programming over per-leaf fractions.

    Maximises ``tau`` subject to ``m(E_Q) >= tau lambda_Q``; the constant is
    ``1 / tau``.  Returns the constant and the optimal allocation.
    """
    from scipy.optimize import linprog

    grid = m.grid
    lam = np.asarray(lam, dtype=float)
    w = np.asarray(m.masses, dtype=float)
    support = np.flatnonzero(lam > 0)
    if support.size == 0:
        return 0.0, DisjointAllocation(grid)
    pairs = [(qi, leaf) for qi, i in enumerate(support)
             for leaf in range(*grid.leaf_spans[i]) if w[leaf] > 0]
    nvar = len(pairs) + 1
    c = np.zeros(nvar)
    c[-1] = -1.0
    a_ub = np.zeros((support.size + grid.num_leaves, nvar))
    for v, (qi, leaf) in enumerate(pairs):
        a_ub[qi, v] = -w[leaf]
        a_ub[support.size + leaf, v] = 1.0
    a_ub[:support.size, -1] = lam[support]
    b_ub = np.r_[np.zeros(support.size), np.ones(grid.num_leaves)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=[(0, None)] * nvar, method="highs")
    tau = res.x[-1]
    if tau <= 0:
        return float("inf"), DisjointAllocation(grid)
    sets = {}
    for v, (qi, leaf) in enumerate(pairs):
        cube = grid.cube(int(support[qi]))
        sets.setdefault(cube, np.zeros(grid.num_leaves))[leaf] = min(max(res.x[v], 0.0), 1.0)
    return 1.0 / tau, DisjointAllocation(grid, sets)


# -- family structure -------------------------------------------------------------------------


def pi_family(family: CubeFamily, cube: CubeId) -> CubeId:
    """Smallest family cube containing ``cube``."""
    grid = family.grid
    current = cube
    while current is not None:
        if current in family:
            return current
        current = grid.parent(current)
    raise NotCovered(cube)


def pi_table(family: CubeFamily) -> np.ndarray:
    """Flat index of the smallest family cube containing each cube, ``-1`` if none."""
    grid = family.grid
    out = np.full(grid.num_cubes, -1, dtype=np.int64)
    for i in range(grid.num_cubes):
        if family.mask[i]:
            out[i] = i
        elif grid.parents[i] >= 0:
            out[i] = out[grid.parents[i]]
    return out


def family_children(family: CubeFamily, top: CubeId) -> list[CubeId]:
    """Maximal family cubes strictly inside ``top``."""
    grid = family.grid
    pi = pi_table(family)
    t = grid.flat(top)
    return [
        grid.cube(int(i))
        for i in family.flat_indices()
        if i != t and grid.parents[i] >= 0 and pi[grid.parents[i]] == t
    ]


def family_exclusive_set(family: CubeFamily, top: CubeId, exact: bool = False) -> np.ndarray:
    """``top`` minus the union of its family children, as a 0/1 fractional set."""
    grid = family.grid
    out = full_set(grid, top, exact)
    for child in family_children(family, top):
        span = grid.leaves_under(child)
        out[span.start:span.stop] = 0
    return out


def stopping_family(f: np.ndarray, m: LeafMeasure, threshold: float = 2.0) -> CubeFamily:
    """Principal cubes of ``f`` with respect to ``m``.

    Starting from the root, the children of a stopping cube ``F`` are the
    maximal subcubes whose ``m``-average of ``f`` exceeds ``threshold`` times
    that of ``F``.  Cubes of zero mass never stop.
    """
    grid = m.grid
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("f must be nonnegative")
    masses = np.asarray(m.cube_masses, dtype=float)
    if masses[0] <= 0:
        raise ZeroMassCube(grid.root)
    sums = grid.aggregate(f * np.asarray(m.masses, dtype=float))
    avg = np.divide(sums, masses, out=np.zeros_like(sums), where=masses > 0)
    mask = np.zeros(grid.num_cubes, dtype=bool)
    mask[0] = True
    children = _child_table(grid)
    stack = [(0, 0)]  # (cube, its stopping parent)
    while stack:
        i, top = stack.pop()
        for c in children[i]:
            if masses[c] > 0 and avg[c] > threshold * avg[top]:
                mask[c] = True
                stack.append((c, c))
            else:
                stack.append((c, top))
    return CubeFamily.from_mask(grid, mask, role=m.role)


def _child_table(grid: GridSpec) -> list[range]:
    out = []
    for k in range(grid.depth + 1):
        for mm in range(grid.level_size(k)):
            if k == grid.depth:
                out.append(range(0))
            else:
                start = grid.offset(k + 1) + (mm << grid.dimension)
                out.append(range(start, start + grid.arity))
    return out


# -- l^p sums over sparse families -----------------------------------------------------------


def is_admissible_summand(family: CubeFamily, top: CubeId, a: np.ndarray, tol: float = 0.0) -> bool:
    """``a >= 0`` supported on ``top`` and constant on each family child of ``top``."""
    grid = family.grid
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        return False
    span = grid.leaves_under(top)
    outside = np.ones(grid.num_leaves, dtype=bool)
    outside[span.start:span.stop] = False
    if np.any(a[outside] != 0):
        return False
    for child in family_children(family, top):
        block = a[grid.leaves_under(child).start:grid.leaves_under(child).stop]
        if np.ptp(block) > tol:
            return False
    return True


def sparse_sum_bounds(summands: dict[CubeId, np.ndarray], m: LeafMeasure, p: float) -> tuple[float, float, float]:
    """``((sum ||a_F||_p^p)^(1/p), ||sum a_F||_p, 3p (sum ||a_F||_p^p)^(1/p))``."""
    pieces = [lp_norm(a, p, m) for a in summands.values()]
    lower = float(np.sum(np.asarray(pieces) ** p) ** (1.0 / p)) if pieces else 0.0
    total = np.sum(list(summands.values()), axis=0) if summands else np.zeros(m.grid.num_leaves)
    return lower, lp_norm(total, p, m), 3 * p * lower
