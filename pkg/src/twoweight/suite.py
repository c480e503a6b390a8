"""Randomized acceptance gates.

Every gate draws its instances from its own child of ``SeedSequence(seed)``
so gates are independent of each other and of the thread schedule.  A gate
returns a :class:`GateResult` with pass/fail, summary metrics and one row
of metrics per instance.

Instance distributions (all masses and coefficients i.i.d. unless noted):

* grids: dimension 1 or 2 uniformly, depth uniform in the stated range;
* measures: Exp(1) leaf masses, each zeroed with probability 0.2;
* exact measures: ``k/d`` with ``k`` uniform in 0..8, ``d`` in 1..6;
* coefficients: Exp(1) on each cube, each zeroed with probability 0.4,
  then zeroed where the relevant measure vanishes;
* exponents: ``q ~ U(1.5, 3)``, ``p = q + U(0.5, 3)``, ``s`` cycling
  through ``q``, ``1.5 q``, ``4 q`` and infinity.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .conditions import (
    a1_a2_witness,
    cond1_value,
    cond2_constant,
    dorverbitsky_value,
    linearizing_allocation,
    maximal_norm,
    operator_norm,
    operator_norm_bruteforce,
    reduction_condition_bruteforce,
    reduction_condition_sup,
    reduction_condition_value,
)
from .errors import Infeasible
from .grid import GridSpec
from .measure import DisjointAllocation, LeafMeasure
from .operator import INF, ExponentTriple, apply_T, apply_T_star, mixed_norm, pairing
from .oracles import naive_mixed_norm
from .sparse import (
    CubeFamily,
    carleson_constant,
    dor_allocate,
    family_carleson_check,
    family_children,
    is_sigma_sparse,
    lambda2_bruteforce,
    lambda2_lp,
    sparse_sum_bounds,
    stopping_family,
)
from .wolff import WolffParams, domination_ratio, wolff_dyadic, wolff_sparse, wolff_sparse_family

NECESSITY_BOUND = 16.0
BAND = 32.0


@dataclass
class GateResult:
    criterion: int
    name: str
    passed: bool
    instances: int
    metrics: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "instances": self.instances,
            "metrics": self.metrics,
            "failures": self.failures[:5],
        }


# -- generators -------------------------------------------------------------------------------


def random_grid(rng, max_depth: int = 4, dims=(1, 2)) -> GridSpec:
    n = int(rng.choice(dims))
    return GridSpec(n, int(rng.integers(0, max_depth + 1)))


def random_masses(rng, grid: GridSpec, zero_prob: float = 0.2) -> np.ndarray:
    m = rng.exponential(size=grid.num_leaves) * (rng.random(grid.num_leaves) >= zero_prob)
    if not m.any():
        m[int(rng.integers(grid.num_leaves))] = 1.0
    return m


def random_exact_masses(rng, grid: GridSpec) -> list[Fraction]:
    out = [Fraction(int(rng.integers(0, 9)), int(rng.integers(1, 7))) for _ in range(grid.num_leaves)]
    if not any(out):
        out[0] = Fraction(1)
    return out


def random_coefficients(rng, grid: GridSpec, m: LeafMeasure | None = None, zero_prob: float = 0.4) -> np.ndarray:
    lam = rng.exponential(size=grid.num_cubes) * (rng.random(grid.num_cubes) >= zero_prob)
    if m is not None:
        lam[np.asarray(m.cube_masses, dtype=float) == 0] = 0.0
    return lam


def random_exponents(rng, index: int) -> ExponentTriple:
    q = float(rng.uniform(1.5, 3.0))
    p = q + float(rng.uniform(0.5, 3.0))
    s = (q, 1.5 * q, 4 * q, INF)[index % 4]
    return ExponentTriple(p, q, s)


def random_allocation(rng, grid: GridSpec) -> DisjointAllocation:
    """Per leaf, a Dirichlet split over its ancestors plus a discarded share."""
    X = rng.dirichlet(np.ones(grid.depth + 2), size=grid.num_leaves)[:, :-1]
    alloc = DisjointAllocation(grid)
    anc = grid.ancestor_table
    for k in range(grid.depth + 1):
        for i in np.unique(anc[:, k]):
            lo, hi = grid.leaf_spans[i]
            piece = np.zeros(grid.num_leaves)
            piece[lo:hi] = X[lo:hi, k]
            alloc[grid.cube(int(i))] = piece
    return alloc


def random_family(rng, grid: GridSpec) -> CubeFamily:
    mask = rng.random(grid.num_cubes) < rng.uniform(0.2, 0.8)
    return CubeFamily.from_mask(grid, mask)


def heavy_function(rng, grid: GridSpec) -> np.ndarray:
    """Heavy-tailed nonnegative leaf function, so stopping families have several levels."""
    return rng.exponential(size=grid.num_leaves) ** 3


def theorem_instances(seed, count: int = 50):
    """The fixed instance suite for the equivalence and necessity gates.

    The first ``min(count, 20)`` instances have at most four leaves so that
    brute-force oracles apply; the rest use up to 64 leaves.
    """
    rng = np.random.default_rng(seed)
    small = [(1, 1), (1, 2), (2, 1)]
    out = []
    for i in range(count):
        if i < 20:
            grid = GridSpec(*small[i % 3])
        else:
            n = 1 + i % 2
            grid = GridSpec(n, int(rng.integers(1, (6 if n == 1 else 3) + 1)))
        sigma = LeafMeasure(grid, random_masses(rng, grid, 0.1), "sigma")
        mu = LeafMeasure(grid, random_masses(rng, grid, 0.1), "mu")
        lam = random_coefficients(rng, grid, sigma, 0.3)
        if not lam.any():
            lam[0] = 1.0
        out.append((grid, sigma, mu, lam, random_exponents(rng, i)))
    return out


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _round(x: float) -> float:
    """Metrics are reported to 12 significant digits."""
    return float(f"{x:.12g}") if math.isfinite(x) else x


# -- gates ----------------------------------------------------------------------------------------


def gate_adjoint(rng, count: int) -> GateResult:
    worst, rows, failures = 0.0, [], []
    for i in range(count):
        grid = random_grid(rng)
        sigma = LeafMeasure(grid, random_masses(rng, grid), "sigma")
        mu = LeafMeasure(grid, random_masses(rng, grid))
        lam = random_coefficients(rng, grid)
        f = rng.exponential(size=grid.num_leaves)
        g = rng.normal(size=grid.num_cubes)
        lhs = pairing(lam, sigma, mu, f, g)
        rhs = float(np.dot(f * np.asarray(sigma.masses), apply_T_star(lam, mu, g)))
        err = abs(lhs - rhs) / max(1.0, abs(lhs))
        worst = max(worst, err)
        rows.append({"instance": i, "error": err})
        if err > 1e-12:
            failures.append({"instance": i, "error": err})
    return GateResult(1, "adjoint identity", not failures, count, {"max_error": worst}, rows, failures)


def gate_mixed_norm(rng, count: int) -> GateResult:
    worst, rows, failures = 0.0, [], []
    for i in range(count):
        grid = random_grid(rng)
        sigma = LeafMeasure(grid, random_masses(rng, grid), "sigma")
        mu = LeafMeasure(grid, random_masses(rng, grid))
        v = apply_T(random_coefficients(rng, grid), sigma, rng.exponential(size=grid.num_leaves))
        q = float(rng.uniform(1.0, 4.0))
        s = (1.0, 1.5, 2.0, 3.0, INF)[i % 5]
        fast, slow = mixed_norm(v, mu, q, s), naive_mixed_norm(v, mu, q, s)
        err = abs(fast - slow) / max(1e-300, abs(slow)) if slow else abs(fast)
        worst = max(worst, err)
        rows.append({"instance": i, "error": err})
        if err > 1e-12:
            failures.append({"instance": i, "s": s, "error": err})
    return GateResult(2, "mixed norm oracle", not failures, count, {"max_error": worst}, rows, failures)


def admissible_summands(rng, family: CubeFamily) -> dict:
    """Random ``a_F`` supported on ``F`` and constant on each family child of ``F``."""
    grid = family.grid
    out = {}
    for top in family:
        a = np.zeros(grid.num_leaves)
        span = grid.leaves_under(top)
        a[span.start:span.stop] = rng.exponential(size=len(span))
        for child in family_children(family, top):
            cs = grid.leaves_under(child)
            a[cs.start:cs.stop] = rng.exponential()
        out[top] = a
    return out


def gate_sparse_sums(rng, count: int) -> GateResult:
    rows, failures = [], []
    worst_upper = 0.0
    for i in range(count):
        grid = random_grid(rng)
        sigma = LeafMeasure(grid, random_masses(rng, grid, 0.1), "sigma")
        family = stopping_family(heavy_function(rng, grid), sigma)
        p = (1.5, 2.0, 3.0)[i % 3]
        lower, middle, upper = sparse_sum_bounds(admissible_summands(rng, family), sigma, p)
        sparse = is_sigma_sparse(family, sigma)[0]
        ok = sparse and lower <= middle * (1 + 1e-12) and middle <= upper
        worst_upper = max(worst_upper, middle / lower if lower else 0.0)
        rows.append({"instance": i, "p": p, "size": len(family), "lower": lower, "middle": middle, "upper": upper})
        if not ok:
            failures.append({"instance": i, "sparse": sparse, "lower": lower, "middle": middle, "upper": upper})
    metrics = {"max_middle_over_lower": worst_upper}
    return GateResult(3, "sparse l^p sum bounds", not failures, count, metrics, rows, failures)


def gate_sparse_carleson(rng, count: int) -> GateResult:
    rows, failures, n_sparse = [], [], 0
    for i in range(count):
        grid = random_grid(rng, max_depth=3)
        sigma = LeafMeasure(grid, random_exact_masses(rng, grid), "sigma", exact=True)
        family = random_family(rng, grid)
        a = is_sigma_sparse(family, sigma)[0]
        b = family_carleson_check(family, sigma, 2).ok
        n_sparse += a
        rows.append({"instance": i, "sparse": a, "carleson": b})
        if a != b:
            failures.append({"instance": i, "sparse": a, "carleson": b})
    return GateResult(4, "sparse iff Carleson(2)", not failures, count,
                      {"sparse": n_sparse, "not_sparse": count - n_sparse}, rows, failures)


def point_mass_instance():
    grid = GridSpec(1, 1)
    lam = grid.cube_array({grid.root: 0.5, grid.leaf(0): 0.5})
    return grid, lam, LeafMeasure(grid, [1.0, 0.0])


def gate_allocation(rng, count: int) -> GateResult:
    rows, failures = [], []
    worst = 0.0
    for i in range(count):
        exact = i % 2 == 0
        grid = random_grid(rng, max_depth=3 if exact else 4)
        if exact:
            mu = LeafMeasure(grid, random_exact_masses(rng, grid), exact=True)
            lam = np.array([Fraction(int(rng.integers(0, 6)), int(rng.integers(1, 5))) if rng.random() < 0.6
                            else Fraction(0) for _ in range(grid.num_cubes)], dtype=object)
            lam[mu.cube_masses == 0] = Fraction(0)
        else:
            mu = LeafMeasure(grid, random_masses(rng, grid))
            lam = random_coefficients(rng, grid, mu)
        C = carleson_constant(lam, mu).value
        try:
            alloc = dor_allocate(lam, mu, C) if C else DisjointAllocation(grid)
        except Infeasible as err:
            failures.append({"instance": i, "infeasible": str(err.cube)})
            continue
        disjoint = alloc.is_disjoint(tol=0 if exact else 1e-9)
        err = 0.0
        for cube, got in alloc.masses(mu).items():
            want = lam[grid.flat(cube)] / C
            if exact:
                err = max(err, 0.0 if got == want else 1.0)
            else:
                err = max(err, abs(float(got) - float(want)) / max(1.0, float(want)))
        worst = max(worst, err)
        rows.append({"instance": i, "exact": exact, "carleson": float(C), "error": err})
        if not disjoint or err > (0 if exact else 1e-9):
            failures.append({"instance": i, "disjoint": disjoint, "error": err})
    grid, lam, mu = point_mass_instance()
    fractional_ok = len(dor_allocate(lam, mu, 1)) == 2
    try:
        dor_allocate(lam, mu, 1, atomic_mode=True)
        atomic = "feasible"
    except Infeasible as err:
        atomic = f"Infeasible({err.cube})"
    if atomic != f"Infeasible({grid.root})" or not fractional_ok:
        failures.append({"point_mass": atomic, "fractional_ok": fractional_ok})
    metrics = {"max_mass_error": worst, "point_mass_atomic": atomic, "point_mass_fractional": fractional_ok}
    return GateResult(5, "Carleson allocation", not failures, count, metrics, rows, failures)


def gate_allocation_constant(rng, count: int) -> GateResult:
    rows, failures = [], []
    worst, worst_lp = 0.0, 0.0
    shapes = [(1, 1), (1, 2), (1, 3), (2, 1), (3, 1)]
    for i in range(count):
        grid = GridSpec(*shapes[int(rng.integers(len(shapes)))])
        mu = LeafMeasure(grid, random_masses(rng, grid, 0.15))
        lam = np.zeros(grid.num_cubes)
        k = int(rng.integers(1, min(7, grid.num_cubes) + 1))
        support = rng.choice(grid.num_cubes, size=k, replace=False)
        lam[support] = rng.exponential(size=k)
        lam[np.asarray(mu.cube_masses) == 0] = 0.0
        if not lam.any():
            lam[0] = 1.0
        l1 = float(carleson_constant(lam, mu).value)
        l2 = float(lambda2_bruteforce(lam, mu))
        lp = lambda2_lp(lam, mu)[0]
        err = abs(l1 - l2) / l1
        worst = max(worst, err)
        worst_lp = max(worst_lp, abs(l1 - lp) / l1)
        rows.append({"instance": i, "lambda1": l1, "lambda2": l2, "lambda2_lp": lp})
        if err > 0.02:
            failures.append({"instance": i, "lambda1": l1, "lambda2": l2})
    metrics = {"max_relative_gap": worst, "max_relative_gap_lp": worst_lp}
    return GateResult(6, "Carleson constant equals allocation constant", not failures, count, metrics, rows, failures)


def gate_witness(rng, count: int) -> GateResult:
    rows, failures = [], []
    worst_den, worst_gap = 0.0, 0.0
    for i in range(count):
        grid = random_grid(rng)
        mu = LeafMeasure(grid, random_masses(rng, grid))
        Lam = random_coefficients(rng, grid)
        s = (1.5, 2.0, 4.0)[i % 3]
        rep = a1_a2_witness(Lam, mu, s)
        ok = rep.ratio >= rep.a1 - 1e-9 * max(1.0, rep.a1) and rep.denominator <= 1 + 1e-9
        worst_den = max(worst_den, rep.denominator)
        worst_gap = max(worst_gap, rep.a1 - rep.ratio)
        rows.append({"instance": i, "s": s, "a1": rep.a1, "ratio": rep.ratio, "denominator": rep.denominator})
        if not ok:
            failures.append({"instance": i, "a1": rep.a1, "ratio": rep.ratio, "denominator": rep.denominator})
    metrics = {"max_denominator": worst_den, "max_a1_minus_ratio": worst_gap}
    return GateResult(7, "dual witness", not failures, count, metrics, rows, failures)


def gate_endpoints(rng, count: int) -> GateResult:
    rows, failures = [], []
    worst = 0.0
    for i in range(count):
        grid = random_grid(rng)
        mu = LeafMeasure(grid, random_masses(rng, grid))
        b = random_coefficients(rng, grid)
        q = float(rng.uniform(1.2, 3.0))
        E1, E2 = random_allocation(rng, grid), random_allocation(rng, grid)
        same = dorverbitsky_value(b, mu, q, q, E1) == dorverbitsky_value(b, mu, q, q, E2)
        target = maximal_norm(b, mu, q)
        lin = dorverbitsky_value(b, mu, q, INF, linearizing_allocation(b, mu))
        err = abs(lin - target) / max(1.0, target)
        dominated = dorverbitsky_value(b, mu, q, INF, E1) <= target * (1 + 1e-12)
        worst = max(worst, err)
        rows.append({"instance": i, "q": q, "maximal": target, "linearized": lin})
        if not same or err > 1e-10 or not dominated:
            failures.append({"instance": i, "independent": same, "error": err, "dominated": dominated})
    return GateResult(8, "endpoint identities", not failures, count, {"max_linearization_error": worst}, rows, failures)


def gate_reduction(rng, count: int) -> GateResult:
    seed = int(rng.integers(2 ** 32))
    rows, failures = [], []
    lo, hi, worst_norm, worst_red, worst_hom = math.inf, 0.0, 0.0, 0.0, 0.0
    for i, (grid, sigma, mu, lam, e) in enumerate(theorem_instances(seed, count)):
        norm = operator_norm(lam, sigma, mu, e, seed=i)
        sup = reduction_condition_sup(lam, sigma, mu, e, seed=i)
        row = {"instance": i, "leaves": grid.num_leaves, "p": e.p, "q": e.q, "s": e.s,
               "norm": norm.value, "reduction": sup.value}
        bad = {}
        if norm.value > 0 and sup.value > 0:
            ratio = norm.value / sup.value ** (1.0 / e.q)
            lo, hi = min(lo, ratio), max(hi, ratio)
            row["ratio"] = ratio
            if not 1.0 / BAND <= ratio <= BAND:
                bad["ratio"] = ratio
        elif (norm.value > 0) != (sup.value > 0):
            bad["zero_mismatch"] = [norm.value, sup.value]
        t = (0.25, 2.0, 8.0)[i % 3]
        scaled_red = reduction_condition_value(t * lam, sigma, mu, e, sup.certificate)
        base_red = reduction_condition_value(lam, sigma, mu, e, sup.certificate)
        scaled_norm = operator_norm(t * lam, sigma, mu, e, seed=i).value
        hom = max(_rel(scaled_red, t ** e.q * base_red) / max(1.0, t ** e.q),
                  _rel(scaled_norm, t * norm.value) / max(1.0, t))
        worst_hom = max(worst_hom, hom)
        if hom > 1e-10:
            bad["homogeneity"] = hom
        if grid.num_leaves <= 4:
            brute = operator_norm_bruteforce(lam, sigma, mu, e).value
            asc = reduction_condition_sup(lam, sigma, mu, e, seed=i, oracle_leaves=0).value
            oracle = reduction_condition_bruteforce(lam, sigma, mu, e).value
            dn = abs(norm.value - brute) / max(norm.value, brute, 1e-300)
            dr = abs(asc - oracle) / max(asc, oracle, 1e-300)
            worst_norm, worst_red = max(worst_norm, dn), max(worst_red, dr)
            row.update(norm_bruteforce=brute, reduction_bruteforce=oracle)
            if dn > 0.01 or dr > 0.01:
                bad.update(norm_gap=dn, reduction_gap=dr)
        rows.append(row)
        if bad:
            failures.append({"instance": i, **bad})
    metrics = {
        "band": [lo if math.isfinite(lo) else None, hi or None],
        "band_limit": [1.0 / BAND, BAND],
        "max_homogeneity_error": worst_hom,
        "max_norm_oracle_gap": worst_norm,
        "max_reduction_oracle_gap": worst_red,
    }
    return GateResult(9, "reduction equivalence", not failures, count, metrics, rows, failures)


def gate_necessity(rng, count: int) -> GateResult:
    seed = int(rng.integers(2 ** 32))
    rows, failures = [], []
    max1, max2 = 0.0, 0.0
    for i, (grid, sigma, mu, lam, e) in enumerate(theorem_instances(seed, count)):
        norm = operator_norm(lam, sigma, mu, e, seed=i).value
        g_fams = [CubeFamily(grid, [grid.root]), stopping_family(heavy_function(rng, grid), mu)]
        f_fams = [CubeFamily(grid, [grid.root]), stopping_family(heavy_function(rng, grid), sigma)]
        c1 = 0.0
        for G in g_fams:
            for _ in range(3):
                g = rng.exponential(size=grid.num_cubes) * (rng.random(grid.num_cubes) < 0.7)
                c1 = max(c1, cond1_value(lam, sigma, mu, e, G, g, check=False))
        c2 = max(cond2_constant(lam, sigma, mu, e, F, seed=i).value for F in f_fams)
        r1 = c1 / norm if norm > 0 else (0.0 if c1 == 0 else math.inf)
        r2 = c2 / norm if norm > 0 else (0.0 if c2 == 0 else math.inf)
        max1, max2 = max(max1, r1), max(max2, r2)
        rows.append({"instance": i, "norm": norm, "cond1": c1, "cond2": c2})
        if r1 > NECESSITY_BOUND or r2 > NECESSITY_BOUND:
            failures.append({"instance": i, "cond1_ratio": r1, "cond2_ratio": r2})
    metrics = {"max_cond1_ratio": max1, "max_cond2_ratio": max2, "bound": NECESSITY_BOUND}
    return GateResult(10, "testing conditions bounded by the norm", not failures, count, metrics, rows, failures)


def wolff_hand_value() -> np.ndarray:
    return wolff_dyadic(np.ones(2), WolffParams(0.5, 2.0), GridSpec(1, 1))


def gate_wolff(rng, count: int) -> GateResult:
    rows, failures = [], []
    hand = wolff_hand_value()
    hand_ok = bool(np.all(hand == 1.5))
    worst = 0.0
    for i in range(count):
        grid = random_grid(rng)
        f = rng.exponential(size=grid.num_leaves) * (rng.random(grid.num_leaves) >= 0.3)
        if not f.any():
            f[0] = 1.0
        n = grid.dimension
        w = WolffParams(float(rng.uniform(0.25 * n, 0.9 * n)), float(rng.uniform(1.0, 3.0)))
        S = wolff_sparse_family(f, grid)
        sandwich = bool(np.all(wolff_sparse(f, w, S) <= wolff_dyadic(f, w, grid)))
        ratio = domination_ratio(f, w, S)
        limit = 2 ** w.s * 8
        sparse = is_sigma_sparse(S, LeafMeasure.lebesgue(grid, exact=True))[0]
        worst = max(worst, ratio / limit)
        rows.append({"instance": i, "alpha": w.alpha, "s": w.s, "ratio": ratio, "family": len(S)})
        if not (sandwich and sparse and ratio <= limit):
            failures.append({"instance": i, "sandwich": sandwich, "sparse": sparse, "ratio": ratio})
    if not hand_ok:
        failures.append({"hand_value": [float(x) for x in hand]})
    metrics = {"hand_value": [float(x) for x in hand], "max_ratio_over_limit": worst}
    return GateResult(11, "Wolff potentials", not failures, count, metrics, rows, failures)


GATES: dict[str, tuple[Callable, int]] = {
    "adjoint": (gate_adjoint, 1000),
    "mixed_norm": (gate_mixed_norm, 1000),
    "sparse_sums": (gate_sparse_sums, 200),
    "sparse_carleson": (gate_sparse_carleson, 500),
    "allocation": (gate_allocation, 500),
    "allocation_constant": (gate_allocation_constant, 100),
    "witness": (gate_witness, 300),
    "endpoints": (gate_endpoints, 200),
    "reduction": (gate_reduction, 50),
    "necessity": (gate_necessity, 50),
    "wolff": (gate_wolff, 200),
}


def run_gate(name: str, seed: int, scale: float = 1.0) -> GateResult:
    fn, default = GATES[name]
    child = np.random.SeedSequence(seed).spawn(len(GATES))[list(GATES).index(name)]
    return fn(np.random.default_rng(child), int(round(default * scale)))


def run_suite(seed: int = 42, scale: float = 1.0, threads: int = 1, only=None) -> list[GateResult]:
    names = [n for n in GATES if only is None or n in only]
    if threads <= 1:
        return [run_gate(n, seed, scale) for n in names]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda n: run_gate(n, seed, scale), names))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return _round(x)
    return obj


def summary_json(results: list[GateResult], seed: int, scale: float) -> str:
    body = {
        "seed": seed,
        "scale": scale,
        "passed": all(r.passed for r in results),
        "gates": [r.summary() for r in results],
    }
    return json.dumps(_clean(body), sort_keys=True, indent=2) + "\n"


def rows_csv(results: list[GateResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["gate", "instance", "metric", "value"])
    for r in results:
        for row in r.rows:
            for key, value in sorted(row.items()):
                if key != "instance":
                    writer.writerow([r.name, row.get("instance"), key, _clean(value)])
    return buf.getvalue()
