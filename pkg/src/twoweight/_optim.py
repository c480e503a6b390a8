"""Small search primitives shared by the norm and condition estimators."""

from __future__ import annotations

from itertools import combinations
from typing import Callable

import numpy as np


def compositions(d: int, total: int) -> np.ndarray:
    """All nonnegative integer vectors of length ``d`` summing to ``total``."""
    if d == 1:
        return np.array([[total]], dtype=np.int64)
    rows = []
    for bars in combinations(range(total + d - 1), d - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(total + d - 2 - prev)
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def count_compositions(d: int, total: int) -> int:
    from math import comb

    return comb(total + d - 1, d - 1)


def simplex_grid(d: int, resolution: int) -> np.ndarray:
    return compositions(d, resolution) / resolution


def local_simplex_grid(center: np.ndarray, radius: float, steps: int) -> np.ndarray:
    """Points of the simplex near ``center``: free coordinates on a ``(2 steps + 1)`` lattice."""
    d = center.size
    if d == 1:
        return center[None, :]
    offs = np.linspace(-radius, radius, 2 * steps + 1)
    mesh = np.stack(np.meshgrid(*([offs] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    pts = np.empty((mesh.shape[0], d))
    pts[:, :-1] = center[:-1] + mesh
    pts[:, -1] = 1.0 - pts[:, :-1].sum(axis=1)
    keep = np.all(pts >= 0, axis=1)
    return pts[keep]


def power_ascent(
    value_and_direction: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    p: float,
    weights: np.ndarray,
    tol: float = 1e-8,
    patience: int = 50,
    max_iter: int = 3000,
) -> tuple[float, np.ndarray]:
    """Maximise ``N(A x) / ||x||_{p, weights}`` over ``x >= 0``.

    ``value_and_direction(x)`` returns ``N(A x)`` and ``(A^T grad N(A x)) / weights``.
    Each step moves geometrically towards the fixed point
    ``x = direction^(1/(p-1))`` of the stationarity condition, halving the
    step until the ratio does not decrease.  Stops when the ratio gained
    less than ``tol`` (relative) over the last ``patience`` iterations.
    """
    live = weights > 0

    def normalise(x):
        x = np.where(live, x, 0.0)
        nrm = float((weights * x ** p).sum()) ** (1.0 / p)
        return x / nrm if nrm > 0 else x

    x = normalise(np.asarray(x0, dtype=float))
    val, direction = value_and_direction(x)
    history = [val]
    eta = 1.0
    for _ in range(max_iter):
        target = normalise(np.maximum(direction, 0.0) ** (1.0 / (p - 1.0)))
        if not np.any(target > 0):
            break
        accepted = False
        while eta >= 1.0 / 256:
            cand = normalise(x ** (1.0 - eta) * target ** eta)
            cval, cdir = value_and_direction(cand)
            if cval >= val:
                x, val, direction = cand, cval, cdir
                accepted = True
                eta = min(1.0, 2.0 * eta)
                break
            eta *= 0.5
        if not accepted:
            break
        history.append(val)
        if len(history) > patience and val - history[-patience - 1] <= tol * val:
            break
    return val, x

