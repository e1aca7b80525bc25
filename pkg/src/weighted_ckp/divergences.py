"""Information divergences between nu = f dmu and mu on a finite space.

Densities are taken as already validated (see :func:`measure.as_density`).
``0 ** alpha`` evaluates to 0 for alpha > 1, so atoms where f vanishes need no
special casing; only the KL term uses an explicit ``0 log 0 = 0`` mask.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NegativeWeightFunction
from .measure import ArrayLike, Order, Space, as_order


def kl(space: Space, f: ArrayLike) -> float:
    """Kullback-Leibler divergence ``sum mu_i f_i log f_i``."""
    f = np.asarray(f, dtype=float)
    pos = f > 0
    return max(float(np.sum(space.weights[pos] * f[pos] * np.log(f[pos]))), 0.0)


def power_moment(space: Space, f: ArrayLike, alpha: float) -> float:
    """``int f^alpha dmu``; the accumulator shared by Renyi and Tsallis."""
    return float(np.sum(space.weights * np.asarray(f, dtype=float) ** alpha))


def renyi(space: Space, f: ArrayLike, order: Order | float) -> float:
    """Renyi divergence ``log(int f^alpha dmu) / (alpha - 1)``."""
    order = as_order(order)
    m = power_moment(space, f, order.alpha)
    return max(math.log(m) / (order.alpha - 1.0), 0.0)


def tsallis(space: Space, f: ArrayLike, order: Order | float) -> float:
    """Renyi divergence power (Tsallis distance) ``(int f^alpha dmu - 1) / (alpha - 1)``."""
    order = as_order(order)
    m = power_moment(space, f, order.alpha)
    return max((m - 1.0) / (order.alpha - 1.0), 0.0)


def tsallis_from_renyi(renyi_value: float, order: Order | float) -> float:
    a = as_order(order).alpha
    return math.expm1((a - 1.0) * renyi_value) / (a - 1.0)


def pearson_vajda(space: Space, f: ArrayLike, order: Order | float) -> float:
    """Pearson-Vajda distance ``int |f - 1|^alpha dmu``."""
    a = as_order(order).alpha
    return float(np.sum(space.weights * np.abs(np.asarray(f, dtype=float) - 1.0) ** a))


def total_variation(space: Space, f: ArrayLike) -> float:
    """Total variation ``int |f - 1| dmu`` (L1 convention, range [0, 2])."""
    return float(np.sum(space.weights * np.abs(np.asarray(f, dtype=float) - 1.0)))


def weighted_tv(space: Space, f: ArrayLike, w: ArrayLike) -> float:
    """Weighted total variation ``int w |f - 1| dmu`` for a weight ``w >= 0``."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise NegativeWeightFunction(f"weight function must be >= 0, got min {w.min()!r}")
    return float(np.sum(space.weights * w * np.abs(np.asarray(f, dtype=float) - 1.0)))
