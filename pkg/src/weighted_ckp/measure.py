"""Finite probability spaces, densities, test functions and L^p norms.

Everything downstream works on a :class:`Space` (strictly positive atom
weights summing to one) and plain float arrays indexed by atom. Arrays handed
out by the validators in this module are read-only copies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BadDensity,
    BadExponent,
    BadFunction,
    BadNormalization,
    BadOrder,
    EmptySpace,
    NonpositiveWeight,
)

INPUT_TOL = 1e-9
INTERNAL_TOL = 1e-12
ALPHA_MAX = 50.0

ArrayLike = Sequence[float] | np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Space:
    """Atoms of a finite probability space; ``weights[i]`` is the mass of atom i."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 1 or w.size == 0:
            raise EmptySpace("a space needs at least one atom")
        if not np.all(np.isfinite(w)):
            raise NonpositiveWeight("weights must be finite")
        if np.any(w <= 0):
            raise NonpositiveWeight(f"atom weights must be > 0, got min {w.min()!r}")
        if abs(float(np.sum(w)) - 1.0) > INTERNAL_TOL:
            raise BadNormalization(f"weights sum to {float(np.sum(w))!r}")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def integrate(self, h: ArrayLike) -> float:
        """Return the mu-integral of the per-atom values ``h``."""
        return float(np.sum(self.weights * np.asarray(h, dtype=float)))

    def __eq__(self, other):
        return isinstance(other, Space) and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


def make_space(weights: ArrayLike) -> Space:
    """Build a :class:`Space`, renormalizing sums within ``1e-9`` of one."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise EmptySpace("a space needs at least one atom")
    if not np.all(np.isfinite(w)):
        raise NonpositiveWeight("weights must be finite")
    if np.any(w <= 0):
        raise NonpositiveWeight(f"atom weights must be > 0, got min {w.min()!r}")
    total = float(np.sum(w))
    if abs(total - 1.0) > INPUT_TOL:
        raise BadNormalization(f"weights sum to {total!r}, not 1")
    # leave already-normalized input bit-for-bit intact so round trips are exact
    return Space(w if abs(total - 1.0) <= INTERNAL_TOL else w / total)


def as_function(space: Space, h: ArrayLike) -> np.ndarray:
    """Validate a real function on the atoms of ``space`` (finite entries)."""
    a = np.asarray(h, dtype=float).ravel()
    if a.shape != (space.n,):
        raise BadFunction(f"expected {space.n} values, got {a.size}")
    if not np.all(np.isfinite(a)):
        raise BadFunction("function values must be finite")
    return _frozen(a)


def as_density(space: Space, f: ArrayLike, tol: float = INPUT_TOL) -> np.ndarray:
    """Validate a density dnu/dmu: nonnegative with mu-mean one.

    Means within ``tol`` of one are renormalized so the returned array meets
    the internal ``1e-12`` invariant; means already within ``1e-12`` are kept
    as given, which makes save/load round trips exact.
    """
    a = as_function(space, f)
    if np.any(a < 0):
        raise BadDensity(f"density values must be >= 0, got min {a.min()!r}")
    mass = space.integrate(a)
    if abs(mass - 1.0) > tol:
        raise BadDensity(f"density integrates to {mass!r}, not 1")
    return a if abs(mass - 1.0) <= INTERNAL_TOL else _frozen(a / mass)


@dataclass(frozen=True)
class Order:
    """Renyi order alpha in (1, 50] with conjugate exponents."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (math.isfinite(a) and 1.0 < a <= ALPHA_MAX):
            raise BadOrder(f"alpha must lie in (1, {ALPHA_MAX:g}], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    @property
    def beta(self) -> float:
        return self.alpha / (self.alpha - 1.0)

    @property
    def beta_star(self) -> float:
        return max(self.beta, 2.0)


def as_order(order: Order | float) -> Order:
    return order if isinstance(order, Order) else Order(order)


def lp_norm(space: Space, h: ArrayLike, p: float) -> float:
    """Return ``(sum_i mu_i |h_i|^p)^(1/p)`` for ``p >= 1``."""
    if not p >= 1:
        raise BadExponent(f"p must be >= 1, got {p!r}")
    a = np.abs(np.asarray(h, dtype=float))
    if math.isinf(p):
        return float(a.max())
    scale = float(a.max())
    if scale == 0.0:
        return 0.0
    # scaling by the max keeps large p from overflowing
    return scale * float(np.sum(space.weights * (a / scale) ** p)) ** (1.0 / p)


def center(space: Space, u: ArrayLike) -> np.ndarray:
    """Return ``u - mean_mu(u)``."""
    a = np.asarray(u, dtype=float)
    return a - space.integrate(a)
