"""Linearization of the Renyi divergence power.

For a function ``g`` on the atoms the question is whether
``int g dnu <= T_alpha(nu || mu)`` for every density. The answer hinges on the
constant ``c`` solving ``int (g - c)_+^(beta-1) dmu = beta^(beta-1)`` and on
the density ``f = beta^(1-beta) (g - c)_+^(beta-1)`` which maximizes
``R f = int f g dmu - T_alpha``.

Internally the root equation is solved in the normalized form
``sum mu_i ((g_i - c)/beta)_+^(beta-1) = 1``; the two are the same equation
but the normalized one cannot overflow for alpha close to 1 and has the
explicit bracket ``c in [min g - beta, max g - beta]``.

:func:`maximize_r` is an independent oracle: projected gradient ascent over
the simplex of densities that knows nothing about the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import power_moment
from .errors import NegativeG, NoConvergence, NotDominated, OracleNotConverged
from .measure import ArrayLike, Order, Space, as_order, lp_norm
from .projection import project_density, projected_step

# enough halvings to close any finite bracket down to adjacent floats
MAX_BISECTIONS = 2200
DOMINATION_TOL = 1e-10


def phi(space: Space, g: ArrayLike, beta: float, c: float) -> float:
    """``int (g - c)_+^(beta-1) dmu``; nonincreasing and convex in ``c``."""
    if not beta > 1:
        raise ValueError(f"beta must be > 1, got {beta!r}")
    g = np.asarray(g, dtype=float)
    return float(np.sum(space.weights * np.maximum(g - c, 0.0) ** (beta - 1.0)))


def _normalized_mass(weights, G, c, beta):
    x = np.maximum((G - c[:, None]) / beta, 0.0)
    return np.sum(weights * x ** (beta - 1.0), axis=1)


def _bracket_batch(weights: np.ndarray, G: np.ndarray, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Adjacent floats ``lo < hi`` around the root of every row of ``G``."""
    lo = G.min(axis=1) - beta
    hi = G.max(axis=1) - beta
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise NoConvergence("non-finite function values")
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        open_ = (mid > lo) & (mid < hi)
        if not open_.any():
            return lo, hi
        mass = _normalized_mass(weights, G, mid, beta)
        if np.any(np.isnan(mass)):
            raise NoConvergence("root equation evaluated to NaN")
        up = open_ & (mass >= 1.0)
        lo = np.where(up, mid, lo)
        hi = np.where(open_ & ~up, mid, hi)
    raise NoConvergence(f"bisection did not close within {MAX_BISECTIONS} steps")


def solve_c_batch(weights: np.ndarray, G: np.ndarray, beta: float) -> np.ndarray:
    """Vectorized bisection for the root constant of every row of ``G``.

    Bisection runs down to floating-point resolution (the mass function can be
    very steep when the root sits next to an atom and ``beta - 1`` is small),
    then the bracket end with the smaller residual is returned.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    lo, hi = _bracket_batch(weights, G, beta)
    res_lo = np.abs(_normalized_mass(weights, G, lo, beta) - 1.0)
    res_hi = np.abs(_normalized_mass(weights, G, hi, beta) - 1.0)
    return np.where(res_lo <= res_hi, lo, hi)


def _root_gaps(weights: np.ndarray, g: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    """The root and the gaps ``g - c`` at full precision.

    A single float ``c`` is not enough when the root sits within a few ulps of
    an atom and ``beta - 1`` is small: one ulp then moves that atom's density
    by far more than 1e-9. After bracketing ``c`` between adjacent floats, a
    second bisection runs on the gap ``t`` of the lowest atom above the lower
    end, which has full relative resolution even when it is far below one ulp
    of ``c``. The other gaps are offsets from that atom plus ``t``.
    """
    lo, hi = (float(x[0]) for x in _bracket_batch(weights, g[None, :], beta))
    d = g - lo
    above = d > 0.0
    k = int(np.flatnonzero(above)[np.argmin(d[above])])
    offsets = d - d[k]
    offsets[k] = 0.0
    t_lo, t_hi = d[k] - (hi - lo), d[k]

    def mass(t):
        return float(np.sum(weights * (np.maximum(offsets + t, 0.0) / beta) ** (beta - 1.0)))

    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (t_lo + t_hi)
        if not t_lo < mid < t_hi:
            break
        if mass(mid) <= 1.0:
            t_lo = mid
        else:
            t_hi = mid
    t = t_lo if abs(mass(t_lo) - 1.0) <= abs(mass(t_hi) - 1.0) else t_hi
    return g[k] - t, offsets + t


def solve_c(space: Space, g: ArrayLike, order: Order | float) -> float:
    """Unique root of ``phi(c) = beta^(beta-1)``, bisected to floating-point resolution."""
    beta = as_order(order).beta
    return _root_gaps(space.weights, np.asarray(g, dtype=float), beta)[0]


def extremizer_from_c(g: np.ndarray, c: float, beta: float) -> np.ndarray:
    return np.maximum((g - c) / beta, 0.0) ** (beta - 1.0)


def extremizer(space: Space, g: ArrayLike, order: Order | float) -> np.ndarray:
    """The maximizer ``beta^(1-beta) (g - c)_+^(beta-1)`` of the functional R."""
    beta = as_order(order).beta
    _, gaps = _root_gaps(space.weights, np.asarray(g, dtype=float), beta)
    return np.maximum(gaps / beta, 0.0) ** (beta - 1.0)


def r_functional(space: Space, g: ArrayLike, order: Order | float, f: ArrayLike) -> float:
    """``R f = int f g dmu - T_alpha``."""
    a = as_order(order).alpha
    f = np.asarray(f, dtype=float)
    return space.integrate(f * np.asarray(g, dtype=float)) - (power_moment(space, f, a) - 1.0) / (a - 1.0)


@dataclass(frozen=True)
class DominationCertificate:
    """Outcome of the domination test for one ``g``.

    ``lhs_42``/``rhs_42`` are ``int (g-c)_+^beta dmu`` and
    ``-beta^beta (c + beta - 1)``. Their difference equals
    ``beta^beta * r_at_extremizer``; the decision uses the R scale with
    tolerance 1e-10 so it agrees with the oracle on the same footing.
    """

    c: float
    lhs_42: float
    rhs_42: float
    dominated: bool
    extremizer: np.ndarray
    r_at_extremizer: float
    beta: float

    @property
    def margin(self) -> float:
        """Signed slack ``rhs - lhs``; nonnegative iff dominated (up to tolerance)."""
        return self.rhs_42 - self.lhs_42

    @property
    def normalized_margin(self) -> float:
        return -self.r_at_extremizer


def dominated(space: Space, g: ArrayLike, order: Order | float) -> DominationCertificate:
    """Decide whether ``int g dnu <= T_alpha(nu || mu)`` for all densities."""
    order = as_order(order)
    beta = order.beta
    g = np.asarray(g, dtype=float)
    c, gaps = _root_gaps(space.weights, g, beta)
    x = np.maximum(gaps / beta, 0.0)
    scale = beta**beta
    # normalized units: lhs/beta^beta and rhs/beta^beta
    lhs_n = float(np.sum(space.weights * x**beta))
    rhs_n = -(c + beta - 1.0)
    f = x ** (beta - 1.0)
    r = r_functional(space, g, order, f)
    return DominationCertificate(
        c=c,
        lhs_42=lhs_n * scale,
        rhs_42=rhs_n * scale,
        dominated=bool(r <= DOMINATION_TOL),
        extremizer=f,
        r_at_extremizer=r,
        beta=beta,
    )


def condition_holds_at(space: Space, g: ArrayLike, order: Order | float, c: float) -> bool:
    """Whether ``int (g-c)_+^beta dmu <= -beta^beta (c + beta - 1)`` at a given ``c``."""
    beta = as_order(order).beta
    x = np.maximum((np.asarray(g, dtype=float) - c) / beta, 0.0)
    return float(np.sum(space.weights * x**beta)) <= -(c + beta - 1.0) + DOMINATION_TOL


# --- independent oracle -----------------------------------------------------

ORACLE_TOL = 1e-9
ORACLE_MAX_ITER = 100_000


def _segment_search(weights, gradient, f, d, slope0):
    """Step ``t in (0, 1]`` where the directional derivative along ``d`` vanishes.

    Uses derivatives only: objective differences near the optimum fall below
    float resolution long before the projected gradient does.
    """
    d1 = float(np.sum(weights * gradient(f + d) * d))
    if d1 >= 0.0:
        return 1.0, d1
    lo, hi, dlo, dhi = 0.0, 1.0, slope0, d1
    t, dt = 1.0, d1
    for _ in range(60):
        # Illinois-style regula falsi on the derivative, bisection as fallback
        t = hi - dhi * (hi - lo) / (dhi - dlo) if dhi != dlo else 0.5 * (lo + hi)
        if not lo < t < hi:
            t = 0.5 * (lo + hi)
        dt = float(np.sum(weights * gradient(f + t * d) * d))
        if abs(dt) <= 1e-3 * slope0 or hi - lo < 1e-15:
            break
        if dt > 0:
            lo, dlo = t, dt
            dhi *= 0.5
        else:
            hi, dhi = t, dt
            dlo *= 0.5
    return t, dt


def _ascend(weights, objective, gradient, f0, tol, max_iter, curvature=None):
    """Projected gradient ascent over densities.

    Trial steps are projected in a diagonal metric: ``curvature(f)`` when the
    caller supplies the (separable) Hessian magnitude, otherwise the
    Barzilai-Borwein scalar. Each iteration then searches the feasible
    segment for the point where the directional derivative vanishes.
    Stops when the unit-step Euclidean projected gradient
    ``||P(f + grad) - f||_inf`` drops below ``tol``.
    """
    f = project_density(weights, np.asarray(f0, dtype=float))
    grad = gradient(f)
    step = 1.0
    for it in range(max_iter):
        pg = project_density(weights, f + grad) - f
        if np.max(np.abs(pg)) < tol:
            return f, objective(f), it
        if curvature is not None:
            h = curvature(f)
            d = projected_step(weights, f, grad, h)
        else:
            d = project_density(weights, f + step * grad) - f
        slope = float(np.sum(weights * grad * d))
        if not slope > 0.0:
            d = pg
            slope = float(np.sum(weights * grad * d))
            if not slope > 0.0:
                return f, objective(f), it
        t, _ = _segment_search(weights, gradient, f, d, slope)
        cand = np.maximum(f + t * d, 0.0)
        # keep the iterate on the simplex: rounding in f + t d drifts the mass
        cand /= float(np.sum(weights * cand))
        cgrad = gradient(cand)
        s = cand - f
        y = cgrad - grad
        sy = float(np.sum(weights * s * y))
        ss = float(np.sum(weights * s * s))
        if ss == 0.0:
            return f, objective(f), it
        # ascent on a concave objective: sy < 0 and the BB step is ss / -sy
        step = min(max(ss / -sy, 1e-10), 1e10) if sy < 0 else 1e10
        f, grad = cand, cgrad
    err = OracleNotConverged(f"projected gradient stalled after {max_iter} iterations")
    err.iterate = f
    raise err


def maximize_r(
    space: Space,
    g: ArrayLike,
    order: Order | float,
    tol: float = ORACLE_TOL,
    max_iter: int = ORACLE_MAX_ITER,
) -> tuple[np.ndarray, float]:
    """Maximize R over all densities by projected gradient ascent.

    R is strictly concave, so the stationary point found is the global max.
    Returns ``(f_star, max_value)``.
    """
    a = as_order(order).alpha
    beta = a / (a - 1.0)
    w = space.weights
    g = np.asarray(g, dtype=float)

    def objective(f):
        return float(np.sum(w * f * g)) - (float(np.sum(w * f**a)) - 1.0) / (a - 1.0)

    def gradient(f):
        return g - beta * f ** (a - 1.0)

    def curvature(f):
        # exact Hessian magnitude a f^(a-2), floored so zero atoms can re-enter
        return a * np.maximum(f, 1e-8 * max(float(f.max()), 1.0)) ** (a - 2.0)

    f, val, _ = _ascend(w, objective, gradient, np.ones_like(g), tol, max_iter, curvature)
    return f, val


# --- sufficient and necessary conditions ------------------------------------


def sufficient_condition(space: Space, g: ArrayLike, order: Order | float) -> bool:
    """``int (1 + g/beta)_+^beta dmu <= 1`` (implies domination)."""
    return sufficient_lhs(space, g, order) <= 1.0


def sufficient_lhs(space: Space, g: ArrayLike, order: Order | float) -> float:
    beta = as_order(order).beta
    g = np.asarray(g, dtype=float)
    return float(np.sum(space.weights * np.maximum(1.0 + g / beta, 0.0) ** beta))


@dataclass(frozen=True)
class NecessaryConditions:
    mean_ok: bool
    cond_82_ok: bool
    cond_72_ok: bool
    mean: float
    lhs_82: float
    lhs_72: float
    rhs_72: float

    def __iter__(self):
        return iter((self.mean_ok, self.cond_82_ok, self.cond_72_ok))


def necessary_conditions(space: Space, g: ArrayLike, order: Order | float) -> NecessaryConditions:
    """Three conditions every dominated ``g`` satisfies.

    ``int g dmu <= 0``, ``int (1 + g/(beta-1))_+^(beta-1) dmu <= 1`` and the
    moment bound ``int (1 + (alpha-1) g)_+^beta dmu <= (e alpha)^beta``.
    Unpacks as ``(mean_ok, cond_82_ok, cond_72_ok)``.
    """
    order = as_order(order)
    a, beta = order.alpha, order.beta
    g = np.asarray(g, dtype=float)
    w = space.weights
    mean = space.integrate(g)
    lhs_82 = float(np.sum(w * np.maximum(1.0 + g / (beta - 1.0), 0.0) ** (beta - 1.0)))
    # (1 + (a-1) g)_+^beta <= (e a)^beta compared after the beta-th root
    lhs_72 = lp_norm(space, np.maximum(1.0 + (a - 1.0) * g, 0.0), beta)
    rhs_72 = math.e * a
    return NecessaryConditions(
        mean_ok=mean <= 0.0,
        cond_82_ok=lhs_82 <= 1.0,
        cond_72_ok=lhs_72 <= rhs_72,
        mean=mean,
        lhs_82=lhs_82,
        lhs_72=lhs_72**beta,
        rhs_72=rhs_72**beta,
    )


@dataclass(frozen=True)
class CBounds:
    ok: bool
    c: float
    c_upper: float
    c_lower: float
    moment_lhs: float
    moment_rhs: float


def c_bounds(cert: DominationCertificate, space: Space, g: ArrayLike, order: Order | float,
             tol: float = DOMINATION_TOL) -> CBounds:
    """Two-sided bounds on the root constant of a dominated ``g`` and the implied moment bound."""
    if not cert.dominated:
        raise NotDominated("c bounds only hold for dominated functions")
    order = as_order(order)
    a, beta = order.alpha, order.beta
    g = np.asarray(g, dtype=float)
    mean = space.integrate(g)
    moment = float(np.sum(space.weights * np.maximum(g, 0.0) ** beta))
    if a <= 2.0:
        c_lower = -beta + mean
        moment_rhs = beta**beta * (1.0 - mean)
    else:
        c_lower = -4.0 + a * mean
        moment_rhs = beta**beta * (4.0 - a * mean)
    c_upper = -beta
    ok = (
        cert.c <= c_upper + tol
        and cert.c >= c_lower - tol
        and moment <= moment_rhs + tol * max(1.0, abs(moment_rhs))
    )
    return CBounds(ok=bool(ok), c=cert.c, c_upper=c_upper, c_lower=c_lower,
                   moment_lhs=moment, moment_rhs=moment_rhs)


def c_bounds_check(cert: DominationCertificate, space: Space, g: ArrayLike, order: Order | float) -> bool:
    return c_bounds(cert, space, g, order).ok


# --- Hoelder-type constant ----------------------------------------------------


def _ratio_family_values(weights, g, a, beta, cs):
    X = np.maximum(g[None, :] - cs[:, None], 0.0) ** (beta - 1.0)
    mass = X @ weights
    F = X / mass[:, None]
    num = F @ (weights * g)
    den = (F**a) @ weights
    return num / den


def q_constant_bounds(space: Space, g: ArrayLike, order: Order | float) -> tuple[float, float, float]:
    """Bounds and an estimate of the best ``K`` in ``int f g dmu <= K int f^alpha dmu``.

    Returns ``(lower, upper, k_est)`` with ``lower = ||g||_beta / (e alpha)``
    and ``upper = ||g||_beta``. ``k_est`` maximizes the ratio over the family
    ``f ∝ (g - c)_+^(beta-1)`` (which contains the maximizer) and is then
    polished by projected gradient ascent on the ratio itself.
    """
    order = as_order(order)
    a, beta = order.alpha, order.beta
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise NegativeG(f"g must be >= 0, got min {g.min()!r}")
    w = space.weights
    norm = lp_norm(space, g, beta)
    lower, upper = norm / (math.e * a), norm
    if norm == 0.0:
        return 0.0, 0.0, 0.0
    top = float(g.max())
    # c = top - t * top over a log grid of t, then golden refinement
    ts = np.concatenate([np.geomspace(1e-6, 1e6, 241)])
    cs = top - ts * top
    vals = _ratio_family_values(w, g, a, beta, cs)
    k = int(np.argmax(vals))
    lo_t = ts[max(k - 1, 0)]
    hi_t = ts[min(k + 1, ts.size - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = math.log(lo_t)
    x2 = math.log(hi_t)
    ratio = lambda lt: float(_ratio_family_values(w, g, a, beta, np.array([top - math.exp(lt) * top]))[0])
    for _ in range(100):
        m1 = x2 - invphi * (x2 - x1)
        m2 = x1 + invphi * (x2 - x1)
        if ratio(m1) < ratio(m2):
            x1 = m1
        else:
            x2 = m2
    best_t = math.exp(0.5 * (x1 + x2))
    best = max(float(vals[k]), ratio(math.log(best_t)))
    f0 = np.maximum(g - (top - best_t * top), 0.0) ** (beta - 1.0)
    f0 = f0 / float(np.sum(w * f0))

    def objective(f):
        den = float(np.sum(w * f**a))
        return float(np.sum(w * f * g)) / den

    def gradient(f):
        den = float(np.sum(w * f**a))
        num = float(np.sum(w * f * g))
        return g / den - num * a * f ** (a - 1.0) / den**2

    try:
        _, polished, _ = _ascend(w, objective, gradient, f0, 1e-12, 2000)
    except OracleNotConverged:
        polished = best
    return lower, upper, max(best, polished)
