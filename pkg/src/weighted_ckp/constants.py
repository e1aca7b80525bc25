"""Best constants in ``|int u dnu| <= K sqrt(T_alpha(nu || mu))`` for centered ``u``.

Three pieces: the truncated-moment quantity ``K_p(u)``, the theoretical
two-sided interval for the best ``K``, and a search that produces a certified
lower bound for it (every candidate is an actual density, so the best ratio
found can never exceed the true best constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import tsallis
from .errors import BadExponent, NotCentered, ZeroFunction
from .linearization import solve_c_batch
from .measure import ArrayLike, Order, Space, as_order, lp_norm
from .projection import project_density

CENTER_TOL = 1e-9


def _check_centered(space: Space, u: np.ndarray) -> None:
    mean = space.integrate(u)
    scale = max(1.0, float(np.max(np.abs(u))) if u.size else 1.0)
    if abs(mean) > CENTER_TOL * scale:
        raise NotCentered(f"u has mu-mean {mean!r}, expected 0")


def k_p(space: Space, u: ArrayLike, p: float) -> float:
    """``K_p(u) = (sup_r r^(p-2) int_{|u|>=r} |u|^p dmu)^(1/(2p-2))``.

    On each interval between consecutive distinct values of ``|u|`` the set
    ``{|u| >= r}`` is fixed and ``r^(p-2)`` is nondecreasing, so the supremum
    is attained at one of the distinct positive values of ``|u|``.
    """
    if not p >= 2:
        raise BadExponent(f"K_p needs p >= 2, got {p!r}")
    u = np.asarray(u, dtype=float)
    _check_centered(space, u)
    value, _ = _kp_sup(space.weights, np.abs(u), p)
    return value ** (1.0 / (2.0 * p - 2.0)) if value > 0 else 0.0


def _kp_sup(weights, a, p):
    order = np.argsort(a, kind="stable")
    vals = a[order]
    tail = np.cumsum((weights[order] * vals**p)[::-1])[::-1]
    # ties: the tail sum must include every atom equal to r
    firsts = np.searchsorted(vals, vals, side="left")
    objective = vals ** (p - 2.0) * tail[firsts]
    objective[vals <= 0] = 0.0
    if objective.size == 0 or objective.max() <= 0:
        return 0.0, 0.0
    best = objective.max()
    # largest maximizing r
    r = float(vals[np.nonzero(objective == best)[0][-1]])
    return float(best), r


def kp_objective(space: Space, u: ArrayLike, p: float, r: float) -> float:
    """``r^(p-2) int_{|u| >= r} |u|^p dmu`` by direct summation."""
    a = np.abs(np.asarray(u, dtype=float))
    mask = a >= r
    return r ** (p - 2.0) * float(np.sum(space.weights[mask] * a[mask] ** p))


@dataclass(frozen=True)
class KInterval:
    lower: float
    upper: float
    k_empirical: float
    alpha: float


def theoretical_interval(space: Space, u: ArrayLike, order: Order | float) -> tuple[float, float]:
    """Bounds on the best ``K`` for centered ``u``.

    For ``alpha <= 2``: ``[K_beta / (4 beta^beta), 2 beta^beta K_beta]``;
    for ``alpha >= 2``: ``[sqrt(2/alpha) ||u||_2, ||u||_2]``.
    """
    order = as_order(order)
    u = np.asarray(u, dtype=float)
    _check_centered(space, u)
    a, beta = order.alpha, order.beta
    if a >= 2.0:
        norm2 = lp_norm(space, u, 2.0)
        return math.sqrt(2.0 / a) * norm2, norm2
    kb = k_p(space, u, beta)
    return 0.25 * beta**-beta * kb, 2.0 * beta**beta * kb


def best_k_interval(space: Space, u: ArrayLike, order: Order | float) -> KInterval:
    order = as_order(order)
    lower, upper = theoretical_interval(space, u, order)
    return KInterval(lower=lower, upper=upper, k_empirical=estimate_best_k(space, u, order), alpha=order.alpha)


def corollary_bound(space: Space, u: ArrayLike, order: Order | float) -> float:
    """``C_beta ||u||_{2 beta* - 2}`` with ``C_beta = 1`` (alpha >= 2) or ``2 beta^beta``."""
    order = as_order(order)
    const = 1.0 if order.alpha >= 2.0 else 2.0 * order.beta**order.beta
    return const * lp_norm(space, u, 2.0 * order.beta_star - 2.0)


# --- empirical lower bound -------------------------------------------------------

LAMBDA_GRID = tuple(sorted({s * 2.0**k for k in range(-6, 7) for s in (-1.0, 1.0)}))
N_K_CANDIDATES = 9


SERIES_RADIUS = 0.05
SERIES_TERMS = 30


def _excess_power(x: np.ndarray, a: float) -> np.ndarray:
    """``(1 + x)^a - 1 - a x`` to full relative precision, also for tiny ``x``."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < SERIES_RADIUS
    with np.errstate(divide="ignore"):
        out[~small] = np.expm1(a * np.log1p(x[~small])) - a * x[~small]
    # binomial series sum_{k >= 2} C(a, k) x^k; |x| < 0.05 makes 30 terms ample
    xs = x[small]
    coef = a * (a - 1.0) / 2.0
    power = xs * xs
    acc = np.zeros_like(xs)
    for k in range(2, SERIES_TERMS + 2):
        acc += coef * power
        coef *= (a - k) / (k + 1.0)
        power = power * xs
    out[small] = acc
    return out


def _tsallis_stable(weights, f, a):
    # sum mu (f^a - 1 - a (f - 1)) / (a - 1): same value on densities, no cancellation near f = 1
    return float(np.sum(weights * _excess_power(f - 1.0, a))) / (a - 1.0)


def _ratio(weights, u, f, a):
    t = _tsallis_stable(weights, f, a)
    if not t > 0:
        return 0.0
    return abs(float(np.sum(weights * u * (f - 1.0)))) / math.sqrt(t)


def _candidate_densities(space: Space, u: np.ndarray, order: Order, k_lo: float, k_hi: float):
    """Feasible densities likely to make the ratio large."""
    w = space.weights
    beta = order.beta
    n = u.size
    cands = []
    # small tilts 1 + eps u (the regime where T is quadratic in eps)
    for sign in (1.0, -1.0):
        v = sign * u
        neg = -v.min()
        top = 1.0 / neg if neg > 0 else 1.0
        for frac in (1e-5, 1e-3, 0.01, 0.1, 0.3, 0.6, 1.0):
            cands.append(1.0 + frac * top * v)
    # normalized indicators of level sets
    for level in np.unique(u):
        for mask in (u >= level, u <= level):
            m = float(np.sum(w[mask]))
            if 0 < m < 1:
                cands.append(mask / m)
    # extremizers of the tilt family g = theta lam u - theta lam^2
    lams = np.array(LAMBDA_GRID + (math.sqrt(beta), -math.sqrt(beta)))
    if k_lo > 0 and k_hi > 0:
        ks = np.geomspace(k_lo, k_hi, N_K_CANDIDATES) if k_hi > k_lo else np.array([k_lo])
        thetas = 4.0 / ks
        L, TH = np.meshgrid(lams, thetas)
        L, TH = L.ravel(), TH.ravel()
        G = (TH * L)[:, None] * u[None, :] - (TH * L * L)[:, None]
        cs = solve_c_batch(w, G, beta)
        F = np.maximum((G - cs[:, None]) / beta, 0.0) ** (beta - 1.0)
        cands.extend(F)
    out = []
    for f in cands:
        f = np.maximum(np.asarray(f, dtype=float), 0.0)
        mass = float(np.sum(w * f))
        if mass > 0 and f.size == n:
            out.append(f / mass)
    return out


def estimate_best_k(space: Space, u: ArrayLike, order: Order | float) -> float:
    """Certified lower bound on the best ``K`` via a density search.

    The best ratio ``|int u dnu| / sqrt(T_alpha)`` over a family of explicit
    candidates (small tilts, level-set indicators, extremizers of the
    quadratic-tilt functions ``theta lam u - theta lam^2``) seeds a projected
    gradient ascent of the ratio itself. Homogeneous of degree one in ``u``.
    """
    order = as_order(order)
    u = np.asarray(u, dtype=float)
    _check_centered(space, u)
    norm2 = lp_norm(space, u, 2.0)
    if norm2 == 0.0:
        raise ZeroFunction("u vanishes identically")
    a = order.alpha
    w = space.weights
    v = u / norm2
    lo, hi = theoretical_interval(space, v, order)
    cands = _candidate_densities(space, v, order, lo, hi)
    ratios = [_ratio(w, v, f, a) for f in cands]
    k = int(np.argmax(ratios))
    best, f0 = ratios[k], cands[k]

    polished = _ratio_ascent(w, v, a, f0)
    return norm2 * max(best, polished)


def _ratio_ascent(w, v, a, f0, max_iter=400, patience=25):
    """Projected gradient ascent of the (non-concave) ratio, keeping the best iterate.

    Only feasible densities are evaluated, so the returned value is attained.
    Stops after ``patience`` iterations without relative gain above 1e-12.
    """
    beta = a / (a - 1.0)
    sign = 1.0 if float(np.sum(w * v * f0)) >= 0 else -1.0
    vs = sign * v

    def value(f):
        return _ratio(w, vs, f, a)

    def gradient(f):
        t = _tsallis_stable(w, f, a)
        num = float(np.sum(w * vs * (f - 1.0)))
        return vs / math.sqrt(t) - 0.5 * num * beta * (f ** (a - 1.0) - 1.0) / t**1.5

    f = f0
    cur = best = value(f)
    if not cur > 0:
        return 0.0
    step, stale = 1.0, 0
    for _ in range(max_iter):
        grad = gradient(f)
        while True:
            cand = project_density(w, f + step * grad)
            cval = value(cand) if _tsallis_stable(w, cand, a) > 0 else 0.0
            if cval > cur or step < 1e-14:
                break
            step *= 0.5
        if not cval > cur:
            break
        f, cur = cand, cval
        step *= 2.0
        if cur > best * (1.0 + 1e-12):
            stale = 0
        else:
            stale += 1
            if stale >= patience:
                best = max(best, cur)
                break
        best = max(best, cur)
    return best


def estimate_with_divergence(space: Space, u: ArrayLike, order: Order | float, f: ArrayLike) -> float:
    """Ratio ``|int u dnu| / sqrt(T_alpha)`` for one density (0 when ``nu = mu``)."""
    t = tsallis(space, f, order)
    if t <= 0:
        return 0.0
    return abs(space.integrate(np.asarray(u, dtype=float) * np.asarray(f, dtype=float))) / math.sqrt(t)
