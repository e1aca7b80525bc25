"""Kantorovich distances on finite metric spaces.

The transport problem between ``mu`` and ``nu = f mu`` is solved exactly by
successive shortest paths on the bipartite residual graph (dense Dijkstra with
node potentials). The final potentials are dual variables; complementary
slackness against the returned plan certifies optimality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergences import tsallis, weighted_tv
from .errors import BadExponent, BadMetric, SolverFailure
from .measure import ArrayLike, Order, Space, as_density, as_order
from .report import CheckReport, judge, vacuous

TRIANGLE_TOL = 1e-9
MASS_EPS = 1e-15
CLOSED_FORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MetricSpace:
    space: Space
    dist: np.ndarray
    base_index: int = 0

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        n = self.space.n
        if d.shape != (n, n):
            raise BadMetric(f"distance matrix must be {n}x{n}, got {d.shape}")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise BadMetric("distances must be finite and nonnegative")
        if np.any(np.diag(d) != 0):
            raise BadMetric("distance matrix must have a zero diagonal")
        if not np.allclose(d, d.T, rtol=0, atol=1e-12):
            raise BadMetric("distance matrix must be symmetric")
        # d[i,k] <= d[i,j] + d[j,k] for every j
        worst = np.max(d[:, None, :] - d[:, :, None] - d[None, :, :]) if n else 0.0
        if worst > TRIANGLE_TOL:
            raise BadMetric(f"triangle inequality violated by {worst:.3g}")
        if not 0 <= int(self.base_index) < n:
            raise BadMetric(f"base index {self.base_index} out of range")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "base_index", int(self.base_index))

    def base_distances(self) -> np.ndarray:
        return self.dist[:, self.base_index]


@dataclass(frozen=True)
class TransportPlan:
    """Optimal coupling ``pi`` with cost ``sum pi_ij d_ij^p`` and dual potentials.

    ``u_i + v_j <= d_ij^p`` everywhere, with equality wherever ``pi_ij > 0``.
    """

    pi: np.ndarray
    cost: float
    u: np.ndarray
    v: np.ndarray

    def slackness_violation(self, cost_matrix: np.ndarray) -> float:
        """Largest breach of dual feasibility or of equality on the support."""
        reduced = cost_matrix - self.u[:, None] - self.v[None, :]
        infeasible = max(0.0, -float(reduced.min()))
        support = self.pi > 0
        gap = float(np.abs(reduced[support]).max()) if support.any() else 0.0
        return max(infeasible, gap)

    def dual_value(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(a, self.u) + np.dot(b, self.v))


def solve_transport(a: ArrayLike, b: ArrayLike, cost: np.ndarray) -> TransportPlan:
    """Exact balanced transportation problem by successive shortest paths."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(cost, dtype=float)
    n, m = C.shape
    if a.shape != (n,) or b.shape != (m,):
        raise SolverFailure("marginals do not match the cost matrix")
    supply = a.copy()
    demand = b.copy()
    x = np.zeros((n, m))
    pot_s = np.zeros(n)
    pot_t = C.min(axis=0).copy()
    total = min(a.sum(), b.sum())
    for _ in range(10 * (n + m) * (n + m) + 100):
        if supply.sum() <= MASS_EPS * max(total, 1.0) or demand.sum() <= MASS_EPS * max(total, 1.0):
            break
        dist_s = np.where(supply > MASS_EPS, 0.0, np.inf)
        dist_t = np.full(m, np.inf)
        prev_t = np.full(m, -1)  # source feeding each sink
        prev_s = np.full(n, -1)  # sink feeding each source via a backward arc
        done_s = np.zeros(n, bool)
        done_t = np.zeros(m, bool)
        target = -1
        while True:
            ms = np.where(done_s, np.inf, dist_s)
            mt = np.where(done_t, np.inf, dist_t)
            i, j = int(np.argmin(ms)), int(np.argmin(mt))
            if ms[i] == np.inf and mt[j] == np.inf:
                break
            if ms[i] <= mt[j]:
                done_s[i] = True
                cand = ms[i] + C[i] + pot_s[i] - pot_t
                cand = np.maximum(cand, ms[i])
                better = (cand < dist_t) & ~done_t
                dist_t[better] = cand[better]
                prev_t[better] = i
            else:
                done_t[j] = True
                if demand[j] > MASS_EPS:
                    target = j
                    break
                back = x[:, j] > 0
                cand = mt[j] - C[:, j] + pot_t[j] - pot_s
                cand = np.maximum(cand, mt[j])
                better = back & (cand < dist_s) & ~done_s
                dist_s[better] = cand[better]
                prev_s[better] = j
        if target < 0:
            raise SolverFailure("no augmenting path although demand remains")
        dt = dist_t[target]
        pot_s += np.minimum(dist_s, dt)
        pot_t += np.minimum(dist_t, dt)
        # walk back to the originating source, collecting the bottleneck
        path = []
        j = target
        bottleneck = demand[target]
        while True:
            i = int(prev_t[j])
            path.append((i, j))
            jj = int(prev_s[i])
            if jj < 0:
                bottleneck = min(bottleneck, supply[i])
                break
            bottleneck = min(bottleneck, x[i, jj])
            path.append((i, jj))
            j = jj
        # path alternates forward (i -> j) and backward (jj -> i) arcs
        for k, (i, j) in enumerate(path):
            if k % 2 == 0:
                x[i, j] += bottleneck
            else:
                x[i, j] -= bottleneck
                if x[i, j] <= MASS_EPS * max(total, 1.0):
                    x[i, j] = 0.0
        supply[path[-1][0]] -= bottleneck
        demand[target] -= bottleneck
        if supply[path[-1][0]] <= MASS_EPS:
            supply[path[-1][0]] = 0.0
        if demand[target] <= MASS_EPS:
            demand[target] = 0.0
    else:
        raise SolverFailure("augmentation limit exceeded")
    plan = TransportPlan(pi=x, cost=float(np.sum(x * C)), u=-pot_s, v=pot_t.copy())
    return plan


def _nu_masses(space: Space, f: ArrayLike) -> np.ndarray:
    # the solver needs balanced, nonnegative marginals
    return space.weights * as_density(space, f)


def wasserstein(ms: MetricSpace, f: ArrayLike, p: float) -> tuple[float, TransportPlan]:
    """``W_p(mu, nu)`` with an optimal plan, for ``nu = f mu``."""
    if not p >= 1:
        raise BadExponent(f"p must be >= 1, got {p!r}")
    C = ms.dist**p
    plan = solve_transport(ms.space.weights, _nu_masses(ms.space, f), C)
    return max(plan.cost, 0.0) ** (1.0 / p), plan


def m_p_moment(ms: MetricSpace, p: float) -> float:
    """``(sum mu_i d(x_i, x0)^p)^(1/p)``."""
    if not p >= 1:
        raise BadExponent(f"p must be >= 1, got {p!r}")
    d = ms.base_distances()
    return float(np.sum(ms.space.weights * d**p)) ** (1.0 / p)


def lipschitz_potential(ms: MetricSpace, plan: TransportPlan) -> np.ndarray:
    """1-Lipschitz ``h`` with ``int h dnu - int h dmu = W_1`` built from p = 1 duals."""
    # c-transform: k(x) = min_j d(x, x_j) - v_j is 1-Lipschitz, and h = -k
    return -np.min(ms.dist - plan.v[None, :], axis=1)


def check_tv_bound_3_5(ms: MetricSpace, f: ArrayLike, p: float) -> CheckReport:
    """``W_p^p <= 2^(p-1) || d(., x0)^p (nu - mu) ||_TV``."""
    w_p, _ = wasserstein(ms, f, p)
    rhs = 2.0 ** (p - 1.0) * weighted_tv(ms.space, f, ms.base_distances() ** p)
    return judge("eq_3_5", w_p**p, rhs, CLOSED_FORM_TOL)


def check_corollaries_3(ms: MetricSpace, f: ArrayLike, order: Order | float, p: float) -> list[CheckReport]:
    """Transport-entropy bounds obtained from the weighted CKP inequalities.

    For 1 < alpha <= 2 the bound holds with some absolute constant; the check
    uses the constant produced by chaining the
    weighted TV bound with the 16/3 CKP bound, ``(2^(p-1) 16/3)^(1/p)``.
    The stated constant ``C_beta^(1/p)`` of the last bound is checked as
    given; ``cor_3_2_chained`` checks it with the factor ``2^((p-1)/p)`` that
    the same chain produces, which is the version that actually holds for p > 1.
    """
    order = as_order(order)
    a, beta = order.alpha, order.beta
    w_p, _ = wasserstein(ms, f, p)
    t = tsallis(ms.space, f, order)
    reports = []
    if a <= 2.0:
        const = (2.0 ** (p - 1.0) * 16.0 / 3.0) ** (1.0 / p)
        rhs = const * m_p_moment(ms, beta * p) * max(math.sqrt(t), t ** (1.0 / a)) ** (1.0 / p)
        reports.append(judge("cor_3_1_small_alpha", w_p, rhs, CLOSED_FORM_TOL, note="derived constant"))
    else:
        reports.append(vacuous("cor_3_1_small_alpha", "alpha > 2"))
    if a >= 2.0:
        rhs = 2.0 * 3.0 ** (a / p) * m_p_moment(ms, beta * p) * t ** (1.0 / (a * p))
        reports.append(judge("cor_3_1_large_alpha", w_p, rhs, CLOSED_FORM_TOL))
    else:
        reports.append(vacuous("cor_3_1_large_alpha", "alpha < 2"))
    c_beta = 2.0 if a >= 2.0 else 16.0 * beta**beta
    rhs = c_beta ** (1.0 / p) * m_p_moment(ms, (2.0 * order.beta_star - 2.0) * p) * t ** (1.0 / (2.0 * p))
    reports.append(judge("cor_3_2", w_p, rhs, CLOSED_FORM_TOL))
    # the chain through the weighted TV bound carries an extra 2^{(p-1)/p}
    chained = 2.0 ** ((p - 1.0) / p) * rhs
    reports.append(judge("cor_3_2_chained", w_p, chained, CLOSED_FORM_TOL, note="derived constant"))
    return reports
