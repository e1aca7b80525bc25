"""Registry of inequality checks.

Each check evaluates one inequality ``lhs <= rhs`` (or an identity) on one
instance and returns a :class:`~weighted_ckp.report.CheckReport`. Check ids
follow the numbering of the source results so that reports can be read next
to them; ``covers`` lists every numbered statement a check exercises (the
completeness test compares their union with the in-scope list).

Tolerances: ``CLOSED_FORM`` (1e-9) when both sides are closed-form sums,
``ORACLE`` (1e-6) when an iterative search supplies one side.
Implications whose premise fails on an instance are reported ``vacuous``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .. import constants, divergences, linearization, transport
from ..measure import center, lp_norm
from ..report import FAIL, PASS, CheckReport, judge, judge_identity, vacuous
from .instance import Instance

CLOSED_FORM = 1e-9
ORACLE = 1e-6
INTERVAL = 1e-8
IDENTITY = 1e-12
CONDITION_GRID = 1000


class Context:
    """Lazily computed quantities shared by the checks of one instance."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.space = inst.space
        self.order = inst.order
        self.alpha = inst.order.alpha
        self.beta = inst.order.beta
        self.f = inst.f

    @cached_property
    def kl(self) -> float:
        return divergences.kl(self.space, self.f)

    @cached_property
    def tsallis(self) -> float:
        return divergences.tsallis(self.space, self.f, self.order)

    @cached_property
    def renyi(self) -> float:
        return divergences.renyi(self.space, self.f, self.order)

    @cached_property
    def chi(self) -> float:
        return divergences.pearson_vajda(self.space, self.f, self.order)

    @cached_property
    def tv(self) -> float:
        return divergences.total_variation(self.space, self.f)

    @cached_property
    def weighted_tv(self) -> float:
        return divergences.weighted_tv(self.space, self.f, self.inst.w)

    @cached_property
    def u_centered(self) -> np.ndarray:
        return center(self.space, self.inst.u)

    @cached_property
    def cert(self) -> linearization.DominationCertificate:
        return linearization.dominated(self.space, self.inst.g, self.order)

    @cached_property
    def oracle_value(self) -> float:
        return linearization.maximize_r(self.space, self.inst.g, self.order)[1]

    @cached_property
    def necessary(self) -> linearization.NecessaryConditions:
        return linearization.necessary_conditions(self.space, self.inst.g, self.order)

    @cached_property
    def u_vanishes(self) -> bool:
        return not np.any(self.u_centered != 0.0)

    @cached_property
    def k_interval(self) -> tuple[float, float]:
        return constants.theoretical_interval(self.space, self.u_centered, self.order)

    @cached_property
    def k_estimate(self) -> float:
        return constants.estimate_best_k(self.space, self.u_centered, self.order)

    @cached_property
    def q_bounds(self) -> tuple[float, float, float]:
        return linearization.q_constant_bounds(self.space, self.inst.w, self.order)

    @cached_property
    def g_shift(self) -> float:
        """``|int g dnu - int g dmu|``."""
        g = np.asarray(self.inst.g)
        return abs(float(np.sum(self.space.weights * g * (self.f - 1.0))))


@dataclass(frozen=True)
class Check:
    check_id: str
    covers: tuple[str, ...]
    needs: tuple[str, ...]
    tolerance: float
    evaluate: Callable[[Context, float], CheckReport]
    description: str = ""

    def applies_to(self, inst: Instance) -> bool:
        return all(inst.has(name) for name in self.needs)

    def run(self, inst: Instance, tolerance_scale: float = 1.0, ctx: Context | None = None) -> CheckReport:
        tol = self.tolerance * tolerance_scale
        ctx = ctx if ctx is not None else Context(inst)
        try:
            report = self.evaluate(ctx, tol)
        except Exception as exc:  # a crash on a valid instance is a failed check, not a skip
            report = CheckReport(self.check_id, math.nan, math.nan, -math.inf, FAIL,
                                 note=f"error: {type(exc).__name__}: {exc}")
        report.check_id = self.check_id
        if not report.tolerance:
            report.tolerance = tol
        report.seed = inst.seed
        report.instance_digest = inst.digest()
        return report


REGISTRY: dict[str, Check] = {}


def register(check_id: str, covers: tuple[str, ...], needs: tuple[str, ...] = (),
             tolerance: float = CLOSED_FORM, description: str = ""):
    def wrap(fn: Callable[[Context, float], CheckReport]):
        if check_id in REGISTRY:
            raise ValueError(f"duplicate check id {check_id}")
        REGISTRY[check_id] = Check(check_id, covers, needs, tolerance, fn, description or (fn.__doc__ or "").strip())
        return fn

    return wrap


def _implication(check_id: str, premise: bool, why: str, lhs: float, rhs: float, tol: float) -> CheckReport:
    if not premise:
        return vacuous(check_id, why)
    return judge(check_id, lhs, rhs, tol)


# --- divergences ---------------------------------------------------------------


@register("pinsker", ("1.1",))
def _pinsker(ctx: Context, tol: float) -> CheckReport:
    """Total variation <= sqrt(2 KL)."""
    return judge("pinsker", ctx.tv, math.sqrt(2.0 * ctx.kl), tol)


def _log_exp_moment(ctx: Context, h: np.ndarray) -> float:
    # log int e^h dmu without overflow
    return float(logsumexp(h, b=ctx.space.weights))


@register("eq_1_2", ("1.2",), needs=("w",))
def _bolley_villani_1(ctx: Context, tol: float) -> CheckReport:
    """Weighted TV <= (1 + log int e^{w^2})^{1/2} sqrt(2 KL)."""
    w = np.asarray(ctx.inst.w)
    factor = 1.0 + _log_exp_moment(ctx, w**2)
    return judge("eq_1_2", ctx.weighted_tv, math.sqrt(factor) * math.sqrt(2.0 * ctx.kl), tol)


@register("eq_1_3", ("1.3",), needs=("w",))
def _bolley_villani_2(ctx: Context, tol: float) -> CheckReport:
    """Weighted TV <= (3/2 + log int e^{2w}) (sqrt(KL) + KL/2)."""
    w = np.asarray(ctx.inst.w)
    factor = 1.5 + _log_exp_moment(ctx, 2.0 * w)
    return judge("eq_1_3", ctx.weighted_tv, factor * (math.sqrt(ctx.kl) + 0.5 * ctx.kl), tol)


@register("chi_T_identity_alpha2", ("chi_2 = T_2",), tolerance=IDENTITY)
def _chi_t(ctx: Context, tol: float) -> CheckReport:
    """Pearson chi^2 equals T_2 (relative tolerance)."""
    chi2 = divergences.pearson_vajda(ctx.space, ctx.f, 2.0)
    t2 = divergences.tsallis(ctx.space, ctx.f, 2.0)
    return judge_identity("chi_T_identity_alpha2", chi2, t2, tol * max(1.0, abs(t2)))


@register("renyi_tsallis_identity", ("2.1",), tolerance=1e-10)
def _renyi_tsallis(ctx: Context, tol: float) -> CheckReport:
    """T_alpha = (e^{(alpha-1) D_alpha} - 1)/(alpha - 1) (relative tolerance)."""
    via = divergences.tsallis_from_renyi(ctx.renyi, ctx.order)
    return judge_identity("renyi_tsallis_identity", via, ctx.tsallis, tol * max(1.0, abs(ctx.tsallis)))


@register("tsallis_ge_renyi", ("2.1",))
def _tsallis_ge_renyi(ctx: Context, tol: float) -> CheckReport:
    """D_alpha <= T_alpha."""
    return judge("tsallis_ge_renyi", ctx.renyi, ctx.tsallis, tol)


# --- weighted CKP bounds -------------------------------------------------------


@register("thm_2_1", ("2.2", "2.3"), needs=("w",))
def _thm_2_1(ctx: Context, tol: float) -> CheckReport:
    """Weighted TV <= 16/3 ||w||_beta max(T^{1/2}, T^{1/alpha}) (alpha <= 2) or 3^alpha ||w||_beta T^{1/alpha}."""
    a, t = ctx.alpha, ctx.tsallis
    norm = lp_norm(ctx.space, ctx.inst.w, ctx.beta)
    if a <= 2.0:
        rhs = 16.0 / 3.0 * norm * max(math.sqrt(t), t ** (1.0 / a))
    else:
        rhs = 3.0**a * norm * t ** (1.0 / a)
    return judge("thm_2_1", ctx.weighted_tv, rhs, tol)


def _c_beta_2(ctx: Context) -> float:
    return 2.0 if ctx.alpha >= 2.0 else 4.0 * ctx.beta**ctx.beta


@register("thm_2_2", ("2.4",), needs=("w",))
def _thm_2_2(ctx: Context, tol: float) -> CheckReport:
    """Weighted TV <= C_beta ||w||_{2 beta* - 2} sqrt(T)."""
    norm = lp_norm(ctx.space, ctx.inst.w, 2.0 * ctx.order.beta_star - 2.0)
    return judge("thm_2_2", ctx.weighted_tv, _c_beta_2(ctx) * norm * math.sqrt(ctx.tsallis), tol)


# --- best constant K -----------------------------------------------------------


@register("eq_2_8", ("2.6", "2.8"), needs=("u",))
def _eq_2_8(ctx: Context, tol: float) -> CheckReport:
    """K_p(u) <= ||u||_{2p-2} at p = beta*."""
    p = ctx.order.beta_star
    return judge("eq_2_8", constants.k_p(ctx.space, ctx.u_centered, p),
                 lp_norm(ctx.space, ctx.u_centered, 2.0 * p - 2.0), tol)


@register("thm_2_3_upper", ("2.7", "9.4"), needs=("u",), tolerance=INTERVAL)
def _thm_2_3_upper(ctx: Context, tol: float) -> CheckReport:
    """Empirical best K (a certified lower bound) <= theoretical upper bound."""
    if ctx.u_vanishes:
        return vacuous("thm_2_3_upper", "u vanishes after centering")
    return judge("thm_2_3_upper", ctx.k_estimate, ctx.k_interval[1], tol)


@register("thm_2_3_lower", ("2.7", "9.4"), needs=("u",), tolerance=INTERVAL)
def _thm_2_3_lower(ctx: Context, tol: float) -> CheckReport:
    """Theoretical lower bound <= empirical best K."""
    if ctx.u_vanishes:
        return vacuous("thm_2_3_lower", "u vanishes after centering")
    return judge("thm_2_3_lower", ctx.k_interval[0], ctx.k_estimate, tol)


@register("cor_2_4", ("2.9",), needs=("u",), tolerance=ORACLE)
def _cor_2_4(ctx: Context, tol: float) -> CheckReport:
    """Empirical best K <= C_beta ||u||_{2 beta* - 2}."""
    if ctx.u_vanishes:
        return vacuous("cor_2_4", "u vanishes after centering")
    return judge("cor_2_4", ctx.k_estimate, constants.corollary_bound(ctx.space, ctx.u_centered, ctx.order), tol)


@register("lemma_9_1", ("9.2",), needs=("u",))
def _lemma_9_1(ctx: Context, tol: float) -> CheckReport:
    """int u^2 dmu <= K^2 alpha / 2 with K the theoretical upper bound."""
    u = ctx.u_centered
    upper = ctx.k_interval[1]
    return judge("lemma_9_1", ctx.space.integrate(u * u), upper**2 * ctx.alpha / 2.0, tol)


# --- linearization -------------------------------------------------------------


@register("eq_4_3", ("4.3",), needs=("g",), tolerance=CLOSED_FORM)
def _eq_4_3(ctx: Context, tol: float) -> CheckReport:
    """phi(c) = beta^{beta-1}, compared relative to the right side."""
    beta = ctx.beta
    target = beta ** (beta - 1.0)
    c = ctx.cert.c
    value = linearization.phi(ctx.space, ctx.inst.g, beta, c)
    report = judge_identity("eq_4_3", value / target, 1.0, tol)
    if report.status == FAIL:
        # phi can jump by more than tol between adjacent floats when the root
        # sits next to an atom; then the best possible c brackets the target
        left = linearization.phi(ctx.space, ctx.inst.g, beta, np.nextafter(c, -np.inf))
        right = linearization.phi(ctx.space, ctx.inst.g, beta, np.nextafter(c, np.inf))
        if left >= target >= right:
            report.status = PASS
            report.note = "root at floating-point resolution: target bracketed by neighbouring floats"
    return report


@register("thm_4_1", ("4.2", "4.4", "5.1", "8.4", "8.5"), needs=("g",), tolerance=ORACLE)
def _thm_4_1(ctx: Context, tol: float) -> CheckReport:
    """R at the closed-form extremizer equals the oracle's max R, and the decisions agree."""
    closed, oracle = ctx.cert.r_at_extremizer, ctx.oracle_value
    report = judge_identity("thm_4_1", oracle, closed, tol)
    if (ctx.cert.dominated and oracle > tol) or (not ctx.cert.dominated and oracle < -tol):
        report.status = FAIL
        report.note = f"domination decision {ctx.cert.dominated} disagrees with oracle value {oracle!r}"
    return report


@register("thm_4_2", ("thm_4_2",), needs=("g",))
def _thm_4_2(ctx: Context, tol: float) -> CheckReport:
    """If the domination condition holds at any c on a grid, then g is dominated."""
    g = np.asarray(ctx.inst.g)
    beta = ctx.beta
    grid = np.linspace(g.min() - 3.0 * beta, g.max(), CONDITION_GRID)
    holds = any(linearization.condition_holds_at(ctx.space, g, ctx.order, c) for c in grid)
    return _implication("thm_4_2", holds, "condition fails on the whole grid",
                        ctx.cert.r_at_extremizer, 0.0, tol)


@register("prop_8_1_mean", ("8.2",), needs=("g",))
def _prop_8_1_mean(ctx: Context, tol: float) -> CheckReport:
    """Dominated => int g dmu <= 0."""
    return _implication("prop_8_1_mean", ctx.cert.dominated, "g not dominated", ctx.necessary.mean, 0.0, tol)


@register("prop_8_1_nec", ("8.2",), needs=("g",))
def _prop_8_1_nec(ctx: Context, tol: float) -> CheckReport:
    """Dominated => int (1 + g/(beta-1))_+^{beta-1} dmu <= 1."""
    return _implication("prop_8_1_nec", ctx.cert.dominated, "g not dominated", ctx.necessary.lhs_82, 1.0, tol)


@register("prop_8_1_suff", ("8.3",), needs=("g",))
def _prop_8_1_suff(ctx: Context, tol: float) -> CheckReport:
    """int (1 + g/beta)_+^beta dmu <= 1 => dominated (max R <= 0)."""
    holds = linearization.sufficient_condition(ctx.space, ctx.inst.g, ctx.order)
    return _implication("prop_8_1_suff", holds, "sufficient condition fails",
                        ctx.cert.r_at_extremizer, 0.0, tol)


@register("eq_7_2", ("7.2",), needs=("g",))
def _eq_7_2(ctx: Context, tol: float) -> CheckReport:
    """Dominated => ||(1 + (alpha-1) g)_+||_beta <= e alpha (compared after the beta-th root)."""
    nec = ctx.necessary
    lhs = nec.lhs_72 ** (1.0 / ctx.beta)
    return _implication("eq_7_2", ctx.cert.dominated, "g not dominated", lhs, math.e * ctx.alpha, tol)


def _bounds(ctx: Context) -> linearization.CBounds:
    return linearization.c_bounds(ctx.cert, ctx.space, ctx.inst.g, ctx.order)


@register("prop_8_2_c_upper", ("8.6", "8.7"), needs=("g",))
def _prop_8_2_upper(ctx: Context, tol: float) -> CheckReport:
    """Dominated => c <= -beta."""
    if not ctx.cert.dominated:
        return vacuous("prop_8_2_c_upper", "g not dominated")
    b = _bounds(ctx)
    return judge("prop_8_2_c_upper", b.c, b.c_upper, tol)


@register("prop_8_2_c_lower", ("8.6", "8.7"), needs=("g",))
def _prop_8_2_lower(ctx: Context, tol: float) -> CheckReport:
    """Dominated => c >= -beta + int g (alpha <= 2) or c >= -4 + alpha int g (alpha >= 2)."""
    if not ctx.cert.dominated:
        return vacuous("prop_8_2_c_lower", "g not dominated")
    b = _bounds(ctx)
    return judge("prop_8_2_c_lower", b.c_lower, b.c, tol)


@register("prop_8_2", ("8.6", "8.7"), needs=("g",))
def _prop_8_2(ctx: Context, tol: float) -> CheckReport:
    """Dominated => int g_+^beta <= beta^beta (1 - int g) or beta^beta (4 - alpha int g), relative to the right side."""
    if not ctx.cert.dominated:
        return vacuous("prop_8_2", "g not dominated")
    b = _bounds(ctx)
    scale = max(1.0, abs(b.moment_rhs))
    return judge("prop_8_2", b.moment_lhs / scale, b.moment_rhs / scale, tol)


@register("prop_6_1_upper", ("6.1", "6.2"), needs=("w",), tolerance=INTERVAL)
def _prop_6_1_upper(ctx: Context, tol: float) -> CheckReport:
    """Empirical best K in int f w <= K int f^alpha is at most ||w||_beta."""
    _, upper, k_est = ctx.q_bounds
    return judge("prop_6_1_upper", k_est, upper, tol)


@register("prop_6_1_lower", ("6.1", "6.2"), needs=("w",), tolerance=INTERVAL)
def _prop_6_1_lower(ctx: Context, tol: float) -> CheckReport:
    """||w||_beta / (e alpha) <= empirical best K."""
    lower, _, k_est = ctx.q_bounds
    return judge("prop_6_1_lower", lower, k_est, tol)


# --- Pearson-Vajda route -------------------------------------------------------


@register("cor_11_1", ("11.1", "11.2"), needs=("g",))
def _cor_11_1(ctx: Context, tol: float) -> CheckReport:
    """|int g dnu - int g dmu| <= C_beta ||g||_{2 beta* - 2} sqrt(T)."""
    norm = lp_norm(ctx.space, ctx.inst.g, 2.0 * ctx.order.beta_star - 2.0)
    return judge("cor_11_1", ctx.g_shift, _c_beta_2(ctx) * norm * math.sqrt(ctx.tsallis), tol)


@register("eq_11_3", ("11.3",), needs=("g",))
def _eq_11_3(ctx: Context, tol: float) -> CheckReport:
    """|int g dnu - int g dmu| <= ||g||_beta chi_alpha^{1/alpha}."""
    rhs = lp_norm(ctx.space, ctx.inst.g, ctx.beta) * ctx.chi ** (1.0 / ctx.alpha)
    return judge("eq_11_3", ctx.g_shift, rhs, tol)


@register("eq_11_4_upper", ("11.4",))
def _eq_11_4_upper(ctx: Context, tol: float) -> CheckReport:
    """T <= ((1 + chi^{1/alpha})^alpha - 1)/(alpha - 1)."""
    a = ctx.alpha
    rhs = math.expm1(a * math.log1p(ctx.chi ** (1.0 / a))) / (a - 1.0)
    return judge("eq_11_4_upper", ctx.tsallis, rhs, tol)


@register("eq_11_4_lower", ("11.4",))
def _eq_11_4_lower(ctx: Context, tol: float) -> CheckReport:
    """T >= 3/16 min(chi, chi^{2/alpha}) (alpha <= 2) or alpha 3^{-alpha} chi (alpha >= 2)."""
    a, chi = ctx.alpha, ctx.chi
    lhs = 3.0 / 16.0 * min(chi, chi ** (2.0 / a)) if a <= 2.0 else a * 3.0**-a * chi
    return judge("eq_11_4_lower", lhs, ctx.tsallis, tol)


@register("prop_11_2", ("11.5", "11.6"), needs=("g",))
def _prop_11_2(ctx: Context, tol: float) -> CheckReport:
    """|int g dnu - int g dmu| <= 16/3 ||g||_beta max(T^{1/2}, T^{1/alpha}) or 3^alpha/alpha ||g||_beta T^{1/alpha}."""
    a, t = ctx.alpha, ctx.tsallis
    norm = lp_norm(ctx.space, ctx.inst.g, ctx.beta)
    if a <= 2.0:
        rhs = 16.0 / 3.0 * norm * max(math.sqrt(t), t ** (1.0 / a))
    else:
        rhs = 3.0**a / a * norm * t ** (1.0 / a)
    return judge("prop_11_2", ctx.g_shift, rhs, tol)


# --- transport -----------------------------------------------------------------


@register("eq_3_5", ("3.5",), needs=("metric",))
def _eq_3_5(ctx: Context, tol: float) -> CheckReport:
    """W_p^p <= 2^{p-1} || d(., x0)^p (nu - mu) ||_TV."""
    r = transport.check_tv_bound_3_5(ctx.inst.metric, ctx.f, ctx.inst.p)
    return judge("eq_3_5", r.lhs, r.rhs, tol)


def _corollary(check_id: str):
    def evaluate(ctx: Context, tol: float) -> CheckReport:
        reports = transport.check_corollaries_3(ctx.inst.metric, ctx.f, ctx.order, ctx.inst.p)
        r = next(rep for rep in reports if rep.check_id == check_id)
        if r.status == "vacuous":
            return r
        return judge(check_id, r.lhs, r.rhs, tol, note=r.note)

    return evaluate


register("cor_3_1_small_alpha", ("cor_3_1",), needs=("metric",),
         description="W_p <= (2^{p-1} 16/3)^{1/p} M_{beta p} max(T^{1/2}, T^{1/alpha})^{1/p} for alpha <= 2 "
                     "(derived constant)")(_corollary("cor_3_1_small_alpha"))
register("cor_3_1_large_alpha", ("cor_3_1",), needs=("metric",),
         description="W_p <= 2 3^{alpha/p} M_{beta p} T^{1/(alpha p)} for alpha >= 2")(_corollary("cor_3_1_large_alpha"))
register("cor_3_2", ("cor_3_2",), needs=("metric",),
         description="W_p <= C_beta^{1/p} M_{(2 beta* - 2) p} T^{1/(2p)}")(_corollary("cor_3_2"))
register("cor_3_2_chained", ("cor_3_2",), needs=("metric",),
         description="W_p <= (2^{p-1} C_beta)^{1/p} M_{(2 beta* - 2) p} T^{1/(2p)} "
                     "(derived constant)")(_corollary("cor_3_2_chained"))


def covered() -> set[str]:
    return {label for check in REGISTRY.values() for label in check.covers}
