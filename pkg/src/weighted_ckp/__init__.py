"""Weighted Csiszar-Kullback-Pinsker inequalities on finite probability spaces.

Divergences (KL, Renyi, Tsallis, Pearson-Vajda, weighted total variation),
the linearization of the Renyi divergence power with its extremizer and an
independent optimization oracle, best-constant bounds, exact Kantorovich
distances, and a harness that checks the associated inequalities.
"""

from .constants import KInterval, best_k_interval, estimate_best_k, k_p, theoretical_interval
from .divergences import kl, pearson_vajda, renyi, total_variation, tsallis, weighted_tv
from .errors import *  # noqa: F401,F403
from .linearization import (
    DominationCertificate,
    c_bounds_check,
    dominated,
    extremizer,
    maximize_r,
    necessary_conditions,
    phi,
    q_constant_bounds,
    r_functional,
    solve_c,
    sufficient_condition,
)
from .measure import Order, Space, center, lp_norm, make_space
from .report import CheckReport
from .transport import MetricSpace, TransportPlan, m_p_moment, wasserstein

__version__ = "0.1.0"
