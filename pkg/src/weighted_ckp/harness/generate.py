"""Seeded instance profiles.

Every profile draws ``mu`` from normalized exponentials (floored so no atom is
vanishingly light) and adds the test functions used by the checks:

* ``u``: centered Gaussian values,
* ``w``: a nonnegative weight of random scale,
* ``g``: a function whose supremum of ``R`` is a chosen ``s`` with
  ``1e-3 <= |s| <= 1``. Since ``R`` shifts by ``k`` when ``g`` does,
  ``g = h - max R(h) + s`` is dominated exactly when ``s <= 0``, and its
  distance from the decision boundary is known.

The density depends on the profile:

* ``dirichlet``: nu-masses from normalized exponentials,
* ``sparse``: nu concentrated on one or two atoms (large divergences),
* ``near-mu``: ``f = 1 + eps h`` with ``||f - 1||_inf <= 0.1`` (small divergences),
* ``euclidean``: as ``dirichlet`` plus a metric, alternating between points in
  the unit square and the shortest-path closure of a random symmetric matrix.

The same ``(seed, n, profile)`` always yields the same instance.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..errors import ConfigError, UnknownProfile
from ..linearization import dominated
from ..measure import Space
from .instance import Instance, instance_from_dict

PROFILES = ("dirichlet", "sparse", "near-mu", "euclidean")
DEFAULT_ALPHAS = (1.2, 1.5, 2.0, 3.0, 6.0)
DEFAULT_PS = (1.0, 1.5, 2.0, 3.0)
MU_FLOOR = 0.05
NEAR_MU_EPS = 0.1


def _normalized(x: np.ndarray) -> np.ndarray:
    return x / np.sum(x)


def _metric(rng: np.random.Generator, n: int, euclidean: bool) -> np.ndarray:
    if euclidean:
        pts = rng.random((n, 2))
        d = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2))
    else:
        raw = rng.exponential(size=(n, n))
        raw = 0.5 * (raw + raw.T)
        np.fill_diagonal(raw, 0.0)
        d = shortest_path(raw, method="FW", directed=False)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def _shifted_g(space: Space, h: np.ndarray, alpha: float, s: float) -> np.ndarray:
    return h - dominated(space, h, alpha).r_at_extremizer + s


def generate(
    seed: int,
    n: int,
    profile: str = "dirichlet",
    alphas: tuple[float, ...] = DEFAULT_ALPHAS,
    ps: tuple[float, ...] = DEFAULT_PS,
) -> Instance:
    """Deterministic random instance with ``n`` atoms from a named profile."""
    if profile not in PROFILES:
        raise UnknownProfile(f"unknown profile {profile!r}; choose from {', '.join(PROFILES)}")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not alphas or not ps:
        raise ConfigError("alpha and p grids must be nonempty")
    rng = np.random.default_rng([int(seed), int(n), PROFILES.index(profile)])
    mu = _normalized(rng.exponential(size=n) + MU_FLOOR)
    space = Space(mu)
    alpha = float(alphas[rng.integers(len(alphas))])
    p = float(ps[rng.integers(len(ps))])

    if profile == "sparse":
        k = min(n, int(rng.integers(1, 3)))
        support = rng.choice(n, size=k, replace=False)
        nu = np.zeros(n)
        nu[support] = rng.exponential(size=k) + 0.01
        f = _normalized(nu) / mu
    elif profile == "near-mu":
        h = rng.uniform(-1.0, 1.0, size=n)
        h = h - np.sum(mu * h)
        top = float(np.max(np.abs(h)))
        eps = NEAR_MU_EPS * rng.uniform(0.01, 1.0)
        f = 1.0 + (eps / top) * h if top > 0 else np.ones(n)
    else:
        f = _normalized(rng.exponential(size=n)) / mu
    f = f / np.sum(mu * f)

    u = rng.normal(size=n) * rng.choice([0.1, 1.0, 5.0])
    u = u - np.sum(mu * u)
    w = rng.exponential(size=n) * rng.choice([0.2, 1.0, 3.0])
    h = rng.normal(size=n) * rng.choice([0.3, 1.0, 3.0])
    s = float(rng.choice([-1.0, 1.0]) * 10.0 ** rng.uniform(-3.0, 0.0))
    g = _shifted_g(space, h, alpha, s)

    data = {"mu": mu, "f": f, "g": g, "u": u, "w": w, "alpha": alpha}
    if profile == "euclidean":
        data["dist"] = _metric(rng, n, euclidean=seed % 2 == 0)
        data["base"] = int(rng.integers(n))
        data["p"] = p
    return instance_from_dict(data, seed=int(seed))
