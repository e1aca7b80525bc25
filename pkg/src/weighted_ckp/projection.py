"""Projection onto the mu-weighted simplex of densities.

In the L^2(mu) geometry the projection of ``y`` onto
``{f >= 0, sum mu_i f_i = 1}`` is ``(y - tau)_+`` with the threshold ``tau``
fixed by the mass constraint; we find it exactly by sorting. With a diagonal
metric ``h`` (``sum mu_i h_i (x_i - y_i)^2``) the minimizer becomes
``(y - tau / h)_+`` and the same sort-and-scan applies to the breakpoints
``y_i h_i``.
"""

from __future__ import annotations

import numpy as np


def project_density(weights: np.ndarray, y: np.ndarray, h: np.ndarray | None = None) -> np.ndarray:
    inv_h = np.ones_like(y) if h is None else 1.0 / h
    breaks = y / inv_h
    order = np.argsort(-breaks, kind="stable")
    a = np.cumsum((weights * y)[order])
    b = np.cumsum((weights * inv_h)[order])
    taus = (a - 1.0) / b
    # k active atoms is consistent when the k-th breakpoint exceeds tau_k
    valid = breaks[order] > taus
    k = int(np.nonzero(valid)[0][-1]) if valid.any() else 0
    return np.maximum(y - taus[k] * inv_h, 0.0)


def projected_step(weights: np.ndarray, f: np.ndarray, grad: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``P_h(f + grad / h) - f`` computed without forming ``f + grad / h``.

    The step is ``d_i = max((grad_i - tau) / h_i, -f_i)`` with ``tau`` fixed
    by ``sum mu_i d_i = 0``. Working with the step directly avoids the
    cancellation that wrecks atoms with tiny ``h_i`` (huge ``grad_i / h_i``).
    """
    breaks = grad + f * h  # d_i hits -f_i once tau >= breaks_i
    order = np.argsort(-breaks, kind="stable")
    a = np.cumsum((weights * grad / h)[order])
    b = np.cumsum((weights / h)[order])
    clipped = np.sum(weights * f) - np.cumsum((weights * f)[order])
    taus = (a - clipped) / b
    valid = breaks[order] > taus
    k = int(np.nonzero(valid)[0][-1]) if valid.any() else 0
    return np.maximum((grad - taus[k]) / h, -f)
