"""Convolution-quadrature weights for the backward Euler Caputo derivative.

The weights b_j are the coefficients of the power series (1 - xi)^alpha =
sum_j b_j xi^j.  They satisfy b_0 = 1, b_j = b_{j-1} * (j - 1 - alpha) / j,
and for alpha = 1 the sequence collapses to [1, -1, 0, 0, ...], recovering
the classical backward difference quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CQWeights:
    alpha: float
    tau: float
    weights: np.ndarray


def cq_weights(alpha: float, n_steps: int, tau: float = 1.0) -> CQWeights:
    """Weights b_0..b_N of the backward Euler convolution quadrature."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if n_steps < 1:
        raise ValueError(f"need at least one step, got {n_steps}")
    if tau <= 0.0:
        raise ValueError(f"step size must be positive, got {tau}")
    j = np.arange(1, n_steps + 1, dtype=float)
    w = np.empty(n_steps + 1)
    w[0] = 1.0
    np.cumprod((j - 1.0 - alpha) / j, out=w[1:])
    w += 0.0
    return CQWeights(float(alpha), float(tau), w)


def discrete_caputo(history, weights: CQWeights, n: int):
    """Discrete fractional derivative tau^{-alpha} sum_j b_j (u^{n-j} - u^0).

    `history` holds u^0..u^n (and possibly further entries) as rows; scalars
    per step are accepted as a 1D sequence.  The convolution is anchored at
    the initial value, so a constant history maps to zero.
    """
    hist = np.asarray(history, dtype=float)
    if n < 0 or n > weights.weights.shape[0] - 1:
        raise ValueError(f"step index {n} outside the weight range")
    if hist.shape[0] < n + 1:
        raise ValueError(f"history holds {hist.shape[0]} states, need {n + 1}")
    w = weights.weights
    conv = w[n::-1] @ (hist[: n + 1] - hist[0])
    return conv * weights.tau ** (-weights.alpha)
