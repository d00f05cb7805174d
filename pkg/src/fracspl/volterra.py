r"""Multinomial Mittag-Leffler functions from a second-kind Volterra equation.

The function :math:`y(t) = t^{\beta-1} E_{(\alpha_1..\alpha_m),\beta}(q_1 t^{\alpha_1}, .., q_m t^{\alpha_m})`
has Laplace transform :math:`s^{-\beta} / (1 - \sum_j q_j s^{-\alpha_j})`, i.e. it
solves

.. math::

    y(t) = \frac{t^{\beta-1}}{\Gamma(\beta)} + \sum_j q_j (I^{\alpha_j} y)(t).

For negative :math:`q_j` this equation is well conditioned even where the
power series cancels catastrophically, so it is used for large arguments.
The integrals are discretised with the product trapezoidal rule (piecewise
linear interpolation of :math:`y` against the exact fractional kernel), which
is implicit and unconditionally stable for :math:`q_j < 0`.
"""

from __future__ import annotations

import math

import numpy as np

from ._special import rgamma

__all__ = ["product_trapezoid_weights", "solve_multiterm", "multiterm_path"]


def _second_difference_pow(d: np.ndarray, p: float) -> np.ndarray:
    """``(d+1)**p - 2 d**p + (d-1)**p`` for integers ``d >= 1`` without cancellation."""
    d = np.asarray(d, dtype=float)
    out = np.empty_like(d)
    one = d == 1
    out[one] = 2.0**p - 2.0
    dd = d[~one]
    x = 1.0 / dd
    out[~one] = dd**p * (np.expm1(p * np.log1p(x)) + np.expm1(p * np.log1p(-x)))
    return out


def _start_weight(n: np.ndarray, p: float) -> np.ndarray:
    """``(n-1)**p - (n-p) n**(p-1)`` for integers ``n >= 1``."""
    n = np.asarray(n, dtype=float)
    out = (n - 1.0) ** p - (n - p) * n ** (p - 1.0)
    big = n > 32
    if np.any(big):
        # n**p * sum_{j>=2} binom(p, j) (-1/n)**j
        x = -1.0 / n[big]
        total = np.zeros_like(x)
        coef = 1.0
        xj = np.ones_like(x)
        for j in range(1, 40):
            coef *= (p - j + 1) / j
            xj = xj * x
            if j >= 2:
                total += coef * xj
        out[big] = n[big] ** p * total
    return out


def product_trapezoid_weights(order: float, steps: int):
    r"""Weights of the product trapezoidal rule for :math:`I^{\gamma}` on ``t_i = i h``.

    Returns ``(start, history)`` with ``start[n-1]`` the weight of ``y_0`` at
    node ``n`` and ``history[d]`` the weight of ``y_{n-d}`` for ``d >= 1``; the
    weight of ``y_n`` itself is 1. All weights carry the common factor
    ``h**order / Gamma(order + 2)``, which is not included.
    """
    p = order + 1.0
    n = np.arange(1, steps + 1)
    start = _start_weight(n, p)
    history = np.zeros(steps + 1)
    if steps > 1:
        history[1:steps] = _second_difference_pow(np.arange(1, steps), p)
    return start, history


def solve_multiterm(alphas, coeffs, beta: float, t_end: float, steps: int):
    """Solve the Volterra equation for ``y`` on ``t_i = i * t_end / steps``.

    Returns ``(t, y)``. Requires ``beta >= 1`` so that the forcing is bounded.
    """
    alphas = np.asarray(alphas, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    if alphas.shape != coeffs.shape or alphas.ndim != 1:
        raise ValueError("alphas and coeffs must be 1-d arrays of equal length")
    if np.any(alphas <= 0):
        raise ValueError("all alphas must be positive")
    if beta < 1:
        raise ValueError(f"the Volterra route needs beta >= 1, got {beta!r}")
    h = t_end / steps
    t = h * np.arange(steps + 1)
    forcing = t ** (beta - 1.0) * rgamma(beta) if beta > 1 else np.full_like(t, rgamma(beta))

    start = np.zeros(steps)
    history = np.zeros(steps + 1)
    diag = 0.0
    for a, q in zip(alphas, coeffs):
        if q == 0:
            continue
        scale = q * h**a * rgamma(a + 2.0)
        s, hist = product_trapezoid_weights(a, steps)
        start += scale * s
        history += scale * hist
        diag += scale

    y = np.empty(steps + 1)
    y[0] = forcing[0]
    denom = 1.0 - diag
    rev = history[::-1]  # rev[steps - d] == history[d]
    for n in range(1, steps + 1):
        lagged = np.dot(rev[steps - n + 1 : steps], y[1:n]) if n > 1 else 0.0
        y[n] = (forcing[n] + start[n - 1] * y[0] + lagged) / denom
    return t, y


def multiterm_path(alphas, coeffs, beta: float, t_end: float, steps: int):
    """``E_{alphas,beta}(q_1 t^a_1, ...)`` on the uniform grid, via :func:`solve_multiterm`."""
    t, y = solve_multiterm(alphas, coeffs, beta, t_end, steps)
    values = np.empty_like(y)
    values[0] = rgamma(beta)
    values[1:] = y[1:] / t[1:] ** (beta - 1.0)
    return t, values


def default_steps(alphas, coeffs, t_end: float, minimum: int = 4096, per_scale: int = 48) -> int:
    """Step count resolving the fastest time scale ``|q_j|**(-1/alpha_j)``."""
    rates = [abs(q) ** (1.0 / a) * t_end for a, q in zip(alphas, coeffs) if q != 0]
    fastest = max(rates, default=1.0)
    return int(max(minimum, math.ceil(per_scale * fastest)))
