r"""Fourier-mode solution of the fractional single-phase-lag problem on ``(0, L)``.

With constant conductivity the Dirichlet eigenpairs are
:math:`X_n(x) = \sqrt{2/L}\sin(n\pi x/L)` and
:math:`\sigma_n = a + \bar k (n\pi/L)^2`, and every mode evolves by
:math:`c_n T_n^1(t) + d_n T_n^2(t)` where the time factors are multinomial
Mittag-Leffler functions of the argument triple described in
:class:`fracspl.mittag.SplCoefficients`.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .fracops import SampledPath, TimeGrid, caputo_discrete, delta_path
from .mittag import DEFAULT_CONTROL, SeriesControl, SplCoefficients, mml_path
from .params import ModelParams

__all__ = [
    "ResolutionWarning",
    "SpectralConfig",
    "SpectralModel",
    "SpectralSolution",
    "MTilde",
    "eigenfunction",
    "fourier_coefficient",
    "t_factor_1",
    "t_factor_2",
    "dt_factor_1",
    "dt_factor_2",
    "m_tilde",
    "m_tilde_inner",
    "spectral_solve",
    "mode_residual",
]


class ResolutionWarning(UserWarning):
    """Quadrature too coarse for the requested number of modes."""


def _worker_count() -> int:
    try:
        return max(1, int(os.environ.get("FRACSPL_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SpectralConfig:
    """Domain, conductivity, model constants and truncation of the mode sum.

    ``quad_points`` counts trapezoid samples on ``[0, L]`` including both
    endpoints and defaults to ``max(1024, 20 * n_modes)``.
    """

    L: float
    k_bar: float
    params: ModelParams
    n_modes: int
    quad_points: int | None = None

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")
        if not self.k_bar > 0:
            raise ValueError(f"k_bar must be positive, got {self.k_bar!r}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError(f"n_modes must be an integer >= 1, got {self.n_modes!r}")
        if self.quad_points is None:
            object.__setattr__(self, "quad_points", max(1024, 20 * int(self.n_modes)))
        if self.quad_points < 2:
            raise ValueError("quad_points must be at least 2")
        if not self.resolution_ok:
            warnings.warn(
                f"quad_points={self.quad_points} < 10 * n_modes={10 * self.n_modes}",
                ResolutionWarning,
                stacklevel=3,
            )

    @property
    def resolution_ok(self) -> bool:
        return self.quad_points >= 10 * self.n_modes

    @property
    def quad_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.quad_points)

    def sigma(self, n) -> np.ndarray | float:
        n = np.asarray(n, dtype=float)
        value = self.params.a + self.k_bar * (n * math.pi / self.L) ** 2
        return float(value) if value.ndim == 0 else value


def eigenfunction(n: int, L: float, x):
    """Normalised Dirichlet eigenfunction ``sqrt(2/L) sin(n pi x / L)``."""
    if int(n) != n or n < 1:
        raise ValueError(f"mode index must be an integer >= 1, got {n!r}")
    x_arr = np.asarray(x, dtype=float)
    if np.any((x_arr < 0) | (x_arr > L)):
        raise ValueError(f"x must lie in [0, {L}]")
    value = math.sqrt(2.0 / L) * np.sin(n * math.pi * x_arr / L)
    # exact zeros at the boundary
    value = np.where((x_arr == 0) | (x_arr == L), 0.0, value)
    return float(value) if value.ndim == 0 else value


def fourier_coefficient(f_samples, n: int, config: SpectralConfig) -> float:
    """Trapezoid approximation of ``(f, X_n)`` from samples on ``config.quad_grid``."""
    f = np.asarray(f_samples, dtype=float)
    if f.shape != (config.quad_points,):
        raise ValueError(f"expected {config.quad_points} samples, got shape {f.shape}")
    if not config.resolution_ok:
        warnings.warn("Fourier quadrature below 10 samples per mode", ResolutionWarning, stacklevel=2)
    x = config.quad_grid
    return float(trapezoid(f * eigenfunction(n, config.L, x), x))


# time factors --------------------------------------------------------------


def _as_times(t, strict: bool = False) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    bad = arr <= 0 if strict else arr < 0
    if np.any(bad):
        raise ValueError("t must be positive" if strict else "t must be nonnegative")
    return np.atleast_1d(arr), arr.ndim == 0


def _ml(beta: float, t: np.ndarray, sigma: float, params: ModelParams, control: SeriesControl) -> np.ndarray:
    coeff = SplCoefficients(params, sigma)
    return mml_path(coeff.alphas, beta, coeff.coeffs, t, control)


def _out(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def t_factor_1(t, sigma: float, params: ModelParams, form: str = "simplified", control: SeriesControl = DEFAULT_CONTROL):
    """Time factor multiplying ``(U0, X_n)``.

    ``form="simplified"`` uses ``1 - s t^(alpha+1) E_{alpha+2}`` with
    ``s = sigma / (rho c tq)``; ``form="three_term"`` sums
    ``E_1 + (a / rho c) t E_2 + (t^alpha / tq) E_{alpha+1}``.
    """
    times, scalar = _as_times(t)
    p = params
    al = p.alpha
    if form == "simplified":
        s = sigma / (p.rho_c * p.tau_q_alpha)
        values = 1.0 - s * times ** (al + 1.0) * _ml(al + 2.0, times, sigma, p, control)
    elif form == "three_term":
        values = _ml(1.0, times, sigma, p, control) + times ** al / p.tau_q_alpha * _ml(al + 1.0, times, sigma, p, control)
        if p.a > 0:
            values = values + p.a / p.rho_c * times * _ml(2.0, times, sigma, p, control)
    else:
        raise ValueError(f"unknown form {form!r}")
    values = np.where(times == 0, 1.0, values)
    return _out(values, scalar)


def t_factor_2(t, sigma: float, params: ModelParams, control: SeriesControl = DEFAULT_CONTROL):
    """Time factor multiplying ``(V0, X_n)``: ``t E_2``."""
    times, scalar = _as_times(t)
    values = times * _ml(2.0, times, sigma, params, control)
    return _out(values, scalar)


def dt_factor_1(t, sigma: float, params: ModelParams, control: SeriesControl = DEFAULT_CONTROL):
    """Derivative of :func:`t_factor_1`: ``-s t^alpha E_{alpha+1}``; needs ``t > 0``."""
    times, scalar = _as_times(t, strict=True)
    p = params
    s = sigma / (p.rho_c * p.tau_q_alpha)
    values = -s * times**p.alpha * _ml(p.alpha + 1.0, times, sigma, p, control)
    return _out(values, scalar)


def dt_factor_2(t, sigma: float, params: ModelParams, control: SeriesControl = DEFAULT_CONTROL):
    """Derivative of :func:`t_factor_2`: ``E_1``."""
    times, scalar = _as_times(t)
    return _out(_ml(1.0, times, sigma, params, control), scalar)


# sup constant --------------------------------------------------------------


def m_tilde_objective(alpha: float, r, t):
    """``r^(1/2) t^alpha / (1 + r t^(alpha+1))``."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.sqrt(r) * t**alpha / (1.0 + r * t ** (alpha + 1.0))


def m_tilde_inner(alpha: float, t):
    """Maximum of :func:`m_tilde_objective` over ``r >= 0`` at fixed ``t > 0``.

    Attained at ``r = t^-(alpha+1)`` with value ``t^((alpha-1)/2) / 2``.
    """
    t = np.asarray(t, dtype=float)
    return 0.5 * t ** ((alpha - 1.0) / 2.0)


@dataclass(frozen=True)
class MTilde:
    """Supremum of the objective over ``r >= 0`` and the sampled ``t`` range.

    ``at_lower_limit`` is set when the maximum sits at ``t_min``, i.e. the
    supremum over ``(0, T]`` is only approached as ``t -> 0``.
    """

    value: float
    t_argmax: float
    t_min: float
    at_lower_limit: bool


def m_tilde(alpha: float, T: float, t_min: float = 1e-3, samples: int = 2049) -> MTilde:
    """Grid maximum of :func:`m_tilde_inner` over ``t`` in ``[t_min, T]``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not T > 0:
        raise ValueError(f"T must be positive, got {T!r}")
    if not 0 < t_min <= T:
        raise ValueError(f"t_min must lie in (0, T], got {t_min!r}")
    t = np.geomspace(t_min, T, samples)
    inner = m_tilde_inner(alpha, t)
    i = int(np.argmax(inner))
    return MTilde(float(inner[i]), float(t[i]), t_min, i == 0)


# solution ------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralModel:
    """Retained modes: eigenvalues and Fourier coefficients of the initial data."""

    config: SpectralConfig
    sigma: np.ndarray
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def from_data(cls, config: SpectralConfig, U0, V0) -> "SpectralModel":
        """Project ``U0`` and ``V0`` (callables or samples on the quadrature grid)."""
        x = config.quad_grid
        u0 = np.asarray(U0(x) if callable(U0) else U0, dtype=float)
        v0 = np.asarray(V0(x) if callable(V0) else V0, dtype=float)
        for name, f in (("U0", u0), ("V0", v0)):
            if f.shape != x.shape:
                raise ValueError(f"{name} must have {x.size} samples, got shape {f.shape}")
        if abs(u0[0]) > 1e-12 or abs(u0[-1]) > 1e-12:
            raise ValueError("U0 must vanish at both endpoints")
        modes = np.arange(1, config.n_modes + 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResolutionWarning)
            c = np.array([fourier_coefficient(u0, n, config) for n in modes])
            d = np.array([fourier_coefficient(v0, n, config) for n in modes])
        return cls(config, config.sigma(modes), c, d)

    def active_modes(self, rel_cutoff: float = 1e-15) -> np.ndarray:
        """Indices (0-based) of modes whose coefficients are not negligible."""
        scale = max(np.max(np.abs(self.c)), np.max(np.abs(self.d)))
        if scale == 0:
            return np.array([], dtype=int)
        keep = (np.abs(self.c) > rel_cutoff * scale) | (np.abs(self.d) > rel_cutoff * scale)
        return np.flatnonzero(keep)

    def mode_factors(
        self, i: int, t: np.ndarray, control: SeriesControl = DEFAULT_CONTROL, with_derivative: bool = True
    ):
        """``(T_n, T_n')`` of mode ``i`` on times ``t`` (``T_n = c T^1 + d T^2``).

        ``T_n'`` is left zero when ``with_derivative`` is false.
        """
        p = self.config.params
        s = float(self.sigma[i])
        pos = t > 0
        value = np.zeros_like(t)
        deriv = np.zeros_like(t)
        if self.c[i] != 0:
            value += self.c[i] * t_factor_1(t, s, p, control=control)
            if with_derivative and pos.any():
                deriv[pos] += self.c[i] * dt_factor_1(t[pos], s, p, control=control)
        if self.d[i] != 0:
            value += self.d[i] * t_factor_2(t, s, p, control=control)
            if with_derivative:
                deriv += self.d[i] * dt_factor_2(t, s, p, control=control)
        return value, deriv


@dataclass(frozen=True)
class SpectralSolution:
    """``u`` and ``du/dt`` on ``t x x`` grids plus Parseval norms per time."""

    x: np.ndarray
    t: np.ndarray
    u: np.ndarray
    dtu: np.ndarray
    u_norm: np.ndarray
    dtu_norm: np.ndarray
    model: SpectralModel


def spectral_solve(
    config: SpectralConfig,
    U0,
    V0,
    eval_x,
    eval_t,
    control: SeriesControl = DEFAULT_CONTROL,
    workers: int | None = None,
    with_derivative: bool = True,
) -> SpectralSolution:
    """Truncated mode sum for ``u`` and ``du/dt`` with ``config.n_modes`` modes.

    Modes with negligible coefficients are skipped. ``workers`` (default from
    ``FRACSPL_THREADS``) evaluates modes concurrently. Without
    ``with_derivative`` the ``dtu`` fields are zero.
    """
    model = SpectralModel.from_data(config, U0, V0)
    x = np.asarray(eval_x, dtype=float)
    t = np.asarray(eval_t, dtype=float)
    if np.any(t < 0):
        raise ValueError("evaluation times must be nonnegative")
    active = model.active_modes()
    workers = workers or _worker_count()
    if workers > 1 and active.size > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            factors = list(pool.map(lambda i: model.mode_factors(i, t, control, with_derivative), active))
    else:
        factors = [model.mode_factors(i, t, control, with_derivative) for i in active]
    u = np.zeros((t.size, x.size))
    dtu = np.zeros((t.size, x.size))
    u_sq = np.zeros(t.size)
    dtu_sq = np.zeros(t.size)
    for i, (value, deriv) in zip(active, factors):
        shape = eigenfunction(i + 1, config.L, x)
        u += np.outer(value, shape)
        dtu += np.outer(deriv, shape)
        u_sq += value**2
        dtu_sq += deriv**2
    return SpectralSolution(x, t, u, dtu, np.sqrt(u_sq), np.sqrt(dtu_sq), model)


def mode_residual(
    sigma: float,
    c: float,
    d: float,
    params: ModelParams,
    grid: TimeGrid,
    control: SeriesControl = DEFAULT_CONTROL,
) -> SampledPath:
    """Discrete residual of the mode equation for ``T = c T^1 + d T^2`` sampled on ``grid``.

    Evaluates ``rho c tq D^a(T') + rho c T' + a tq D^a T + sigma T`` with
    backward differences for ``T'`` (seeded by ``T'(0) = d``) and
    :func:`fracspl.fracops.caputo_discrete`. Node 0 is zero.
    """
    t = grid.nodes
    values = c * np.asarray(t_factor_1(t, sigma, params, control=control))
    if d != 0:
        values = values + d * np.asarray(t_factor_2(t, sigma, params, control=control))
    path = SampledPath(grid, values)
    rate = delta_path(path, initial=d)
    p = params
    out = (
        p.rho_c * p.tau_q_alpha * caputo_discrete(p.alpha, rate).values
        + p.rho_c * rate.values
        + p.a * p.tau_q_alpha * caputo_discrete(p.alpha, path).values
        + sigma * values
    )
    out[0] = 0.0
    return SampledPath(grid, out)
