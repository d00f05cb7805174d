r"""Two-parameter and multinomial Mittag-Leffler functions on the real line.

The multinomial function is the power series

.. math::

    E_{(\alpha_1..\alpha_m),\beta}(z_1..z_m) = \sum_{k\ge0}
    \sum_{k_1+..+k_m=k} \binom{k}{k_1..k_m}
    \frac{\prod_j z_j^{k_j}}{\Gamma(\beta + \sum_j \alpha_j k_j)},

summed block by block in the total degree ``k``. Terms are formed directly
when every factor is representable and from log-magnitudes otherwise.

Strongly negative arguments make the series cancel catastrophically; every
:class:`SeriesResult` therefore carries a rounding estimate
``eps * sum |terms|`` next to the truncation tail. :func:`mml_auto` falls back
to the Volterra solver in :mod:`fracspl.volterra` when that estimate is
unacceptable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import binom

from . import volterra
from ._special import gamma_sign, log_abs_gamma, rgamma
from .params import ModelParams

__all__ = [
    "ConvergenceError",
    "SeriesOverflowError",
    "PrecisionLossError",
    "SeriesControl",
    "MLQuery",
    "SeriesResult",
    "ml2",
    "ml2_series",
    "ml2_deriv",
    "mml",
    "mml_series",
    "mml_points",
    "mml_auto",
    "mml_evaluate",
    "Evaluation",
    "g_mml_evaluate",
    "mml_path",
    "mml_t_derivative",
    "SplCoefficients",
    "g_mml",
    "g_double_sum",
    "DoubleSumResult",
    "gamma_ratio_bound",
    "check_bound_admissible",
    "bound_sweep",
    "BoundSweep",
]

EPS = float(np.finfo(float).eps)
# exp() overflows just above 709.78
_LOG_MAX = 700.0


class ConvergenceError(ArithmeticError):
    """A series did not meet its tolerance within the degree cap."""

    def __init__(self, message: str, degree: int | None = None, tail: float | None = None):
        super().__init__(message)
        self.degree = degree
        self.tail = tail


class SeriesOverflowError(ConvergenceError):
    """Series terms left the double-precision range before they started to decay."""


class PrecisionLossError(ConvergenceError):
    """Rounding from cancelling terms already exceeds the configured limit."""


@dataclass(frozen=True)
class SeriesControl:
    """Truncation policy for the outer (total degree) sum.

    Summation stops once ``underflow_guard`` consecutive degree blocks have
    every term below ``rel_tol * |partial sum|``. With ``cancellation_limit``
    set, the multinomial series gives up as soon as ``EPS * sum |terms|``
    exceeds it instead of running to ``max_total_degree``.
    """

    rel_tol: float = 1e-14
    max_total_degree: int = 400
    underflow_guard: int = 3
    cancellation_limit: float | None = None

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if self.max_total_degree < 1:
            raise ValueError(f"max_total_degree must be >= 1, got {self.max_total_degree!r}")
        if self.underflow_guard < 1:
            raise ValueError(f"underflow_guard must be >= 1, got {self.underflow_guard!r}")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MLQuery:
    """Arguments of one multinomial Mittag-Leffler evaluation."""

    alphas: tuple[float, ...]
    beta: float
    zs: tuple[float, ...]

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in np.atleast_1d(self.alphas))
        zs = tuple(float(z) for z in np.atleast_1d(self.zs))
        if len(alphas) != len(zs) or not alphas:
            raise ValueError("alphas and zs must be non-empty and of equal length")
        if any(not a > 0 for a in alphas):
            raise ValueError(f"all alphas must be positive, got {alphas}")
        if not all(math.isfinite(v) for v in (*alphas, *zs, self.beta)):
            raise ValueError("query entries must be finite")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def m(self) -> int:
        return len(self.alphas)

    def permuted(self, order: Sequence[int]) -> "MLQuery":
        return MLQuery(tuple(self.alphas[i] for i in order), self.beta, tuple(self.zs[i] for i in order))

    def with_beta(self, beta: float) -> "MLQuery":
        return MLQuery(self.alphas, beta, self.zs)


@dataclass(frozen=True)
class SeriesResult:
    """Value of a truncated series with its diagnostics.

    Fields are floats for a single argument and arrays for vectorised calls.
    ``tail`` bounds the largest term in the last accepted blocks and
    ``abs_sum`` is the sum of term magnitudes, so ``EPS * abs_sum`` estimates
    the rounding error of the alternating sum.
    """

    value: float | np.ndarray
    degree: int | np.ndarray
    tail: float | np.ndarray
    abs_sum: float | np.ndarray

    @property
    def rounding_error(self):
        return EPS * self.abs_sum

    @property
    def error_estimate(self):
        return self.tail + self.rounding_error


# scalar series -------------------------------------------------------------


def _scalar_series(term, control: SeriesControl, what: str) -> SeriesResult:
    """Sum ``term(k)`` for ``k = 0, 1, ...`` under the block stopping rule."""
    terms: list[float] = []
    abs_sum = 0.0
    quiet = 0
    tail = 0.0
    for k in range(control.max_total_degree + 1):
        t = term(k)
        terms.append(t)
        abs_sum += abs(t)
        partial = math.fsum(terms)
        if abs(t) <= control.rel_tol * abs(partial):
            quiet += 1
            tail = max(tail, abs(t))
            if quiet >= control.underflow_guard:
                return SeriesResult(partial, k, tail, abs_sum)
        else:
            quiet = 0
            tail = 0.0
    raise ConvergenceError(
        f"{what}: no convergence within {control.max_total_degree} terms "
        f"(last term {abs(terms[-1]):.3e}, partial sum {math.fsum(terms):.3e})",
        degree=control.max_total_degree,
        tail=abs(terms[-1]),
    )


def _power_term(z: float, k: int, coeff: float, log_coeff: float, arg: float, what: str) -> float:
    """``coeff * z**k / Gamma(arg)`` with ``coeff > 0`` and ``log_coeff = log(coeff)``."""
    if k > 0 and z == 0:
        return 0.0
    log_pow = k * math.log(abs(z)) if k else 0.0
    if arg < 170.0 and log_pow < _LOG_MAX and log_coeff < _LOG_MAX:
        return coeff * z**k * rgamma(arg)
    sign = gamma_sign(arg)
    if sign == 0:
        return 0.0
    log_mag = log_coeff + log_pow - math.lgamma(arg)
    if log_mag > _LOG_MAX:
        raise SeriesOverflowError(f"{what}: term {k} has magnitude exp({log_mag:.1f})", degree=k)
    zsign = -1.0 if (z < 0 and k % 2) else 1.0
    return sign * zsign * math.exp(log_mag)


def ml2_series(alpha: float, beta: float, z: float, control: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    r""":math:`E_{\alpha,\beta}(z) = \sum_k z^k/\Gamma(\beta+\alpha k)` with diagnostics."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    z = float(z)
    return _scalar_series(
        lambda k: _power_term(z, k, 1.0, 0.0, beta + alpha * k, "ml2"), control, "ml2"
    )


def ml2(alpha: float, beta: float, z: float, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)`` for real ``z``."""
    return ml2_series(alpha, beta, z, control).value


def ml2_deriv_series(
    alpha: float, beta: float, z: float, m: int, control: SeriesControl = DEFAULT_CONTROL
) -> SeriesResult:
    """``m``-th derivative of ``E_{alpha,beta}`` from the term-wise differentiated series."""
    if int(m) != m or m < 0:
        raise ValueError(f"derivative order must be a nonnegative integer, got {m!r}")
    m = int(m)
    if m == 0:
        return ml2_series(alpha, beta, z, control)
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    z = float(z)

    def term(k: int) -> float:
        # (k+m)!/k!
        log_poch = math.lgamma(k + m + 1) - math.lgamma(k + 1)
        poch = float(math.prod(range(k + 1, k + m + 1))) if log_poch < _LOG_MAX else math.inf
        return _power_term(z, k, poch, log_poch, alpha * (k + m) + beta, "ml2_deriv")

    return _scalar_series(term, control, "ml2_deriv")


def ml2_deriv(alpha: float, beta: float, z: float, m: int, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """``d^m/dz^m E_{alpha,beta}(z)``."""
    return ml2_deriv_series(alpha, beta, z, m, control).value


# multinomial series --------------------------------------------------------


_CACHE_DEGREE = 160


def _compositions(m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``(k_1..k_m)`` with sum ``k`` and their multinomial coefficients."""
    if k <= _CACHE_DEGREE:
        return _cached_compositions(m, k)
    return _build_compositions(m, k)


def _build_compositions(m: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    if m == 1:
        comps = np.array([[k]], dtype=np.int64)
    else:
        blocks = []
        for first in range(k, -1, -1):
            rest, _ = _compositions(m - 1, k - first)
            blocks.append(np.hstack([np.full((rest.shape[0], 1), first, dtype=np.int64), rest]))
        comps = np.vstack(blocks)
    # product of binomials C(k - k_1 - .. - k_{j-1}, k_j)
    remaining = k - np.cumsum(comps, axis=1) + comps
    coeff = np.prod(binom(remaining, comps), axis=1)
    comps.setflags(write=False)
    coeff.setflags(write=False)
    return comps, coeff


_cached_compositions = lru_cache(maxsize=None)(_build_compositions)


_CHUNK = 4096


def _block_terms(alphas: np.ndarray, beta: float, zs: np.ndarray, k: int):
    """Terms of total degree ``k``; returns (block sum, max |term|, sum |term|) per point.

    Rows whose magnitude provably fits in double precision are formed from
    tabulated powers; the rest go through log-magnitudes.
    """
    m, npts = zs.shape
    comps, coeff = _compositions(m, k)
    with np.errstate(divide="ignore"):
        log_abs_z = np.log(np.abs(zs))
    with np.errstate(over="ignore"):
        powers = zs[:, None, :] ** np.arange(k + 1)[None, :, None]
    max_log = np.max(log_abs_z, axis=1)
    block_sum = np.zeros(npts)
    block_max = np.zeros(npts)
    block_abs = np.zeros(npts)
    for lo in range(0, comps.shape[0], _CHUNK):
        c = comps[lo : lo + _CHUNK]
        cf = coeff[lo : lo + _CHUNK]
        arg = beta + c @ alphas
        with np.errstate(invalid="ignore"):
            row_bound = np.where(c > 0, c * max_log, 0.0).sum(axis=1)
        direct = (arg < 170.0) & (np.log(cf) + row_bound < _LOG_MAX)
        terms = np.empty((c.shape[0], npts))
        if np.any(direct):
            cd = c[direct]
            prod = powers[0][cd[:, 0]]
            for j in range(1, m):
                prod = prod * powers[j][cd[:, j]]
            terms[direct] = (cf[direct] * rgamma(arg[direct]))[:, None] * prod
        if not np.all(direct):
            cl = c[~direct]
            log_pow = np.zeros((cl.shape[0], npts))
            sign = np.ones((cl.shape[0], npts))
            for j in range(m):
                cj = cl[:, j : j + 1]
                with np.errstate(invalid="ignore"):
                    log_pow += np.where(cj > 0, cj * log_abs_z[j], 0.0)
                sign *= np.where(cj % 2 == 1, np.sign(zs[j]), 1.0)
            arg_l = arg[~direct]
            log_mag = np.log(cf[~direct])[:, None] + log_pow - log_abs_gamma(arg_l)[:, None]
            gsign = gamma_sign(arg_l)[:, None]
            live = (gsign != 0) & np.isfinite(log_mag)
            if np.any(log_mag[live] > _LOG_MAX):
                raise SeriesOverflowError(
                    f"mml: degree-{k} terms reach magnitude exp({np.max(log_mag[live]):.1f})", degree=k
                )
            terms[~direct] = np.where(live, sign * gsign * np.exp(np.where(live, log_mag, -np.inf)), 0.0)
        block_sum += terms.sum(axis=0)
        mags = np.abs(terms)
        block_max = np.maximum(block_max, mags.max(axis=0))
        block_abs += mags.sum(axis=0)
    return block_sum, block_max, block_abs


def mml_points(alphas, beta: float, zs, control: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Vectorised series for many argument tuples sharing ``alphas`` and ``beta``.

    ``zs`` has shape ``(m, P)``; the result fields have shape ``(P,)``.
    Convergence is tracked per point and the loop ends once every point has
    met the stopping rule.
    """
    alphas = np.asarray(alphas, dtype=float)
    zs = np.asarray(zs, dtype=float)
    if zs.ndim == 1:
        zs = zs[:, None]
    if alphas.ndim != 1 or zs.shape[0] != alphas.shape[0]:
        raise ValueError("zs must have one row per alpha")
    if np.any(alphas <= 0):
        raise ValueError("all alphas must be positive")
    npts = zs.shape[1]
    total = np.zeros(npts)
    comp = np.zeros(npts)  # Neumaier compensation
    abs_sum = np.zeros(npts)
    quiet = np.zeros(npts, dtype=int)
    tail = np.zeros(npts)
    degree = np.full(npts, -1)
    for k in range(control.max_total_degree + 1):
        bsum, bmax, babs = _block_terms(alphas, beta, zs, k)
        new = total + bsum
        comp += np.where(np.abs(total) >= np.abs(bsum), (total - new) + bsum, (bsum - new) + total)
        total = new
        abs_sum += babs
        partial = total + comp
        active = degree < 0
        limit = control.cancellation_limit
        if limit is not None and np.any(EPS * abs_sum[active] > limit):
            raise PrecisionLossError(
                f"mml: rounding estimate {EPS * np.max(abs_sum[active]):.2e} exceeds {limit:.2e} at degree {k}",
                degree=k,
            )
        small = bmax <= control.rel_tol * np.abs(partial)
        quiet = np.where(small, quiet + 1, 0)
        tail = np.where(active & small, np.maximum(tail, bmax), np.where(active, 0.0, tail))
        done = active & (quiet >= control.underflow_guard)
        degree[done] = k
        if np.all(degree >= 0):
            return SeriesResult(partial, degree, tail, abs_sum)
    bad = int(np.sum(degree < 0))
    raise ConvergenceError(
        f"mml: {bad} of {npts} points not converged within degree {control.max_total_degree}",
        degree=control.max_total_degree,
        tail=float(np.max(bmax[degree < 0])),
    )


def _path_block(alphas: np.ndarray, beta: float, coeffs: np.ndarray, log_t: np.ndarray, k: int):
    """Degree-``k`` block of the series in ``t`` with terms ``a_r t^(e_r)`` grouped by exponent.

    Returns ``None`` when some ``|a_r|`` is not representable.
    """
    m = alphas.shape[0]
    comps, coeff = _compositions(m, k)
    expo = comps @ alphas
    arg = beta + expo
    with np.errstate(divide="ignore", invalid="ignore"):
        log_q = np.log(np.abs(coeffs))
        log_a = np.log(coeff) + np.where(comps > 0, comps * log_q, 0.0).sum(axis=1) - log_abs_gamma(arg)
    live = np.isfinite(log_a)
    if np.any(log_a[live] > _LOG_MAX):
        return None
    sign = gamma_sign(arg) * np.prod(np.where(comps % 2 == 1, np.sign(coeffs), 1.0), axis=1)
    a = np.where(live, sign * np.exp(np.where(live, log_a, -np.inf)), 0.0)
    small = (arg < 170.0) & live & (log_a < _LOG_MAX)
    if np.any(small):
        # exact products where representable
        prod = np.prod(coeffs[None, :] ** comps[small], axis=1)
        a[small] = coeff[small] * prod * rgamma(arg[small])
    uniq, inverse = np.unique(np.round(expo, 12), return_inverse=True)
    grouped = np.bincount(inverse, weights=a, minlength=uniq.size)
    grouped_abs = np.bincount(inverse, weights=np.abs(a), minlength=uniq.size)
    with np.errstate(invalid="ignore"):
        powers = np.exp(np.where(uniq[:, None] > 0, uniq[:, None] * log_t[None, :], 0.0))
    block_sum = grouped @ powers
    block_abs = grouped_abs @ powers
    block_max = np.max(grouped_abs[:, None] * powers, axis=0)
    return block_sum, block_max, block_abs


def _path_series(alphas, beta: float, coeffs, t: np.ndarray, control: SeriesControl) -> SeriesResult | None:
    """:func:`mml_points` specialised to ``z_j = q_j t^a_j`` with ``t > 0``; ``None`` if unrepresentable."""
    alphas = np.asarray(alphas, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    log_t = np.log(t)
    npts = t.size
    total = np.zeros(npts)
    comp = np.zeros(npts)
    abs_sum = np.zeros(npts)
    quiet = np.zeros(npts, dtype=int)
    tail = np.zeros(npts)
    degree = np.full(npts, -1)
    for k in range(control.max_total_degree + 1):
        block = _path_block(alphas, beta, coeffs, log_t, k)
        if block is None:
            return None
        bsum, bmax, babs = block
        new = total + bsum
        comp += np.where(np.abs(total) >= np.abs(bsum), (total - new) + bsum, (bsum - new) + total)
        total = new
        abs_sum += babs
        partial = total + comp
        active = degree < 0
        small = bmax <= control.rel_tol * np.abs(partial)
        quiet = np.where(small, quiet + 1, 0)
        tail = np.where(active & small, np.maximum(tail, bmax), np.where(active, 0.0, tail))
        done = active & (quiet >= control.underflow_guard)
        degree[done] = k
        if np.all(degree >= 0):
            return SeriesResult(partial, degree, tail, abs_sum)
    raise ConvergenceError(f"mml path: not converged within degree {control.max_total_degree}")


def mml_series(query: MLQuery, control: SeriesControl = DEFAULT_CONTROL) -> SeriesResult:
    """Multinomial Mittag-Leffler series for one query, with diagnostics."""
    res = mml_points(query.alphas, query.beta, np.asarray(query.zs)[:, None], control)
    return SeriesResult(float(res.value[0]), int(res.degree[0]), float(res.tail[0]), float(res.abs_sum[0]))


def mml(query: MLQuery, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """Multinomial Mittag-Leffler function from its power series."""
    return mml_series(query, control).value


def _series_acceptable(res: SeriesResult, rel_tol: float, scale: float = 0.0) -> np.ndarray:
    """Error estimate within ``rel_tol`` of ``max(|value|, scale)``."""
    return np.asarray(res.error_estimate) <= rel_tol * np.maximum(np.abs(res.value), scale)


def _natural_scale(beta: float, zs) -> float:
    """``|E(0)| = 1/|Gamma(beta)|`` when every argument is nonpositive, else 0."""
    return abs(rgamma(beta)) if np.all(np.asarray(zs) <= 0) else 0.0


def _peak_log_term(alpha: float, beta: float, z: float, kmax: int) -> float:
    """``max_k log(|z|^k / |Gamma(beta + alpha k)|)``, a lower bound for ``log sum |terms|``."""
    if z == 0:
        return -log_abs_gamma(beta) if math.isfinite(log_abs_gamma(beta)) else -math.inf
    k = np.arange(kmax + 1)
    return float(np.max(k * math.log(abs(z)) - log_abs_gamma(beta + alpha * k)))


def _hopeless_points(alphas, beta: float, zs: np.ndarray, accept_rel: float, control: SeriesControl) -> np.ndarray:
    """Vectorised :func:`_series_hopeless` over the columns of ``zs``."""
    if beta < 1:
        return np.zeros(zs.shape[1], dtype=bool)
    k = np.arange(control.max_total_degree + 1)[:, None]
    peak = np.full(zs.shape[1], -np.inf)
    for a, z in zip(alphas, zs):
        with np.errstate(divide="ignore", invalid="ignore"):
            logs = np.where(k > 0, k * np.log(np.abs(z))[None, :], 0.0) - log_abs_gamma(beta + a * k)
        peak = np.maximum(peak, np.max(logs, axis=0))
    return np.all(zs <= 0, axis=0) & (peak > math.log(accept_rel / EPS))


def _series_hopeless(query: MLQuery, accept_rel: float, control: SeriesControl) -> bool:
    """True when cancellation among negative-argument terms alone must exceed ``accept_rel``.

    Assumes ``|E| <= 1``, which holds for nonpositive arguments in the
    regime where this check matters.
    """
    if any(z > 0 for z in query.zs):
        return False
    peak = max(
        _peak_log_term(a, query.beta, z, control.max_total_degree) for a, z in zip(query.alphas, query.zs)
    )
    return peak > math.log(accept_rel / EPS)


@dataclass(frozen=True)
class Evaluation:
    """A function value with the error estimate of the method that produced it."""

    value: float
    error_estimate: float
    method: str


def mml_evaluate(
    query: MLQuery,
    control: SeriesControl = DEFAULT_CONTROL,
    accept_rel: float = 1e-8,
    steps: int | None = None,
) -> Evaluation:
    """Series when its error estimate is acceptable, else the better of series and Volterra.

    Acceptable means below ``accept_rel`` times ``max(|E|, 1/|Gamma(beta)|)``
    for nonpositive arguments and times ``|E|`` otherwise. The Volterra route
    evaluates ``t -> t^(beta-1) E(z_1 t^a_1, ..)`` at ``t = 1`` with ``steps``
    and ``2 * steps`` intervals, uses the difference as its error estimate,
    and needs ``beta >= 1``.
    """
    res = None
    if query.beta < 1 or not _series_hopeless(query, accept_rel, control):
        try:
            res = mml_series(query, control)
            if _series_acceptable(res, accept_rel, _natural_scale(query.beta, query.zs)):
                return Evaluation(res.value, res.error_estimate, "series")
        except ConvergenceError:
            if query.beta < 1:
                raise
    if query.beta < 1:
        return Evaluation(res.value, res.error_estimate, "series")
    n = steps or volterra.default_steps(query.alphas, query.zs, 1.0)
    coarse = volterra.multiterm_path(query.alphas, query.zs, query.beta, 1.0, n)[1][-1]
    fine = volterra.multiterm_path(query.alphas, query.zs, query.beta, 1.0, 2 * n)[1][-1]
    if res is not None and res.error_estimate <= abs(fine - coarse):
        return Evaluation(res.value, res.error_estimate, "series")
    return Evaluation(float(fine), abs(fine - coarse), "volterra")


def mml_auto(
    query: MLQuery,
    control: SeriesControl = DEFAULT_CONTROL,
    accept_rel: float = 1e-8,
    steps: int | None = None,
) -> float:
    """Value of :func:`mml_evaluate`."""
    return mml_evaluate(query, control, accept_rel, steps).value


def _lattice_steps(t: np.ndarray) -> tuple[float, np.ndarray] | None:
    """``(spacing, integer indices)`` if every ``t`` is an integer multiple of one spacing."""
    pos = np.unique(t[t > 0])
    if pos.size == 0:
        return None
    spacing = pos[0] if pos.size == 1 else np.min(np.diff(np.concatenate([[0.0], pos])))
    idx = np.rint(t / spacing)
    if np.allclose(idx * spacing, t, rtol=0, atol=1e-12 * max(1.0, float(t.max()))):
        return float(spacing), idx.astype(np.int64)
    return None


def mml_path(
    alphas,
    beta: float,
    coeffs,
    t,
    control: SeriesControl = DEFAULT_CONTROL,
    accept_rel: float = 1e-8,
    min_steps: int = 4096,
) -> np.ndarray:
    """``E_{alphas,beta}(q_1 t^a_1, .., q_m t^a_m)`` for an array of ``t >= 0``.

    Points whose series estimate fails ``accept_rel`` (measured as in
    :func:`mml_auto`) are recomputed from one
    Volterra solve on a grid containing them (``beta >= 1`` required).
    """
    alphas = np.asarray(alphas, dtype=float)
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be nonnegative")
    zs = coeffs[:, None] * t[None, :] ** alphas[:, None]
    out = np.full(t.shape, np.nan)
    ok = t == 0
    out[ok] = rgamma(beta)
    easy = ~ok & ~_hopeless_points(alphas, beta, zs, accept_rel, control)
    if np.any(easy):
        idx = np.flatnonzero(easy)
        try:
            res = _path_series(alphas, beta, coeffs, t[idx], control)
            if res is None:
                res = mml_points(alphas, beta, zs[:, idx], control)
            good = _series_acceptable(res, accept_rel, _natural_scale(beta, coeffs))
            out[idx[good]] = res.value[good]
            ok[idx[good]] = True
        except ConvergenceError:
            pass
    todo = ~ok
    if not np.any(todo):
        return out
    if beta < 1:
        raise ConvergenceError(f"mml_path: {int(todo.sum())} points need the Volterra route, which needs beta >= 1")
    t_todo = t[todo]
    t_end = float(t_todo.max())
    target = volterra.default_steps(alphas, coeffs * t_end ** alphas, 1.0, minimum=min_steps)
    lattice = _lattice_steps(t_todo)
    if lattice is not None:
        spacing, idx = lattice
        refine = max(1, math.ceil(target / idx.max()))
        grid_t, values = volterra.multiterm_path(alphas, coeffs, beta, spacing * idx.max(), refine * int(idx.max()))
        out[todo] = values[idx * refine]
    else:
        for i in np.flatnonzero(todo):
            _, values = volterra.multiterm_path(alphas, coeffs, beta, float(t[i]), target)
            out[i] = values[-1]
    return out


def mml_t_derivative(
    gamma: float, alphas, beta: float, coeffs, t: float, control: SeriesControl = DEFAULT_CONTROL
) -> float:
    r"""``d/dt [t^gamma E_{alphas,beta+1}(q_1 t^a_1, ..)]`` from the differentiation identity.

    Equals ``t^(gamma-1) [E_beta + (gamma - beta) E_{beta+1}]`` with both
    functions evaluated at ``z_j = q_j t^a_j``.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    alphas = tuple(float(a) for a in alphas)
    zs = tuple(float(q) * t**a for q, a in zip(coeffs, alphas))
    e_beta = mml_auto(MLQuery(alphas, beta, zs), control)
    e_next = 0.0 if gamma == beta else mml_auto(MLQuery(alphas, beta + 1.0, zs), control)
    return t ** (gamma - 1.0) * (e_beta + (gamma - beta) * e_next)


# G(t) representations ------------------------------------------------------


@dataclass(frozen=True)
class SplCoefficients:
    """Per-mode constants of the Laplace-inverted time kernel ``G(t)``.

    The argument triple is ``(q_1 t^(alpha+1), q_2 t, q_3 t^alpha)`` with
    ``q = (-sigma/(rho c tq), -a/(rho c), -1/tq)``.
    """

    model: ModelParams
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")

    @property
    def alphas(self) -> tuple[float, float, float]:
        al = self.model.alpha
        return (al + 1.0, 1.0, al)

    @property
    def coeffs(self) -> tuple[float, float, float]:
        p = self.model
        return (-self.sigma / (p.rho_c * p.tau_q_alpha), -p.a / p.rho_c, -1.0 / p.tau_q_alpha)

    def arguments(self, t: float) -> tuple[float, float, float]:
        if t < 0:
            raise ValueError(f"t must be nonnegative, got {t!r}")
        return tuple(q * t**a for q, a in zip(self.coeffs, self.alphas))

    def query(self, t: float, beta: float) -> MLQuery:
        return MLQuery(self.alphas, beta, self.arguments(t))


def g_mml_evaluate(t: float, coeff: SplCoefficients, control: SeriesControl = DEFAULT_CONTROL) -> Evaluation:
    """``G(t)`` through one multinomial Mittag-Leffler function, with its error estimate."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if t == 0:
        return Evaluation(0.0, 0.0, "exact")
    p = coeff.model
    al = p.alpha
    factor = t**al / (p.rho_c * p.tau_q_alpha)
    inner = mml_evaluate(coeff.query(t, al + 1.0), control)
    return Evaluation(factor * inner.value, factor * inner.error_estimate, inner.method)


def g_mml(t: float, coeff: SplCoefficients, control: SeriesControl = DEFAULT_CONTROL) -> float:
    """``G(t)`` through one multinomial Mittag-Leffler function."""
    return g_mml_evaluate(t, coeff, control).value


@dataclass(frozen=True)
class DoubleSumResult:
    value: float
    m_used: int
    tail: float
    abs_sum: float = field(default=0.0)


def g_double_sum(
    t: float,
    coeff: SplCoefficients,
    m_max: int | None = None,
    control: SeriesControl = DEFAULT_CONTROL,
) -> DoubleSumResult:
    """``G(t)`` from the double sum over derivatives of two-parameter functions.

    With ``m_max=None`` the outer sum stops by the rule of ``control``;
    otherwise exactly ``m = 0..m_max`` is summed and a tail (size of the last
    block) above ``control.rel_tol * |value|`` raises :class:`ConvergenceError`.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    if m_max is not None and m_max < 0:
        raise ValueError(f"m_max must be >= 0, got {m_max!r}")
    if t == 0:
        return DoubleSumResult(0.0, 0, 0.0)
    p = coeff.model
    al, tq, rc = p.alpha, p.tau_q_alpha, p.rho_c
    s = coeff.sigma
    z = -(t**al) / tq
    log_t = math.log(t)
    log_s = math.log(s / (rc * tq))
    log_ratio = math.log(p.a * tq / s) if p.a > 0 else None
    cap = control.max_total_degree if m_max is None else m_max

    terms: list[float] = []
    abs_sum = 0.0
    quiet = 0
    last = 0.0
    for m in range(cap + 1):
        block: list[float] = []
        for k in range(m + 1 if log_ratio is not None else 1):
            log_pref = (
                -math.lgamma(m + 1)
                + m * log_s
                + (math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1))
                + (k * log_ratio if k else 0.0)
                + ((al + 1.0) * (m + 1) - al * k - 1.0) * log_t
            )
            e = ml2_deriv(al, al + 1.0 + m - al * k, z, m, control)
            if e == 0:
                continue
            log_mag = log_pref + math.log(abs(e))
            if log_mag > _LOG_MAX:
                raise SeriesOverflowError(f"g_double_sum: block {m} reaches exp({log_mag:.1f})", degree=m)
            block.append(math.copysign(math.exp(log_mag), e) * (-1.0 if m % 2 else 1.0))
        terms.extend(block)
        abs_sum += sum(abs(b) for b in block)
        last = max((abs(b) for b in block), default=0.0)
        partial = math.fsum(terms)
        if m_max is None:
            if last <= control.rel_tol * abs(partial):
                quiet += 1
                if quiet >= control.underflow_guard:
                    return DoubleSumResult(partial / (rc * tq), m, last / (rc * tq), abs_sum / (rc * tq))
            else:
                quiet = 0
    partial = math.fsum(terms)
    if m_max is None or last > control.rel_tol * abs(partial):
        raise ConvergenceError(
            f"g_double_sum: tail {last:.3e} exceeds tolerance at m = {cap}", degree=cap, tail=last
        )
    return DoubleSumResult(partial / (rc * tq), cap, last / (rc * tq), abs_sum / (rc * tq))


# boundedness ---------------------------------------------------------------


def gamma_ratio_bound(beta: float, alphas: Sequence[float], ks: Sequence[int]) -> tuple[float, float]:
    """Both sides of ``1/Gamma(beta + sum a_j k_j) <= max(1, (beta + a_1)/a_m) / Gamma(beta + a_m k)``.

    ``alphas`` must be sorted decreasingly; ``k = sum(ks)``.
    """
    alphas = [float(a) for a in alphas]
    if len(alphas) != len(ks):
        raise ValueError("alphas and ks must have equal length")
    k = int(sum(ks))
    lhs = rgamma(beta + sum(a * kj for a, kj in zip(alphas, ks)))
    rhs = max(1.0, (beta + alphas[0]) / alphas[-1]) * rgamma(beta + alphas[-1] * k)
    return float(lhs), float(rhs)


def check_bound_admissible(query: MLQuery, bound_k: float) -> None:
    """Raise ``ValueError`` unless ``query`` fits the hypotheses of the boundedness estimate."""
    a = query.alphas
    if any(a[i] <= a[i + 1] for i in range(len(a) - 1)):
        raise ValueError(f"alphas must be strictly decreasing, got {a}")
    if not 0 < a[0] < 2:
        raise ValueError(f"alphas[0] must lie in (0, 2), got {a[0]}")
    for z in query.zs[1:]:
        if not -bound_k <= z < 0:
            raise ValueError(f"trailing arguments must lie in [-{bound_k}, 0), got {z}")


@dataclass(frozen=True)
class BoundSweep:
    """``|E|`` and ``|E| (1 + |z_1|)`` along a sweep of the leading argument."""

    z1: np.ndarray
    values: np.ndarray

    @property
    def products(self) -> np.ndarray:
        return np.abs(self.values) * (1.0 + np.abs(self.z1))

    @property
    def spread(self) -> float:
        prod = self.products
        return float(prod.max() / prod.min()) if prod.min() > 0 else math.inf

    def nonincreasing_beyond(self, threshold: float = 100.0, ripple: float = 0.05) -> bool:
        """``|E|`` does not grow by more than ``ripple`` between neighbours with ``|z_1| >= threshold``."""
        order = np.argsort(np.abs(self.z1))
        mags = np.abs(self.values[order])[np.abs(self.z1[order]) >= threshold]
        return bool(np.all(mags[1:] <= mags[:-1] * (1.0 + ripple)))


def bound_sweep(
    alphas: Sequence[float],
    beta: float,
    z_rest: Sequence[float],
    z1_values: Sequence[float],
    control: SeriesControl = DEFAULT_CONTROL,
    bound_k: float | None = None,
) -> BoundSweep:
    """Evaluate ``E_{alphas,beta}(z_1, *z_rest)`` for each ``z_1`` after checking admissibility."""
    z1 = np.asarray(z1_values, dtype=float)
    k = bound_k if bound_k is not None else max((abs(z) for z in z_rest), default=1.0)
    values = np.empty_like(z1)
    for i, z in enumerate(z1):
        query = MLQuery(tuple(alphas), beta, (float(z), *z_rest))
        check_bound_admissible(query, k)
        values[i] = mml_auto(query, control)
    return BoundSweep(z1, values)
