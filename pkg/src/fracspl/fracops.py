r"""Riemann-Liouville kernel and discrete convolution calculus on uniform grids.

All time-discrete objects live on a :class:`TimeGrid` with nodes
:math:`t_i = i\tau`, :math:`\tau = T/n`. The discrete convolution of a kernel
:math:`\kappa` with a sampled path :math:`z` is the right-endpoint product rule

.. math::

    (\kappa * z)^c_i = \sum_{\ell=1}^{i} \kappa_{i+1-\ell} z_\ell \tau,

where :math:`\kappa_j = \kappa(t_j)`. Everything here is a pure function of its
arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._special import rgamma

__all__ = [
    "TimeGrid",
    "SampledPath",
    "KernelSamples",
    "rl_kernel",
    "rl_kernel_samples",
    "delta",
    "delta2",
    "delta_path",
    "discrete_conv",
    "conv_path",
    "frac_integral",
    "caputo_discrete",
]


def _check_order(gamma: float, name: str = "gamma") -> None:
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {gamma!r}")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of ``[0, final_time]`` into ``steps`` intervals."""

    final_time: float
    steps: int

    def __post_init__(self) -> None:
        if not self.final_time > 0:
            raise ValueError(f"final_time must be positive, got {self.final_time!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError(f"steps must be an integer >= 1, got {self.steps!r}")
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def tau(self) -> float:
        return self.final_time / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return self.tau * np.arange(self.steps + 1, dtype=float)

    def refine(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.final_time, self.steps * factor)


@dataclass(frozen=True)
class SampledPath:
    """Samples ``z_0, ..., z_n`` of a scalar or vector valued function of time.

    ``values`` has shape ``(n + 1,)`` or ``(n + 1, d)``.
    """

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim not in (1, 2) or values.shape[0] != self.grid.steps + 1:
            raise ValueError(
                f"expected {self.grid.steps + 1} samples, got array of shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("path samples must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TimeGrid, fun) -> "SampledPath":
        return cls(grid, np.asarray(fun(grid.nodes), dtype=float))

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, i):
        return self.values[i]


@dataclass(frozen=True)
class KernelSamples:
    """Kernel values ``kappa_1, ..., kappa_n`` at ``t_1, ..., t_n``.

    There is no sample at ``t_0 = 0``. ``gamma`` is set for Riemann-Liouville
    kernels and ``None`` for user-supplied sequences.
    """

    grid: TimeGrid
    values: np.ndarray
    gamma: float | None = field(default=None)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.steps,):
            raise ValueError(
                f"expected {self.grid.steps} kernel samples, got shape {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, j: int) -> float:
        """One-based access, ``kernel[j] == kappa(t_j)``."""
        if not 1 <= j <= self.grid.steps:
            raise IndexError(f"kernel index {j} outside 1..{self.grid.steps}")
        return self.values[j - 1]

    def is_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) < 0))


def rl_kernel(gamma: float, t):
    r"""Riemann-Liouville kernel :math:`g_\gamma(t) = t^{-\gamma}/\Gamma(1-\gamma)`.

    Accepts a scalar or an array of strictly positive times.
    """
    _check_order(gamma)
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise ValueError("the Riemann-Liouville kernel is only defined for t > 0")
    value = t_arr ** (-gamma) * rgamma(1.0 - gamma)
    return float(value) if value.ndim == 0 else value


def rl_kernel_samples(gamma: float, grid: TimeGrid) -> KernelSamples:
    """Samples of :func:`rl_kernel` at ``t_1, ..., t_n``."""
    return KernelSamples(grid, rl_kernel(gamma, grid.nodes[1:]), gamma=gamma)


def _check_index(i: int, n: int, lower: int = 1) -> None:
    if not lower <= i <= n:
        raise IndexError(f"index {i} outside {lower}..{n}")


def delta(path: SampledPath, i: int):
    """Backward difference quotient ``(z_i - z_{i-1}) / tau`` for ``1 <= i <= n``."""
    _check_index(i, path.grid.steps)
    return (path.values[i] - path.values[i - 1]) / path.grid.tau


def delta_path(path: SampledPath, initial=0.0) -> SampledPath:
    """All difference quotients as a path; node 0 carries ``initial``."""
    out = np.empty_like(path.values)
    out[0] = initial
    out[1:] = np.diff(path.values, axis=0) / path.grid.tau
    return SampledPath(path.grid, out)


def delta2(path: SampledPath, prior_delta0, i: int):
    """Second difference ``(delta z_i - delta z_{i-1}) / tau`` with ``delta z_0 = prior_delta0``."""
    _check_index(i, path.grid.steps)
    previous = prior_delta0 if i == 1 else delta(path, i - 1)
    return (delta(path, i) - previous) / path.grid.tau


def discrete_conv(kernel: KernelSamples, z: SampledPath, i: int):
    """Right-endpoint discrete convolution ``(kappa * z)^c_i``.

    ``i = 0`` is only meaningful, and returns zero, when ``z_0 = 0``.
    """
    if kernel.grid != z.grid:
        raise ValueError("kernel and path live on different grids")
    _check_index(i, z.grid.steps, lower=0)
    if i == 0:
        if np.any(z.values[0] != 0):
            raise ValueError("(kappa * z)^c_0 is only defined when z_0 = 0")
        return np.zeros_like(z.values[0])
    # kappa_{i+1-l} for l = 1..i is kappa_i, ..., kappa_1
    weights = kernel.values[:i][::-1]
    return np.tensordot(weights, z.values[1 : i + 1], axes=1) * z.grid.tau


def conv_path(kernel: KernelSamples, z: SampledPath) -> SampledPath:
    """``(kappa * z)^c_i`` at every node; node 0 is set to zero."""
    if kernel.grid != z.grid:
        raise ValueError("kernel and path live on different grids")
    n = z.grid.steps
    vals = z.values[1:]
    out = np.zeros_like(z.values)
    reversed_kernel = kernel.values[::-1]
    for i in range(1, n + 1):
        out[i] = np.tensordot(reversed_kernel[n - i :], vals[:i], axes=1)
    return SampledPath(z.grid, out * z.grid.tau)


def _cumulative(z: SampledPath) -> SampledPath:
    out = np.zeros_like(z.values)
    out[1:] = np.cumsum(z.values[1:], axis=0) * z.grid.tau
    return SampledPath(z.grid, out)


def frac_integral(alpha: float, z: SampledPath) -> SampledPath:
    r"""Discrete Riemann-Liouville integral :math:`I^\alpha z` of order ``alpha > 0``.

    The fractional part uses the kernel :math:`g_{1-\alpha}` through
    :func:`conv_path`; integer parts are right-endpoint cumulative sums.
    Node 0 is zero.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha!r}")
    whole = math.floor(alpha)
    frac = alpha - whole
    out = z
    if frac > 0:
        out = conv_path(rl_kernel_samples(1.0 - frac, z.grid), out)
    for _ in range(whole):
        out = _cumulative(out)
    if frac > 0 or whole > 0:
        values = np.array(out.values)
        values[0] = 0.0
        out = SampledPath(z.grid, values)
    return out


def caputo_discrete(alpha: float, z: SampledPath, kernel: KernelSamples | None = None) -> SampledPath:
    r"""Discrete Caputo derivative :math:`\delta(g_\alpha * (z - z_0))^c_i`.

    Node 0 is zero by convention. ``kernel`` overrides the Riemann-Liouville
    samples (used by fault-injection checks).
    """
    _check_order(alpha, "alpha")
    if kernel is None:
        kernel = rl_kernel_samples(alpha, z.grid)
    shifted = SampledPath(z.grid, z.values - z.values[0])
    conv = conv_path(kernel, shifted).values
    out = np.zeros_like(conv)
    out[1:] = np.diff(conv, axis=0) / z.grid.tau
    return SampledPath(z.grid, out)
