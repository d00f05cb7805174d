r"""Rothe (backward Euler) time stepping with P1 finite elements on ``(0, L)``.

Step ``i`` solves, for interior nodal values :math:`u_i`,

.. math::

    \rho c t_q \langle (g_\alpha * \delta^2 u)^c_i, \varphi\rangle
    + a t_q \langle (g_\alpha * \delta u)^c_i, \varphi\rangle
    + \rho c \langle \delta u_i, \varphi\rangle + \mathcal{L}(u_i, \varphi)
    = \langle F_i, \varphi\rangle,

with :math:`\delta u_0 = V_0` and :math:`\mathcal{L}(u,\varphi) = \langle k u', \varphi'\rangle + a\langle u,\varphi\rangle`.
The unknown appears only through the newest term of each convolution, so
every step shares one symmetric positive definite tridiagonal matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded

from .fracops import TimeGrid, rl_kernel, rl_kernel_samples
from .params import ModelParams

__all__ = [
    "SymTridiag",
    "Mesh1D",
    "FemSystem",
    "EstimateLedger",
    "RotheRun",
    "RotheSolverError",
    "HistoryError",
    "assemble",
    "step_matrix",
    "step_rhs",
    "run_solver",
    "rothe_interpolants",
    "gradient_gap_closed_form",
]


class RotheSolverError(RuntimeError):
    """The per-step factorisation or solve failed."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class HistoryError(RuntimeError):
    """A step was requested before its predecessors were solved."""


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix from its diagonal and first off-diagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self) -> None:
        diag = np.array(self.diag, dtype=float)
        off = np.array(self.off, dtype=float)
        if diag.ndim != 1 or off.shape != (max(diag.size - 1, 0),):
            raise ValueError("off-diagonal must have one entry fewer than the diagonal")
        diag.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        off = self.off.reshape((-1,) + (1,) * (x.ndim - 1))
        out[:-1] += off * x[1:]
        out[1:] += off * x[:-1]
        return out

    def __add__(self, other: "SymTridiag") -> "SymTridiag":
        return SymTridiag(self.diag + other.diag, self.off + other.off)

    def scaled(self, factor: float) -> "SymTridiag":
        return SymTridiag(factor * self.diag, factor * self.off)

    def quad(self, x: np.ndarray) -> float:
        """``x^T A x`` for one vector."""
        return float(np.dot(x, self @ x))

    def cholesky(self) -> np.ndarray:
        """Upper banded Cholesky factor for :func:`scipy.linalg.cho_solve_banded`."""
        banded = np.zeros((2, self.size))
        banded[0, 1:] = self.off
        banded[1] = self.diag
        return cholesky_banded(banded, lower=False)


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh of ``(0, L)`` with piecewise-constant conductivity."""

    L: float
    element_count: int
    conductivity: np.ndarray | float = 1.0

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L!r}")
        if int(self.element_count) != self.element_count or self.element_count < 2:
            raise ValueError(f"element_count must be an integer >= 2, got {self.element_count!r}")
        object.__setattr__(self, "element_count", int(self.element_count))
        k = np.broadcast_to(np.asarray(self.conductivity, dtype=float), (self.element_count,)).copy()
        if not np.all(np.isfinite(k)) or np.any(k <= 0):
            raise ValueError("conductivity must be positive on every element")
        k.setflags(write=False)
        object.__setattr__(self, "conductivity", k)

    @property
    def h(self) -> float:
        return self.L / self.element_count

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.element_count + 1)

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def k_min(self) -> float:
        return float(self.conductivity.min())

    @property
    def k_max(self) -> float:
        return float(self.conductivity.max())

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.conductivity == self.conductivity[0]))


def _stiffness_full(h: float, k: np.ndarray) -> SymTridiag:
    diag = np.zeros(k.size + 1)
    diag[:-1] += k / h
    diag[1:] += k / h
    return SymTridiag(diag, -k / h)


def _mass_full(h: float, count: int) -> SymTridiag:
    diag = np.zeros(count + 1)
    diag[:-1] += h / 3.0
    diag[1:] += h / 3.0
    return SymTridiag(diag, np.full(count, h / 6.0))


def _interior(full: SymTridiag) -> SymTridiag:
    return SymTridiag(full.diag[1:-1], full.off[1:-1])


@dataclass(frozen=True)
class FemSystem:
    """Interior P1 matrices; ``gram`` is the unit-conductivity stiffness used for ``H^1`` norms."""

    mesh: Mesh1D
    a: float
    mass: SymTridiag
    stiffness: SymTridiag
    gram: SymTridiag
    full_mass: SymTridiag
    full_stiffness: SymTridiag

    @property
    def dimension(self) -> int:
        return self.mass.size

    @property
    def elliptic(self) -> SymTridiag:
        """Matrix of ``L(u, phi) = <k u', phi'> + a <u, phi>``."""
        return self.stiffness + self.mass.scaled(self.a)

    @property
    def h1(self) -> SymTridiag:
        return self.gram + self.mass

    def l2_sq(self, x: np.ndarray) -> float:
        return self.mass.quad(x)

    def h1_sq(self, x: np.ndarray) -> float:
        return self.h1.quad(x)

    def grad_sq(self, x: np.ndarray) -> float:
        return self.gram.quad(x)


def assemble(mesh: Mesh1D, a: float = 0.0) -> FemSystem:
    """Exact P1 mass and stiffness matrices, full and with Dirichlet nodes removed."""
    if not a >= 0:
        raise ValueError(f"a must be nonnegative, got {a!r}")
    h = mesh.h
    full_k = _stiffness_full(h, mesh.conductivity)
    full_m = _mass_full(h, mesh.element_count)
    gram = _interior(_stiffness_full(h, np.ones(mesh.element_count)))
    return FemSystem(mesh, float(a), _interior(full_m), _interior(full_k), gram, full_m, full_k)


def _mass_coefficient(params: ModelParams, tau: float) -> float:
    g = rl_kernel(params.alpha, tau)
    p = params
    return p.rho_c * p.tau_q_alpha / tau * g + p.a * p.tau_q_alpha * g + p.rho_c / tau


def step_matrix(system: FemSystem, params: ModelParams, tau: float) -> SymTridiag:
    """``(rho c tq g(tau)/tau + a tq g(tau) + rho c/tau) Mass + Stiffness + a Mass``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau!r}")
    return system.mass.scaled(_mass_coefficient(params, tau)) + system.elliptic


# run state -----------------------------------------------------------------


@dataclass
class EstimateLedger:
    """Per-step stability quantities; index ``j`` refers to step ``j`` (row 0 is zero)."""

    conv_energy: np.ndarray
    kinetic: np.ndarray
    h1_norm: np.ndarray
    increment: np.ndarray
    dy_sum: np.ndarray
    dual_sum: np.ndarray

    FIELDS = ("conv_energy", "kinetic", "h1_norm", "increment", "dy_sum", "dual_sum")

    @classmethod
    def empty(cls, steps: int) -> "EstimateLedger":
        return cls(*(np.zeros(steps + 1) for _ in cls.FIELDS))

    def terminal(self) -> dict[str, float]:
        return {name: float(getattr(self, name)[-1]) for name in self.FIELDS}

    def rows(self):
        for j in range(1, self.kinetic.size):
            yield (j, *(float(getattr(self, name)[j]) for name in self.FIELDS))


@dataclass
class Monitors:
    """Per-step checks of the estimate chain; ``*_ok`` are boolean arrays over steps."""

    young_bound: np.ndarray
    young_ok: np.ndarray
    energy_lhs: np.ndarray
    energy_rhs: np.ndarray
    energy_ok: np.ndarray
    residual: np.ndarray


@dataclass
class RotheRun:
    """Full state of a Rothe solve. ``u`` and ``du`` hold interior nodal vectors per step."""

    params: ModelParams
    mesh: Mesh1D
    grid: TimeGrid
    system: FemSystem
    u: np.ndarray
    du: np.ndarray
    load: np.ndarray
    kernel: np.ndarray
    completed: int = 0
    ledger: EstimateLedger = field(default=None)
    monitors: Monitors = field(default=None)

    @property
    def tau(self) -> float:
        return self.grid.tau

    def full_u(self) -> np.ndarray:
        """``u`` with the zero boundary values appended, shape ``(n+1, M+1)``."""
        out = np.zeros((self.u.shape[0], self.mesh.element_count + 1))
        out[:, 1:-1] = self.u
        return out

    def full_du(self) -> np.ndarray:
        out = np.zeros((self.du.shape[0], self.mesh.element_count + 1))
        out[:, 1:-1] = self.du
        return out

    def second_difference(self, k: int) -> np.ndarray:
        return (self.du[k] - self.du[k - 1]) / self.tau

    def _history(self, values: np.ndarray, i: int) -> np.ndarray:
        """``sum_{k=1}^{i-1} g(t_{i+1-k}) values_k tau``."""
        if i <= 1:
            return np.zeros(values.shape[1])
        return self.kernel[1:i][::-1] @ values[1:i] * self.tau


def _nodal(data, mesh: Mesh1D, name: str) -> np.ndarray:
    x = mesh.nodes
    values = np.asarray(data(x) if callable(data) else data, dtype=float)
    values = np.broadcast_to(values, x.shape).astype(float)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} must be finite")
    return values


def _load(F, mesh: Mesh1D, grid: TimeGrid) -> np.ndarray:
    shape = (grid.steps + 1, mesh.element_count + 1)
    if F is None:
        return np.zeros(shape)
    if callable(F):
        values = np.asarray(F(mesh.nodes[None, :], grid.nodes[:, None]), dtype=float)
    else:
        values = np.asarray(F, dtype=float)
    return np.broadcast_to(values, shape).astype(float)


def _second_differences(run: RotheRun, upto: int) -> np.ndarray:
    out = np.zeros_like(run.du[: upto + 1])
    out[1:] = np.diff(run.du[: upto + 1], axis=0) / run.tau
    return out


def step_rhs(run: RotheRun, i: int) -> np.ndarray:
    """Right-hand side of step ``i`` given ``u_0..u_{i-1}`` and ``du_0..du_{i-1}``."""
    if not 1 <= i <= run.grid.steps:
        raise IndexError(f"step {i} outside 1..{run.grid.steps}")
    if run.completed < i - 1:
        raise HistoryError(f"step {i} needs history through {i - 1}, have {run.completed}")
    p = run.params
    tau = run.tau
    g1 = run.kernel[0]
    u_prev = run.u[i - 1]
    d2 = _second_differences(run, i - 1)
    vec = (
        run.load[i]
        + p.rho_c * p.tau_q_alpha * g1 * (u_prev / tau + run.du[i - 1])
        + p.rho_c / tau * u_prev
        - p.rho_c * p.tau_q_alpha * run._history(d2, i)
        + p.a * p.tau_q_alpha * g1 * u_prev
        - p.a * p.tau_q_alpha * run._history(run.du, i)
    )
    return run.system.mass @ vec


def _residual(run: RotheRun, i: int, d2: np.ndarray) -> float:
    """Relative residual of the discrete weak form at step ``i`` with all terms written out."""
    p = run.params
    tau = run.tau
    conv_d2 = run.kernel[:i][::-1] @ d2[1 : i + 1] * tau
    conv_du = run.kernel[:i][::-1] @ run.du[1 : i + 1] * tau
    sys = run.system
    parts = [
        p.rho_c * p.tau_q_alpha * (sys.mass @ conv_d2),
        p.a * p.tau_q_alpha * (sys.mass @ conv_du),
        p.rho_c * (sys.mass @ run.du[i]),
        sys.elliptic @ run.u[i],
        -(sys.mass @ run.load[i]),
    ]
    total = np.abs(sum(parts)).max()
    scale = max(np.abs(part).max() for part in parts)
    return float(total / scale) if scale > 0 else 0.0


def run_solver(params: ModelParams, mesh: Mesh1D, grid: TimeGrid, U0, V0, F=None) -> RotheRun:
    """Solve all steps and fill the estimate ledger and monitors.

    ``U0`` and ``V0`` are callables of ``x`` or nodal arrays on ``mesh.nodes``;
    ``F`` is ``None``, a callable ``F(x, t)`` or an array of shape
    ``(n+1, M+1)``. Boundary values are dropped (Dirichlet conditions).
    """
    system = assemble(mesh, params.a)
    u0 = _nodal(U0, mesh, "U0")
    if abs(u0[0]) > 1e-12 or abs(u0[-1]) > 1e-12:
        raise ValueError("U0 must vanish at both endpoints")
    v0 = _nodal(V0, mesh, "V0")
    n = grid.steps
    dim = system.dimension
    kernel = rl_kernel_samples(params.alpha, grid).values
    run = RotheRun(
        params,
        mesh,
        grid,
        system,
        u=np.zeros((n + 1, dim)),
        du=np.zeros((n + 1, dim)),
        load=_load(F, mesh, grid)[:, 1:-1],
        kernel=kernel,
    )
    run.u[0] = u0[1:-1]
    run.du[0] = v0[1:-1]

    matrix = step_matrix(system, params, grid.tau)
    try:
        factor = matrix.cholesky()
    except LinAlgError as exc:
        raise RotheSolverError(str(exc), 1) from exc
    for i in range(1, n + 1):
        rhs = step_rhs(run, i)
        try:
            run.u[i] = cho_solve_banded((factor, False), rhs)
        except (LinAlgError, ValueError) as exc:
            raise RotheSolverError(str(exc), i) from exc
        if not np.all(np.isfinite(run.u[i])):
            raise RotheSolverError("non-finite solution", i)
        run.du[i] = (run.u[i] - run.u[i - 1]) / grid.tau
        run.completed = i
    _fill_ledger(run)
    return run


def _fill_ledger(run: RotheRun) -> None:
    sys = run.system
    p = run.params
    n = run.grid.steps
    tau = run.tau
    g = run.kernel
    d2 = _second_differences(run, n)
    ledger = EstimateLedger.empty(n)
    h1_factor = sys.h1.cholesky()
    shift = np.array([sys.l2_sq(run.du[i] - run.du[0]) for i in range(n + 1)])
    kin = np.array([sys.l2_sq(run.du[i]) for i in range(n + 1)])
    increments = np.array([0.0] + [sys.h1_sq(run.u[i] - run.u[i - 1]) for i in range(1, n + 1)])
    grad_inc = np.array([0.0] + [sys.grad_sq(run.u[i] - run.u[i - 1]) for i in range(1, n + 1)])
    kernel_l1 = np.cumsum(g) * tau
    young = np.zeros(n + 1)
    energy_lhs = np.zeros(n + 1)
    energy_rhs = np.zeros(n + 1)
    residual = np.zeros(n + 1)
    ell = sys.elliptic
    u0 = run.u[0]
    constant = 0.5 * max(run.mesh.k_max, p.a) * sys.h1_sq(u0)
    work = 0.0
    dy = 0.0
    dual = 0.0
    for j in range(1, n + 1):
        weights = g[:j][::-1]
        ledger.conv_energy[j] = float(weights @ shift[1 : j + 1]) * tau
        ledger.kinetic[j] = ledger.kinetic[j - 1] + kin[j] * tau
        ledger.h1_norm[j] = sys.h1_sq(run.u[j])
        ledger.increment[j] = ledger.increment[j - 1] + increments[j]
        conv_du = weights @ run.du[1 : j + 1] * tau
        dy += sys.l2_sq(conv_du) * tau
        ledger.dy_sum[j] = dy
        conv_d2 = weights @ d2[1 : j + 1] * tau
        r = sys.mass @ conv_d2
        dual += float(r @ cho_solve_banded((h1_factor, False), r)) * tau
        ledger.dual_sum[j] = dual
        young[j] = kernel_l1[j - 1] ** 2 * ledger.kinetic[j]
        work += float(run.du[j] @ (ell @ run.u[j])) * tau
        energy_lhs[j] = work
        energy_rhs[j] = 0.5 * run.mesh.k_min * (sys.grad_sq(run.u[j]) + grad_inc[1 : j + 1].sum()) - constant
        residual[j] = _residual(run, j, d2)
    run.ledger = ledger
    scale = np.maximum(1.0, np.abs(energy_lhs))
    run.monitors = Monitors(
        young_bound=young,
        young_ok=ledger.dy_sum <= young * (1 + 1e-12) + 1e-300,
        energy_lhs=energy_lhs,
        energy_rhs=energy_rhs,
        energy_ok=energy_lhs >= energy_rhs - 1e-10 * scale,
        residual=residual,
    )


# interpolants --------------------------------------------------------------


def rothe_interpolants(run: RotheRun, t: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Piecewise-linear ``v``, piecewise-constant ``v_bar`` and ``w_bar`` at time ``t``."""
    T = run.grid.final_time
    if not 0 <= t <= T:
        raise ValueError(f"t must lie in [0, {T}], got {t!r}")
    if t == 0:
        return run.u[0].copy(), run.u[0].copy(), run.du[0].copy()
    tau = run.tau
    i = min(run.grid.steps, max(1, math.ceil(t / tau - 1e-9)))
    theta = (t - (i - 1) * tau) / tau
    v = run.u[i - 1] + theta * (run.u[i] - run.u[i - 1])
    return v, run.u[i].copy(), run.du[i].copy()


def gradient_gap_closed_form(run: RotheRun) -> float:
    """``(tau/3) sum ||grad(u_i - u_{i-1})||^2``, the time integral of ``||grad(v - v_bar)||^2``."""
    diffs = np.diff(run.u, axis=0)
    return run.tau / 3.0 * sum(run.system.grad_sq(d) for d in diffs)
