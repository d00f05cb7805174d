"""Property suites behind ``fracspl verify``; each check reports a measured residual."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fracops as fo
from .mittag import (
    MLQuery,
    bound_sweep,
    gamma_ratio_bound,
    ml2,
    mml_evaluate,
)
from .params import ModelParams
from .rothe import Mesh1D, assemble, run_solver, step_matrix
from .spectral1d import (
    SpectralConfig,
    dt_factor_1,
    dt_factor_2,
    eigenfunction,
    mode_residual,
    spectral_solve,
    t_factor_1,
    t_factor_2,
)

__all__ = ["Check", "FAULTS", "SUITES", "run_suites", "format_tap"]

FAULTS = ("increasing-kernel",)

REFERENCE = ModelParams(alpha=0.5, tau_q_alpha=0.5, a=1.0)


@dataclass(frozen=True)
class Check:
    """Outcome of one property; ``residual`` is the measured quantity compared with ``limit``."""

    name: str
    ok: bool
    residual: float
    limit: float
    detail: str = ""


def _check(name: str, residual: float, limit: float, detail: str = "") -> Check:
    return Check(name, bool(residual <= limit), float(residual), float(limit), detail)


# fracops --------------------------------------------------------------------


def _random_kernel(rng, n: int, fault: str | None) -> np.ndarray:
    """Positive kernel samples, strictly decreasing unless the fault reverses them."""
    values = np.sort(rng.uniform(0.05, 5.0, n))[::-1]
    if fault == "increasing-kernel":
        values = values[::-1]
    return values


def _random_path(rng, grid: fo.TimeGrid) -> fo.SampledPath:
    z = rng.normal(size=grid.steps + 1)
    z[0] = 0.0
    return fo.SampledPath(grid, z)


def _conv_all(kernel: fo.KernelSamples, z: fo.SampledPath) -> np.ndarray:
    return fo.conv_path(kernel, z).values


def _monotone_kernel_margins(rng, trials: int, fault: str | None):
    """Worst normalised margins of the pointwise and summed monotone-kernel inequalities."""
    worst_point = math.inf
    worst_sum = math.inf
    for _ in range(trials):
        n = int(rng.integers(2, 40))
        grid = fo.TimeGrid(float(rng.uniform(0.5, 2.0)), n)
        kernel = fo.KernelSamples(grid, _random_kernel(rng, n, fault))
        z = _random_path(rng, grid)
        z2 = fo.SampledPath(grid, z.values**2)
        dconv = np.diff(_conv_all(kernel, z)) / grid.tau
        dconv2 = np.diff(_conv_all(kernel, z2)) / grid.tau
        zi = z.values[1:]
        kz2 = kernel.values * zi**2
        lhs = 2.0 * dconv * zi
        rhs = dconv2 + kz2
        scale = np.maximum(1.0, np.abs(lhs) + np.abs(rhs))
        worst_point = min(worst_point, float(np.min((lhs - rhs) / scale)))
        lhs_sum = np.cumsum(lhs) * grid.tau
        rhs_sum = _conv_all(kernel, z2)[1:] + np.cumsum(kz2) * grid.tau
        scale = np.maximum(1.0, np.abs(lhs_sum) + np.abs(rhs_sum))
        worst_sum = min(worst_sum, float(np.min((lhs_sum - rhs_sum) / scale)))
    return worst_point, worst_sum


def suite_fracops(rng, fault: str | None = None) -> list[Check]:
    checks = []
    point, summed = _monotone_kernel_margins(rng, 1000, fault)
    checks.append(_check("fracops.monotone_kernel", -point, 1e-12, "worst margin over 1000 trials"))
    checks.append(_check("fracops.monotone_kernel_summed", -summed, 1e-12, "worst margin over 1000 trials"))

    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 30))
        d = int(rng.integers(1, 6))
        grid = fo.TimeGrid(float(rng.uniform(0.5, 2.0)), n)
        z = fo.SampledPath(grid, rng.normal(size=(n + 1, d)))
        w = rng.normal(size=(n + 1, d))
        lhs = sum(z.values[i] @ (w[i] - w[i - 1]) for i in range(1, n + 1))
        dz = fo.delta_path(z).values
        rhs = z.values[n] @ w[n] - z.values[0] @ w[0] - sum(dz[i] @ w[i - 1] for i in range(1, n + 1)) * grid.tau
        scale = sum(abs(z.values[i] @ (w[i] - w[i - 1])) for i in range(1, n + 1)) + abs(rhs)
        worst = max(worst, abs(lhs - rhs) / max(scale, 1e-300))
    checks.append(_check("fracops.summation_by_parts", worst, 1e-12, "relative, 200 trials"))

    worst_pd = math.inf
    worst_coercive = math.inf
    for _ in range(200):
        gamma = float(rng.uniform(0.05, 0.95))
        n = int(rng.integers(2, 60))
        grid = fo.TimeGrid(float(rng.uniform(0.5, 2.0)), n)
        kernel = fo.rl_kernel_samples(gamma, grid)
        z = _random_path(rng, grid)
        conv = _conv_all(kernel, z)
        zi = z.values[1:]
        quad = np.cumsum(conv[1:] * zi) * grid.tau
        worst_pd = min(worst_pd, float(np.min(quad / np.maximum(1.0, np.cumsum(np.abs(conv[1:] * zi)) * grid.tau))))
        lhs = np.cumsum(np.diff(conv) / grid.tau * zi) * grid.tau
        rhs = fo.rl_kernel(gamma, grid.final_time) / 2.0 * np.cumsum(zi**2) * grid.tau
        worst_coercive = min(worst_coercive, float(np.min(lhs - rhs)))
    checks.append(_check("fracops.positive_definite", -worst_pd, 1e-12, "200 trials"))
    checks.append(_check("fracops.coercivity", -worst_coercive, 1e-10, "200 trials"))

    errors = []
    for n in (32, 64, 128, 256):
        grid = fo.TimeGrid(1.0, n)
        z = fo.SampledPath.from_function(grid, lambda t: np.cos(t) + t**2)
        a_part, b_part = 0.3, 0.45
        nested = fo.frac_integral(a_part, fo.frac_integral(b_part, z)).values
        direct = fo.frac_integral(a_part + b_part, z).values
        errors.append(float(np.max(np.abs(nested - direct))))
    growth = max(b / a for a, b in zip(errors, errors[1:]))
    checks.append(_check("fracops.semigroup", growth, 1.0 - 1e-12, "largest error ratio under doubling"))
    return checks


# mittag ---------------------------------------------------------------------


def suite_mittag(rng, fault: str | None = None) -> list[Check]:
    checks = []
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 4))
        alphas = tuple(float(a) for a in rng.choice(np.linspace(1.0, 1.95, 20), size=m, replace=False))
        beta = float(rng.uniform(1e-3, 3.0))
        zs = tuple(float(z) for z in rng.uniform(-10.0, 0.0, m) - 1e-12)
        query = MLQuery(alphas, beta, zs)
        base = mml_evaluate(query)
        shifted = [mml_evaluate(query.with_beta(beta + a)) for a in alphas]
        residual = abs(sum(z * e.value for z, e in zip(zs, shifted)) + 1.0 / math.gamma(beta) - base.value)
        worst = max(worst, residual)
    checks.append(_check("mittag.recurrence", worst, 1e-9, "absolute, 100 queries, alphas in [1, 2)"))

    z1 = -(10.0 ** np.linspace(0.0, 4.0, 9))
    for beta in (1.0, 2.0):
        sweep = bound_sweep((1.5, 1.0, 0.5), beta, (-1.0, -0.5), z1)
        checks.append(_check(f"mittag.boundedness_beta_{beta:g}", sweep.spread, 100.0, "max/min of |E|(1+|z1|)"))
        flag = sweep.nonincreasing_beyond(100.0, 0.05)
        checks.append(Check(f"mittag.decay_beta_{beta:g}", flag, 0.0 if flag else 1.0, 0.0, "|z1| >= 100, 5% ripple"))

    worst_ratio = 0.0
    for _ in range(500):
        m = int(rng.integers(1, 4))
        alphas = np.sort(rng.uniform(0.1, 2.0, m))[::-1]
        beta = float(rng.uniform(0.1, 3.0))
        ks = rng.integers(0, 51, m)
        while ks.sum() > 50:
            ks[int(np.argmax(ks))] -= 1
        lhs, rhs = gamma_ratio_bound(beta, alphas, ks)
        worst_ratio = max(worst_ratio, lhs / rhs)
    checks.append(_check("mittag.gamma_ratio_bound", worst_ratio, 1.0, "largest lhs/rhs, 500 draws"))

    smallest = math.inf
    for _ in range(200):
        alpha = float(rng.uniform(0.3, 2.0))
        beta = float(rng.uniform(0.1, 3.0))
        z = float(rng.uniform(0.0, 2.0))
        smallest = min(smallest, ml2(alpha, beta, z))
    checks.append(Check("mittag.ml2_positive", smallest > 0, smallest, 0.0, "minimum value for z >= 0"))
    return checks


# spectral -------------------------------------------------------------------


def _bump(x):
    return 16.0 * x**2 * (1.0 - x) ** 2


def suite_spectral(rng, fault: str | None = None) -> list[Check]:
    checks = []
    p = REFERENCE
    sigma = math.pi**2 + p.a
    c = math.sqrt(2.0) / 2.0
    peaks = []
    for n in (64, 128, 256, 512):
        grid = fo.TimeGrid(1.0, n)
        res = mode_residual(sigma, c, 0.0, p, grid)
        window = grid.nodes >= 0.25
        peaks.append(float(np.max(np.abs(res.values[window]))))
    growth = max(b / a for a, b in zip(peaks, peaks[1:]))
    checks.append(_check("spectral.mode_residual", growth, 1.0 - 1e-12, "largest ratio under doubling, t >= T/4"))

    x = np.linspace(0.0, 1.0, 17)
    t = np.linspace(0.0, 1.0, 9)
    config = SpectralConfig(1.0, 1.0, p, 1)
    sol = spectral_solve(config, lambda s: np.sin(np.pi * s), np.zeros_like, x, t, workers=1)
    expected = np.outer(t_factor_1(t, sigma, p), eigenfunction(1, 1.0, x)) * sol.model.c[0]
    checks.append(_check("spectral.single_mode_factorizes", float(np.max(np.abs(sol.u - expected))), 1e-12))

    modes = 6
    config = SpectralConfig(1.0, 1.0, p, modes)
    t = np.linspace(0.0, 1.0, 17)
    sol = spectral_solve(config, _bump, lambda s: np.sin(np.pi * s), x, t, workers=1)
    model = sol.model
    sup = np.zeros(4)
    for i in model.active_modes():
        s = float(model.sigma[i])
        sup[0] = max(sup[0], np.max(np.abs(t_factor_1(t, s, p))))
        sup[1] = max(sup[1], np.max(np.abs(t_factor_2(t, s, p))))
        sup[2] = max(sup[2], np.max(np.abs(dt_factor_1(t[1:], s, p))) / math.sqrt(s))
        sup[3] = max(sup[3], np.max(np.abs(dt_factor_2(t, s, p))))
    u0_sq = float(np.sum(model.c**2))
    energy_u0 = float(np.sum(model.sigma * model.c**2))
    v0_sq = float(np.sum(model.d**2))
    bound = 2 * (sup[0] ** 2 * u0_sq + sup[1] ** 2 * v0_sq) + 2 * (sup[2] ** 2 * energy_u0 + sup[3] ** 2 * v0_sq)
    observed = float(np.max(sol.u_norm**2) + np.max(sol.dtu_norm[1:] ** 2))
    checks.append(_check("spectral.energy_bound", observed / bound, 1.0, f"bound {bound:.6g}"))

    t = np.linspace(0.0, 1.0, 9)
    previous = None
    changes = []
    for n_modes in (5, 10, 20):
        config = SpectralConfig(1.0, 1.0, p, n_modes)
        u = spectral_solve(config, _bump, np.zeros_like, x, t, workers=1, with_derivative=False).u
        if previous is not None:
            changes.append(float(np.max(np.abs(u - previous))))
        previous = u
    checks.append(_check("spectral.truncation", changes[1] / changes[0], 1.0 - 1e-12, "change 10->20 over 5->10"))
    return checks


# rothe ----------------------------------------------------------------------


def suite_rothe(rng, fault: str | None = None) -> list[Check]:
    checks = []
    p = REFERENCE
    k = rng.uniform(0.5, 2.0, 16)
    mesh = Mesh1D(1.0, 16, k)
    system = assemble(mesh, p.a)
    matrix = step_matrix(system, p, 1.0 / 32).dense()
    asym = float(np.max(np.abs(matrix - matrix.T)))
    lam_min = float(np.linalg.eigvalsh(matrix).min())
    checks.append(_check("rothe.step_matrix_spd", asym - min(lam_min, 0.0), 0.0, f"min eigenvalue {lam_min:.3e}"))

    run = run_solver(p, mesh, fo.TimeGrid(1.0, 32), _bump, lambda s: np.sin(np.pi * s), lambda x, t: x * np.exp(-t))
    mon = run.monitors
    checks.append(_check("rothe.step_residual", float(mon.residual.max()), 1e-10, "variable conductivity"))
    checks.append(Check("rothe.young_chain", bool(mon.young_ok.all()), float(np.max(run.ledger.dy_sum[1:] - mon.young_bound[1:])), 0.0))
    gap = float(np.max(mon.energy_rhs[1:] - mon.energy_lhs[1:]))
    checks.append(Check("rothe.energy_building_block", bool(mon.energy_ok.all()), gap, 0.0, "max of rhs - lhs"))

    terminals = []
    for n in (16, 32, 64, 128, 256):
        run = run_solver(p, Mesh1D(1.0, 32, 1.0), fo.TimeGrid(1.0, n), lambda s: np.sin(np.pi * s), 0.0)
        terminals.append(run.ledger.terminal())
    for name in ("conv_energy", "kinetic", "h1_norm", "increment"):
        values = np.array([row[name] for row in terminals])
        growth = float(values.max() / values[0])
        spread = float(values.max() / values.min()) if values.min() > 0 else math.inf
        checks.append(_check(f"rothe.stability_{name}", growth, 10.0, f"max/coarsest, max/min {spread:.3g}"))
    return checks


SUITES = {
    "fracops": suite_fracops,
    "mittag": suite_mittag,
    "spectral": suite_spectral,
    "rothe": suite_rothe,
}


def run_suites(selector: str, seed: int = 0, fault: str | None = None) -> list[Check]:
    """Run one suite or ``"all"`` with a seeded generator."""
    if selector != "all" and selector not in SUITES:
        raise KeyError(selector)
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    names = list(SUITES) if selector == "all" else [selector]
    rng = np.random.default_rng(seed)
    checks = []
    for name in names:
        checks.extend(SUITES[name](rng, fault))
    return checks


def format_tap(checks: list[Check]) -> list[str]:
    lines = ["TAP version 13", f"1..{len(checks)}"]
    for i, c in enumerate(checks, 1):
        status = "ok" if c.ok else "not ok"
        extra = f" ({c.detail})" if c.detail else ""
        lines.append(f"{status} {i} - {c.name} residual={c.residual:.6e} limit={c.limit:.1e}{extra}")
    return lines
