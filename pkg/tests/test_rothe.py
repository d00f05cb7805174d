import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracspl.fracops import TimeGrid, rl_kernel
from fracspl.params import ModelParams
from fracspl.rothe import (
    EstimateLedger,
    HistoryError,
    Mesh1D,
    RotheRun,
    SymTridiag,
    assemble,
    gradient_gap_closed_form,
    rothe_interpolants,
    run_solver,
    step_matrix,
    step_rhs,
)

UNIT = ModelParams(0.5, 1.0)


def sine(x):
    return np.sin(np.pi * x)


def bump(x):
    return 16 * x**2 * (1 - x) ** 2


# assembly ------------------------------------------------------------------


def test_two_element_hand_assembly():
    sys = assemble(Mesh1D(1.0, 2, 1.0))
    assert sys.dimension == 1
    assert sys.stiffness.dense() == pytest.approx(np.array([[4.0]]), rel=1e-15)
    assert sys.mass.dense() == pytest.approx(np.array([[1 / 3]]), rel=1e-15)


@pytest.mark.parametrize("k", [0.0, -1.0, [1.0, 0.0]])
def test_nonelliptic_conductivity_rejected(k):
    with pytest.raises(ValueError):
        Mesh1D(1.0, 2, k)


@pytest.mark.parametrize("bad", [dict(L=0.0, element_count=4), dict(L=1.0, element_count=1), dict(L=1.0, element_count=2.5)])
def test_mesh_validation(bad):
    with pytest.raises(ValueError):
        Mesh1D(**bad)


def test_negative_reaction_rejected():
    with pytest.raises(ValueError):
        assemble(Mesh1D(1.0, 4), a=-1.0)


def test_boundary_flux_pattern():
    h = 1 / 3
    flux = assemble(Mesh1D(1.0, 3, 1.0)).stiffness @ np.ones(2)
    assert flux == pytest.approx([1 / h, 1 / h], rel=1e-14)
    flux = assemble(Mesh1D(1.0, 4, 1.0)).stiffness @ np.ones(3)
    assert flux[0] == pytest.approx(4.0) and flux[-1] == pytest.approx(4.0)
    assert flux[1] == 0.0


def test_full_stiffness_annihilates_constants():
    sys = assemble(Mesh1D(2.0, 5, [1.0, 2.0, 3.0, 2.0, 1.0]))
    assert np.abs(sys.full_stiffness @ np.ones(6)).max() < 1e-13


def test_variable_conductivity_rows():
    k = np.array([1.0, 3.0, 2.0])
    sys = assemble(Mesh1D(3.0, 3, k))
    assert sys.stiffness.dense() == pytest.approx(np.array([[4.0, -3.0], [-3.0, 5.0]]), rel=1e-15)


def test_mass_reproduces_integral_of_product():
    sys = assemble(Mesh1D(1.0, 8))
    ones = np.ones(9)
    assert ones @ (sys.full_mass @ ones) == pytest.approx(1.0, rel=1e-14)


@settings(max_examples=30)
@given(st.lists(st.floats(0.1, 10.0), min_size=2, max_size=12), st.floats(0.0, 5.0))
def test_matrices_symmetric_and_definite(k, a):
    sys = assemble(Mesh1D(1.0, len(k), k), a)
    for mat in (sys.mass, sys.stiffness, sys.elliptic):
        dense = mat.dense()
        assert np.array_equal(dense, dense.T)
        assert np.linalg.eigvalsh(dense).min() > 0


# step matrix -----------------------------------------------------------------


def test_step_matrix_coefficient():
    sys = assemble(Mesh1D(1.0, 2))
    mat = step_matrix(sys, ModelParams(0.5, 1.0, a=0.0), 1.0)
    coeff = 1 / math.sqrt(math.pi) + 1
    assert mat.dense()[0, 0] == pytest.approx(coeff / 3 + 4, rel=1e-15)


def test_step_matrix_formula_with_reaction():
    sys = assemble(Mesh1D(1.0, 6, 2.0), a=0.7)
    p = ModelParams(0.3, 1.7, rho=2.0, c=0.5, a=0.7)
    tau = 0.05
    g = rl_kernel(0.3, tau)
    coeff = p.rho_c * p.tau_q_alpha / tau * g + p.a * p.tau_q_alpha * g + p.rho_c / tau
    expected = coeff * sys.mass.dense() + sys.stiffness.dense() + 0.7 * sys.mass.dense()
    assert step_matrix(sys, p, tau).dense() == pytest.approx(expected, rel=1e-14)


def test_step_matrix_rejects_nonpositive_tau():
    sys = assemble(Mesh1D(1.0, 2))
    with pytest.raises(ValueError):
        step_matrix(sys, UNIT, 0.0)


@settings(max_examples=30)
@given(st.floats(0.05, 0.95), st.floats(1e-3, 1e3), st.floats(0.0, 3.0))
def test_step_matrix_symmetric_positive_definite(alpha, tau, a):
    p = ModelParams(alpha, 1.0, a=a)
    dense = step_matrix(assemble(Mesh1D(1.0, 6, 1.0), a), p, tau).dense()
    assert np.array_equal(dense, dense.T)
    assert np.linalg.eigvalsh(dense).min() > 0


def test_symtridiag_validation_and_cholesky():
    with pytest.raises(ValueError):
        SymTridiag(np.ones(3), np.ones(3))
    mat = SymTridiag(np.array([2.0, 2.0, 2.0]), np.array([-1.0, -1.0]))
    x = np.array([1.0, -2.0, 0.5])
    assert mat @ x == pytest.approx(mat.dense() @ x, rel=1e-15)
    assert mat.quad(x) == pytest.approx(x @ mat.dense() @ x, rel=1e-15)


# right-hand side and solve -----------------------------------------------------


def _fresh_run(params, mesh, grid, U0, V0):
    """A run whose history holds only the initial data."""
    run = run_solver(params, mesh, grid, U0, V0)
    run.u[1:] = 0.0
    run.du[1:] = 0.0
    run.completed = 0
    return run


def test_rhs_zero_data_is_zero():
    run = run_solver(UNIT, Mesh1D(1.0, 8), TimeGrid(1.0, 6), 0.0, 0.0)
    for i in range(1, 7):
        assert np.all(step_rhs(run, i) == 0.0)


def test_rhs_first_step_only_velocity_term():
    p = ModelParams(0.5, 1.3, rho=2.0, c=1.5, a=0.4)
    mesh = Mesh1D(1.0, 6)
    grid = TimeGrid(1.0, 10)
    run = _fresh_run(p, mesh, grid, 0.0, sine)
    v = sine(mesh.interior)
    expected = run.system.mass @ (p.rho_c * p.tau_q_alpha * rl_kernel(0.5, grid.tau) * v)
    assert step_rhs(run, 1) == pytest.approx(expected, rel=1e-14)


def test_rhs_history_errors():
    run = _fresh_run(UNIT, Mesh1D(1.0, 4), TimeGrid(1.0, 4), sine, 0.0)
    with pytest.raises(HistoryError):
        step_rhs(run, 3)
    with pytest.raises(IndexError):
        step_rhs(run, 0)
    with pytest.raises(IndexError):
        step_rhs(run, 5)


def test_zero_data_zero_trajectory():
    run = run_solver(UNIT, Mesh1D(1.0, 10), TimeGrid(1.0, 12), 0.0, 0.0)
    assert np.all(run.u == 0.0) and np.all(run.du == 0.0)
    for name in EstimateLedger.FIELDS:
        assert np.all(getattr(run.ledger, name) == 0.0)


def test_single_interior_node_single_step():
    u0, v0 = 0.0, 0.8
    run = run_solver(ModelParams(0.5, 1.0), Mesh1D(1.0, 2), TimeGrid(1.0, 1), 0.0, v0)
    g = 1 / math.sqrt(math.pi)
    a_mat = (g + 1) / 3 + 4
    rhs = (g * (u0 + v0) + u0) / 3
    assert run.u[1, 0] == pytest.approx(rhs / a_mat, rel=1e-15)


def test_single_interior_node_with_displacement():
    u0, v0 = 0.5, -0.2
    run = run_solver(ModelParams(0.5, 1.0), Mesh1D(1.0, 2), TimeGrid(1.0, 1), [0.0, u0, 0.0], v0)
    g = 1 / math.sqrt(math.pi)
    rhs = (g * (u0 + v0) + u0) / 3
    assert run.u[1, 0] == pytest.approx(rhs / ((g + 1) / 3 + 4), rel=1e-15)


def test_initial_data_by_interpolation():
    mesh = Mesh1D(1.0, 8)
    run = run_solver(UNIT, mesh, TimeGrid(1.0, 3), sine, bump)
    assert np.array_equal(run.u[0], sine(mesh.interior))
    assert np.array_equal(run.du[0], bump(mesh.interior))
    assert np.all(run.full_u()[:, [0, -1]] == 0.0)


def test_nonzero_boundary_displacement_rejected():
    with pytest.raises(ValueError):
        run_solver(UNIT, Mesh1D(1.0, 4), TimeGrid(1.0, 2), 1.0, 0.0)


@pytest.mark.parametrize(
    "params, k, F",
    [
        (ModelParams(0.5, 1.0, a=1.0), 1.0, None),
        (ModelParams(0.3, 2.0, rho=1.5, c=0.7, a=0.0), [1.0, 2.0, 4.0, 2.0, 1.0, 3.0, 1.0, 2.0], None),
        (ModelParams(0.8, 0.4, a=2.0), 1.0, lambda x, t: np.cos(t) * x * (1 - x)),
    ],
)
def test_step_residual_below_tolerance(params, k, F):
    run = run_solver(params, Mesh1D(1.0, 8, k), TimeGrid(1.0, 40), sine, bump, F)
    assert run.monitors.residual[1:].max() < 1e-10


def test_difference_quotients_consistent():
    run = run_solver(UNIT, Mesh1D(1.0, 8), TimeGrid(1.0, 20), sine, bump)
    assert run.du[1:] == pytest.approx(np.diff(run.u, axis=0) / run.tau, rel=1e-14, abs=1e-14)


def test_array_source_matches_callable():
    mesh = Mesh1D(1.0, 6)
    grid = TimeGrid(1.0, 5)
    F = lambda x, t: np.sin(3 * t) + x
    table = F(mesh.nodes[None, :], grid.nodes[:, None])
    a = run_solver(UNIT, mesh, grid, sine, 0.0, F)
    b = run_solver(UNIT, mesh, grid, sine, 0.0, table)
    assert np.array_equal(a.u, b.u)


# ledger and monitors -------------------------------------------------------------


@pytest.fixture(scope="module")
def reference_run():
    return run_solver(ModelParams(0.5, 0.5, a=1.0), Mesh1D(1.0, 32), TimeGrid(1.0, 64), sine, bump)


def test_ledger_nonnegative(reference_run):
    for name in EstimateLedger.FIELDS:
        assert np.all(getattr(reference_run.ledger, name) >= 0.0)


def test_ledger_cumulative_fields_nondecreasing(reference_run):
    led = reference_run.ledger
    for values in (led.kinetic, led.increment, led.dy_sum, led.dual_sum):
        assert np.all(np.diff(values) >= 0)


def test_young_chain_holds(reference_run):
    assert reference_run.monitors.young_ok.all()


def test_energy_building_block_holds(reference_run):
    assert reference_run.monitors.energy_ok.all()


def test_ledger_rows(reference_run):
    rows = list(reference_run.ledger.rows())
    assert len(rows) == 64 and rows[0][0] == 1 and len(rows[0]) == 7
    assert reference_run.ledger.terminal()["kinetic"] == rows[-1][2]


def test_energy_monitors_with_variable_conductivity():
    k = np.linspace(0.5, 3.0, 16)
    run = run_solver(ModelParams(0.5, 0.5, a=0.5), Mesh1D(1.0, 16, k), TimeGrid(1.0, 32), sine, bump)
    assert run.monitors.energy_ok.all() and run.monitors.young_ok.all()


# interpolants ----------------------------------------------------------------


def test_interpolants_at_zero(reference_run):
    v, vbar, wbar = rothe_interpolants(reference_run, 0.0)
    assert np.array_equal(v, reference_run.u[0]) and np.array_equal(vbar, reference_run.u[0])
    assert np.array_equal(wbar, reference_run.du[0])


@pytest.mark.parametrize("i", [1, 17, 64])
def test_interpolants_at_nodes(reference_run, i):
    t = reference_run.grid.nodes[i]
    v, vbar, wbar = rothe_interpolants(reference_run, t)
    assert v == pytest.approx(reference_run.u[i], rel=1e-12, abs=1e-15)
    assert np.array_equal(vbar, reference_run.u[i])
    assert np.array_equal(wbar, reference_run.du[i])


@pytest.mark.parametrize("i", [1, 30, 64])
def test_interpolants_at_midpoints(reference_run, i):
    t = reference_run.grid.nodes[i] - reference_run.tau / 2
    v, vbar, _ = rothe_interpolants(reference_run, t)
    assert v == pytest.approx((reference_run.u[i - 1] + reference_run.u[i]) / 2, rel=1e-12, abs=1e-15)
    assert np.array_equal(vbar, reference_run.u[i])


def test_interpolants_domain(reference_run):
    with pytest.raises(ValueError):
        rothe_interpolants(reference_run, -0.1)
    with pytest.raises(ValueError):
        rothe_interpolants(reference_run, 1.01)


def test_gradient_gap_closed_form_matches_quadrature(reference_run):
    run = reference_run
    nodes, weights = np.polynomial.legendre.leggauss(3)
    total = 0.0
    for i in range(1, run.grid.steps + 1):
        a, b = run.grid.nodes[i - 1], run.grid.nodes[i]
        for s, w in zip(nodes, weights):
            t = (a + b) / 2 + (b - a) / 2 * s
            v, vbar, _ = rothe_interpolants(run, t)
            total += w * (b - a) / 2 * run.system.grad_sq(v - vbar)
    assert total == pytest.approx(gradient_gap_closed_form(run), rel=1e-12)


def test_run_is_a_rothe_run(reference_run):
    assert isinstance(reference_run, RotheRun)
    assert reference_run.completed == 64
