"""Step operators: scalar reductions, truncated-exponential identity,
constraint-row invariance, and self-convergence of the three orders."""

import numpy as np
import pytest
import scipy.sparse as sp

from epsflow.geometry import build_grid, circle_domain, no_obstacle
from epsflow.integrator import Integrator, assemble_step_matrix, evolve, product_coefficients
from epsflow.operators import poly_cubic_velocity, radial_velocity
from epsflow.system import build_system
from epsflow.timefactor import ConstantFactor, CosineFactor


def test_zero_operators_give_identity():
    g = ConstantFactor()
    si = g.integrals(0.0, 0.1)
    n = 6
    L = sp.csr_matrix((n, n))
    for order in (1, 2, 3):
        A = assemble_step_matrix(order, L, None, si)
        assert abs(A - sp.identity(n)).max() < 1e-15


def test_scalar_backward_euler():
    g = ConstantFactor()
    si = g.integrals(0.0, 0.1)
    lam = -2.7
    A = assemble_step_matrix(1, np.array([[lam]]), None, si)
    assert A[0, 0] == pytest.approx(1.0 - 0.1 * lam, rel=1e-15)


def test_scalar_order3_value():
    # L = Q = -1, g = 1, dt = 0.1: the degree-3 truncation of exp(0.2)
    g = ConstantFactor()
    si = g.integrals(0.0, 0.1)
    L = np.array([[-1.0]])
    Q = np.array([[-1.0]])
    A = assemble_step_matrix(3, L, Q, si)
    expected = 1.0 + 0.2 + 0.5 * 0.04 + (0.2**3) / 6.0
    assert A[0, 0] == pytest.approx(expected, rel=1e-14)
    c1 = 1.0 / A[0, 0]
    assert c1 == pytest.approx(1.0 / 1.2213333333333333, rel=1e-12)


def test_truncated_exponential_identity_commuting():
    rng = np.random.default_rng(7)
    g = ConstantFactor()
    dt = 0.05
    si = g.integrals(0.0, dt)
    for _ in range(5):
        S = rng.standard_normal((5, 5))
        S = S + S.T
        evals, vecs = np.linalg.eigh(S)
        # commuting pair: polynomials in the same symmetric matrix
        L = 0.3 * S + 0.1 * S @ S
        Q = -0.2 * S + 0.05 * S @ S
        A = assemble_step_matrix(3, L, Q, si)
        for k in range(5):
            v = vecs[:, k]
            lam = (0.3 * evals[k] + 0.1 * evals[k] ** 2
                   - 0.2 * evals[k] + 0.05 * evals[k] ** 2)
            expected = 1.0 - dt * lam + 0.5 * (dt * lam) ** 2 - (dt * lam) ** 3 / 6.0
            assert A @ v == pytest.approx(expected * v, abs=1e-12)


def test_product_coefficients_constant_match_exponential():
    g = ConstantFactor()
    dt = 0.2
    si = g.integrals(0.0, dt)
    coeff = product_coefficients(3, si)
    assert coeff["LQ"] == pytest.approx(dt**2 / 2)
    assert coeff["QL"] == pytest.approx(dt**2 / 2)
    for key in ("LLL", "LLQ", "LQL", "LQQ", "QLL", "QLQ", "QQL", "QQQ"):
        assert coeff[key] == pytest.approx(-dt**3 / 6)


def square_diffusion_system(n=24, d=1.0):
    grid = build_grid(n, -1.0, 1.0)
    return build_system(grid, no_obstacle(), d, velocity=None, wall_bc="dirichlet0",
                        interface_bc="dirichlet0")


def test_constraint_rows_identical_across_orders():
    sys_ = square_diffusion_system()
    g = ConstantFactor()
    rows = sys_.constraint_rows
    mats = []
    for order in (1, 2, 3):
        integ = Integrator(sys_, order, g, dt=1e-2)
        A = integ.assemble(integ.integrals(0))
        mats.append(A[rows, :])
    assert abs(mats[0] - mats[1]).max() == 0.0
    assert abs(mats[1] - mats[2]).max() == 0.0


def test_identity_mass_step_keeps_field():
    sys_ = square_diffusion_system()
    # replace L by zero: A = I up to constraint rows, so the field persists
    sys_.L = sp.csr_matrix(sys_.L.shape)
    g = ConstantFactor()
    c0 = sys_.initial_field(lambda x, y: np.exp(-(x**2 + y**2)))
    c0[sys_.constraint_rows] = 0.0
    c1 = evolve(sys_, 3, g, dt=0.1, n_steps=3, c0=c0)
    assert c1 == pytest.approx(c0, abs=1e-13)


def test_pure_diffusion_is_dissipative():
    sys_ = square_diffusion_system(n=40)
    g = ConstantFactor()
    c0 = sys_.initial_field(lambda x, y: np.exp(-(x**2 + y**2) / (2 * 0.1**2)))
    norms = []
    integ = Integrator(sys_, 3, g, dt=1e-3, check_residual=True)
    c = c0
    for k in range(5):
        norms.append(np.linalg.norm(c))
        c = integ.step(c, k)
    norms.append(np.linalg.norm(c))
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_evolve_zero_steps_returns_initial():
    sys_ = square_diffusion_system(n=12)
    c0 = sys_.initial_field(lambda x, y: x + y)
    out = evolve(sys_, 2, ConstantFactor(), dt=0.1, n_steps=0, c0=c0)
    assert np.array_equal(out, c0)
    assert out is not c0


def relative_l2(a, b, rows):
    return np.linalg.norm((a - b)[rows]) / np.linalg.norm(b[rows])


@pytest.mark.parametrize("order,expected", [(1, 1.0), (2, 2.0), (3, 3.0)])
def test_orderwise_self_convergence_square(order, expected):
    grid = build_grid(20, -1.0, 1.0)
    sys_ = build_system(grid, no_obstacle(), 0.02,
                        velocity=poly_cubic_velocity(1.0), wall_bc="dirichlet0")
    eps = 1e-3
    g = CosineFactor(eps)
    c0 = sys_.initial_field(lambda x, y: np.exp(-(x**2 + y**2) / (2 * 0.1**2)))
    t_fin = 0.1
    ref = evolve(sys_, order, g, dt=1e-4, n_steps=1000, c0=c0)
    rows = sys_.fluid_rows()
    errs = []
    dts = [1e-2, 5e-3, 2.5e-3]
    for dt in dts:
        sol = evolve(sys_, order, g, dt=dt, n_steps=round(t_fin / dt), c0=c0)
        errs.append(relative_l2(sol, ref, rows))
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert slope == pytest.approx(expected, abs=0.4)


def test_epsilon_uniformity_order3_coarse():
    grid = build_grid(20, -1.0, 1.0)
    sys_ = build_system(grid, no_obstacle(), 0.02,
                        velocity=poly_cubic_velocity(1.0), wall_bc="dirichlet0")
    c0 = sys_.initial_field(lambda x, y: np.exp(-(x**2 + y**2) / (2 * 0.1**2)))
    rows = sys_.fluid_rows()
    errs = []
    for eps in (1e-2, 1e-4, 1e-6):
        g = CosineFactor(eps)
        ref = evolve(sys_, 3, g, dt=1e-4, n_steps=1000, c0=c0)
        sol = evolve(sys_, 3, g, dt=5e-3, n_steps=20, c0=c0)
        errs.append(relative_l2(sol, ref, rows))
    errs = np.array(errs)
    assert errs.max() / errs.min() <= 1.10


def test_robin_bubble_system_steps_stably():
    grid = build_grid(40, -1.0, 1.0)
    sys_ = build_system(grid, circle_domain(0.2), 0.01,
                        velocity=radial_velocity(1.0, 0.0), wall_bc="neumann",
                        interface_bc="robin", adsorption_length=0.03)
    g = CosineFactor(1e-2)
    c0 = sys_.initial_field(
        lambda x, y: np.exp(-((x - 0.35)**2 + (y - 0.35)**2) / (2 * 0.1**2)))
    integ = Integrator(sys_, 3, g, dt=1e-3, check_residual=True)
    c = c0
    for k in range(5):
        c = integ.step(c, k)
    assert np.all(np.isfinite(c))
    assert np.max(np.abs(c)) < 2.0


def test_rejects_bad_order_and_dt():
    sys_ = square_diffusion_system(n=12)
    with pytest.raises(ValueError):
        Integrator(sys_, 4, ConstantFactor(), dt=0.1)
    with pytest.raises(ValueError):
        Integrator(sys_, 2, ConstantFactor(), dt=0.0)
