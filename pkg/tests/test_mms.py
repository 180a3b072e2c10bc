"""Manufactured solutions: forcing correctness, CN stepping, error norms."""

import numpy as np
import pytest
from scipy.linalg import expm

from epsflow.mms import CrankNicolson, ManufacturedCase, error_norms


def fd_forcing(case, x, y, t, h=1e-4):
    """Finite-difference oracle for the analytic forcing."""
    dt_term = (case.exact(x, y, t + h) - case.exact(x, y, t - h)) / (2 * h)
    lap = (case.exact(x + h, y, t) + case.exact(x - h, y, t)
           + case.exact(x, y + h, t) + case.exact(x, y - h, t)
           - 4.0 * case.exact(x, y, t)) / h**2
    cx = (case.exact(x + h, y, t) - case.exact(x - h, y, t)) / (2 * h)
    cy = (case.exact(x, y + h, t) - case.exact(x, y - h, t)) / (2 * h)
    if case.velocity == "constant":
        adv = case.u * (cx + cy)
    elif case.velocity == "poly_cubic":
        a = case.amplitude
        adv = a * ((3 * x**2 + 3 * y**2) * case.exact(x, y, t)
                   + x**3 * cx + y**3 * cy)
    else:
        adv = 0.0
    return dt_term - case.diffusivity * lap - adv


def test_exact_peak_value():
    case = ManufacturedCase(sigma=0.1)
    assert case.exact(0.0, 0.0, 0.0) == pytest.approx(1.0, rel=1e-15)


def test_exact_envelope_algebra():
    case = ManufacturedCase(sigma=0.1, center1=(0.0, 0.0), center2=(0.3, 0.1))
    t = np.pi / 2
    val = case.exact(0.3, 0.1, t)
    cos_term = np.cos(t) * np.exp(-(0.3**2 + 0.1**2) / 0.02)
    assert val == pytest.approx(1.0 + cos_term, rel=1e-12)


def test_exact_gradient_vanishes_at_peak():
    case = ManufacturedCase(sigma=0.1)
    h = 1e-4
    g = (case.exact(h, 0.0, 0.3) - case.exact(-h, 0.0, 0.3)) / (2 * h)
    assert abs(g) < 1e-6


def test_zero_solution_gives_zero_forcing():
    # degenerate case: wipe both envelopes by evaluating far away
    case = ManufacturedCase(sigma=0.01)
    assert case.forcing(50.0, 50.0, 0.2) == pytest.approx(0.0, abs=1e-300)


@pytest.mark.parametrize("velocity,kw", [
    ("constant", dict(u=1.0)),
    ("poly_cubic", dict(amplitude=1.0)),
])
def test_forcing_matches_finite_differences(velocity, kw):
    case = ManufacturedCase(sigma=0.1, diffusivity=0.7, velocity=velocity, **kw)
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y = rng.uniform(-0.5, 0.5, 2)
        t = rng.uniform(0.0, 1.0)
        assert case.forcing(x, y, t) == pytest.approx(
            fd_forcing(case, x, y, t), abs=2e-6, rel=2e-6)


def test_forcing_includes_divergence_term():
    case = ManufacturedCase(sigma=0.2, velocity="poly_cubic", amplitude=2.0,
                            diffusivity=0.0)
    x, y, t = 0.21, -0.13, 0.4
    c = case.exact(x, y, t)
    cx, cy = case.exact_grad(x, y, t)
    expected = case.exact_dt(x, y, t) - 2.0 * (
        (3 * x**2 + 3 * y**2) * c + x**3 * cx + y**3 * cy)
    assert case.forcing(x, y, t) == pytest.approx(expected, rel=1e-13)


def test_cn_no_forcing_no_operator_is_identity():
    import scipy.sparse as sp
    cn = CrankNicolson(sp.csr_matrix((5, 5)), dt=0.1)
    c = np.arange(5.0)
    assert cn.step(c, 0.0) == pytest.approx(c, abs=1e-15)


def test_cn_scalar_amplification():
    lam = -3.0
    dt = 0.01
    cn = CrankNicolson(np.array([[lam]]), dt=dt)
    c = np.array([1.0])
    out = cn.step(c, 0.0)
    assert out[0] == pytest.approx((1 + dt * lam / 2) / (1 - dt * lam / 2), rel=1e-14)


def test_cn_local_order_three():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((4, 4))
    c0 = rng.standard_normal(4)
    errs = []
    dts = [0.02, 0.01, 0.005]
    for dt in dts:
        cn = CrankNicolson(A, dt=dt)
        exact = expm(dt * A) @ c0
        errs.append(np.linalg.norm(cn.step(c0, 0.0) - exact))
    slopes = np.diff(np.log(errs)) / np.diff(np.log(dts))
    assert slopes[-1] == pytest.approx(3.0, abs=0.2)


def test_error_norms_trivial_and_hand_case():
    same = np.array([1.0, 2.0, 3.0])
    assert error_norms(same, same) == (0.0, 0.0, 0.0)
    ref = np.ones(4)
    num = np.array([1.0, 1.0, 1.0, 2.0])
    e1, e2, einf = error_norms(num, ref)
    assert e1 == pytest.approx(0.25)
    assert e2 == pytest.approx(0.5)
    assert einf == pytest.approx(1.0)


def test_error_norms_rejects_zero_reference():
    with pytest.raises(ValueError):
        error_norms(np.ones(3), np.zeros(3))
    with pytest.raises(ValueError):
        error_norms(np.ones(3), np.ones(4))
