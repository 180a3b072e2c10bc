"""Closed-form step integrals against the quadrature oracle and identities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from epsflow.timefactor import (
    INTEGRAL_NAMES,
    ConstantFactor,
    CosineFactor,
    integrals_for_step,
    quadrature_oracle,
)

EPS_GRID = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]


def fields(si):
    return {name: getattr(si, name) for name in
            ("m0", "w10", "w01", "w20", "w11", "w02",
             "dQQ", "tLQQ", "tQLQ", "tQQL", "tQQQ")}


def test_constant_polynomial_values():
    g = ConstantFactor()
    si = integrals_for_step(g, 0.3, 0.4)
    dt = 0.1
    assert si.m0 == pytest.approx(dt, abs=1e-16)
    assert si.w10 == pytest.approx(0.005, abs=1e-17)
    assert si.tQQQ == pytest.approx(dt**3 / 6.0, rel=1e-14)
    assert si.dLQ == si.w01 and si.dQL == si.w10
    assert si.tLLQ == si.w02 and si.tLQL == si.w11 and si.tQLL == si.w20


def test_cosine_full_period_mean_vanishes():
    eps = 1e-3
    g = CosineFactor(eps)
    si = integrals_for_step(g, 0.0, eps)
    assert abs(si.m0) < 1e-18


def test_cosine_pointwise_periodicity():
    g = CosineFactor(1e-4)
    t = np.array([0.0, 1.3e-5, 7.7e-5, 0.123])
    assert np.allclose(g(t), g(t + 1e-4), atol=1e-12)
    assert np.all(np.abs(g(t)) <= 1.0 + 1e-15)


@pytest.mark.parametrize("eps", EPS_GRID)
def test_cosine_closed_forms_match_oracle(eps):
    g = CosineFactor(eps)
    rng = np.random.default_rng(hash(("oracle", eps)) % 2**32)
    for _ in range(4):
        a = float(rng.uniform(0.0, 0.05))
        dt = float(rng.uniform(0.2, 1.0) * min(0.02, 200 * eps))
        si = integrals_for_step(g, a, a + dt)
        tol = 1e-11 * max(1.0, dt**3)
        for name, value in fields(si).items():
            ref = quadrature_oracle(g, a, a + dt, name)
            assert value == pytest.approx(ref, abs=tol), (name, eps, a, dt)


def test_oracle_trivial_and_aliases():
    g = ConstantFactor()
    assert quadrature_oracle(g, 0.0, 1.0, "m0") == pytest.approx(1.0, rel=1e-13)
    # tLQL over [0, dt] for constant g is dt^3 / 6
    dt = 0.37
    assert quadrature_oracle(g, 0.0, dt, "tLQL") == pytest.approx(dt**3 / 6, rel=1e-12)
    for name in INTEGRAL_NAMES:
        quadrature_oracle(g, 0.0, 0.5, name)
    with pytest.raises(ValueError):
        quadrature_oracle(g, 0.0, 1.0, "nope")
    with pytest.raises(ValueError):
        quadrature_oracle(g, 1.0, 0.0, "m0")


def test_oracle_confirms_dqq_identity_cosine():
    g = CosineFactor(0.1)
    a, b = 0.0, 0.25
    m0 = quadrature_oracle(g, a, b, "m0")
    dqq = quadrature_oracle(g, a, b, "dQQ")
    assert dqq == pytest.approx(0.5 * m0 * m0, abs=1e-13)


@settings(max_examples=60, deadline=None)
@given(
    eps_exp=st.integers(min_value=0, max_value=6),
    a=st.floats(min_value=0.0, max_value=0.2),
    dt=st.floats(min_value=1e-6, max_value=0.5),
)
def test_simplex_identities(eps_exp, a, dt):
    g = CosineFactor(10.0 ** (-eps_exp))
    si = integrals_for_step(g, a, a + dt)
    assert abs(si.dQQ - 0.5 * si.m0**2) <= 1e-13
    assert abs(si.tQQQ - si.m0**3 / 6.0) <= 1e-13
    assert abs(si.dLQ + si.dQL - si.dt * si.m0) <= 1e-13 * max(1.0, dt)


@settings(max_examples=60, deadline=None)
@given(
    eps_exp=st.integers(min_value=0, max_value=6),
    a=st.floats(min_value=0.0, max_value=0.3),
    dt=st.floats(min_value=1e-8, max_value=0.5),
)
def test_epsilon_uniform_magnitudes(eps_exp, a, dt):
    g = CosineFactor(10.0 ** (-eps_exp))
    si = integrals_for_step(g, a, a + dt)
    slack = 1.0 + 1e-12
    assert abs(si.m0) <= dt * slack
    assert abs(si.w10) <= dt**2 * slack
    assert abs(si.tLLQ) <= dt**3 / 2.0 * slack


def test_constant_kind_reduces_every_field():
    g = ConstantFactor()
    a, dt = 0.2, 0.07
    si = integrals_for_step(g, a, a + dt)
    for name, value in fields(si).items():
        ref = quadrature_oracle(g, a, a + dt, name)
        assert value == pytest.approx(ref, abs=1e-14 * max(1.0, dt))


def test_rejects_bad_intervals_and_epsilon():
    with pytest.raises(ValueError):
        CosineFactor(0.0)
    with pytest.raises(ValueError):
        CosineFactor(1.5)
    with pytest.raises(ValueError):
        integrals_for_step(ConstantFactor(), 1.0, 1.0)
