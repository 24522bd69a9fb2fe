import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from bi_waves import example_bc as ex
from bi_waves import minimal_surface as ms
from bi_waves.errors import InvalidArgument, NotConverged

CFG = ex.ExampleConfig(0.1)
# frozen from adaptive quadrature of a' over [0, pi] (scipy.integrate.quad, 1e-14)
A_AT_PI = 1.3062657442069487


@pytest.fixture(scope="module")
def built():
    return ms.build(ex.initial_condition(CFG))


def test_config():
    assert CFG.B == pytest.approx(0.1 / 2.1)
    assert CFG.L == math.pi
    with pytest.raises(InvalidArgument):
        ex.ExampleConfig(0.0)


def test_profile_origin_and_quadrature_oracle():
    assert ex.a_closed(0.0, CFG) == 0
    assert float(ex.a_closed(math.pi, CFG)) == pytest.approx(A_AT_PI, abs=1e-14)
    val, _ = integrate.quad(lambda l: ex.a_prime(l, CFG), 0, 2.3, epsabs=1e-13)
    assert float(ex.a_closed(2.3, CFG)) == pytest.approx(val, abs=1e-12)


def test_small_amplitude_formula():
    A = 0.01
    cfg = ex.ExampleConfig(A)
    diff = abs(float(ex.a_closed(1.0, cfg) - ex.a_small_amplitude(1.0, A)))
    assert diff <= A**2 * 4 * math.sqrt(A)


def test_profile_symmetry_structure():
    lam = np.linspace(-7, 7, 57)
    a = ex.a_closed(lam, CFG)
    assert np.allclose(ex.a_closed(-lam, CFG), -a, atol=1e-15)
    # antiperiodic under 2 pi, periodic under 4 pi
    assert np.allclose(ex.a_closed(lam + 2 * math.pi, CFG), -a, atol=1e-13)
    assert np.allclose(ex.a_closed(lam + 4 * math.pi, CFG), a, atol=1e-13)


@pytest.mark.parametrize("A", [0.1, 1.0, 5.0])
def test_profile_derivative(A):
    cfg = ex.ExampleConfig(A)
    lam = np.linspace(-10, 10, 101)
    h = 1e-3
    f = lambda l: ex.a_closed(l, cfg)
    fd = (f(lam - 2 * h) - 8 * f(lam - h) + 8 * f(lam + h) - f(lam + 2 * h)) / (12 * h)
    assert np.max(np.abs(fd - ex.a_prime(lam, cfg))) <= 1e-10 * max(1.0, A)


def test_fixed_point_trivial():
    xi, it = ex.xi_fixed_point(1.234, 0.0)
    assert xi == 1.234 and it == 1


def test_fixed_point_bisection_oracle():
    root = optimize.bisect(lambda z: z + 0.3 * math.sin(z) - 1.0, 0, 2, xtol=1e-15)
    assert float(ex.xi_fixed_point(1.0, 0.3)[0]) == pytest.approx(root, abs=1e-14)


@settings(max_examples=50)
@given(st.floats(-20, 20), st.floats(-0.95, 0.95))
def test_fixed_point_solves_equation(tau, eps):
    xi, _ = ex.xi_fixed_point(tau, eps, tol=1e-14)
    assert abs(xi + eps * math.sin(xi) - tau) <= 4e-14 * max(1, abs(tau))


@settings(max_examples=30)
@given(st.floats(-10, 10), st.floats(-0.95, 0.95))
def test_map_is_contraction(tau, eps):
    z = [tau]
    for _ in range(6):
        z.append(tau - eps * math.sin(z[-1]))
    for n in range(1, 6):
        assert abs(z[n + 1] - z[n]) <= abs(eps) * abs(z[n] - z[n - 1]) + 1e-15


def test_fixed_point_guards():
    with pytest.raises(NotConverged):
        ex.xi_fixed_point(1.0, 1.0)
    with pytest.raises(NotConverged):
        ex.xi_fixed_point(2.5, 3.0, max_iter=200, force=True)


def test_series_prefix():
    c = ex.xi_series_coefficients(4)
    assert c == {(1, 1): -1, (2, 2): F(1, 2), (3, 1): F(1, 8), (3, 3): F(-3, 8),
                 (4, 2): F(-1, 6), (4, 4): F(1, 3)}


def _kapteyn(p, n):
    # xi = tau + sum_n (2/n)(-1)^n J_n(n eps) sin(n tau); J_n by its power series
    if (p - n) % 2 or p < n:
        return F(0)
    k = (p - n) // 2
    return F(2, n) * (-1) ** n * (-1) ** k * F(n, 2) ** (n + 2 * k) / (
        math.factorial(k) * math.factorial(n + k))


def test_series_against_bessel_form():
    c = ex.xi_series_coefficients(10)
    for p in range(1, 11):
        for n in range(1, p + 1):
            assert c.get((p, n), 0) == _kapteyn(p, n), (p, n)


def test_series_trivial_and_guard():
    assert ex.xi_series(0.8, 0.0) == 0.8
    with pytest.raises(InvalidArgument):
        ex.xi_series(0.8, 0.1, order=-1)


def test_series_vs_fixed_point():
    tau, eps = 0.7, 0.2
    d = abs(ex.xi_series(tau, eps, 4) - ex.xi_fixed_point(tau, eps)[0])
    assert d <= 2 * eps**5


def test_critical_epsilon():
    eps_c, x_c = ex.critical_epsilon()
    assert eps_c == pytest.approx(0.663, abs=1e-3)
    assert x_c == pytest.approx(1.1997, abs=5e-4)
    assert x_c * math.tanh(x_c) == pytest.approx(1, abs=1e-14)
    assert ex.count_real_roots(eps_c - 0.01) == 2
    assert ex.count_real_roots(eps_c + 0.01) == 0
    assert ex.arcsinh_bound() == pytest.approx(1.608, abs=1e-3)


def test_t_of_xi_monotone():
    xi = np.linspace(-10, 10, 401)
    for A in (0.01, 0.1, 1.0, 10.0):
        cfg = ex.ExampleConfig(A)
        for x in np.linspace(0, 2 * math.pi, 13):
            assert np.all(ex.dt_dxi(xi, x, cfg) > 0)
            assert np.all(np.diff(ex.t_of_xi(xi, x, cfg)) > 0)


def test_field_boundary_and_initial_value():
    t = np.linspace(0, 20, 21)
    assert np.max(np.abs(ex.field(0 * t, t, CFG))) < 1e-15
    x = np.linspace(0, 2 * math.pi, 17)
    assert np.allclose(ex.field(x, 0 * x, CFG), ex.a_closed(x, CFG), atol=1e-15)


def test_field_matches_parametric(built):
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 2 * math.pi, 100)
    t = rng.uniform(0, 30, 100)
    assert np.max(np.abs(ex.field(x, t, CFG) - ms.field_value(built, x, t))) <= 1e-11


def test_field_time_structure():
    rng = np.random.default_rng(12)
    x = rng.uniform(0, 2 * math.pi, 100)
    t = rng.uniform(0, 30, 100)
    u = ex.field(x, t, CFG)
    assert np.allclose(ex.field(x, t + CFG.half_period, CFG), -u, atol=1e-12)
    assert np.allclose(ex.field(x, t + 2 * CFG.half_period, CFG), u, atol=1e-12)
