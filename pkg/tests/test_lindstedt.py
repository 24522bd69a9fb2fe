import math
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bi_waves import lindstedt
from bi_waves.errors import InvalidArgument, NegativeOmegaSquared
from bi_waves.lindstedt import kernel, solve_order, two_mode_first_order
from bi_waves.residual_check import bi_residual, fd_derivatives, hyperbolicity_margin
from bi_waves.trig_algebra import TrigSeries, bi_operator_symbolic, multiply

# kernel -> (functions of prime, dprime, tilde harmonics; function of self harmonic)
KERNEL_PRODUCTS = {"Q1": ("sss", "s"), "Q2": ("ccs", "s"), "Q3": ("scc", "s"),
                   "P1": ("ssc", "c"), "P2": ("ccc", "c"), "P3": ("scs", "c")}


def kernel_oracle(name, a, b, c, d):
    """4 x (coefficient of f(2a+1) in f'(2b+1) f''(2c+1) f~(2d+1)) by trig_algebra."""
    fs, target = KERNEL_PRODUCTS[name]
    one = lambda f, i: TrigSeries.term(2 * i + 1, 0, f + "c")
    prod = multiply(multiply(one(fs[0], b), one(fs[1], c)), one(fs[2], d))
    return 4 * prod.coeff(2 * a + 1, 0, target + "c")


def test_kernel_values_at_origin():
    assert kernel("Q1", (0, 0, 0, 0)) == 3
    assert kernel("P1", (0, 0, 0, 0)) == 1


@pytest.mark.parametrize("name", sorted(KERNEL_PRODUCTS))
def test_kernels_match_product_expansion(name):
    for args in product(range(4), repeat=4):
        assert kernel(name, args) == kernel_oracle(name, *args), args


def test_all_fives_against_oracle():
    for name in KERNEL_PRODUCTS:
        assert kernel(name, (5, 5, 5, 5)) == kernel_oracle(name, 5, 5, 5, 5)


def test_printed_p2_variant_disagrees():
    diffs = [a for a in product(range(4), repeat=4)
             if kernel("P2", a, as_printed=True) != kernel_oracle("P2", *a)]
    assert diffs


def test_kernel_rejects_negative_and_unknown():
    with pytest.raises(InvalidArgument):
        kernel("Q1", (0, -1, 0, 0))
    with pytest.raises(InvalidArgument):
        kernel("Q9", (0, 0, 0, 0))


def test_first_order_block():
    sol = solve_order(1)
    assert sol.coefficient(1, 0, 1) == F(1, 32)
    assert sol.coefficient(1, 1, 0) == F(1, 32)
    assert sol.s_coefficients(1) == {(1, 3): F(1, 64), (3, 1): F(1, 64)}


def test_second_order_block():
    got = solve_order(2).s_coefficients(2)
    printed = dict(zip([(1, 3), (3, 1), (1, 5), (5, 1), (3, 5), (5, 3)],
                       [5, 3, -1, -1, F(1, 4), F(-1, 4)]))
    assert got == {k: -F(v) / 1024 for k, v in printed.items()}


def test_third_order_block():
    printed = {(1, 3): F(189, 4), (3, 1): F(61, 4), (1, 5): -17, (5, 1): -15,
               (3, 5): 3, (5, 3): -5, (1, 7): 3, (7, 1): 3, (3, 7): -1, (7, 3): 1,
               (5, 7): F(1, 12), (7, 5): F(1, 12)}
    got = solve_order(3).s_coefficients(3)
    assert got == {k: F(v) / 32768 for k, v in printed.items()}


def test_dispersion_values():
    assert lindstedt.dispersion(0) == [1]
    assert lindstedt.dispersion(3) == [1, F(-1, 2), F(1, 4), F(-125, 1024)]
    assert lindstedt.dispersion(11)[:4] == lindstedt.dispersion(3)


@pytest.mark.parametrize("N", range(0, 7))
def test_structural_invariants(N):
    sol = solve_order(N)
    assert sol.alpha[(0, 0, 0)] == 1 and sol.xi[0] == 1
    for (M, nu, mu), a in sol.alpha.items():
        assert a != 0
        assert nu <= M and mu <= M
        assert not (M >= 1 and nu == mu)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_oracle_equivalence_low_orders(N):
    sol = solve_order(N)
    r = bi_operator_symbolic(sol.series(), sol.xi, N)
    assert r == TrigSeries()


def test_oracle_sees_next_order():
    sol = solve_order(2)
    assert bi_operator_symbolic(sol.series(), sol.xi, 3).eps_block(6) != TrigSeries()


def test_serialization_roundtrip():
    sol = solve_order(3, A=0.5, k=2.0)
    d = sol.to_dict()
    assert d["xi"] == [[1, 1], [-1, 2], [1, 4], [-125, 1024]]
    assert {"M": 1, "nu": 0, "mu": 1, "num": 1, "den": 32} in d["alpha"]
    back = lindstedt.LindstedtSolution.from_dict(d, A=0.5, k=2.0)
    assert back == sol


def test_seed_evaluation():
    sol = solve_order(3, A=0.7, k=1.3)
    x, t = np.meshgrid(np.linspace(0, 3, 5), np.linspace(0, 4, 6))
    assert np.allclose(lindstedt.evaluate(sol, x, t, 0.0),
                       0.7 * np.sin(1.3 * x) * np.cos(1.3 * t), atol=1e-15)


def test_boundary_values():
    sol = solve_order(3, k=2.0)
    t = np.linspace(0, 10, 11)
    assert np.all(lindstedt.evaluate(sol, 0.0, t, 0.3) == 0)
    assert np.max(np.abs(lindstedt.evaluate(sol, math.pi / 2.0, t, 0.3))) < 1e-14


def test_midpoint_value_from_printed_coefficients():
    # x = pi/2: sin((2nu+1) pi/2) = (-1)^nu; t = 0: all cosines are 1
    eps = F(1, 10)
    blocks = {0: {(1, 1): F(1, 2)},
              1: {(1, 3): F(1, 64), (3, 1): F(1, 64)},
              2: {(1, 3): F(-5, 1024), (3, 1): F(-3, 1024), (1, 5): F(1, 1024),
                  (5, 1): F(1, 1024), (3, 5): F(-1, 4096), (5, 3): F(1, 4096)},
              3: {(1, 3): F(189, 4 * 32768), (3, 1): F(61, 4 * 32768), (1, 5): F(-17, 32768),
                  (5, 1): F(-15, 32768), (3, 5): F(3, 32768), (5, 3): F(-5, 32768),
                  (1, 7): F(3, 32768), (7, 1): F(3, 32768), (3, 7): F(-1, 32768),
                  (7, 3): F(1, 32768), (5, 7): F(1, 12 * 32768), (7, 5): F(1, 12 * 32768)}}
    exact = sum(2 * c * (-1) ** ((n - 1) // 2) * eps ** (2 * M)
                for M, blk in blocks.items() for (n, m), c in blk.items())
    sol = solve_order(3)
    assert lindstedt.evaluate(sol, math.pi / 2, 0.0, 0.1) == pytest.approx(float(exact), abs=1e-15)


@settings(max_examples=64, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 20), st.floats(0, 0.3))
def test_time_periodicity(x, t, eps):
    sol = solve_order(3)
    period = 2 * math.pi / sol.omega(eps)
    assert lindstedt.evaluate(sol, x, t + period, eps) == pytest.approx(
        lindstedt.evaluate(sol, x, t, eps), abs=1e-12)


def test_eps_guards():
    sol = solve_order(1)
    with pytest.raises(InvalidArgument):
        sol.omega(1.0)
    with pytest.raises(InvalidArgument):
        sol.omega(-0.1)
    with pytest.raises(NegativeOmegaSquared):
        sol.omega(1.5, allow_large=True)
    with pytest.raises(NegativeOmegaSquared):
        lindstedt.evaluate(sol, 0.1, 0.1, 2.0, allow_large=True)


def test_analytic_derivatives_match_fd():
    sol = solve_order(3)
    eps, h = 0.2, 1e-4
    x, t = np.meshgrid(np.linspace(0.1, 3, 9), np.linspace(0.1, 6, 9))
    an = lindstedt.sample(sol, x, t, eps)
    fd = fd_derivatives(lambda a, b: lindstedt.evaluate(sol, a, b, eps), x, t, h, h)
    for name in ("ux", "ut", "uxx", "utt", "uxt"):
        assert np.max(np.abs(getattr(an, name) - getattr(fd, name))) < 10 * h * h * 10


def test_residual_zero_at_eps_zero():
    assert lindstedt.residual_max(solve_order(0), 0.0) == pytest.approx(0, abs=1e-15)


def test_residual_consistent_with_double_precision_scan():
    sol = solve_order(3)
    eps = 0.3
    g = 64
    p = np.arange(g) * 2 * math.pi / g
    X, T = np.meshgrid(p, p / sol.omega(eps), indexing="ij")
    r = bi_residual(lindstedt.sample(sol, X, T, eps), b=sol.b_for(eps))
    assert lindstedt.residual_max(sol, eps) == pytest.approx(np.max(np.abs(r)), rel=1e-6)


def test_residual_slope_n3():
    sol = solve_order(3)
    eps = [0.02, 0.04, 0.08]
    F_ = [lindstedt.residual_max(sol, e) for e in eps]
    assert abs(lindstedt.slope_fit(eps, F_) - 8) <= 0.3


def test_residual_ordering_at_02():
    vals = [lindstedt.residual_max(solve_order(N), 0.2) for N in (3, 6, 11)]
    assert vals[0] > vals[1] > vals[2] > 0


def test_residual_grid_guard():
    with pytest.raises(InvalidArgument):
        lindstedt.residual_max(solve_order(1), 0.1, grid_x=4)


@pytest.mark.parametrize("eps,positive", [(0.5, True), (0.99, True), (1.0, False), (1.2, False)])
def test_seed_hyperbolicity_probe(eps, positive):
    sol = solve_order(0)
    p = np.linspace(0, 2 * math.pi, 65)
    X, T = np.meshgrid(p, p)
    s = lindstedt.sample(sol, X, T, eps, allow_large=True)
    m = hyperbolicity_margin(s, b=sol.b_for(eps))
    assert (m.min() > 1e-12) == positive


# --- two-mode seed -------------------------------------------------------------

def test_two_mode_reduces_to_single_mode():
    tm = two_mode_first_order(F(3, 10), 0, 1, 10)
    # correction is A k^2/(64 b^2) * A^2 (s13 + s31), the b^-2 tag carried as eps^2
    A = F(3, 10)
    expected = (TrigSeries.s(1, 3, A**3 / 64, eps=2) + TrigSeries.s(3, 1, A**3 / 64, eps=2))
    assert tm.correction == expected
    assert tm.xi1 == F(-1, 2)
    assert tm.eps == pytest.approx(0.03)


def test_two_mode_pure_third_harmonic():
    tm = two_mode_first_order(0, 1, 2, 10)
    c = F(9, 64) * 4  # 9 A3^3 k^2 / 64 with k = 2
    assert tm.correction == TrigSeries.s(9, 3, c, eps=2) + TrigSeries.s(3, 9, c, eps=2)


@pytest.mark.parametrize("A1,A3", [(1, 1), (1, 0), (0, 1), (2, -1), (F(1, 3), F(5, 7))])
def test_two_mode_oracle(A1, A3):
    # with k = 1 and A = 1 the oracle's eps^2 is exactly the 1/b^2 tag
    tm = two_mode_first_order(A1, A3, 1, 10)
    w = (1, F(-1, 2) * (F(A1) ** 2 + 9 * F(A3) ** 2))
    r = bi_operator_symbolic(tm.series, w, 1)
    assert r == TrigSeries()


def test_two_mode_rejects_zero_seed():
    with pytest.raises(InvalidArgument):
        two_mode_first_order(0, 0, 1, 1)
