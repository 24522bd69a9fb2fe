"""Lindstedt series versus the parametric solution built from its t = 0 profile."""

from __future__ import annotations

import math

import numpy as np

from . import lindstedt, minimal_surface
from .errors import InvalidArgument


def lindstedt_profile_coeffs(sol: lindstedt.LindstedtSolution, eps):
    """Sine coefficients of u(x, 0) on [0, pi/k] (all time factors are cosines)."""
    coeffs = {}
    for M in range(sol.order + 1):
        for (n, _m), c in sol.s_coefficients(M).items():
            coeffs[n] = coeffs.get(n, 0.0) + 2 * float(c) * eps ** (2 * M)
    out = np.zeros(max(coeffs, default=0))
    for n, c in coeffs.items():
        out[n - 1] = sol.A * c
    return out


def compare(N=3, A=0.1, k=1.0, b=1.0, grid=16, quad=minimal_surface.Quadrature()):
    """Period and pointwise agreement of the two methods.

    The parametric solver works with b = 1, so the profile is divided by b
    and the field multiplied back.
    """
    if not (A >= 0 and k > 0 and b > 0):
        raise InvalidArgument("need A >= 0, k > 0, b > 0")
    eps = A * k / b
    sol = lindstedt.solve_order(N, A=A, k=k)
    L = math.pi / k
    ic = minimal_surface.InitialCondition.from_sine_series(
        lindstedt_profile_coeffs(sol, eps) / b, (), L, label=f"lindstedt N={N}")
    ps = minimal_surface.build(ic, quad)
    omega = sol.omega(eps) if eps else k
    period_lindstedt = 2 * math.pi / omega

    xs = (np.arange(grid) + 0.5) * (L / grid)
    ts = (np.arange(grid) + 0.5) * (period_lindstedt / grid)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    u_l = np.asarray(lindstedt.evaluate(sol, X, T, eps), float)
    u_p = b * minimal_surface.field_value(ps, X, T)
    return {
        "N": N, "A": A, "k": k, "b": b, "eps": eps,
        "twoK": 2 * ps.K,
        "lindstedtPeriod": period_lindstedt,
        "periodMismatch": abs(2 * ps.K - period_lindstedt) / (2 * math.pi / k),
        "maxFieldDifference": float(np.max(np.abs(u_l - u_p))),
        "quadratureError": ps.error_estimate,
        "grid": [grid, grid],
    }
