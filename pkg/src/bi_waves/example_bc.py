"""Closed-form standing wave with Hamiltonian density pi_t = 1 + A + A cos(lam).

With zero initial velocity the parametric solution collapses to

    x = (al + be)/2,   t = (1 + A) xi + A cos(x) sin(xi),   xi = (be - al)/2,

so that u(x, t) = (a(x - xi) + a(x + xi))/2 with xi solving the Kepler-like
equation tau = xi + eps sin(xi), tau = t/(1+A), eps = A cos(x)/(1+A).

Note that a(lam + 2pi) = -a(lam): the profile vanishes at lam = 0 and 2pi and
is 4pi-periodic, so the field is Dirichlet on [0, 2pi] and flips sign after
the time shift 2pi(1+A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgument, NotConverged
from .minimal_surface import InitialCondition


@dataclass(frozen=True)
class ExampleConfig:
    A: float
    L: float = math.pi

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidArgument(f"example amplitude must be positive, got {self.A}")

    @property
    def B(self):
        """Shape parameter A/(2 + A), in (0, 1)."""
        return self.A / (2 + self.A)

    @property
    def half_period(self):
        """Time shift 2pi(1+A) under which u changes sign."""
        return 2 * math.pi * (1 + self.A)


def a_prime(lam, cfg: ExampleConfig):
    c = np.cos(np.asarray(lam, float) / 2)
    return 2 * math.sqrt(cfg.A) * c * np.sqrt(1 + cfg.A * c * c)


def a_closed(lam, cfg: ExampleConfig):
    """Antiderivative of ``a_prime`` with a(0) = 0.

    1 + B cos(lam) >= 1 - B > 0, so the principal arctan branch is continuous
    and no branch offsets are needed.
    """
    lam = np.asarray(lam, float)
    A, B = cfg.A, cfg.B
    s = np.sin(lam / 2)
    root = np.sqrt(1 + B * np.cos(lam))
    return (2 * math.sqrt(A * (1 + A / 2)) * s * root
            + 2 * (1 + A) * np.arctan(math.sqrt(2 * B) * s / root))


def a_small_amplitude(lam, A):
    """Leading terms 4 sqrt(A) sin(lam/2) [1 + A/2 (1 - sin^2(lam/2)/6)]."""
    s = np.sin(np.asarray(lam, float) / 2)
    return 4 * math.sqrt(A) * s * (1 + A / 2 * (1 - s * s / 6))


def pi_t(lam, cfg: ExampleConfig):
    return 1 + cfg.A + cfg.A * np.cos(np.asarray(lam, float))


def initial_condition(cfg: ExampleConfig, L=None) -> InitialCondition:
    """Zero-velocity initial data.

    The default L = 2 cfg.L is the true Dirichlet half-period of a.  Passing
    L = cfg.L still gives the exact field (the densities depend on a'^2 only,
    which is 2pi-periodic) but a~ is then antiperiodic rather than periodic
    over 2L, so u(x, t + 2K) = -u(x, t).
    """
    return InitialCondition(
        a=lambda x: a_closed(x, cfg),
        a_prime=lambda x: a_prime(x, cfg),
        v0=lambda x: np.zeros_like(np.asarray(x, float)),
        L=2 * cfg.L if L is None else float(L),
        label=f"pi_t example A={cfg.A}",
    )


def t_of_xi(xi, x, cfg: ExampleConfig):
    return (1 + cfg.A) * xi + cfg.A * np.cos(x) * np.sin(xi)


def dt_dxi(xi, x, cfg: ExampleConfig):
    return (1 + cfg.A) + cfg.A * np.cos(x) * np.cos(xi)


def xi_fixed_point(tau, eps, tol=1e-15, max_iter=10_000, force=False):
    """Solve xi = tau - eps sin(xi) by fixed-point iteration.

    Returns ``(xi, iterations)``.  |eps| < 1 makes the map a contraction.
    The stopping test is relative to max(1, |tau|) since the iterates cannot
    resolve steps below the float spacing of tau.
    """
    tau = np.asarray(tau, float)
    eps = np.asarray(eps, float)
    if np.any(np.abs(eps) >= 1) and not force:
        raise NotConverged("fixed-point map is not a contraction for |eps| >= 1")
    xi = tau.copy() if tau.ndim else np.float64(tau)
    scale = np.maximum(1.0, np.abs(tau))
    for it in range(1, max_iter + 1):
        new = tau - eps * np.sin(xi)
        step = np.max(np.abs(new - xi) / scale)
        xi = new
        if step <= tol:
            return xi, it
    raise NotConverged(f"no convergence after {max_iter} iterations (last step {step:.3e})")


def _sin_power(p):
    """sin(tau)^p as {n: (cos_coeff, sin_coeff)} with exact rationals."""
    poly = {0: (Fraction(1), Fraction(0))}
    for _ in range(p):
        out = {}
        for n, (c, s) in poly.items():
            # cos(n) sin = (sin(n+1) - sin(n-1))/2 ; sin(n) sin = (cos(n-1) - cos(n+1))/2
            for m, dc, ds in ((n + 1, -s / 2, c / 2), (n - 1, s / 2, -c / 2)):
                if m < 0:
                    m, ds = -m, -ds
                oc, os_ = out.get(m, (Fraction(0), Fraction(0)))
                out[m] = (oc + dc, os_ + ds)
        poly = out
    return poly


def _derivative(poly, times):
    out = {}
    for n, (c, s) in poly.items():
        for _ in range(times):
            c, s = n * s, -n * c
        out[n] = (c, s)
    return out


def xi_series_coefficients(order):
    """Exact coefficients {(p, n): c} with xi = tau + sum c eps^p sin(n tau).

    Lagrange inversion of xi = tau + eps * f(xi), f = -sin:
        xi = tau + sum_p eps^p / p! * d^(p-1)/dtau^(p-1) [f(tau)^p].
    """
    coeffs = {}
    for p in range(1, order + 1):
        poly = _derivative(_sin_power(p), p - 1)
        sign = (-1) ** p
        fact = math.factorial(p)
        for n, (c, s) in poly.items():
            if c != 0:
                raise ArithmeticError("cosine term in Lagrange series")
            if s != 0 and n > 0:
                coeffs[(p, n)] = sign * s / fact
    return coeffs


def xi_series(tau, eps, order=4):
    """Truncated eps-expansion of the fixed point."""
    if order < 0:
        raise InvalidArgument("order must be >= 0")
    tau = np.asarray(tau, float)
    total = tau.copy() if tau.ndim else np.float64(tau)
    for (p, n), c in xi_series_coefficients(order).items():
        total = total + float(c) * eps**p * np.sin(n * tau)
    return total


def critical_epsilon(tol=1e-14):
    """Largest eps for which x = eps cosh(x) has a real root, and the tangency x.

    Tangency of x and eps cosh(x) means x tanh(x) = 1; solved by Newton.
    Returns ``(eps_c, x_c)``.
    """
    x = 1.2
    for _ in range(100):
        g = x * math.tanh(x) - 1
        dg = math.tanh(x) + x / math.cosh(x) ** 2
        dx = g / dg
        x -= dx
        if abs(dx) <= tol:
            break
    return x / math.cosh(x), x


def arcsinh_bound(eps_c=None):
    """1/arcsinh(eps_c), the bound quoted next to eps_c (about 1.61, not x_c)."""
    if eps_c is None:
        eps_c = critical_epsilon()[0]
    return 1 / math.asinh(eps_c)


def count_real_roots(eps, x_max=20.0, samples=200_001):
    """Sign changes of x - eps cosh(x) on [0, x_max]."""
    x = np.linspace(0, x_max, samples)
    g = x - eps * np.cosh(x)
    return int(np.count_nonzero(np.sign(g[1:]) != np.sign(g[:-1])))


def xi_of(x, t, cfg: ExampleConfig, tol=1e-15):
    tau = np.asarray(t, float) / (1 + cfg.A)
    eps = cfg.A * np.cos(np.asarray(x, float)) / (1 + cfg.A)
    return xi_fixed_point(tau, eps, tol)[0]


def field(x, t, cfg: ExampleConfig):
    """u(x, t) = (a(x - xi) + a(x + xi))/2."""
    x = np.asarray(x, float)
    xi = xi_of(x, t, cfg)
    return 0.5 * (a_closed(x - xi, cfg) + a_closed(x + xi, cfg))
