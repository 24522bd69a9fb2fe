"""Poincare-Lindstedt standing waves of the scalar Born-Infeld equation.

The Nth order solution is

    u(x, t) = A sum_{M<=N} sum_{nu,mu<=M} alpha[M,nu,mu]
                  sin((2nu+1) k x) cos((2mu+1) w_N t) eps^(2M)

with eps = A k / b and w_N^2 = k^2 sum_{M<=N} xi[M] eps^(2M).  Coefficients are
exact rationals computed order by order from the Kronecker-kernel recursion;
``bi_waves.trig_algebra`` provides an independent check of the same
equations.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm

import gmpy2
import numpy as np

from . import residual_check
from .errors import DiagonalObstruction, InvalidArgument, NegativeOmegaSquared
from .trig_algebra import TrigSeries

# Each kernel is a signed sum of Kronecker deltas
#     delta(tilde, c0 + s0*self + s1*prime + s2*dprime)
# stored as (sign, c0, s0, s1, s2).  Q kernels act on x-harmonics, P kernels
# on t-harmonics.
_KERNELS = {
    "Q1": ((1, -2, -1, -1, -1), (-1, -1, 1, -1, -1), (-1, -1, -1, 1, -1),
           (1, 0, 1, 1, -1), (-1, -1, -1, -1, 1), (1, 0, 1, -1, 1),
           (1, 0, -1, 1, 1), (-1, 1, 1, 1, 1)),
    "Q2": ((-1, -2, -1, -1, -1), (1, -1, 1, -1, -1), (-1, -1, -1, 1, -1),
           (1, 0, 1, 1, -1), (-1, -1, -1, -1, 1), (1, 0, 1, -1, 1),
           (-1, 0, -1, 1, 1), (1, 1, 1, 1, 1)),
    "Q3": ((1, -1, 1, -1, -1), (-1, 0, 1, 1, -1), (1, 0, 1, -1, 1),
           (-1, 1, 1, 1, 1), (1, 0, -1, 1, 1), (-1, -1, -1, -1, 1),
           (1, -1, -1, 1, -1), (-1, -2, -1, -1, -1)),
    "P1": ((-1, -2, -1, -1, -1), (-1, -1, 1, -1, -1), (1, -1, -1, 1, -1),
           (1, 0, 1, 1, -1), (1, -1, -1, -1, 1), (1, 0, 1, -1, 1),
           (-1, 0, -1, 1, 1), (-1, 1, 1, 1, 1)),
    "P2": ((1, -1, 1, -1, -1), (1, 0, 1, 1, -1), (1, 0, 1, -1, 1),
           (1, 1, 1, 1, 1), (1, 0, -1, 1, 1), (1, -1, -1, -1, 1),
           (1, -1, -1, 1, -1), (1, -2, -1, -1, -1)),
    "P3": ((-1, -2, -1, -1, -1), (-1, -1, 1, -1, -1), (1, -1, -1, 1, -1),
           (1, 0, 1, 1, -1), (-1, -1, -1, -1, 1), (-1, 0, 1, -1, 1),
           (1, 0, -1, 1, 1), (1, 1, 1, 1, 1)),
}

# The literature form of P2 carries -2 instead of -1 in its first delta; that
# variant disagrees with the product-to-sum expansion of cos*cos*cos and is
# kept only for comparison.
_P2_AS_PRINTED = ((1, -2, 1, -1, -1),) + _KERNELS["P2"][1:]

KERNEL_NAMES = tuple(_KERNELS)


def kernel(which: str, args, as_printed: bool = False) -> int:
    """Signed Kronecker-delta kernel Q1..Q3 / P1..P3 at ``(self, ', '', ~)``."""
    if which not in _KERNELS:
        raise InvalidArgument(f"unknown kernel {which!r}")
    a, b, c, d = args
    if min(args) < 0:
        raise InvalidArgument("kernel indices must be >= 0")
    table = _P2_AS_PRINTED if (as_printed and which == "P2") else _KERNELS[which]
    return sum(sign for sign, c0, s0, s1, s2 in table if d == c0 + s0 * a + s1 * b + s2 * c)


@lru_cache(maxsize=None)
def _targets(which, prime, dprime, tilde):
    """Invert the deltas: harmonics ``self >= 0`` hit by (', '', ~), with signs."""
    acc = defaultdict(int)
    for sign, c0, s0, s1, s2 in _KERNELS[which]:
        target = s0 * (tilde - c0 - s1 * prime - s2 * dprime)
        if target >= 0:
            acc[target] += sign
    return tuple((t, s) for t, s in sorted(acc.items()) if s)


@dataclass(frozen=True)
class LindstedtSolution:
    """Coefficient tables of the Nth-order asymptotic standing wave."""

    order: int
    alpha: dict = field(repr=False)
    xi: tuple
    A: float = 1.0
    k: float = 1.0

    def coefficient(self, M, nu, mu):
        return self.alpha.get((M, nu, mu), Fraction(0))

    def with_scales(self, A=None, k=None):
        return LindstedtSolution(self.order, self.alpha, self.xi,
                                 self.A if A is None else A, self.k if k is None else k)

    def b_for(self, eps):
        return self.A * self.k / eps if eps else math.inf

    def s_coefficients(self, M):
        """Coefficients of s_nm at eps^(2M) in units of A (s_nm = 2 sin cos)."""
        return {(2 * nu + 1, 2 * mu + 1): a / 2
                for (MM, nu, mu), a in self.alpha.items() if MM == M}

    def series(self) -> TrigSeries:
        """The field u/A as an eps-graded trig series."""
        return TrigSeries(
            ((2 * nu + 1, 2 * mu + 1, "sc", 2 * M, 0, 0), a)
            for (M, nu, mu), a in self.alpha.items()
        )

    def omega_squared_over_k_squared(self, eps):
        e2 = eps * eps
        return sum(float(x) * e2**i for i, x in enumerate(self.xi))

    def omega(self, eps, allow_large=False):
        _check_eps(eps, allow_large)
        w2 = self.omega_squared_over_k_squared(eps)
        if w2 <= 0:
            raise NegativeOmegaSquared(eps, w2)
        return self.k * math.sqrt(w2)

    def to_dict(self):
        return {
            "N": self.order,
            "xi": [[x.numerator, x.denominator] for x in self.xi],
            "alpha": [
                {"M": M, "nu": nu, "mu": mu, "num": a.numerator, "den": a.denominator}
                for (M, nu, mu), a in sorted(self.alpha.items())
            ],
        }

    @classmethod
    def from_dict(cls, data, A=1.0, k=1.0):
        alpha = {(r["M"], r["nu"], r["mu"]): Fraction(r["num"], r["den"])
                 for r in data["alpha"]}
        xi = tuple(Fraction(n, d) for n, d in data["xi"])
        return cls(data["N"], alpha, xi, A, k)


def _check_eps(eps, allow_large):
    if eps < 0:
        raise InvalidArgument(f"eps must be >= 0, got {eps}")
    if eps >= 1 and not allow_large:
        raise InvalidArgument(
            f"eps={eps} >= 1 is outside the hyperbolic regime of the seed; "
            "pass allow_large=True to override"
        )


def _nonlinear_source(N, alpha, xi):
    """Sixteen times the eps^(2N) coefficient of the cubic term, per (nu, mu).

    Exact: all coefficients are brought to a common denominator and the
    kernel sums run over Python integers.
    """
    den_a = 1
    for a in alpha.values():
        den_a = lcm(den_a, a.denominator)
    den_x = 1
    for x in xi:
        den_x = lcm(den_x, x.denominator)
    xi_n = [x.numerator * (den_x // x.denominator) for x in xi]

    terms = defaultdict(list)
    for (M, nu, mu), a in alpha.items():
        terms[M].append((nu, mu, a.numerator * (den_a // a.denominator)))

    acc = defaultdict(int)
    for s in range(N):
        xin = xi_n[N - 1 - s] if N - 1 - s < len(xi_n) else 0
        if not xin:
            continue
        for M1 in range(s + 1):
            for M2 in range(s + 1 - M1):
                M3 = s - M1 - M2
                T3 = terms[M3]
                for n1, m1, a1 in terms[M1]:
                    o_n1, o_m1 = 2 * n1 + 1, 2 * m1 + 1
                    for n2, m2, a2 in terms[M2]:
                        o_n2, o_m2 = 2 * n2 + 1, 2 * m2 + 1
                        c12 = xin * a1 * a2
                        for n3, m3, a3 in T3:
                            o_n3, o_m3 = 2 * n3 + 1, 2 * m3 + 1
                            c = c12 * a3
                            q = _targets("Q1", n1, n2, n3)
                            if q:
                                p = _targets("P1", m1, m2, m3)
                                if p:
                                    w = c * o_m1 * o_m2 * o_n3 * o_n3
                                    for nu, sq in q:
                                        if nu <= N:
                                            for mu, sp in p:
                                                if mu <= N:
                                                    acc[nu, mu] += sq * sp * w
                            q = _targets("Q2", n1, n2, n3)
                            if q:
                                p = _targets("P2", m1, m2, m3)
                                if p:
                                    w = c * o_n1 * o_n2 * o_m3 * o_m3
                                    for nu, sq in q:
                                        if nu <= N:
                                            for mu, sp in p:
                                                if mu <= N:
                                                    acc[nu, mu] += sq * sp * w
                            q = _targets("Q3", n1, n2, n3)
                            if q:
                                p = _targets("P3", m1, m2, m3)
                                if p:
                                    w = 2 * c * o_m1 * o_n2 * o_n3 * o_m3
                                    for nu, sq in q:
                                        if nu <= N:
                                            for mu, sp in p:
                                                if mu <= N:
                                                    acc[nu, mu] += sq * sp * w
    scale = den_x * den_a**3
    return {key: Fraction(v, scale) for key, v in acc.items() if v}


@lru_cache(maxsize=None)
def _solve_cached(N):
    if N == 0:
        return {(0, 0, 0): Fraction(1)}, (Fraction(1),)
    alpha, xi = _solve_cached(N - 1)
    alpha = dict(alpha)
    source = _nonlinear_source(N, alpha, xi)
    new_xi = -source.get((0, 0), Fraction(0)) / 16
    for nu in range(N + 1):
        for mu in range(N + 1):
            if nu == 0 and mu == 0:
                continue
            rhs = source.get((nu, mu), Fraction(0)) / 16
            for M in range(1, N):
                a = alpha.get((M, nu, mu))
                if a:
                    rhs += a * (2 * mu + 1) ** 2 * xi[N - M]
            if nu == mu:
                if rhs != 0:
                    raise DiagonalObstruction(N, nu, rhs)
                continue
            value = -rhs / ((2 * mu + 1) ** 2 - (2 * nu + 1) ** 2)
            if value:
                alpha[(N, nu, mu)] = value
    return alpha, xi + (new_xi,)


def solve_order(N: int, A: float = 1.0, k: float = 1.0) -> LindstedtSolution:
    """Exact coefficient tables through order N."""
    if not isinstance(N, int) or N < 0:
        raise InvalidArgument(f"order must be a non-negative integer, got {N!r}")
    alpha, xi = _solve_cached(N)
    return LindstedtSolution(N, dict(alpha), xi, A, k)


def dispersion(N: int):
    """Exact xi_0..xi_N with omega^2/k^2 = sum xi_M eps^(2M)."""
    return list(solve_order(N).xi)


# --- floating evaluation --------------------------------------------------

def _blocks(sol, eps):
    """Per-term arrays (x-harmonic, t-harmonic, coefficient*eps^(2M))."""
    nx, mt, c = [], [], []
    e2 = eps * eps
    for (M, nu, mu), a in sol.alpha.items():
        nx.append(2 * nu + 1)
        mt.append(2 * mu + 1)
        c.append(float(a) * e2**M)
    return np.array(nx, float), np.array(mt, float), np.array(c, float)


def evaluate(sol: LindstedtSolution, x, t, eps, allow_large=False):
    """Field value of the Nth-order ansatz; vectorized over x, t."""
    w = sol.omega(eps, allow_large)
    nx, mt, c = _blocks(sol, eps)
    x = np.asarray(x, float)[..., None]
    t = np.asarray(t, float)[..., None]
    vals = np.sum(c * np.sin(nx * sol.k * x) * np.cos(mt * w * t), axis=-1)
    return sol.A * vals


def sample(sol: LindstedtSolution, x, t, eps, allow_large=False):
    """FieldSample with analytic first and second derivatives."""
    w = sol.omega(eps, allow_large)
    nx, mt, c = _blocks(sol, eps)
    k, A = sol.k, sol.A
    xa = np.asarray(x, float)
    ta = np.asarray(t, float)
    X = nx * k * xa[..., None]
    T = mt * w * ta[..., None]
    sx, cx, st, ct = np.sin(X), np.cos(X), np.sin(T), np.cos(T)
    kx, wt = nx * k, mt * w
    return residual_check.FieldSample(
        x=xa, t=ta,
        u=A * np.sum(c * sx * ct, axis=-1),
        ux=A * np.sum(c * kx * cx * ct, axis=-1),
        ut=-A * np.sum(c * wt * sx * st, axis=-1),
        uxx=-A * np.sum(c * kx**2 * sx * ct, axis=-1),
        utt=-A * np.sum(c * wt**2 * sx * ct, axis=-1),
        uxt=-A * np.sum(c * kx * wt * cx * st, axis=-1),
        source="lindstedt",
    )


# --- residual scan ----------------------------------------------------------

_RESIDUAL_BITS = 320


class _ResidualGrid:
    """High-precision per-order derivative grids of one solution.

    Stored in units A = k = 1 on a uniform phase grid X, T in [0, 2pi), so the
    grids do not depend on eps; the eps-dependence enters only through the
    powers eps^(2M) and the t-derivative factors of w_N.
    """

    def __init__(self, sol, grid_x, grid_t):
        self.order = sol.order
        self.xi = sol.xi
        with gmpy2.context(gmpy2.get_context(), precision=_RESIDUAL_BITS):
            two_pi = 2 * gmpy2.const_pi()
            X = [two_pi * i / grid_x for i in range(grid_x)]
            T = [two_pi * j / grid_t for j in range(grid_t)]
            H = sol.order + 1
            sx = np.array([[gmpy2.sin((2 * h + 1) * v) for v in X] for h in range(H)], object)
            cx = np.array([[gmpy2.cos((2 * h + 1) * v) for v in X] for h in range(H)], object)
            st = np.array([[gmpy2.sin((2 * h + 1) * v) for v in T] for h in range(H)], object)
            ct = np.array([[gmpy2.cos((2 * h + 1) * v) for v in T] for h in range(H)], object)
            odd = np.array([gmpy2.mpfr(2 * h + 1) for h in range(H)], object)
            zero = gmpy2.mpfr(0)
            # per order: phase-derivative grids of u/A (t-derivatives w.r.t. T)
            self.fields = []
            for M in range(sol.order + 1):
                a = np.full((H, H), zero, object)
                for (MM, nu, mu), v in sol.alpha.items():
                    if MM == M:
                        a[nu, mu] = gmpy2.mpfr(gmpy2.mpq(v.numerator, v.denominator))
                ax = a * odd[:, None]
                at = a * odd[None, :]
                self.fields.append({
                    "ux": cx.T.dot(ax).dot(ct),
                    "ut": -sx.T.dot(at).dot(st),
                    "uxx": -sx.T.dot(ax * odd[:, None]).dot(ct),
                    "utt": -sx.T.dot(at * odd[None, :]).dot(ct),
                    "uxt": -cx.T.dot(ax * odd[None, :]).dot(st),
                })

    def max_residual(self, eps):
        with gmpy2.context(gmpy2.get_context(), precision=_RESIDUAL_BITS):
            e = gmpy2.mpfr(eps)
            e2 = e * e
            w2 = sum(gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator)) * e2**i
                     for i, x in enumerate(self.xi))
            if w2 <= 0:
                raise NegativeOmegaSquared(eps, float(w2))
            w = gmpy2.sqrt(w2)
            comb = {}
            for name in ("ux", "ut", "uxx", "utt", "uxt"):
                total = self.fields[0][name]
                for M in range(1, self.order + 1):
                    total = total + self.fields[M][name] * e2**M
                comb[name] = total
            s = residual_check.FieldSample(
                x=None, t=None, u=None,
                ux=comb["ux"], ut=comb["ut"] * w, uxx=comb["uxx"],
                utt=comb["utt"] * w2, uxt=comb["uxt"] * w,
            )
            # A = k = 1, so b = 1/eps and the residual is already normalized
            if eps == 0:
                r = residual_check.bi_residual(s, math.inf)
            else:
                r = residual_check.bi_residual(s, 1 / e)
            return float(max(abs(v) for v in r.ravel()))


_GRID_CACHE = {}


def residual_max(sol: LindstedtSolution, eps, grid_x=64, grid_t=64, allow_large=False):
    """F(eps)/(A k^2): max |LHS of the Born-Infeld equation| over one period.

    Samples a uniform grid over one spatial period 2pi/k and one temporal
    period 2pi/w_N with analytic derivatives.  Evaluation runs in 320-bit
    floating point so that residuals far below double-precision round-off
    (high N, small eps) are resolved.
    """
    if grid_x < 8 or grid_t < 8:
        raise InvalidArgument("grid sizes must be >= 8")
    _check_eps(eps, allow_large)
    key = (sol.order, grid_x, grid_t, tuple(sorted(sol.alpha.items())), sol.xi)
    grid = _GRID_CACHE.get(key)
    if grid is None:
        grid = _GRID_CACHE[key] = _ResidualGrid(sol, grid_x, grid_t)
    return grid.max_residual(eps)


def slope_fit(eps_values, F_values):
    """Least-squares slope of log F against log eps."""
    le = np.log(np.asarray(eps_values, float))
    lf = np.log(np.asarray(F_values, float))
    return float(np.polyfit(le, lf, 1)[0])


# --- two-mode seed ------------------------------------------------------------

@dataclass(frozen=True)
class TwoModeSolution:
    """First-order correction for the seed A1 s11/2 + A3 s33/2.

    ``series`` is the dimensional field u in the phases X = kx, T = wt with
    the b^-2 order tagged as eps power 2 (so eps^2 stands for 1/b^2 here, and
    the physical value of the correction uses the factor stored alongside).
    """

    A1: Fraction
    A3: Fraction
    k: Fraction
    b: Fraction
    seed: TrigSeries
    correction: TrigSeries
    xi1: Fraction
    eps: float

    @property
    def series(self):
        return self.seed + self.correction


def two_mode_first_order(A1, A3, k, b) -> TwoModeSolution:
    """Seed plus its exact order-b^-2 correction; eps = k sqrt(A1^2 + 9 A3^2) / b.

    The correction is tagged with eps power 2 standing for the factor 1/b^2,
    so that ``seed + correction`` can be checked order by order.
    """
    A1, A3, k, b = (Fraction(v) for v in (A1, A3, k, b))
    if A1 == 0 and A3 == 0:
        raise InvalidArgument("at least one of A1, A3 must be nonzero")
    S = TrigSeries.s
    seed = S(1, 1, A1 / 2) + S(3, 3, A3 / 2)
    pref = k * k / 8
    blocks = [
        (A1**2 * (A1 + 6 * A3) / 8, [(3, 1, 1), (1, 3, 1)]),
        (9 * A1 * A3 * (A1 + 6 * A3) / 24, [(5, 1, 1), (1, 5, -1)]),
        (3 * A1**2 * A3 / 8, [(5, 3, 1), (3, 5, 1)]),
        (54 * A1 * A3**2 / 48, [(7, 1, 1), (1, 7, 1)]),
        (9 * A1 * A3**2 / 24, [(7, 5, 1), (5, 7, 1)]),
        (9 * A3**3 / 8, [(9, 3, 1), (3, 9, 1)]),
    ]
    corr = TrigSeries()
    for c, pairs in blocks:
        for n, m, sign in pairs:
            corr = corr + S(n, m, pref * c * sign, eps=2)
    eps = float(k) * math.sqrt(float(A1**2 + 9 * A3**2)) / float(b)
    return TwoModeSolution(A1, A3, k, b, seed, corr, Fraction(-1, 2), eps)
