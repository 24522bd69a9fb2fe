"""Parametric standing waves from initial data (units with b = 1).

Given u(x, 0) = a(x) and u_t(x, 0) = v0(x), the solution is the surface

    t(al, be) = 1/2 int_al^be pi_t
    x(al, be) = (al + be)/2 + 1/2 int_al^be pi_x
    z(al, be) = (a(al) + a(be))/2 + 1/2 int_al^be pi_z

with u(x(al, be), t(al, be)) = z(al, be) and momentum densities

    pi_t = (1 + a'^2)/s,  pi_x = -a' v0/s,  pi_z = v0/s,  s = sqrt(1 + a'^2 - v0^2).

The densities are 2L-periodic, so one period of cumulative integrals on
Gauss-Legendre panels determines the surface everywhere.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from .errors import (HyperbolicityViolation, InvalidArgument, InversionNotConverged,
                     QuadratureNotConverged, SymmetryViolation)
from .residual_check import FieldSample


def _sine_series(coeffs, L):
    coeffs = np.asarray(coeffs, float)
    n = np.arange(1, len(coeffs) + 1)
    q = n * math.pi / L

    def f(x):
        x = np.asarray(x, float)
        return np.sin(x[..., None] * q) @ coeffs

    def fp(x):
        x = np.asarray(x, float)
        return np.cos(x[..., None] * q) @ (coeffs * q)

    return f, fp


@dataclass(frozen=True)
class InitialCondition:
    """Initial displacement a(x) = B x + a~(x) and velocity v0(x).

    ``a``, ``a_prime`` and ``v0`` are vectorized callables.  The oscillatory
    parts a~ and v0 are odd and 2L-periodic.
    """

    a: Callable
    a_prime: Callable
    v0: Callable
    L: float
    background_B: float = 0.0
    label: str = "custom"
    sine_coeffs: tuple = field(default=None, compare=False)
    v0_coeffs: tuple = field(default=None, compare=False)

    @classmethod
    def from_sine_series(cls, a_coeffs=(), v0_coeffs=(), L=math.pi, B=0.0, label="sine"):
        """a~(x) = sum a_n sin(n pi x / L), likewise v0, plus slope B."""
        if L <= 0:
            raise InvalidArgument("L must be positive")
        fa, fap = _sine_series(a_coeffs, L)
        fv, _ = _sine_series(v0_coeffs, L)
        B = float(B)
        return cls(
            a=lambda x: B * np.asarray(x, float) + fa(x),
            a_prime=lambda x: B + fap(x),
            v0=fv,
            L=float(L), background_B=B, label=label,
            sine_coeffs=tuple(map(float, a_coeffs)),
            v0_coeffs=tuple(map(float, v0_coeffs)),
        )

    @classmethod
    def vacuum(cls, L=math.pi):
        return cls.from_sine_series((), (), L, 0.0, label="vacuum")

    def oscillatory(self, x):
        """a~(x) = a(x) - B x."""
        return self.a(x) - self.background_B * np.asarray(x, float)

    def margin(self, lam):
        ap = self.a_prime(lam)
        v = self.v0(lam)
        return 1 + ap * ap - v * v

    def check_symmetries(self, samples=64, tol=1e-10, seed=0):
        """Raise SymmetryViolation unless a~, v0 are odd and 2L-periodic."""
        rng = np.random.default_rng(seed)
        x = rng.uniform(-self.L, self.L, samples)
        L2 = 2 * self.L
        scale = max(1.0, float(np.max(np.abs(self.oscillatory(x)))),
                    float(np.max(np.abs(self.v0(x)))))
        checks = {
            "a odd": np.abs(self.oscillatory(-x) + self.oscillatory(x)),
            "a periodic": np.abs(self.oscillatory(x + L2) - self.oscillatory(x)),
            "v0 odd": np.abs(self.v0(-x) + self.v0(x)),
            "v0 periodic": np.abs(self.v0(x + L2) - self.v0(x)),
        }
        for name, err in checks.items():
            worst = float(err.max()) / scale
            if worst > tol:
                raise SymmetryViolation(f"{name} violated by {worst:.3e}")


def momentum_densities(ic: InitialCondition, lam):
    """(pi_t, pi_x, pi_z) at lam; raises HyperbolicityViolation if margin <= 0."""
    lam = np.asarray(lam, float)
    ap = np.asarray(ic.a_prime(lam), float)
    v = np.asarray(ic.v0(lam), float)
    m = 1 + ap * ap - v * v
    if np.any(m <= 0):
        i = int(np.argmin(m)) if m.ndim else 0
        raise HyperbolicityViolation(float(np.ravel(lam)[i]), float(np.ravel(m)[i]))
    s = np.sqrt(m)
    return (1 + ap * ap) / s, -ap * v / s, v / s


@dataclass(frozen=True)
class Quadrature:
    panels: int = 16
    nodes: int = 8
    tol: float = 1e-12
    max_panels: int = 4096


@dataclass(frozen=True)
class ParametricSolution:
    ic: InitialCondition
    quad: Quadrature
    edges: np.ndarray = field(repr=False)
    cumulative: np.ndarray = field(repr=False)   # shape (3, panels+1)
    K: float
    error_estimate: float
    min_margin: float

    @property
    def period(self):
        return 2 * self.K

    @property
    def L(self):
        return self.ic.L


def _panel_integrals(ic, edges, gx, gw):
    h = np.diff(edges)
    nodes = edges[:-1, None] + (gx[None, :] + 1) * h[:, None] / 2
    pt, px, pz = momentum_densities(ic, nodes)
    w = gw[None, :] * h[:, None] / 2
    margin = ic.margin(nodes)
    return np.stack([(pt * w).sum(1), (px * w).sum(1), (pz * w).sum(1)]), float(margin.min())


def build(ic: InitialCondition, quad: Quadrature = Quadrature()) -> ParametricSolution:
    """Tabulate cumulative momentum integrals over one period [0, 2L]."""
    if quad.panels < 8 or quad.nodes < 4:
        raise InvalidArgument("quadrature needs at least 8 panels x 4 nodes")
    gx, gw = _gauss(quad.nodes)
    L2 = 2 * ic.L
    panels = quad.panels
    edges = np.linspace(0.0, L2, panels + 1)
    coarse, margin = _panel_integrals(ic, edges, gx, gw)
    while True:
        fine_edges = np.linspace(0.0, L2, 2 * panels + 1)
        fine, margin = _panel_integrals(ic, fine_edges, gx, gw)
        # compare per coarse panel so the cumulative table is checked, not just the total
        diff = np.abs(fine[:, 0::2] + fine[:, 1::2] - coarse)
        scale = max(1.0, float(np.abs(fine).sum(axis=1).max()))
        err = float(diff.sum(axis=1).max()) / scale
        panels *= 2
        edges, coarse = fine_edges, fine
        if err <= quad.tol:
            break
        if 2 * panels > quad.max_panels:
            raise QuadratureNotConverged(
                f"error estimate {err:.3e} above {quad.tol:.1e} with {panels} panels"
            )
    cumulative = np.concatenate([np.zeros((3, 1)), np.cumsum(coarse, axis=1)], axis=1)
    K = 0.5 * cumulative[0, -1]
    used = Quadrature(panels, quad.nodes, quad.tol, quad.max_panels)
    return ParametricSolution(ic, used, edges, cumulative, float(K), err, margin)


@lru_cache(maxsize=None)
def _gauss(n):
    return np.polynomial.legendre.leggauss(n)


def primitives(ps: ParametricSolution, lam):
    """Antiderivatives (P_t, P_x, P_z)(lam) = int_0^lam pi, for any real lam."""
    lam = np.asarray(lam, float)
    L2 = 2 * ps.ic.L
    q = np.floor(lam / L2)
    r = lam - q * L2
    j = np.clip(np.searchsorted(ps.edges, r, side="right") - 1, 0, len(ps.edges) - 2)
    e = ps.edges[j]
    gx, gw = _gauss(ps.quad.nodes)
    h = (r - e)[..., None]
    nodes = e[..., None] + (gx + 1) * h / 2
    pt, px, pz = momentum_densities(ps.ic, nodes)
    w = gw * h / 2
    partial = np.stack([(pt * w).sum(-1), (px * w).sum(-1), (pz * w).sum(-1)])
    base = ps.cumulative[:, j]
    total = ps.cumulative[:, -1]
    return base + partial + q * total[(slice(None),) + (None,) * lam.ndim]


def evaluate(ps: ParametricSolution, alpha, beta):
    """(t, x, z) at parameters (alpha, beta)."""
    alpha = np.asarray(alpha, float)
    beta = np.asarray(beta, float)
    Pa = primitives(ps, alpha)
    Pb = primitives(ps, beta)
    d = 0.5 * (Pb - Pa)
    t = d[0]
    x = 0.5 * (alpha + beta) + d[1]
    z = 0.5 * (ps.ic.a(alpha) + ps.ic.a(beta)) + d[2]
    return t, x, z


def _jacobian(ps, alpha, beta):
    pta, pxa, pza = momentum_densities(ps.ic, alpha)
    ptb, pxb, pzb = momentum_densities(ps.ic, beta)
    # d/dalpha of 1/2 int_alpha^beta f = -f(alpha)/2
    t_a, t_b = -0.5 * pta, 0.5 * ptb
    x_a, x_b = 0.5 - 0.5 * pxa, 0.5 + 0.5 * pxb
    z_a = 0.5 * ps.ic.a_prime(alpha) - 0.5 * pza
    z_b = 0.5 * ps.ic.a_prime(beta) + 0.5 * pzb
    return (x_a, x_b, t_a, t_b), (z_a, z_b)


@dataclass
class _InvertStats:
    newton_iterations: int = 0
    fallbacks: int = 0


def invert(ps: ParametricSolution, x, t, tol=1e-13, max_iter=60):
    """Parameters (alpha, beta) with (x(alpha, beta), t(alpha, beta)) = (x, t).

    Damped Newton with the analytic Jacobian, seeded by the light-cone guess
    rescaled to the phase velocity L/K; points that stall fall back to a
    nested bracketed solve exploiting dt/dxi >= 1 along xi = (beta - alpha)/2.
    """
    x = np.asarray(x, float)
    t = np.asarray(t, float)
    shape = np.broadcast(x, t).shape
    x = np.broadcast_to(x, shape).ravel().copy()
    t = np.broadcast_to(t, shape).ravel().copy()
    scale = max(ps.ic.L, ps.K)
    abs_tol = tol * scale
    v = ps.ic.L / ps.K
    al = x - t * v
    be = x + t * v
    tt, xx, _ = evaluate(ps, al, be)
    fx, ft = xx - x, tt - t
    res = np.hypot(fx, ft)
    active = res > abs_tol
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        (x_a, x_b, t_a, t_b), _z = _jacobian(ps, al[idx], be[idx])
        det = x_a * t_b - x_b * t_a
        da = -(t_b * fx[idx] - x_b * ft[idx]) / det
        db = -(-t_a * fx[idx] + x_a * ft[idx]) / det
        step = np.ones(len(idx))
        done = np.zeros(len(idx), bool)
        for _ in range(30):
            na = al[idx] + step * da
            nb = be[idx] + step * db
            nt, nx, _ = evaluate(ps, na, nb)
            nfx, nft = nx - x[idx], nt - t[idx]
            nres = np.hypot(nfx, nft)
            ok = (nres < res[idx]) | (nres <= abs_tol)
            accept = ok & ~done
            sel = idx[accept]
            al[sel], be[sel] = na[accept], nb[accept]
            fx[sel], ft[sel], res[sel] = nfx[accept], nft[accept], nres[accept]
            done |= ok
            if done.all():
                break
            step = np.where(done, step, step / 2)
        stalled = idx[~done]
        active = res > abs_tol
        active[stalled] = False
    bad = np.nonzero(res > abs_tol)[0]
    for i in bad:
        al[i], be[i] = _invert_bracketed(ps, x[i], t[i], abs_tol)
    return al.reshape(shape), be.reshape(shape)


_RTOL = 4 * np.finfo(float).eps   # brentq's floor


def _invert_bracketed(ps, x, t, abs_tol):
    def xi_for(sigma):
        # t(sigma - xi, sigma + xi) is increasing in xi with slope >= 1
        g = lambda xi: evaluate(ps, sigma - xi, sigma + xi)[0] - t
        lo, hi = -abs(t) - 1.0, abs(t) + 1.0
        return optimize.brentq(g, lo, hi, xtol=1e-15, rtol=_RTOL)

    def h(sigma):
        xi = xi_for(sigma)
        return evaluate(ps, sigma - xi, sigma + xi)[1] - x

    width = max(ps.ic.L, abs(t))
    lo, hi = x - width, x + width
    for _ in range(20):
        if h(lo) < 0 < h(hi):
            break
        lo, hi = lo - width, hi + width
    else:
        raise InversionNotConverged(x, t, {"bracket": (lo, hi)})
    sigma = optimize.brentq(h, lo, hi, xtol=1e-15, rtol=_RTOL)
    xi = xi_for(sigma)
    tt, xx, _ = evaluate(ps, sigma - xi, sigma + xi)
    if math.hypot(tt - t, xx - x) > 100 * abs_tol:
        raise InversionNotConverged(x, t, {"residual": math.hypot(tt - t, xx - x)})
    return sigma - xi, sigma + xi


def field_at(ps: ParametricSolution, x, t) -> FieldSample:
    """u, u_x, u_t and the hyperbolicity margin at physical points."""
    al, be = invert(ps, x, t)
    _, _, z = evaluate(ps, al, be)
    (x_a, x_b, t_a, t_b), (z_a, z_b) = _jacobian(ps, al, be)
    det = x_a * t_b - x_b * t_a
    ux = (z_a * t_b - z_b * t_a) / det
    ut = (-z_a * x_b + z_b * x_a) / det
    return FieldSample(x=np.asarray(x, float), t=np.asarray(t, float), u=z,
                       ux=ux, ut=ut, margin=1 + ux * ux - ut * ut, source="parametric")


def field_value(ps: ParametricSolution, x, t):
    al, be = invert(ps, x, t)
    return evaluate(ps, al, be)[2]


@dataclass
class SymmetryReport:
    antisymmetry: float
    x_periodicity: float
    t_periodicity: float
    dirichlet: float
    null_condition: float
    scale: float

    @property
    def worst(self):
        return max(self.antisymmetry, self.x_periodicity, self.t_periodicity,
                   self.dirichlet, self.null_condition)

    def to_dict(self):
        d = dict(self.__dict__)
        d["worst"] = self.worst
        return d


def validate_symmetries(ps: ParametricSolution, samples=64, seed=0) -> SymmetryReport:
    """Worst violations of the standing-wave symmetries, in units of max|u~|."""
    rng = np.random.default_rng(seed)
    L = ps.ic.L
    B = ps.ic.background_B
    x = rng.uniform(0, 2 * L, samples)
    t = rng.uniform(0, 2 * ps.K, samples)
    u = field_value(ps, x, t)
    tilde = u - B * x
    scale = max(1.0, float(np.abs(tilde).max()))
    anti = np.abs(field_value(ps, -x, t) + u)
    xper = np.abs(field_value(ps, x + 2 * L, t) - B * (x + 2 * L) - tilde)
    tper = np.abs(field_value(ps, x, t + 2 * ps.K) - u)
    d0 = np.abs(field_value(ps, np.zeros_like(t), t))
    dL = np.abs(field_value(ps, np.full_like(t, L), t) - B * L)
    # (rho' +- pi) must be null in the metric diag(1, -1, -1)
    gx, _ = _gauss(ps.quad.nodes)
    h = np.diff(ps.edges)
    nodes = (ps.edges[:-1, None] + (gx + 1) * h[:, None] / 2).ravel()
    pt, px, pz = momentum_densities(ps.ic, nodes)
    ap = ps.ic.a_prime(nodes)
    null = 0.0
    for sgn in (1.0, -1.0):
        vt, vx, vz = sgn * pt, 1 + sgn * px, ap + sgn * pz
        norm = vt * vt - vx * vx - vz * vz
        null = max(null, float(np.max(np.abs(norm) / (vt * vt))))
    return SymmetryReport(
        antisymmetry=float(anti.max()) / scale,
        x_periodicity=float(xper.max()) / scale,
        t_periodicity=float(tper.max()) / scale,
        dirichlet=float(max(d0.max(), dL.max())) / scale,
        null_condition=null,
        scale=scale,
    )
