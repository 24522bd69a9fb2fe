"""Pointwise Born-Infeld residual, hyperbolicity margin and FD derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, MissingDerivatives

SOURCES = ("lindstedt", "parametric", "example", "external")


@dataclass
class FieldSample:
    """Field value and derivatives at one or more (x, t) points.

    Entries may be floats, numpy arrays or object arrays of multiprecision
    numbers; the functions below only use arithmetic on them.
    """

    x: object
    t: object
    u: object
    ux: object = None
    ut: object = None
    uxx: object = None
    utt: object = None
    uxt: object = None
    margin: object = None
    source: str = "external"
    steps: tuple = field(default=None)


def _inv_b2(b):
    if b == math.inf:
        return 0
    if b <= 0:
        raise InvalidArgument(f"Born-Infeld parameter must be positive, got {b}")
    return 1 / (b * b)


def bi_residual(sample: FieldSample, b=1.0):
    """(1 - u_t^2/b^2) u_xx - (1 + u_x^2/b^2) u_tt + 2 u_x u_t u_xt / b^2."""
    needed = ("ux", "ut", "uxx", "utt", "uxt")
    missing = [n for n in needed if getattr(sample, n) is None]
    if missing:
        raise MissingDerivatives(f"sample lacks {', '.join(missing)}")
    g = _inv_b2(b)
    ux, ut = sample.ux, sample.ut
    return ((1 - g * ut * ut) * sample.uxx - (1 + g * ux * ux) * sample.utt
            + 2 * g * ux * ut * sample.uxt)


def hyperbolicity_margin(sample: FieldSample, b=1.0):
    """1 + (u_x^2 - u_t^2)/b^2; positive in the hyperbolic regime."""
    if sample.ux is None or sample.ut is None:
        raise MissingDerivatives("sample lacks first derivatives")
    return 1 + _inv_b2(b) * (sample.ux * sample.ux - sample.ut * sample.ut)


def fd_derivatives(sampler, x, t, hx, ht, source="external") -> FieldSample:
    """Central second-order stencils for all first and second derivatives.

    Truncation error is O(hx^2 + ht^2); round-off grows like eps_mach/h^2
    for the second derivatives.
    """
    if hx <= 0 or ht <= 0:
        raise InvalidArgument("finite-difference steps must be positive")
    f = sampler
    u0 = f(x, t)
    upx, umx = f(x + hx, t), f(x - hx, t)
    upt, umt = f(x, t + ht), f(x, t - ht)
    upp, upm = f(x + hx, t + ht), f(x + hx, t - ht)
    ump, umm = f(x - hx, t + ht), f(x - hx, t - ht)
    return FieldSample(
        x=x, t=t, u=u0,
        ux=(upx - umx) / (2 * hx),
        ut=(upt - umt) / (2 * ht),
        uxx=(upx - 2 * u0 + umx) / (hx * hx),
        utt=(upt - 2 * u0 + umt) / (ht * ht),
        uxt=(upp - upm - ump + umm) / (4 * hx * ht),
        source=source,
        steps=(hx, ht),
    )


@dataclass
class ResidualReport:
    max_abs_residual: float
    min_hyperbolicity_margin: float
    grid: tuple
    steps: tuple = None
    normalization: float = 1.0

    def to_dict(self):
        return {
            "maxAbsResidual": self.max_abs_residual,
            "minHyperbolicityMargin": self.min_hyperbolicity_margin,
            "grid": list(self.grid),
            "steps": None if self.steps is None else list(self.steps),
            "normalization": self.normalization,
        }


def scan(sampler, xs, ts, b=1.0, hx=None, ht=None, normalization=1.0,
         derivatives=None) -> ResidualReport:
    """Residual and margin over the tensor grid ``xs`` x ``ts``.

    Either ``derivatives(x, t) -> FieldSample`` supplies analytic values, or
    ``sampler(x, t) -> u`` is differenced with steps ``hx``, ``ht``.
    """
    X, T = np.meshgrid(np.asarray(xs, float), np.asarray(ts, float), indexing="ij")
    if derivatives is not None:
        s = derivatives(X, T)
        steps = None
    else:
        if hx is None or ht is None:
            raise InvalidArgument("finite-difference scan needs hx and ht")
        s = fd_derivatives(sampler, X, T, hx, ht)
        steps = (hx, ht)
    r = np.abs(np.asarray(bi_residual(s, b), float)) / normalization
    m = np.asarray(hyperbolicity_margin(s, b), float)
    return ResidualReport(float(r.max()), float(m.min()), X.shape, steps, normalization)
