"""Standing waves on a uniform magnetic background u = B x + ...

Three independent views of the same physics:

* the first-order Lindstedt correction around u0 = (A/2) s11 + B x,
* the parametric construction with a(x) = B x + a~(x), whose period ratio
  K/L tends to sqrt(1 + B^2/b^2) when the oscillation is small,
* the phase velocity b / sqrt(b^2 + B^2) of the effective metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .errors import InvalidArgument, NegativeOmegaSquared
from .minimal_surface import InitialCondition, Quadrature, build
from .residual_check import FieldSample, bi_residual
from .trig_algebra import TrigSeries, differentiate

# coefficient of eps^2 in 1 - omega^2/k^2 at B = 0, as printed for the
# background expansion and as produced by the vacuum recursion
PRINTED_COEFFICIENT = Fraction(1, 4)
VACUUM_COEFFICIENT = Fraction(1, 2)


@dataclass(frozen=True)
class BackgroundConfig:
    B: float = 0.0
    A: float = 0.1
    k: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.b > 0:
            raise InvalidArgument(f"b must be positive, got {self.b}")
        if not self.A > 0:
            raise InvalidArgument(f"A must be positive, got {self.A}")
        if not self.k > 0:
            raise InvalidArgument(f"k must be positive, got {self.k}")

    @property
    def eps(self):
        return self.A * self.k / self.b


@dataclass(frozen=True)
class MagneticFirstOrder:
    """omega^2/k^2 through eps^2 and the correction u1/A (eps-tagged)."""

    omega_sq_over_k_sq: float
    correction: TrigSeries
    eps: float
    coefficient: Fraction

    def to_dict(self):
        return {
            "omegaSqOverKSq": self.omega_sq_over_k_sq,
            "eps": self.eps,
            "coefficient": [self.coefficient.numerator, self.coefficient.denominator],
            "correction": self.correction.to_records(),
        }


def _ratio(cfg):
    # B/(A k) as an exact rational of the float inputs
    return Fraction(cfg.B) / (Fraction(cfg.A) * Fraction(cfg.k))


def dispersion_first_order(cfg: BackgroundConfig, coefficient=PRINTED_COEFFICIENT):
    """1 - (c + (B/(A k))^2) eps^2, i.e. 1 - c eps^2 - B^2/b^2."""
    return 1 - (float(coefficient) + (cfg.B / (cfg.A * cfg.k)) ** 2) * cfg.eps ** 2


def magnetic_first_order(cfg: BackgroundConfig) -> MagneticFirstOrder:
    """First-order correction on the background.

    u1/A = eps^2/64 (s13 + s31 + 8 B/(A k) s20); the s20 = 2 sin(2kx) term is
    time independent and lives on the even-x, m = 0 part of the lattice.
    """
    c = Fraction(1, 64)
    corr = (TrigSeries.s(1, 3, c, eps=2) + TrigSeries.s(3, 1, c, eps=2)
            + TrigSeries.s(2, 0, 8 * c * _ratio(cfg), eps=2))
    return MagneticFirstOrder(dispersion_first_order(cfg), corr, cfg.eps,
                              PRINTED_COEFFICIENT)


def field_series(cfg: BackgroundConfig) -> TrigSeries:
    """u/A without the B x term: (1/2) s11 + u1/A."""
    return TrigSeries.s(1, 1, Fraction(1, 2)) + magnetic_first_order(cfg).correction


def sample(cfg: BackgroundConfig, x, t, omega) -> FieldSample:
    """Analytic derivatives of B x + A (field_series) at frequency ``omega``."""
    s = field_series(cfg)
    sx, st = differentiate(s, "x"), differentiate(s, "t")
    ev = lambda ser: cfg.A * ser.evaluate(x, t, cfg.k, omega, cfg.eps)
    return FieldSample(
        x=x, t=t,
        u=cfg.B * np.asarray(x, float) + ev(s),
        ux=cfg.B + ev(sx), ut=ev(st),
        uxx=ev(differentiate(sx, "x")), utt=ev(differentiate(st, "t")),
        uxt=ev(differentiate(sx, "t")),
        source="lindstedt",
    )


def _phase_grid(cfg, omega, grid):
    p = (np.arange(grid) + 0.5) * (2 * math.pi / grid)
    X, T = np.meshgrid(p / cfg.k, p / omega, indexing="ij")
    return X, T


def residual_at(cfg: BackgroundConfig, omega, grid=48):
    """max |BI residual| / (A k^2) of the first-order field at ``omega``."""
    X, T = _phase_grid(cfg, omega, grid)
    r = bi_residual(sample(cfg, X, T, omega), cfg.b)
    return float(np.max(np.abs(r))) / (cfg.A * cfg.k ** 2)


@dataclass(frozen=True)
class Adjudication:
    best_omega_sq_over_k_sq: float
    best_coefficient: float
    residual_best: float
    residual_printed: float
    residual_vacuum: float
    preferred: str

    def to_dict(self):
        return {
            "bestOmegaSqOverKSq": self.best_omega_sq_over_k_sq,
            "bestCoefficient": self.best_coefficient,
            "residualBest": self.residual_best,
            "residualPrinted": self.residual_printed,
            "residualVacuum": self.residual_vacuum,
            "preferred": self.preferred,
        }


def adjudicate_dispersion(cfg: BackgroundConfig, grid=48) -> Adjudication:
    """Minimize the residual over omega at fixed eps.

    The minimizer is reported as an effective coefficient
    c = (1 - omega^2/k^2 - B^2/b^2)/eps^2, to be compared with the printed
    1/4 and the vacuum recursion's 1/2.
    """
    eps2 = cfg.eps ** 2
    shift = (cfg.B / cfg.b) ** 2

    def w_of(c):
        w = 1 - c * eps2 - shift
        if w <= 0:
            raise NegativeOmegaSquared(cfg.eps, w)
        return w

    f = lambda c: residual_at(cfg, cfg.k * math.sqrt(w_of(c)), grid)
    res = optimize.minimize_scalar(f, bounds=(-0.5, 1.5), method="bounded",
                                   options={"xatol": 1e-10})
    rp, rv = f(float(PRINTED_COEFFICIENT)), f(float(VACUUM_COEFFICIENT))
    c = float(res.x)
    preferred = "printed" if abs(c - 0.25) < abs(c - 0.5) else "vacuum"
    return Adjudication(w_of(c), c, float(res.fun), rp, rv, preferred)


def background_ic(B, tilde_a=(), v0=(), L=math.pi, b=1.0, check=True) -> InitialCondition:
    """a(x) = B x + a~(x) with oscillatory parts a~ and v0.

    ``tilde_a`` is either a sequence of sine coefficients or a pair of
    callables (a~, a~'); ``v0`` is a sequence of sine coefficients or a
    callable.  Data are rescaled to b = 1 units (u -> u/b), the convention of
    the parametric solver.  Raises SymmetryViolation unless a~ and v0 are odd
    and 2L-periodic.
    """
    if not b > 0:
        raise InvalidArgument(f"b must be positive, got {b}")
    if callable(v0) or (tilde_a and callable(tilde_a[0])):
        f, fp = tilde_a if tilde_a else (lambda x: 0 * np.asarray(x, float),) * 2
        vf = v0 if callable(v0) else InitialCondition.from_sine_series((), v0, L).v0
        ic = InitialCondition(
            a=lambda x: (B * np.asarray(x, float) + f(x)) / b,
            a_prime=lambda x: (B + fp(x)) / b,
            v0=lambda x: vf(x) / b,
            L=float(L), background_B=B / b, label=f"background B={B}",
        )
    else:
        ic = InitialCondition.from_sine_series(
            [c / b for c in tilde_a], [c / b for c in v0], L, B / b,
            label=f"background B={B}",
        )
    if check:
        ic.check_symmetries()
    return ic


def period_ratio(ic: InitialCondition, quad: Quadrature = Quadrature()):
    """K/L from the built parametric solution."""
    return build(ic, quad).K / ic.L


def effective_metric_velocity(B, b=1.0):
    if not b > 0:
        raise InvalidArgument(f"b must be positive, got {b}")
    return b / math.hypot(b, B)
