"""Exact algebra on finite trigonometric series in the phases X = kx, T = wt.

A series is a finite sum of terms

    coeff * f(n X) * g(m T) * eps**e * k**kp * w**wp

with ``f, g`` each either ``sin`` or ``cos``, integer harmonics ``n, m >= 0``
and an exact rational ``coeff``.  The powers of ``k`` and ``w`` are formal
scale markers produced by differentiation, so that ``w**2`` can later be
replaced by the graded dispersion series instead of a floating value.

This module is deliberately generic: it knows nothing about the
Poincare-Lindstedt recursion and is used to check it.
"""

from __future__ import annotations

import json
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InvalidArgument

SIN, COS = "s", "c"
PARITIES = ("sc", "cs", "ss", "cc")

# key layout: (n, m, parity, eps_power, k_power, w_power)
Key = tuple


def _canonical(n, m, parity, coeff):
    """Fold negative harmonics and drop identically-zero factors.

    Returns ``(n, m, parity, coeff)`` or ``None`` when the term vanishes.
    """
    fx, ft = parity[0], parity[1]
    if n < 0:
        n = -n
        if fx == SIN:
            coeff = -coeff
    if m < 0:
        m = -m
        if ft == SIN:
            coeff = -coeff
    if (n == 0 and fx == SIN) or (m == 0 and ft == SIN):
        return None
    return n, m, fx + ft, coeff


def _product_1d(f1, a, f2, b):
    """Product-to-sum for one phase: f1(aY) f2(bY) = sum c * f(hY)."""
    if f1 == SIN and f2 == SIN:
        return ((Fraction(1, 2), COS, a - b), (Fraction(-1, 2), COS, a + b))
    if f1 == COS and f2 == COS:
        return ((Fraction(1, 2), COS, a - b), (Fraction(1, 2), COS, a + b))
    if f1 == SIN and f2 == COS:
        return ((Fraction(1, 2), SIN, a + b), (Fraction(1, 2), SIN, a - b))
    # cos(a) sin(b)
    return ((Fraction(1, 2), SIN, a + b), (Fraction(-1, 2), SIN, a - b))


class TrigSeries:
    """Immutable canonical sum of trigonometric lattice terms."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Fraction] | Iterable = ()):
        acc = defaultdict(Fraction)
        items = terms.items() if isinstance(terms, Mapping) else terms
        for key, coeff in items:
            n, m, parity, e, kp, wp = key
            if parity not in PARITIES:
                raise InvalidArgument(f"unknown parity {parity!r}")
            canon = _canonical(n, m, parity, Fraction(coeff))
            if canon is None:
                continue
            n, m, parity, c = canon
            acc[(n, m, parity, e, kp, wp)] += c
        self._terms = {k: v for k, v in acc.items() if v != 0}

    # construction helpers -------------------------------------------------

    @classmethod
    def term(cls, n, m, parity="sc", coeff=1, eps=0, kpow=0, wpow=0):
        return cls([((n, m, parity, eps, kpow, wpow), Fraction(coeff))])

    @classmethod
    def constant(cls, c=1):
        return cls.term(0, 0, "cc", c)

    @classmethod
    def s(cls, n, m, coeff=1, eps=0):
        """``coeff * s_nm`` with s_nm = sin(nX + mT) + sin(nX - mT) = 2 sin(nX) cos(mT)."""
        return cls.term(n, m, "sc", 2 * Fraction(coeff), eps)

    # container protocol ---------------------------------------------------

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        if isinstance(other, TrigSeries):
            return self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "TrigSeries(0)"
        parts = []
        for (n, m, p, e, kp, wp), c in sorted(self._terms.items()):
            fx = "sin" if p[0] == SIN else "cos"
            ft = "sin" if p[1] == SIN else "cos"
            scale = "".join(
                f"*{sym}^{pw}" for sym, pw in (("eps", e), ("k", kp), ("w", wp)) if pw
            )
            parts.append(f"{c}*{fx}({n}X)*{ft}({m}T){scale}")
        return "TrigSeries(" + " + ".join(parts) + ")"

    def coeff(self, n, m, parity="sc", eps=0, kpow=0, wpow=0):
        return self._terms.get((n, m, parity, eps, kpow, wpow), Fraction(0))

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, TrigSeries):
            return NotImplemented
        merged = list(self._terms.items()) + list(other._terms.items())
        return TrigSeries(merged)

    def __neg__(self):
        return TrigSeries({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        return TrigSeries({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, TrigSeries):
            return multiply(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def shift(self, eps=0, kpow=0, wpow=0):
        """Multiply by eps**eps * k**kpow * w**wpow."""
        return TrigSeries(
            {(n, m, p, e + eps, kp + kpow, wp + wpow): c
             for (n, m, p, e, kp, wp), c in self._terms.items()}
        )

    def truncate(self, max_eps):
        return TrigSeries({k: v for k, v in self._terms.items() if k[3] <= max_eps})

    def eps_block(self, e):
        """Terms carrying exactly eps**e, with the eps power reset to zero."""
        return TrigSeries(
            {(n, m, p, 0, kp, wp): c
             for (n, m, p, ee, kp, wp), c in self._terms.items() if ee == e}
        )

    def eps_powers(self):
        return sorted({k[3] for k in self._terms})

    # numerics -------------------------------------------------------------

    def evaluate(self, x, t, k=1.0, omega=1.0, eps=0.0):
        """Floating evaluation at physical (x, t); X = k x and T = omega t.

        ``x`` and ``t`` may be numpy arrays (broadcast together).
        """
        x = np.asarray(x, float)
        t = np.asarray(t, float)
        total = np.zeros(np.broadcast(x, t).shape)
        for (n, m, p, e, kp, wp), c in self._terms.items():
            fx = np.sin(n * k * x) if p[0] == SIN else np.cos(n * k * x)
            ft = np.sin(m * omega * t) if p[1] == SIN else np.cos(m * omega * t)
            total += float(c) * fx * ft * eps**e * k**kp * omega**wp
        return total if total.ndim else float(total)

    # serialization ----------------------------------------------------------

    def to_records(self):
        """JSON-ready list of ``{n, m, parity, num, den, epsPower, ...}``."""
        records = []
        for (n, m, p, e, kp, wp), c in sorted(self._terms.items()):
            rec = {"n": n, "m": m, "parity": p, "num": c.numerator,
                   "den": c.denominator, "epsPower": e}
            if kp:
                rec["kPower"] = kp
            if wp:
                rec["omegaPower"] = wp
            records.append(rec)
        return records

    @classmethod
    def from_records(cls, records):
        return cls(
            ((r["n"], r["m"], r["parity"], r.get("epsPower", 0),
              r.get("kPower", 0), r.get("omegaPower", 0)),
             Fraction(r["num"], r["den"]))
            for r in records
        )

    def to_json(self, **kwargs):
        return json.dumps(self.to_records(), **kwargs)


ZERO = TrigSeries()


def multiply(a: TrigSeries, b: TrigSeries, max_eps=None) -> TrigSeries:
    """Exact product of two canonical series, optionally truncated in eps."""
    acc = defaultdict(Fraction)
    for (n1, m1, p1, e1, k1, w1), c1 in a.items():
        for (n2, m2, p2, e2, k2, w2), c2 in b.items():
            e = e1 + e2
            if max_eps is not None and e > max_eps:
                continue
            c12 = c1 * c2
            xs = _product_1d(p1[0], n1, p2[0], n2)
            ts = _product_1d(p1[1], m1, p2[1], m2)
            for cx, fx, hx in xs:
                for ct, ft, ht in ts:
                    canon = _canonical(hx, ht, fx + ft, c12 * cx * ct)
                    if canon is None:
                        continue
                    n, m, p, c = canon
                    acc[(n, m, p, e, k1 + k2, w1 + w2)] += c
    return TrigSeries(acc)


def differentiate(s: TrigSeries, axis: str) -> TrigSeries:
    """Exact partial derivative along ``"x"`` or ``"t"``.

    The chain-rule factor k (for x) or w (for t) is recorded as a formal
    power, the integer harmonic is multiplied into the coefficient.
    """
    if axis not in ("x", "t"):
        raise InvalidArgument(f"axis must be 'x' or 't', got {axis!r}")
    out = []
    for (n, m, p, e, kp, wp), c in s.items():
        fx, ft = p[0], p[1]
        if axis == "x":
            if fx == SIN:
                out.append(((n, m, COS + ft, e, kp + 1, wp), c * n))
            else:
                out.append(((n, m, SIN + ft, e, kp + 1, wp), -c * n))
        else:
            if ft == SIN:
                out.append(((n, m, fx + COS, e, kp, wp + 1), c * m))
            else:
                out.append(((n, m, fx + SIN, e, kp, wp + 1), -c * m))
    return TrigSeries(out)


def dispersion_series(xi) -> TrigSeries:
    """The graded constant w(eps) = sum xi_M eps^(2M), i.e. omega^2/k^2."""
    return TrigSeries(((0, 0, "cc", 2 * i, 0, 0), Fraction(x)) for i, x in enumerate(xi))


def substitute_dispersion(s: TrigSeries, xi, max_eps) -> TrigSeries:
    """Replace (w/k)^(2j) by the truncated graded series w(eps)^j.

    Every term must be scale-free in the combination k^kp w^wp with
    kp + wp == 0 and wp even, which holds for any dimensionless quantity
    built from eps, k and w.
    """
    w = dispersion_series(xi).truncate(max_eps)
    powers = [TrigSeries.constant(1)]
    out = ZERO
    by_power = defaultdict(list)
    for (n, m, p, e, kp, wp), c in s.items():
        if kp + wp != 0 or wp % 2:
            raise InvalidArgument(
                f"term with k^{kp} w^{wp} is not a function of (w/k)^2"
            )
        by_power[wp // 2].append(((n, m, p, e, 0, 0), c))
    for j in sorted(by_power):
        if j < 0:
            raise InvalidArgument("negative powers of w are not supported")
        while len(powers) <= j:
            powers.append(multiply(powers[-1], w, max_eps))
        out = out + multiply(TrigSeries(by_power[j]), powers[j], max_eps)
    return out.truncate(max_eps)


def bi_operator_symbolic(u: TrigSeries, xi, max_order: int) -> TrigSeries:
    """Normalized Born-Infeld left-hand side of an eps-graded field.

    ``u`` is the field divided by the amplitude A, written in the phases
    X = kx, T = wt with pure-number coefficients and even eps powers.  The
    result is

        (u_xx - u_tt - b^-2 (u_t^2 u_xx + u_x^2 u_tt - 2 u_x u_t u_xt)) / (A k^2)

    with (A/b)^2 = eps^2 / k^2 and w^2 = k^2 sum xi_M eps^(2M), truncated at
    eps^(2 max_order).  All arithmetic is exact.
    """
    if max_order < 0:
        raise InvalidArgument("max_order must be >= 0")
    top = 2 * max_order
    u = u.truncate(top)
    ux = differentiate(u, "x")
    ut = differentiate(u, "t")
    uxx = differentiate(ux, "x")
    utt = differentiate(ut, "t")
    uxt = differentiate(ux, "t")

    nl_top = top - 2
    linear = (uxx - utt).shift(kpow=-2)
    if nl_top >= 0:
        ut2 = multiply(ut, ut, nl_top)
        ux2 = multiply(ux, ux, nl_top)
        uxut = multiply(ux, ut, nl_top)
        bracket = (multiply(ut2, uxx, nl_top) + multiply(ux2, utt, nl_top)
                   - multiply(uxut, uxt, nl_top).scale(2))
        # b^-2 A^2 / k^2 = eps^2 / k^4
        nonlinear = bracket.shift(eps=2, kpow=-4)
        total = linear - nonlinear
    else:
        total = linear
    return substitute_dispersion(total, xi, top)
