"""Smooth function tables: quintic Hermite interpolation and curve utilities.

ODE-generated families only carry samples, but the surface jets need two
continuous derivatives.  A quintic Hermite segment matches value, first and
second derivative at both endpoints, so interpolated data stays C^2 and the
interpolation error is O(h^6).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError


class QuinticHermite:
    """Piecewise-quintic interpolant from (f, f', f'') samples.

    ``f`` may have shape (n,) or (n, m); evaluation preserves the trailing
    axis.  Evaluation slightly outside the node range extrapolates with the
    boundary segment (callers do their own domain policing).
    """

    def __init__(self, x, f, d1, d2):
        x = np.asarray(x, dtype=float)
        f = np.asarray(f, dtype=float)
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        if x.ndim != 1 or len(x) < 2:
            raise ValidationError("need at least two interpolation nodes")
        if np.any(np.diff(x) <= 0):
            raise ValidationError("interpolation nodes must be increasing")
        if f.shape != d1.shape or f.shape != d2.shape or f.shape[0] != len(x):
            raise ValidationError("sample arrays must share shape (n, ...)")
        self.x = x
        scalar = f.ndim == 1
        if scalar:
            f, d1, d2 = f[:, None], d1[:, None], d2[:, None]
        self._scalar = scalar
        h = np.diff(x)[:, None]
        f0, f1 = f[:-1], f[1:]
        g0, g1 = d1[:-1], d1[1:]
        s0, s1 = d2[:-1], d2[1:]
        # Monomial coefficients on each segment in (x - x_i).
        A = f1 - (f0 + g0 * h + 0.5 * s0 * h * h)
        B = g1 - (g0 + s0 * h)
        C = s1 - s0
        c0, c1, c2 = f0, g0, 0.5 * s0
        c3 = (10.0 * A - 4.0 * B * h + 0.5 * C * h * h) / h**3
        c4 = (-15.0 * A + 7.0 * B * h - C * h * h) / h**4
        c5 = (6.0 * A - 3.0 * B * h + 0.5 * C * h * h) / h**5
        self._coef = np.stack([c0, c1, c2, c3, c4, c5], axis=1)  # (n-1, 6, m)

    def _segments(self, u):
        u = np.asarray(u, dtype=float)
        idx = np.clip(np.searchsorted(self.x, u, side="right") - 1, 0, len(self.x) - 2)
        return u, idx, u - self.x[idx]

    def eval2(self, u):
        """Return (value, first derivative, second derivative) at ``u``."""
        u, idx, t = self._segments(u)
        c = self._coef[idx]  # (..., 6, m)
        t = t[..., None]
        v = c[..., 5, :]
        d = np.zeros_like(v)
        s = np.zeros_like(v)
        for k in range(4, -1, -1):
            s = s * t + 2.0 * d
            d = d * t + v
            v = v * t + c[..., k, :]
        if self._scalar:
            return v[..., 0], d[..., 0], s[..., 0]
        return v, d, s

    def __call__(self, u):
        return self.eval2(u)[0]


@dataclass(frozen=True)
class ScalarFunc:
    """Scalar function of one variable with two derivatives available."""

    f: Callable
    d1: Callable
    d2: Callable

    def eval2(self, u):
        u = np.asarray(u, dtype=float)
        shape = np.shape(u)
        out = (np.broadcast_to(np.asarray(self.f(u), dtype=float), shape).copy(),
               np.broadcast_to(np.asarray(self.d1(u), dtype=float), shape).copy(),
               np.broadcast_to(np.asarray(self.d2(u), dtype=float), shape).copy())
        return out

    def __call__(self, u):
        v, _, _ = self.eval2(u)
        return v

    @staticmethod
    def constant(c):
        c = float(c)
        return ScalarFunc(lambda u: np.full(np.shape(u), c),
                          lambda u: np.zeros(np.shape(u)),
                          lambda u: np.zeros(np.shape(u)))

    @staticmethod
    def from_poly(coeffs):
        """Polynomial with coefficients in increasing degree order."""
        p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=float))
        return ScalarFunc(p, p.deriv(1), p.deriv(2))

    @staticmethod
    def from_callables(f, d1, d2):
        return ScalarFunc(f, d1, d2)

    @staticmethod
    def from_table(x, f, d1, d2):
        h = QuinticHermite(x, f, d1, d2)
        return ScalarFunc(lambda u: h.eval2(u)[0],
                          lambda u: h.eval2(u)[1],
                          lambda u: h.eval2(u)[2])


@dataclass(frozen=True)
class Curve3:
    """Space curve with two derivatives; all evaluators are vectorized."""

    pos: Callable
    d1: Callable
    d2: Callable

    def eval2(self, s):
        s = np.asarray(s, dtype=float)
        return (np.asarray(self.pos(s), dtype=float),
                np.asarray(self.d1(s), dtype=float),
                np.asarray(self.d2(s), dtype=float))

    def __call__(self, s):
        return np.asarray(self.pos(s), dtype=float)

    @staticmethod
    def from_callables(pos, d1, d2):
        return Curve3(pos, d1, d2)

    @staticmethod
    def from_table(x, p, d1, d2):
        h = QuinticHermite(x, p, d1, d2)
        return Curve3(lambda s: h.eval2(s)[0],
                      lambda s: h.eval2(s)[1],
                      lambda s: h.eval2(s)[2])


def compose_reparam(curve: Curve3, smap: ScalarFunc) -> Curve3:
    """Curve composed with a parameter change s = smap(t), chain rule jets."""

    def pos(t):
        return curve.pos(smap(t))

    def d1(t):
        s, sp, _ = smap.eval2(t)
        return curve.d1(s) * sp[..., None]

    def d2(t):
        s, sp, spp = smap.eval2(t)
        return curve.d2(s) * (sp * sp)[..., None] + curve.d1(s) * spp[..., None]

    return Curve3(pos, d1, d2)


class _ArclenMap:
    """Inverse arc-length map s(l) for a regular curve segment."""

    def __init__(self, curve: Curve3, s_range, n=2001):
        s0, s1 = float(s_range[0]), float(s_range[1])
        nodes = np.linspace(s0, s1, n)
        _, dp, ddp = curve.eval2(nodes)
        speed = np.linalg.norm(dp, axis=-1)
        if np.any(speed <= 0):
            raise ValidationError("curve is not regular on the given range")
        # l(s) by per-interval 5-point Gauss-Legendre.
        gx, gw = np.polynomial.legendre.leggauss(5)
        mid = 0.5 * (nodes[:-1] + nodes[1:])
        half = 0.5 * np.diff(nodes)
        sq = mid[:, None] + half[:, None] * gx[None, :]
        spd_q = np.linalg.norm(curve.d1(sq.ravel()), axis=-1).reshape(sq.shape)
        seg = half * (spd_q @ gw)
        ell = np.concatenate([[0.0], np.cumsum(seg)])
        dl = speed
        ddl = np.einsum("ij,ij->i", dp, ddp) / speed
        self._curve = curve
        self._ell_of_s = QuinticHermite(nodes, ell, dl, ddl)
        self._s0, self._s1 = s0, s1
        self.total_length = float(ell[-1])
        self._ell_nodes = ell
        self._s_nodes = nodes

    def s_of_ell(self, ell):
        ell = np.asarray(ell, dtype=float)
        s = np.interp(ell, self._ell_nodes, self._s_nodes)
        for _ in range(30):
            val, der, _ = self._ell_of_s.eval2(s)
            step = (val - ell) / der
            s = np.clip(s - step, self._s0, self._s1)
            if np.max(np.abs(step)) < 1e-14:
                break
        return s

    def _speed2(self, s):
        # exact l'(s) and l''(s) from the curve jets (the interpolant is
        # only used to locate s; derivatives stay at analytic accuracy)
        _, dp, ddp = self._curve.eval2(s)
        lp = np.linalg.norm(dp, axis=-1)
        lpp = np.einsum("...i,...i->...", dp, ddp) / lp
        return lp, lpp

    def smap(self) -> ScalarFunc:
        def f(ell):
            return self.s_of_ell(ell)

        def d1(ell):
            lp, _ = self._speed2(self.s_of_ell(ell))
            return 1.0 / lp

        def d2(ell):
            lp, lpp = self._speed2(self.s_of_ell(ell))
            return -lpp / lp**3

        return ScalarFunc(f, d1, d2)


def reparametrize_arclength(curve: Curve3, s_range, n=2001):
    """Re-parametrize a regular curve by arc length.

    Returns (curve_in_arclength, (0, L), smap) where smap carries the old
    parameter as a function of arc length, for re-parametrizing companion
    curves consistently.
    """
    amap = _ArclenMap(curve, s_range, n=n)
    smap = amap.smap()
    return compose_reparam(curve, smap), (0.0, amap.total_length), smap
