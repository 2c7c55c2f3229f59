"""Stationarity residual of the weighted-area Euler-Lagrange equation.

A surface is stationary for the energy integral of |p|^alpha exactly when
H(p) = alpha * <N(p), p> / |p|^2 at every point; ``residual`` evaluates the
difference between the two sides.  ``fourier_defect`` expands the
denominator-cleared defect in v-harmonics, which is how the cyclic-surface
coefficient formulas are cross-checked numerically.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BandLimitError,
    OriginOnSurfaceError,
    SingularIntegrandError,
    ValidationError,
)
from .surface_kernel import (
    DEFAULT_DOMAIN_MARGIN,
    ParametricPatch,
    eval_jet2,
    fundamental_data,
)

REPORT_CSV_HEADER = ["u", "v", "x", "y", "z", "H", "rhs", "residual"]


@dataclass(frozen=True)
class ResidualReport:
    """Grid evaluation of the stationarity residual."""

    alpha: float
    sample_count: int
    sup_abs: float
    rms: float
    rows: np.ndarray  # (n, 8) columns u, v, x, y, z, H, rhs, residual
    label: str = ""

    def to_json_dict(self):
        return {
            "alpha": self.alpha,
            "label": self.label,
            "sample_count": self.sample_count,
            "sup_abs": self.sup_abs,
            "rms": self.rms,
            "rows": [[_jnum(x) for x in row] for row in self.rows],
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(REPORT_CSV_HEADER)
            for row in self.rows:
                w.writerow([f"{x:.17g}" for x in row])


def _jnum(x):
    x = float(x)
    return x


def _residual_fields(patch, alpha, u, v):
    jet = eval_jet2(patch, u, v)
    fd = fundamental_data(jet)
    p2 = np.einsum("...i,...i->...", jet.P, jet.P)
    if np.any(p2 <= 0.0):
        raise OriginOnSurfaceError("surface touches the origin at a sampled point")
    rhs = alpha * np.einsum("...i,...i->...", fd.normal, jet.P) / p2
    return jet, fd, rhs


def residual(patch: ParametricPatch, alpha: float, u, v):
    """H(p) - alpha * <N,p>/|p|^2 at (u, v); vectorized."""
    _, fd, rhs = _residual_fields(patch, alpha, u, v)
    return fd.H - rhs


def residual_grid(patch: ParametricPatch, alpha: float, nu: int, nv: int,
                  margin: float = DEFAULT_DOMAIN_MARGIN) -> ResidualReport:
    """Residual on a uniform interior grid (u-major row order)."""
    if nu < 2 or nv < 2:
        raise ValidationError("residual grid needs nu, nv >= 2")
    u, v = patch.domain_grid(nu, nv, margin=margin)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    jet, fd, rhs = _residual_fields(patch, alpha, uu, vv)
    res = fd.H - rhs
    rows = np.column_stack([
        uu.ravel(), vv.ravel(),
        jet.P[..., 0].ravel(), jet.P[..., 1].ravel(), jet.P[..., 2].ravel(),
        fd.H.ravel(), rhs.ravel(), res.ravel(),
    ])
    flat = res.ravel()
    return ResidualReport(
        alpha=float(alpha),
        sample_count=flat.size,
        sup_abs=float(np.max(np.abs(flat))),
        rms=float(np.sqrt(np.mean(flat * flat))),
        rows=rows,
        label=patch.label,
    )


def energy(patch: ParametricPatch, alpha: float, nu: int, nv: int) -> float:
    """Quadrature of the weighted area integral of |p|^alpha.

    Gauss-Legendre nodes in non-periodic directions (interior by
    construction, so chart-degenerate endpoints are never sampled), uniform
    midpoint rule in periodic ones.
    """
    un, uw = _axis_rule(patch.u_range, nu, patch.u_periodic)
    vn, vw = _axis_rule(patch.v_range, nv, patch.v_periodic)
    uu, vv = np.meshgrid(un, vn, indexing="ij")
    jet = eval_jet2(patch, uu, vv)
    fd = fundamental_data(jet)
    p2 = np.einsum("...i,...i->...", jet.P, jet.P)
    integrand = p2 ** (alpha / 2.0) * np.sqrt(fd.W)
    if not np.all(np.isfinite(integrand)):
        raise SingularIntegrandError("non-finite integrand sample in energy quadrature")
    return float(np.einsum("i,j,ij->", uw, vw, integrand))


def _axis_rule(rng, n, periodic):
    lo, hi = float(rng[0]), float(rng[1])
    if periodic:
        step = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * step, np.full(n, step)
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    return mid + half * x, half * w


def weighted_defect(patch: ParametricPatch, alpha: float, u, v,
                    with_scale=False):
    """Denominator-cleared residual: residual * W^(3/2) * |p|^2.

    Assembled polynomially from the raw jet (no normalization, no division),
    so it stays finite even where the chart degenerates.  With
    ``with_scale`` also returns the magnitude of the terms before
    cancellation, which bounds the roundoff floor of the defect.
    """
    jet = eval_jet2(patch, u, v)
    cross = np.cross(jet.Pu, jet.Pv)
    dot = lambda a, b: np.einsum("...i,...i->...", a, b)
    E, F, G = dot(jet.Pu, jet.Pu), dot(jet.Pu, jet.Pv), dot(jet.Pv, jet.Pv)
    W = E * G - F * F
    hw = G * dot(jet.Puu, cross) - 2.0 * F * dot(jet.Puv, cross) + E * dot(jet.Pvv, cross)
    p2 = dot(jet.P, jet.P)
    d = hw * p2 - alpha * dot(cross, jet.P) * W
    if not with_scale:
        return d
    mag = np.abs(hw) * p2 + np.abs(alpha * dot(cross, jet.P) * W)
    return d, float(np.max(mag))


@dataclass(frozen=True)
class FourierCoeffs:
    """Cosine/sine coefficients of the weighted defect along one v-circle."""

    u: float
    A: np.ndarray  # indices 0..n_max
    B: np.ndarray  # indices 1..n_max (B[0] stored as 0 for alignment)

    def to_json_dict(self):
        return {"u": self.u, "A": list(map(float, self.A)),
                "B": list(map(float, self.B))}


def fourier_defect(patch: ParametricPatch, alpha: float, u: float,
                   n_max: int, nv: int,
                   guard: float = 1e-8) -> FourierCoeffs:
    """Fourier expansion of the weighted defect in the periodic direction.

    The defect of the cyclic parametrizations is a trigonometric polynomial
    in v; coefficients above ``n_max`` beyond ``guard`` times the defect
    magnitude raise ``BandLimitError`` (aliasing guard).
    """
    if not patch.v_periodic:
        raise ValidationError("fourier_defect requires a v-periodic patch")
    if nv < 4 * n_max or nv & (nv - 1):
        raise ValidationError("need nv >= 4*n_max with nv a power of two")
    v0, v1 = patch.v_range
    period = v1 - v0
    v = v0 + period * np.arange(nv) / nv
    d, mag = weighted_defect(patch, alpha, np.full(nv, float(u)), v,
                             with_scale=True)
    scale = float(np.max(np.abs(d)))
    # the defect is a difference of terms of size ``mag``; coefficients at
    # roundoff level relative to that cannot be distinguished from zero
    floor = 1e4 * np.finfo(float).eps * max(mag, 1e-300)
    # harmonics are measured in cycles per period
    ang = 2.0 * math.pi * np.arange(nv) / nv
    n_half = nv // 2
    ns = np.arange(n_half + 1)
    cosines = np.cos(np.outer(ns, ang))
    sines = np.sin(np.outer(ns, ang))
    A_all = 2.0 / nv * cosines @ d
    B_all = 2.0 / nv * sines @ d
    A_all[0] *= 0.5
    if n_half * 2 == nv:
        A_all[n_half] *= 0.5
    hi = np.concatenate([A_all[n_max + 1:], B_all[n_max + 1:]])
    if hi.size and np.max(np.abs(hi)) > max(guard * scale, floor):
        raise BandLimitError(
            f"defect has harmonics above n={n_max}: "
            f"max |coeff| = {np.max(np.abs(hi)):.3e} vs defect scale {scale:.3e}")
    B = B_all[:n_max + 1].copy()
    B[0] = 0.0
    return FourierCoeffs(u=float(u), A=A_all[:n_max + 1].copy(), B=B)
