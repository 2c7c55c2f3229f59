"""Second-order jets of parametric patches and derived curvature data.

Conventions used throughout the toolkit:

* the unit normal is N = (Psi_u x Psi_v) / |Psi_u x Psi_v|;
* the mean curvature is the trace of the shape operator (sum of the two
  principal curvatures), H = (G*L - 2*F*M + E*N2) / (E*G - F^2), so a
  cylinder over a planar curve of curvature kappa has H = kappa and a unit
  sphere has |H| = 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import (
    DegenerateParametrizationError,
    ParameterRangeError,
)

#: relative domain margin used to keep samples away from chart-degenerate
#: parameter lines (e.g. sphere poles)
DEFAULT_DOMAIN_MARGIN = 1e-3

_DOMAIN_SLACK = 1e-9


@dataclass(frozen=True)
class Jet2:
    """Position and first/second partials of a patch at parameter points.

    All fields have shape (..., 3); ``Puv`` is the single mixed partial.
    """

    P: np.ndarray
    Pu: np.ndarray
    Pv: np.ndarray
    Puu: np.ndarray
    Puv: np.ndarray
    Pvv: np.ndarray

    def map_linear(self, A):
        """Apply a linear map to every jet field (linearity of derivatives)."""
        A = np.asarray(A, dtype=float)
        return Jet2(*(x @ A.T for x in
                      (self.P, self.Pu, self.Pv, self.Puu, self.Puv, self.Pvv)))


@dataclass(frozen=True)
class ParametricPatch:
    """A map (u, v) -> R^3 with C^2 analytic jets on a rectangle.

    ``evaluator`` must accept broadcast arrays of parameters and return a
    ``Jet2`` of matching shape.  Patches are immutable and safe to evaluate
    concurrently.
    """

    evaluator: Callable
    u_range: tuple
    v_range: tuple
    v_periodic: bool = False
    label: str = ""
    u_periodic: bool = False
    # u endpoints that collapse to a single point (sphere poles) -- used by
    # the meshing layer to close the surface.
    u_collapse: tuple = (False, False)

    def domain_grid(self, nu, nv, margin=DEFAULT_DOMAIN_MARGIN):
        """Interior sampling grid: shrunk in non-periodic directions,
        uniform midpoint samples in periodic ones."""
        u = _axis_samples(self.u_range, nu, self.u_periodic, margin)
        v = _axis_samples(self.v_range, nv, self.v_periodic, margin)
        return u, v


def _axis_samples(rng, n, periodic, margin):
    lo, hi = float(rng[0]), float(rng[1])
    if periodic:
        step = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * step
    m = margin * (hi - lo)
    return np.linspace(lo + m, hi - m, n)


def _check_domain(patch: ParametricPatch, u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0, u1 = patch.u_range
    v0, v1 = patch.v_range
    if patch.u_periodic:
        u = u0 + np.mod(u - u0, u1 - u0)
    elif np.any(u < u0 - _DOMAIN_SLACK) or np.any(u > u1 + _DOMAIN_SLACK):
        bad = float(np.asarray(u).ravel()[np.argmax((u < u0) | (u > u1))])
        raise ParameterRangeError(
            f"u={bad!r} outside [{u0}, {u1}] for patch {patch.label!r}")
    if patch.v_periodic:
        v = v0 + np.mod(v - v0, v1 - v0)
    elif np.any(v < v0 - _DOMAIN_SLACK) or np.any(v > v1 + _DOMAIN_SLACK):
        bad = float(np.asarray(v).ravel()[np.argmax((v < v0) | (v > v1))])
        raise ParameterRangeError(
            f"v={bad!r} outside [{v0}, {v1}] for patch {patch.label!r}")
    return u, v


def eval_jet2(patch: ParametricPatch, u, v) -> Jet2:
    """Analytic second-order jet of ``patch`` at (u, v) (broadcastable)."""
    u, v = _check_domain(patch, u, v)
    u, v = np.broadcast_arrays(u, v)
    return patch.evaluator(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


@dataclass(frozen=True)
class FundamentalData:
    """First/second fundamental forms, unit normal and mean curvature."""

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    L: np.ndarray
    M: np.ndarray
    Nff: np.ndarray
    normal: np.ndarray
    H: np.ndarray
    W: np.ndarray


def fundamental_data(jet: Jet2) -> FundamentalData:
    """Fundamental forms and trace mean curvature from a jet.

    Raises ``DegenerateParametrizationError`` where EG - F^2 <= 0.
    """
    E = _dot(jet.Pu, jet.Pu)
    F = _dot(jet.Pu, jet.Pv)
    G = _dot(jet.Pv, jet.Pv)
    W = E * G - F * F
    if np.any(W <= 0.0):
        raise DegenerateParametrizationError(
            f"EG - F^2 = {float(np.min(W)):.3e} <= 0 at a sampled point")
    cross = np.cross(jet.Pu, jet.Pv)
    normal = cross / np.sqrt(W)[..., None]
    L = _dot(jet.Puu, normal)
    M = _dot(jet.Puv, normal)
    Nff = _dot(jet.Pvv, normal)
    H = (G * L - 2.0 * F * M + E * Nff) / W
    return FundamentalData(E=E, F=F, G=G, L=L, M=M, Nff=Nff,
                           normal=normal, H=H, W=W)


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def fd_jet2(patch: ParametricPatch, u, v, h) -> Jet2:
    """Central-difference jet, an O(h^2) cross-check of the analytic path."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u0, u1 = patch.u_range
    v0, v1 = patch.v_range
    if not patch.u_periodic and (np.any(u - 2 * h < u0 - _DOMAIN_SLACK)
                                 or np.any(u + 2 * h > u1 + _DOMAIN_SLACK)):
        raise ParameterRangeError("finite-difference stencil leaves the u-domain")
    if not patch.v_periodic and (np.any(v - 2 * h < v0 - _DOMAIN_SLACK)
                                 or np.any(v + 2 * h > v1 + _DOMAIN_SLACK)):
        raise ParameterRangeError("finite-difference stencil leaves the v-domain")

    def pos(uu, vv):
        return eval_jet2(patch, uu, vv).P

    P = pos(u, v)
    Pup, Pum = pos(u + h, v), pos(u - h, v)
    Pvp, Pvm = pos(u, v + h), pos(u, v - h)
    Ppp, Ppm = pos(u + h, v + h), pos(u + h, v - h)
    Pmp, Pmm = pos(u - h, v + h), pos(u - h, v - h)
    return Jet2(
        P=P,
        Pu=(Pup - Pum) / (2 * h),
        Pv=(Pvp - Pvm) / (2 * h),
        Puu=(Pup - 2 * P + Pum) / h**2,
        Puv=(Ppp - Ppm - Pmp + Pmm) / (4 * h**2),
        Pvv=(Pvp - 2 * P + Pvm) / h**2,
    )


# ---------------------------------------------------------------------------
# patch transforms (pure wrappers; used by invariance tests and inversion)

def scaled(patch: ParametricPatch, lam: float) -> ParametricPatch:
    lam = float(lam)

    def ev(u, v):
        j = patch.evaluator(u, v)
        return Jet2(*(lam * x for x in (j.P, j.Pu, j.Pv, j.Puu, j.Puv, j.Pvv)))

    return replace(patch, evaluator=ev, label=f"scaled({lam})*{patch.label}")


def rotated(patch: ParametricPatch, R) -> ParametricPatch:
    R = np.asarray(R, dtype=float)

    def ev(u, v):
        return patch.evaluator(u, v).map_linear(R)

    return replace(patch, evaluator=ev, label=f"rotated*{patch.label}")


def translated(patch: ParametricPatch, vec) -> ParametricPatch:
    vec = np.asarray(vec, dtype=float)

    def ev(u, v):
        j = patch.evaluator(u, v)
        return Jet2(j.P + vec, j.Pu, j.Pv, j.Puu, j.Puv, j.Pvv)

    return replace(patch, evaluator=ev, label=f"translated*{patch.label}")


def swapped_uv(patch: ParametricPatch) -> ParametricPatch:
    """Exchange the roles of u and v (flips the normal orientation)."""

    def ev(u, v):
        j = patch.evaluator(v, u)
        return Jet2(P=j.P, Pu=j.Pv, Pv=j.Pu, Puu=j.Pvv, Puv=j.Puv, Pvv=j.Puu)

    return ParametricPatch(
        evaluator=ev,
        u_range=patch.v_range,
        v_range=patch.u_range,
        v_periodic=patch.u_periodic,
        u_periodic=patch.v_periodic,
        label=f"swapped*{patch.label}",
    )
