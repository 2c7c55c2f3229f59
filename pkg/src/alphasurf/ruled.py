"""Ruled surfaces: cylinders, striction lines and the quartic coefficients.

For a ruled patch gamma(s) + t*beta(s) with unit-norm ruling direction,
arc-length directrix and striction condition <gamma', beta'> = 0, the
denominator-cleared stationarity defect is a degree-4 polynomial in t.  The
five coefficients are computed here in frame-free triple-product form,
without assuming a unit-speed or normalized ruling direction, so the
polynomial identity holds for arbitrary admissible specs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CylindricalInputError,
    FrameError,
    NormalizationError,
    PlanarityError,
    SpecValidationError,
    ValidationError,
)
from .interp import Curve3, QuinticHermite, ScalarFunc, compose_reparam, reparametrize_arclength
from .surface_kernel import Jet2, ParametricPatch


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _triple(a, b, c):
    return _dot(np.cross(a, b), c)


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class RuledSpec:
    """Directrix and ruling direction of a ruled surface."""

    gamma: Curve3
    beta: Curve3
    s_range: tuple
    cylindrical: bool = False

    def samples(self, n=64):
        return np.linspace(*self.s_range, n)


def validate_ruled(spec: RuledSpec, n=64):
    s = spec.samples(n)
    _, gp, _ = spec.gamma.eval2(s)
    bv, bp, _ = spec.beta.eval2(s)
    if np.max(np.abs(np.linalg.norm(gp, axis=-1) - 1.0)) > 1e-8:
        raise SpecValidationError("directrix is not arc-length parametrized")
    if np.max(np.abs(np.linalg.norm(bv, axis=-1) - 1.0)) > 1e-10:
        raise SpecValidationError("ruling direction is not unit-norm")
    if not spec.cylindrical and np.min(np.linalg.norm(bp, axis=-1)) <= 0.0:
        raise SpecValidationError("non-cylindrical spec has a stationary ruling direction")


def build_ruled_patch(spec: RuledSpec, t_range, label="ruled") -> ParametricPatch:
    """Patch Psi(s, t) = gamma(s) + t*beta(s) with analytic jets."""

    def ev(s, t):
        g, gp, gpp = spec.gamma.eval2(s)
        b, bp, bpp = spec.beta.eval2(s)
        t3 = t[..., None]
        zeros = np.zeros_like(g)
        return Jet2(P=g + t3 * b, Pu=gp + t3 * bp, Pv=b,
                    Puu=gpp + t3 * bpp, Puv=bp, Pvv=zeros)

    return ParametricPatch(evaluator=ev, u_range=spec.s_range,
                           v_range=(float(t_range[0]), float(t_range[1])),
                           label=label)


# ---------------------------------------------------------------------------
# striction line


def _mu_funcs(spec: RuledSpec, n_dense=2001):
    """mu = <gamma', beta'>/<beta', beta'> with two derivatives.

    mu' is analytic in the available jets; mu'' falls back to a dense-grid
    central difference of mu' (the third curve derivatives are not stored).
    """
    s = np.linspace(*spec.s_range, n_dense)

    def mu_and_d1(sv):
        _, gp, gpp = spec.gamma.eval2(sv)
        _, bp, bpp = spec.beta.eval2(sv)
        w = _dot(bp, bp)
        if np.any(w <= 0.0):
            raise CylindricalInputError("ruling direction has a stationary point")
        g = _dot(gp, bp)
        gp1 = _dot(gpp, bp) + _dot(gp, bpp)
        w1 = 2.0 * _dot(bpp, bp)
        mu = g / w
        mu1 = (gp1 * w - g * w1) / w**2
        return mu, mu1

    mu, mu1 = mu_and_d1(s)
    # second-order differences of the analytic mu' with a step much finer
    # than the table spacing (one-sided second order at the endpoints)
    d = 1e-5 * (s[-1] - s[0])
    mu2 = (mu_and_d1(s[1:-1] + d)[1] - mu_and_d1(s[1:-1] - d)[1]) / (2.0 * d)
    lo = (-3.0 * mu1[0] + 4.0 * mu_and_d1(s[0] + d)[1]
          - mu_and_d1(s[0] + 2.0 * d)[1]) / (2.0 * d)
    hi = (3.0 * mu1[-1] - 4.0 * mu_and_d1(s[-1] - d)[1]
          + mu_and_d1(s[-1] - 2.0 * d)[1]) / (2.0 * d)
    mu2 = np.concatenate([[lo], mu2, [hi]])
    table = QuinticHermite(s, mu, mu1, mu2)
    return ScalarFunc(lambda x: table.eval2(x)[0],
                      lambda x: table.eval2(x)[1],
                      lambda x: table.eval2(x)[2])


def striction_line(spec: RuledSpec) -> RuledSpec:
    """Move the directrix onto the striction line and re-parametrize.

    Output satisfies <gamma', beta'> = 0 and |gamma'| = 1; the ruling
    direction is composed with the same parameter change.
    """
    if spec.cylindrical:
        raise CylindricalInputError("striction line undefined for cylindrical surfaces")
    mu = _mu_funcs(spec)

    def pos(s):
        return spec.gamma.pos(s) - mu(s)[..., None] * spec.beta.pos(s)

    def d1(s):
        m, m1, _ = mu.eval2(s)
        b, bp, _ = spec.beta.eval2(s)
        return spec.gamma.d1(s) - m1[..., None] * b - m[..., None] * bp

    def d2(s):
        m, m1, m2 = mu.eval2(s)
        b, bp, bpp = spec.beta.eval2(s)
        return (spec.gamma.d2(s) - m2[..., None] * b
                - 2.0 * m1[..., None] * bp - m[..., None] * bpp)

    sigma = Curve3(pos, d1, d2)
    sigma_al, new_range, smap = reparametrize_arclength(sigma, spec.s_range)
    beta_al = compose_reparam(spec.beta, smap)
    return RuledSpec(gamma=sigma_al, beta=beta_al, s_range=new_range)


# ---------------------------------------------------------------------------
# planar curves and the cylindrical check


@dataclass(frozen=True)
class PlanarCurve:
    """Arc-length planar curve with signed curvature and in-plane normal.

    The normal is n = z_hat x t for a fixed plane normal z_hat, so
    gamma'' = kappa * n with kappa signed.
    """

    s: np.ndarray
    gamma: np.ndarray   # (n, 3)
    t: np.ndarray
    n: np.ndarray
    kappa: np.ndarray
    plane_normal: np.ndarray

    def curve3(self) -> Curve3:
        return Curve3.from_table(self.s, self.gamma, self.t,
                                 self.kappa[:, None] * self.n)

    @staticmethod
    def circle(center, radius, n_samples=257):
        """CCW circle of given radius about (cx, cy) in the z = 0 plane."""
        cx, cy = float(center[0]), float(center[1])
        if radius <= 0:
            raise ValidationError("circle radius must be positive")
        s = np.linspace(0.0, 2.0 * math.pi * radius, n_samples)
        ph = s / radius
        gamma = np.stack([cx + radius * np.cos(ph), cy + radius * np.sin(ph),
                          np.zeros_like(ph)], axis=-1)
        t = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=-1)
        nrm = np.stack([-np.cos(ph), -np.sin(ph), np.zeros_like(ph)], axis=-1)
        return PlanarCurve(s=s, gamma=gamma, t=t, n=nrm,
                           kappa=np.full_like(s, 1.0 / radius),
                           plane_normal=np.array([0.0, 0.0, 1.0]))

    @staticmethod
    def line(point, direction, length=4.0, n_samples=65):
        px, py = float(point[0]), float(point[1])
        d = np.array([float(direction[0]), float(direction[1]), 0.0])
        d /= np.linalg.norm(d)
        s = np.linspace(-length / 2, length / 2, n_samples)
        gamma = np.array([px, py, 0.0]) + s[:, None] * d
        t = np.broadcast_to(d, gamma.shape).copy()
        nrm = np.cross([0.0, 0.0, 1.0], d)
        return PlanarCurve(s=s, gamma=gamma, t=t,
                           n=np.broadcast_to(nrm, gamma.shape).copy(),
                           kappa=np.zeros_like(s),
                           plane_normal=np.array([0.0, 0.0, 1.0]))

    @staticmethod
    def from_space_samples(s, gamma, tol=1e-8):
        """Build from 3D samples, verifying planarity and arc length."""
        s = np.asarray(s, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        centroid = gamma.mean(axis=0)
        _, sv, vt = np.linalg.svd(gamma - centroid)
        zhat = vt[2]
        dev = np.abs((gamma - centroid) @ zhat)
        if np.max(dev) > tol * max(1.0, np.max(sv)):
            raise PlanarityError(
                f"curve deviates from a plane by {np.max(dev):.3e}")
        t = np.gradient(gamma, s, axis=0, edge_order=2)
        speed = np.linalg.norm(t, axis=-1)
        if np.max(np.abs(speed - 1.0)) > 1e-6:
            raise ValidationError("samples are not arc-length parametrized")
        t = t / speed[:, None]
        nrm = np.cross(zhat, t)
        acc = np.gradient(t, s, axis=0, edge_order=2)
        kappa = np.einsum("ij,ij->i", acc, nrm)
        return PlanarCurve(s=s, gamma=gamma, t=t, n=nrm, kappa=kappa,
                           plane_normal=zhat)


def cylinder_check(curve: PlanarCurve, alpha: float):
    """Per-sample coefficients (C2, C0) of the cylindrical stationarity
    polynomial kappa*t^2 + (kappa*|gamma|^2 - alpha*<n, gamma>).

    The cylinder over the curve is stationary iff both vanish identically,
    which forces a straight directrix through the origin.
    """
    C2 = curve.kappa.copy()
    C0 = (curve.kappa * np.einsum("ij,ij->i", curve.gamma, curve.gamma)
          - alpha * np.einsum("ij,ij->i", curve.n, curve.gamma))
    return C2, C0


def build_cylinder_patch(curve: PlanarCurve, t_range,
                         label="cylinder") -> ParametricPatch:
    """Cylinder over a planar directrix, ruled by w = -(plane normal).

    The sign choice makes the patch normal equal the curve normal, so
    H = kappa pointwise.
    """
    g = curve.curve3()
    w = -curve.plane_normal

    def ev(s, t):
        p, gp, gpp = g.eval2(s)
        zeros = np.zeros_like(p)
        return Jet2(P=p + t[..., None] * w,
                    Pu=gp, Pv=np.broadcast_to(w, p.shape).copy(),
                    Puu=gpp, Puv=zeros, Pvv=zeros)

    return ParametricPatch(
        evaluator=ev,
        u_range=(float(curve.s[0]), float(curve.s[-1])),
        v_range=(float(t_range[0]), float(t_range[1])),
        label=label)


# ---------------------------------------------------------------------------
# adapted coordinates (ruling direction normalized to the horizontal equator)


@dataclass(frozen=True)
class AdaptedCoords:
    """Coordinates of the directrix in the frame {beta, beta', e3}."""

    a: ScalarFunc
    b: ScalarFunc
    c: ScalarFunc


def adapted_coords(spec: RuledSpec) -> AdaptedCoords:
    """Express gamma in the frame of the horizontal-equator ruling.

    Requires beta(s) = (cos s, sin s, 0) within 1e-10; apply
    ``normalize_beta`` first if needed.
    """
    s_check = spec.samples(64)
    bv = spec.beta.pos(s_check)
    ref = np.stack([np.cos(s_check), np.sin(s_check),
                    np.zeros_like(s_check)], axis=-1)
    if np.max(np.abs(bv - ref)) > 1e-10:
        raise FrameError("ruling direction is not the horizontal equator")

    e3 = np.array([0.0, 0.0, 1.0])

    def make(coord):
        # coord: callable s -> basis vector (beta, beta' or e3) and its derivs
        def f(s):
            g = spec.gamma.pos(s)
            w, _, _ = coord(s)
            return _dot(g, w)

        def d1(s):
            g, gp, _ = spec.gamma.eval2(s)
            w, wp, _ = coord(s)
            return _dot(gp, w) + _dot(g, wp)

        def d2(s):
            g, gp, gpp = spec.gamma.eval2(s)
            w, wp, wpp = coord(s)
            return _dot(gpp, w) + 2.0 * _dot(gp, wp) + _dot(g, wpp)

        return ScalarFunc(f, d1, d2)

    def beta_basis(s):
        c, sn, z = np.cos(s), np.sin(s), np.zeros_like(s)
        b = np.stack([c, sn, z], axis=-1)
        bp = np.stack([-sn, c, z], axis=-1)
        return b, bp, -b

    def betap_basis(s):
        b, bp, _ = beta_basis(s)
        return bp, -b, -bp

    def e3_basis(s):
        z = np.zeros(np.shape(s) + (3,))
        w = z.copy()
        w[..., 2] = 1.0
        return w, z, z

    return AdaptedCoords(a=make(beta_basis), b=make(betap_basis), c=make(e3_basis))


def normalize_beta(spec: RuledSpec) -> RuledSpec:
    """Rotate a great-circle ruling direction onto the horizontal equator
    and re-parametrize so beta(s) = (cos s, sin s, 0).

    The rotation is a linear isometry (preserves stationarity); directrix
    and ruling share the parameter, so both are composed with the same
    parameter change.
    """
    s = spec.samples(129)
    bv, bp, bpp = spec.beta.eval2(s)
    if np.max(np.abs(_triple(bp, bv, bpp))) > 1e-8:
        raise NormalizationError("ruling direction is not a great circle")
    axes = np.cross(bv, bp)
    axes /= np.linalg.norm(axes, axis=-1, keepdims=True)
    axis = axes[0]
    if np.max(np.linalg.norm(axes - axis, axis=-1)) > 1e-8:
        raise NormalizationError("ruling plane is not constant")
    R = _rotation_to_e3(axis)

    gam = _apply_linear(spec.gamma, R)
    bet = _apply_linear(spec.beta, R)

    # phase of the rotated ruling direction; strictly monotone since |b'|>0
    dense = np.linspace(*spec.s_range, 2001)
    bd, bdp, bdpp = bet.eval2(dense)
    x, y = bd[..., 0], bd[..., 1]
    xp, yp = bdp[..., 0], bdp[..., 1]
    xpp, ypp = bdpp[..., 0], bdpp[..., 1]
    r2 = x * x + y * y
    phi = np.unwrap(np.arctan2(y, x))
    phi1 = (x * yp - y * xp) / r2
    num = x * ypp - y * xpp
    phi2 = num / r2 - (x * yp - y * xp) * 2.0 * (x * xp + y * yp) / r2**2
    if np.min(phi1) <= 0.0 and np.max(phi1) >= 0.0:
        raise NormalizationError("ruling phase is not monotone")
    if phi[-1] < phi[0]:
        phi, phi1, phi2 = phi[::-1], phi1[::-1], phi2[::-1]
        dense = dense[::-1]
        order = np.argsort(phi)
        phi, dense = phi[order], dense[order]
        phi1, phi2 = phi1[order], phi2[order]
    # s as a function of phi by the inverse function theorem
    s_of_phi = QuinticHermite(phi, dense, 1.0 / phi1, -phi2 / phi1**3)
    smap = ScalarFunc(lambda p: s_of_phi.eval2(p)[0],
                      lambda p: s_of_phi.eval2(p)[1],
                      lambda p: s_of_phi.eval2(p)[2])
    new_range = (float(phi[0]), float(phi[-1]))
    return RuledSpec(gamma=compose_reparam(gam, smap),
                     beta=compose_reparam(bet, smap),
                     s_range=new_range)


def _apply_linear(curve: Curve3, A) -> Curve3:
    A = np.asarray(A, dtype=float)
    return Curve3(lambda s: curve.pos(s) @ A.T,
                  lambda s: curve.d1(s) @ A.T,
                  lambda s: curve.d2(s) @ A.T)


def _rotation_to_e3(axis):
    """Rotation in SO(3) carrying ``axis`` to e3 (Rodrigues)."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    e3 = np.array([0.0, 0.0, 1.0])
    v = np.cross(axis, e3)
    c = float(np.dot(axis, e3))
    s = float(np.linalg.norm(v))
    if s < 1e-14:
        return np.eye(3) if c > 0 else np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / (s * s))


# ---------------------------------------------------------------------------
# quartic coefficients


def ruled_coeffs(spec: RuledSpec, alpha: float, s, check=True):
    """Coefficients [A0..A4] of the degree-4 defect polynomial in t.

    Requires an arc-length striction directrix (checked at the evaluation
    points unless ``check`` is False).  Vectorized: returns shape
    s.shape + (5,).
    """
    s = np.asarray(s, dtype=float)
    g, gp, gpp = spec.gamma.eval2(s)
    b, bp, bpp = spec.beta.eval2(s)
    if check:
        if np.max(np.abs(_dot(gp, bp))) > 1e-6:
            raise SpecValidationError("directrix violates the striction condition")
        if np.max(np.abs(_dot(gp, gp) - 1.0)) > 1e-6:
            raise SpecValidationError("directrix is not arc-length parametrized")

    R0 = _triple(gp, b, gpp) - 2.0 * _dot(gp, b) * _triple(gp, b, bp)
    R1 = _triple(gp, b, bpp) + _triple(bp, b, gpp)
    R2 = _triple(bp, b, bpp)
    q1 = 2.0 * _dot(g, b)
    q0 = _dot(g, g)
    T0 = _triple(gp, b, g)
    T1 = _triple(bp, b, g)
    S0 = 1.0 - _dot(gp, b) ** 2
    S2 = _dot(bp, bp)
    A0 = q0 * R0 - alpha * T0 * S0
    A1 = q1 * R0 + q0 * R1 - alpha * T1 * S0
    A2 = R0 + q1 * R1 + q0 * R2 - alpha * T0 * S2
    A3 = R1 + q1 * R2 - alpha * T1 * S2
    A4 = R2
    return np.stack([A0, A1, A2, A3, A4], axis=-1)


# ---------------------------------------------------------------------------
# randomized specs for the nonexistence evidence


def equator_beta() -> Curve3:
    def pos(s):
        return np.stack([np.cos(s), np.sin(s), np.zeros_like(s)], axis=-1)

    def d1(s):
        return np.stack([-np.sin(s), np.cos(s), np.zeros_like(s)], axis=-1)

    def d2(s):
        return -pos(s)

    return Curve3(pos, d1, d2)


def latitude_beta(height) -> Curve3:
    """Latitude circle (rho cos s, rho sin s, h) with rho^2 + h^2 = 1."""
    h = float(height)
    if not -1.0 < h < 1.0:
        raise ValidationError("latitude height must be in (-1, 1)")
    rho = math.sqrt(1.0 - h * h)

    def pos(s):
        return np.stack([rho * np.cos(s), rho * np.sin(s),
                         np.full(np.shape(s), h)], axis=-1)

    def d1(s):
        return np.stack([-rho * np.sin(s), rho * np.cos(s),
                         np.zeros(np.shape(s))], axis=-1)

    def d2(s):
        return np.stack([-rho * np.cos(s), -rho * np.sin(s),
                         np.zeros(np.shape(s))], axis=-1)

    return Curve3(pos, d1, d2)


def trig_poly_curve(const, cos_coeffs, sin_coeffs) -> Curve3:
    """gamma(s) = const + sum_k cos(k s) * c_k + sin(k s) * s_k."""
    const = np.asarray(const, dtype=float)
    cc = np.asarray(cos_coeffs, dtype=float).reshape(-1, 3)
    sc = np.asarray(sin_coeffs, dtype=float).reshape(-1, 3)

    def eval_order(s, order):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape + (3,))
        if order == 0:
            out += const
        for k in range(1, len(cc) + 1):
            ks = k * s
            if order == 0:
                cosf, sinf = np.cos(ks), np.sin(ks)
            elif order == 1:
                cosf, sinf = -k * np.sin(ks), k * np.cos(ks)
            else:
                cosf, sinf = -k * k * np.cos(ks), -k * k * np.sin(ks)
            out += cosf[..., None] * cc[k - 1] + sinf[..., None] * sc[k - 1]
        return out

    return Curve3(lambda s: eval_order(s, 0),
                  lambda s: eval_order(s, 1),
                  lambda s: eval_order(s, 2))


def random_ruled_spec(rng, n_harmonics=2, coeff_scale=2.0,
                      s_range=(0.0, 2.0 * math.pi)) -> RuledSpec:
    """Random non-cylindrical spec: trig-polynomial directrix over the
    equator ruling, corrected to the striction line and arc length."""
    const = rng.uniform(-coeff_scale, coeff_scale, 3)
    cc = rng.uniform(-coeff_scale, coeff_scale, (n_harmonics, 3))
    sc = rng.uniform(-coeff_scale, coeff_scale, (n_harmonics, 3))
    raw = RuledSpec(gamma=trig_poly_curve(const, cc, sc),
                    beta=equator_beta(), s_range=s_range)
    return striction_line(raw)
