"""Named surface families as ready-to-evaluate patches.

Every family the toolkit reasons about is constructible here from a small
parameter record: planes, spheres, cylinders over planar curves, the
helicoid and catenoid, ruled and cyclic specs, inversion images, the
explicit log-spiral surface for exponent -2, and numerically generated
minimal cyclic surfaces (Riemann's family).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import cyclic as _cyclic
from . import inversion as _inversion
from . import ruled as _ruled
from .errors import (
    FoliationCollapseError,
    OriginCollisionError,
    SpecValidationError,
    ValidationError,
)
from .interp import Curve3, ScalarFunc
from .surface_kernel import Jet2, ParametricPatch, translated

FAMILY_KINDS = (
    "vector_plane", "affine_plane", "sphere", "cylinder_over_curve",
    "helicoid", "catenoid", "ruled_generic", "parallel_cyclic",
    "frenet_cyclic", "inverted", "log_spiral_neg2", "riemann_minimal",
)


@dataclass(frozen=True)
class FamilySpec:
    """A named family plus its kind-specific parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise SpecValidationError(f"unknown family kind {self.kind!r}")


# ---------------------------------------------------------------------------
# individual constructors


def _plane_basis(normal):
    n = np.asarray(normal, dtype=float)
    norm = np.linalg.norm(n)
    if norm <= 0:
        raise SpecValidationError("plane normal must be nonzero")
    n = n / norm
    # any vector not parallel to n seeds the in-plane frame
    seed = np.array([1.0, 0.0, 0.0])
    if abs(np.dot(seed, n)) > 0.9:
        seed = np.array([0.0, 1.0, 0.0])
    e1 = seed - np.dot(seed, n) * n
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return n, e1, e2


def plane_patch(normal, offset=0.0, extent=2.0, label=None) -> ParametricPatch:
    """Plane with the given unit normal at signed distance ``offset`` from 0."""
    n, e1, e2 = _plane_basis(normal)
    base = float(offset) * n
    if label is None:
        label = "vector-plane" if offset == 0.0 else f"affine-plane(d={offset})"

    def ev(u, v):
        zeros = np.zeros(np.shape(u) + (3,))
        P = base + u[..., None] * e1 + v[..., None] * e2
        return Jet2(P=P,
                    Pu=np.broadcast_to(e1, P.shape).copy(),
                    Pv=np.broadcast_to(e2, P.shape).copy(),
                    Puu=zeros, Puv=zeros.copy(), Pvv=zeros.copy())

    return ParametricPatch(evaluator=ev, u_range=(-extent, extent),
                           v_range=(-extent, extent), label=label)


def sphere_patch(center, radius, label=None) -> ParametricPatch:
    """Sphere in colatitude/longitude coordinates; u-endpoints are poles."""
    c = np.asarray(center, dtype=float)
    R = float(radius)
    if R <= 0:
        raise SpecValidationError("sphere radius must be positive")
    if label is None:
        label = f"sphere(c={c.tolist()},R={R})"

    def ev(u, v):
        su, cu = np.sin(u), np.cos(u)
        sv, cv = np.sin(v), np.cos(v)
        rad = np.stack([su * cv, su * sv, cu], axis=-1)
        Pu = R * np.stack([cu * cv, cu * sv, -su], axis=-1)
        Pv = R * np.stack([-su * sv, su * cv, np.zeros_like(u)], axis=-1)
        Puv = R * np.stack([-cu * sv, cu * cv, np.zeros_like(u)], axis=-1)
        Pvv = R * np.stack([-su * cv, -su * sv, np.zeros_like(u)], axis=-1)
        return Jet2(P=c + R * rad, Pu=Pu, Pv=Pv, Puu=-R * rad, Puv=Puv, Pvv=Pvv)

    return ParametricPatch(evaluator=ev, u_range=(0.0, math.pi),
                           v_range=(0.0, 2.0 * math.pi), v_periodic=True,
                           u_collapse=(True, True), label=label)


def helicoid_patch(pitch=1.0, t_range=(-2.0, 2.0), turns=1.0,
                   label=None) -> ParametricPatch:
    """Psi(s, t) = (t cos s, t sin s, pitch * s)."""
    p = float(pitch)
    if p == 0.0:
        raise SpecValidationError("helicoid pitch must be nonzero")
    if label is None:
        label = f"helicoid(pitch={p})"

    def ev(u, v):
        cs, sn = np.cos(u), np.sin(u)
        zeros = np.zeros_like(u)
        P = np.stack([v * cs, v * sn, p * u], axis=-1)
        Pu = np.stack([-v * sn, v * cs, np.full_like(u, p)], axis=-1)
        Pv = np.stack([cs, sn, zeros], axis=-1)
        Puu = np.stack([-v * cs, -v * sn, zeros], axis=-1)
        Puv = np.stack([-sn, cs, zeros], axis=-1)
        Pvv = np.zeros_like(P)
        return Jet2(P, Pu, Pv, Puu, Puv, Pvv)

    return ParametricPatch(evaluator=ev,
                           u_range=(0.0, 2.0 * math.pi * float(turns)),
                           v_range=(float(t_range[0]), float(t_range[1])),
                           label=label)


def catenoid_patch(waist=1.0, u_range=(-1.5, 1.5), center=(0.0, 0.0, 0.0),
                   label=None) -> ParametricPatch:
    """(c cosh(u/c) cos v, c cosh(u/c) sin v, u), axis through ``center``."""
    c = float(waist)
    if c <= 0:
        raise SpecValidationError("catenoid waist must be positive")
    off = np.asarray(center, dtype=float)
    if label is None:
        label = f"catenoid(waist={c})"

    def ev(u, v):
        r = c * np.cosh(u / c)
        rp = np.sinh(u / c)
        rpp = np.cosh(u / c) / c
        cv, sv = np.cos(v), np.sin(v)
        zeros = np.zeros_like(u)
        P = off + np.stack([r * cv, r * sv, u], axis=-1)
        Pu = np.stack([rp * cv, rp * sv, np.ones_like(u)], axis=-1)
        Puu = np.stack([rpp * cv, rpp * sv, zeros], axis=-1)
        Pv = np.stack([-r * sv, r * cv, zeros], axis=-1)
        Puv = np.stack([-rp * sv, rp * cv, zeros], axis=-1)
        Pvv = np.stack([-r * cv, -r * sv, zeros], axis=-1)
        return Jet2(P, Pu, Pv, Puu, Puv, Pvv)

    return ParametricPatch(evaluator=ev,
                           u_range=(float(u_range[0]), float(u_range[1])),
                           v_range=(0.0, 2.0 * math.pi), v_periodic=True,
                           label=label)


# ---------------------------------------------------------------------------
# planar curves from the one-dimensional analog of the stationarity equation


def euler_planar_curve(alpha, r0, theta0, kappa0_sign, length,
                       tangent_angle=None, max_step=1e-3) -> _ruled.PlanarCurve:
    """Integrate the planar curves with kappa(s) = alpha * <n, gamma> / |gamma|^2.

    Starts at gamma(0) = r0 * (cos theta0, sin theta0).  The default initial
    tangent is perpendicular to the position ray, turned by kappa0_sign;
    ``tangent_angle`` overrides it (e.g. equal to theta0 for the radial line
    solution).  The in-plane normal is n = z_hat x t, so curvature is signed.
    """
    r0 = float(r0)
    if r0 <= 0:
        raise ValidationError("r0 must be positive")
    alpha = float(alpha)
    theta0 = float(theta0)
    if kappa0_sign not in (-1, 1):
        raise ValidationError("kappa0_sign must be +1 or -1")
    phi = (theta0 + kappa0_sign * math.pi / 2.0
           if tangent_angle is None else float(tangent_angle))
    nsteps = max(1, int(math.ceil(float(length) / max_step)))
    h = float(length) / nsteps

    def rhs(y):
        x, yy, ph = y
        rr = x * x + yy * yy
        if rr < 1e-12:
            raise OriginCollisionError("curve reached the origin")
        nx, ny = -math.sin(ph), math.cos(ph)
        kap = alpha * (nx * x + ny * yy) / rr
        return np.array([math.cos(ph), math.sin(ph), kap]), kap

    y = np.array([r0 * math.cos(theta0), r0 * math.sin(theta0), phi])
    rows = [y.copy()]
    for _ in range(nsteps):
        k1, _ = rhs(y)
        k2, _ = rhs(y + h / 2 * k1)
        k3, _ = rhs(y + h / 2 * k2)
        k4, _ = rhs(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        rows.append(y.copy())
    rows = np.array(rows)
    s = h * np.arange(len(rows))
    x, yy, ph = rows[:, 0], rows[:, 1], rows[:, 2]
    gamma = np.stack([x, yy, np.zeros_like(x)], axis=-1)
    t = np.stack([np.cos(ph), np.sin(ph), np.zeros_like(x)], axis=-1)
    n = np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(x)], axis=-1)
    kappa = alpha * (n[:, 0] * x + n[:, 1] * yy) / (x * x + yy * yy)
    return _ruled.PlanarCurve(s=s, gamma=gamma, t=t, n=n, kappa=kappa,
                              plane_normal=np.array([0.0, 0.0, 1.0]))


# ---------------------------------------------------------------------------
# Riemann's minimal family, generated from its own defect


def _parallel_defect_samples(u, a, ap, app, r, rp, rpp, v):
    """Weighted defect of the horizontal-circle foliation (centre (a,0,u))
    at fixed height, for prescribed second derivatives of the profile."""
    cv, sv = np.cos(v), np.sin(v)
    zeros = np.zeros_like(v)
    ones = np.ones_like(v)
    P = np.stack([a + r * cv, r * sv, np.full_like(v, u)], axis=-1)
    Pu = np.stack([ap + rp * cv, rp * sv, ones], axis=-1)
    Puu = np.stack([app + rpp * cv, rpp * sv, zeros], axis=-1)
    Pv = np.stack([-r * sv, r * cv, zeros], axis=-1)
    Puv = np.stack([-rp * sv, rp * cv, zeros], axis=-1)
    Pvv = np.stack([-r * cv, -r * sv, zeros], axis=-1)
    cross = np.cross(Pu, Pv)
    dot = lambda x, y: np.einsum("...i,...i->...", x, y)
    E, F, G = dot(Pu, Pu), dot(Pu, Pv), dot(Pv, Pv)
    return (G * dot(Puu, cross) - 2.0 * F * dot(Puv, cross)
            + E * dot(Pvv, cross)) * dot(P, P)


def _riemann_accels(u, a, ap, r, rp):
    """Solve for (a'', r'') from the n=0 and n=1 cosine coefficients of the
    zero-exponent defect; the defect is affine in the second derivatives."""
    nv = 16
    v = 2.0 * math.pi * (np.arange(nv) + 0.5) / nv
    c1 = np.cos(v)

    def coeffs(app, rpp):
        d = _parallel_defect_samples(u, a, ap, app, r, rp, rpp, v)
        return np.array([np.mean(d), 2.0 * np.mean(d * c1)])

    f0 = coeffs(0.0, 0.0)
    M = np.column_stack([coeffs(1.0, 0.0) - f0, coeffs(0.0, 1.0) - f0])
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det) < 1e-12 * max(1.0, float(np.abs(M).max())) ** 2:
        raise FoliationCollapseError(
            f"degenerate minimality system at u={u:.6g}")
    app, rpp = np.linalg.solve(M, -f0)
    return float(app), float(rpp)


def riemann_minimal_spec(c_drift, r0, span, max_step=2e-3) -> _cyclic.CyclicSpec:
    """Profile functions (a, r) of a minimal surface foliated by horizontal
    circles, integrated over u in [-span, span] from the waist."""
    r0 = float(r0)
    if r0 <= 0:
        raise ValidationError("r0 must be positive")
    span = float(span)
    if span <= 0:
        raise ValidationError("span must be positive")

    def rhs(u, y):
        a, ap, r, rp = y
        if r <= 0.0:
            raise FoliationCollapseError(f"radius collapsed at u={u:.6g}")
        app, rpp = _riemann_accels(u, a, ap, r, rp)
        return np.array([ap, app, rp, rpp])

    nsteps = max(1, int(math.ceil(span / max_step)))
    h = span / nsteps
    rows = {}
    for direction in (1.0, -1.0):
        y = np.array([0.0, float(c_drift), r0, 0.0])
        u = 0.0
        rows[0.0] = y.copy()
        for _ in range(nsteps):
            hh = direction * h
            k1 = rhs(u, y)
            k2 = rhs(u + hh / 2, y + hh / 2 * k1)
            k3 = rhs(u + hh / 2, y + hh / 2 * k2)
            k4 = rhs(u + hh, y + hh * k3)
            y = y + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            u += hh
            rows[round(u, 12)] = y.copy()
    us = np.array(sorted(rows))
    data = np.array([rows[u] for u in us])
    acc = np.array([_riemann_accels(u, *row) for u, row in zip(us, data)])
    a_func = ScalarFunc.from_table(us, data[:, 0], data[:, 1], acc[:, 0])
    r_func = ScalarFunc.from_table(us, data[:, 2], data[:, 3], acc[:, 1])
    return _cyclic.parallel_spec(a_func, 0.0, r_func, (-span, span),
                                 label=f"riemann-minimal(c={float(c_drift)},r0={r0})")


def riemann_minimal(c_drift, r0, span, max_step=2e-3) -> ParametricPatch:
    return _cyclic.build_cyclic(riemann_minimal_spec(c_drift, r0, span,
                                                     max_step=max_step))


# ---------------------------------------------------------------------------
# dispatch


def _directrix_from_params(p) -> _ruled.PlanarCurve:
    kind = p.get("type")
    if kind == "circle":
        return _ruled.PlanarCurve.circle(p["center"], p["radius"])
    if kind == "line":
        return _ruled.PlanarCurve.line(p["point"], p["direction"],
                                       length=p.get("length", 4.0))
    if kind == "euler":
        return euler_planar_curve(p["alpha"], p["r0"], p.get("theta0", 0.0),
                                  p.get("kappa0_sign", 1), p.get("length", 2.0),
                                  tangent_angle=p.get("tangent_angle"))
    raise SpecValidationError(f"unknown directrix type {kind!r}")


def make_patch(spec: FamilySpec) -> ParametricPatch:
    """Build the patch for any catalog family."""
    k, p = spec.kind, spec.params
    if k == "vector_plane":
        return plane_patch(p.get("normal", (0.0, 0.0, 1.0)),
                           extent=p.get("extent", 2.0))
    if k == "affine_plane":
        return plane_patch(p.get("normal", (0.0, 0.0, 1.0)),
                           offset=p.get("offset", 1.0),
                           extent=p.get("extent", 2.0))
    if k == "sphere":
        return sphere_patch(p.get("center", (0.0, 0.0, 0.0)), p.get("radius", 1.0))
    if k == "cylinder_over_curve":
        curve = p["curve"] if "curve" in p else _directrix_from_params(p["directrix"])
        return _ruled.build_cylinder_patch(curve, p.get("t_range", (-1.0, 1.0)))
    if k == "helicoid":
        patch = helicoid_patch(p.get("pitch", 1.0),
                               t_range=p.get("t_range", (-2.0, 2.0)),
                               turns=p.get("turns", 1.0))
        if "center" in p:
            patch = translated(patch, p["center"])
        return patch
    if k == "catenoid":
        return catenoid_patch(p.get("waist", 1.0),
                              u_range=p.get("u_range", (-1.5, 1.5)),
                              center=p.get("center", (0.0, 0.0, 0.0)))
    if k == "ruled_generic":
        rs = p["spec"] if "spec" in p else ruled_spec_from_dict(p)
        return _ruled.build_ruled_patch(rs, p.get("t_range", (-1.0, 1.0)))
    if k in ("parallel_cyclic", "frenet_cyclic"):
        cs = p["spec"] if "spec" in p else _cyclic.cyclic_spec_from_dict(p)
        want = "parallel" if k == "parallel_cyclic" else "frenet"
        if cs.mode != want:
            raise SpecValidationError(f"cyclic spec mode {cs.mode!r} does not match {k}")
        return _cyclic.build_cyclic(cs)
    if k == "inverted":
        inner = p["inner"]
        if isinstance(inner, dict):
            inner = family_from_dict(inner)
        inner_patch = inner if isinstance(inner, ParametricPatch) else make_patch(inner)
        return _inversion.invert_patch(inner_patch)
    if k == "log_spiral_neg2":
        return _cyclic.log_spiral_example(p.get("u_range", (0.5, 2.0)))
    if k == "riemann_minimal":
        return riemann_minimal(p.get("c_drift", 0.0), p.get("r0", 1.0),
                               p.get("span", 1.0))
    raise SpecValidationError(f"unknown family kind {k!r}")


# ---------------------------------------------------------------------------
# JSON round-trip


def _curve_table_dict(curve: Curve3, s_range, n=801):
    s = np.linspace(*s_range, n)
    pv, d1, d2 = curve.eval2(s)
    return {"s": s.tolist(), "p": pv.tolist(), "d1": d1.tolist(),
            "d2": d2.tolist()}


def _curve_from_table(d) -> Curve3:
    return Curve3.from_table(np.asarray(d["s"]), np.asarray(d["p"]),
                             np.asarray(d["d1"]), np.asarray(d["d2"]))


def ruled_spec_to_dict(spec: _ruled.RuledSpec) -> dict:
    return {"s_range": list(spec.s_range),
            "cylindrical": spec.cylindrical,
            "gamma": _curve_table_dict(spec.gamma, spec.s_range),
            "beta": _curve_table_dict(spec.beta, spec.s_range)}


def ruled_spec_from_dict(d) -> _ruled.RuledSpec:
    return _ruled.RuledSpec(gamma=_curve_from_table(d["gamma"]),
                            beta=_curve_from_table(d["beta"]),
                            s_range=tuple(d["s_range"]),
                            cylindrical=bool(d.get("cylindrical", False)))


def family_to_dict(spec: FamilySpec) -> dict:
    params = {}
    for key, val in spec.params.items():
        if isinstance(val, FamilySpec):
            params[key] = family_to_dict(val)
        elif isinstance(val, _cyclic.CyclicSpec):
            params[key] = _cyclic.cyclic_spec_to_dict(val)
        elif isinstance(val, _ruled.RuledSpec):
            params[key] = ruled_spec_to_dict(val)
        elif isinstance(val, np.ndarray):
            params[key] = val.tolist()
        elif isinstance(val, tuple):
            params[key] = list(val)
        else:
            params[key] = val
    return {"kind": spec.kind, "params": params}


def family_from_dict(d) -> FamilySpec:
    kind = d["kind"]
    params = dict(d.get("params", {}))
    if kind == "inverted" and isinstance(params.get("inner"), dict):
        params["inner"] = family_from_dict(params["inner"])
    if kind in ("parallel_cyclic", "frenet_cyclic") and isinstance(
            params.get("spec"), dict):
        params["spec"] = _cyclic.cyclic_spec_from_dict(params["spec"])
    if kind == "ruled_generic" and isinstance(params.get("spec"), dict):
        params["spec"] = ruled_spec_from_dict(params["spec"])
    return FamilySpec(kind=kind, params=params)


def load_family(path) -> FamilySpec:
    with open(path) as fh:
        return family_from_dict(json.load(fh))


def save_family(spec: FamilySpec, path):
    with open(path, "w") as fh:
        json.dump(family_to_dict(spec), fh, indent=1)
        fh.write("\n")
