"""Surfaces foliated by circles.

Two foliation modes are supported: circles in parallel horizontal planes
(centre (a(u), b(u), u), radius r(u)) and circles in the normal planes of a
space curve's Frenet frame (centre a*t + b*n + c*bv, radius r(u)).  The
module also evaluates the closed-form harmonic coefficients of the weighted
defect for both modes and integrates the planar ODE family of non-spherical
surfaces stationary for the exponent -2.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateFamilyError,
    FoliationCollapseError,
    FrameUndefinedError,
    SpecValidationError,
    ValidationError,
)
from .interp import QuinticHermite, ScalarFunc
from .surface_kernel import Jet2, ParametricPatch


def as_scalar_func(x) -> ScalarFunc:
    """Coerce numbers / callables to a ScalarFunc (FD derivatives as fallback)."""
    if isinstance(x, ScalarFunc):
        return x
    if np.isscalar(x):
        return ScalarFunc.constant(float(x))
    if callable(x):
        h = 1e-6

        def d1(u):
            return (np.asarray(x(np.asarray(u) + h)) - np.asarray(x(np.asarray(u) - h))) / (2 * h)

        def d2(u):
            u = np.asarray(u)
            return (np.asarray(x(u + h)) - 2 * np.asarray(x(u)) + np.asarray(x(u - h))) / h**2

        return ScalarFunc(x, d1, d2)
    raise ValidationError(f"cannot interpret {x!r} as a scalar function")


# ---------------------------------------------------------------------------
# Frenet frames


@dataclass(frozen=True)
class CurveFrame:
    """Arc-length space curve with Frenet frame, sampled and interpolated.

    Node data comes from RK4 integration of the Frenet system; evaluation at
    arbitrary u uses quintic Hermite segments whose endpoint derivatives are
    supplied analytically by the Frenet equations themselves.
    """

    u_nodes: np.ndarray
    gamma: np.ndarray   # (n, 3)
    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: ScalarFunc
    tau: ScalarFunc
    _interp: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        k, kp, _ = self.kappa.eval2(self.u_nodes)
        t_, tp, _ = self.tau.eval2(self.u_nodes)
        T, N, B = self.t, self.n, self.b
        dT = k[:, None] * N
        dN = -k[:, None] * T + t_[:, None] * B
        dB = -t_[:, None] * N
        ddT = kp[:, None] * N + k[:, None] * dN
        ddN = -kp[:, None] * T - k[:, None] * dT + tp[:, None] * B + t_[:, None] * dB
        ddB = -tp[:, None] * N - t_[:, None] * dN
        self._interp["t"] = QuinticHermite(self.u_nodes, T, dT, ddT)
        self._interp["n"] = QuinticHermite(self.u_nodes, N, dN, ddN)
        self._interp["b"] = QuinticHermite(self.u_nodes, B, dB, ddB)
        self._interp["gamma"] = QuinticHermite(self.u_nodes, self.gamma, T, dT)

    @property
    def u_range(self):
        return float(self.u_nodes[0]), float(self.u_nodes[-1])

    def frame_at(self, u):
        """(t, n, b) unit vectors at u."""
        return (self._interp["t"].eval2(u)[0],
                self._interp["n"].eval2(u)[0],
                self._interp["b"].eval2(u)[0])

    def gamma_at(self, u):
        return self._interp["gamma"].eval2(u)[0]

    def frame_jets(self, u):
        """Frame vectors with first and second u-derivatives via Frenet."""
        T = self._interp["t"].eval2(u)[0]
        N = self._interp["n"].eval2(u)[0]
        B = self._interp["b"].eval2(u)[0]
        k, kp, _ = self.kappa.eval2(u)
        t_, tp, _ = self.tau.eval2(u)
        k, kp, t_, tp = (x[..., None] for x in (k, kp, t_, tp))
        dT = k * N
        dN = -k * T + t_ * B
        dB = -t_ * N
        ddT = kp * N + k * dN
        ddN = -kp * T - k * dT + tp * B + t_ * dB
        ddB = -tp * N - t_ * dN
        return (T, N, B), (dT, dN, dB), (ddT, ddN, ddB)


def _gram_schmidt(t, n, b):
    t = t / np.linalg.norm(t)
    n = n - np.dot(n, t) * t
    n = n / np.linalg.norm(n)
    b = b - np.dot(b, t) * t - np.dot(b, n) * n
    return t, n, b / np.linalg.norm(b)


def frame_from_curvature(kappa, tau, u_range, init, max_step=1e-3) -> CurveFrame:
    """Integrate the Frenet system t'=k n, n'=-k t + tau b, b'=-tau n.

    ``init`` is (gamma0, t0, n0, b0); RK4 with per-step Gram-Schmidt
    re-orthonormalization.  kappa must stay positive on the range.
    """
    kappa = as_scalar_func(kappa)
    tau = as_scalar_func(tau)
    u0, u1 = float(u_range[0]), float(u_range[1])
    nsteps = max(1, int(math.ceil((u1 - u0) / max_step)))
    h = (u1 - u0) / nsteps
    g0, t0, n0, b0 = (np.asarray(x, dtype=float) for x in init)
    t0, n0, b0 = _gram_schmidt(t0, n0, b0)

    def rhs(u, y):
        g, t, n, b = y[0:3], y[3:6], y[6:9], y[9:12]
        k = float(kappa(u))
        if k <= 0.0:
            raise FrameUndefinedError(f"kappa({u}) = {k} <= 0")
        tv = float(tau(u))
        return np.concatenate([t, k * n, -k * t + tv * b, -tv * n])

    y = np.concatenate([g0, t0, n0, b0])
    us = [u0]
    ys = [y.copy()]
    u = u0
    for _ in range(nsteps):
        k1 = rhs(u, y)
        k2 = rhs(u + h / 2, y + h / 2 * k1)
        k3 = rhs(u + h / 2, y + h / 2 * k2)
        k4 = rhs(u + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t, n, b = _gram_schmidt(y[3:6], y[6:9], y[9:12])
        y[3:6], y[6:9], y[9:12] = t, n, b
        u += h
        us.append(u)
        ys.append(y.copy())
    ys = np.array(ys)
    return CurveFrame(u_nodes=np.array(us), gamma=ys[:, 0:3],
                      t=ys[:, 3:6], n=ys[:, 6:9], b=ys[:, 9:12],
                      kappa=kappa, tau=tau)


PLANAR_INIT = (np.zeros(3),
               np.array([1.0, 0.0, 0.0]),
               np.array([0.0, 1.0, 0.0]),
               np.array([0.0, 0.0, 1.0]))


# ---------------------------------------------------------------------------
# cyclic specs and patches


@dataclass(frozen=True)
class CyclicSpec:
    """Foliation data for a cyclic surface.

    mode "parallel": centre (a(u), b(u), u), radius r(u), horizontal circles.
    mode "frenet":  centre a*t + b*n + c*bv in the frame of ``frame``,
    circle of radius r(u) in the (n, bv) plane.
    """

    mode: str
    u_range: tuple
    r: ScalarFunc
    a: ScalarFunc
    b: ScalarFunc
    c: ScalarFunc = None          # frenet mode only
    frame: CurveFrame = None      # frenet mode only
    u_periodic: bool = False
    label: str = ""

    def __post_init__(self):
        if self.mode not in ("parallel", "frenet"):
            raise SpecValidationError(f"unknown cyclic mode {self.mode!r}")
        if self.mode == "frenet" and self.frame is None:
            raise SpecValidationError("frenet mode requires a CurveFrame")


def parallel_spec(a, b, r, u_range, label="parallel-cyclic") -> CyclicSpec:
    return CyclicSpec(mode="parallel", u_range=(float(u_range[0]), float(u_range[1])),
                      a=as_scalar_func(a), b=as_scalar_func(b),
                      r=as_scalar_func(r), label=label)


def frenet_spec(frame, a, b, c, r, u_range=None, u_periodic=False,
                label="frenet-cyclic") -> CyclicSpec:
    if u_range is None:
        u_range = frame.u_range
    return CyclicSpec(mode="frenet", u_range=(float(u_range[0]), float(u_range[1])),
                      a=as_scalar_func(a), b=as_scalar_func(b), c=as_scalar_func(c),
                      r=as_scalar_func(r), frame=frame, u_periodic=u_periodic,
                      label=label)


def _validate_cyclic(spec: CyclicSpec, n=101):
    u = np.linspace(*spec.u_range, n)
    r = spec.r(u)
    if np.any(r <= 0.0):
        raise SpecValidationError("radius function must stay positive on the domain")
    if spec.mode == "frenet":
        k = spec.frame.kappa(u)
        if np.any(k <= 0.0):
            raise SpecValidationError("frenet mode requires kappa > 0 on the domain")


def build_cyclic(spec: CyclicSpec) -> ParametricPatch:
    """Analytic-jet patch for a cyclic spec."""
    _validate_cyclic(spec)
    if spec.mode == "parallel":
        a, b, r = spec.a, spec.b, spec.r

        def ev(u, v):
            av, ap, app = a.eval2(u)
            bv, bp, bpp = b.eval2(u)
            rv, rp, rpp = r.eval2(u)
            cv, sv = np.cos(v), np.sin(v)
            zeros = np.zeros_like(u)
            ones = np.ones_like(u)
            P = np.stack([av + rv * cv, bv + rv * sv, u], axis=-1)
            Pu = np.stack([ap + rp * cv, bp + rp * sv, ones], axis=-1)
            Puu = np.stack([app + rpp * cv, bpp + rpp * sv, zeros], axis=-1)
            Pv = np.stack([-rv * sv, rv * cv, zeros], axis=-1)
            Puv = np.stack([-rp * sv, rp * cv, zeros], axis=-1)
            Pvv = np.stack([-rv * cv, -rv * sv, zeros], axis=-1)
            return Jet2(P, Pu, Pv, Puu, Puv, Pvv)

        return ParametricPatch(evaluator=ev, u_range=spec.u_range,
                               v_range=(0.0, 2.0 * math.pi), v_periodic=True,
                               label=spec.label)

    frame = spec.frame
    a, b, c, r = spec.a, spec.b, spec.c, spec.r

    def ev(u, v):
        (T, N, B), (dT, dN, dB), (ddT, ddN, ddB) = frame.frame_jets(u)
        av, ap, app = a.eval2(u)
        bv, bp, bpp = b.eval2(u)
        cv_, cp, cpp = c.eval2(u)
        rv, rp, rpp = r.eval2(u)
        cs, sn = np.cos(v), np.sin(v)
        # frame coefficients of Psi and their parameter derivatives
        f1, f1u, f1uu = av, ap, app
        f2 = bv + rv * cs
        f2u, f2uu = bp + rp * cs, bpp + rpp * cs
        f3 = cv_ + rv * sn
        f3u, f3uu = cp + rp * sn, cpp + rpp * sn

        def comb(x1, x2, x3, e1, e2, e3):
            return x1[..., None] * e1 + x2[..., None] * e2 + x3[..., None] * e3

        P = comb(f1, f2, f3, T, N, B)
        Pu = comb(f1u, f2u, f3u, T, N, B) + comb(f1, f2, f3, dT, dN, dB)
        Puu = (comb(f1uu, f2uu, f3uu, T, N, B)
               + 2.0 * comb(f1u, f2u, f3u, dT, dN, dB)
               + comb(f1, f2, f3, ddT, ddN, ddB))
        Pv = comb(np.zeros_like(rv), -rv * sn, rv * cs, T, N, B)
        Puv = (comb(np.zeros_like(rv), -rp * sn, rp * cs, T, N, B)
               + comb(np.zeros_like(rv), -rv * sn, rv * cs, dT, dN, dB))
        Pvv = comb(np.zeros_like(rv), -rv * cs, -rv * sn, T, N, B)
        return Jet2(P, Pu, Pv, Puu, Puv, Pvv)

    return ParametricPatch(evaluator=ev, u_range=spec.u_range,
                           v_range=(0.0, 2.0 * math.pi), v_periodic=True,
                           u_periodic=spec.u_periodic, label=spec.label)


# ---------------------------------------------------------------------------
# closed-form harmonic coefficients of the weighted defect


def parallel_A3B3(a, ap, b, bp, r, alpha, u):
    """Top (n=3) harmonic coefficients for the parallel-plane foliation.

    Arguments are pointwise values: centre components and their derivatives,
    radius, exponent and height.  Normalized to match ``fourier_defect``.
    """
    f = alpha * r**3 / 4.0
    A3 = f * (-2.0 * b * ap * bp - (a - 3.0 * u * ap) * bp**2 + (a - u * ap) * ap**2)
    B3 = f * (ap * (2.0 * a - 3.0 * u * ap) * bp + b * (ap**2 - bp**2) + u * bp**3)
    return A3, B3


def frenet_A4B4(a, b, c, bp, cp, r, kappa, tau, alpha):
    """Top (n=4) harmonic coefficients for the Frenet-frame foliation.

    Both carry the common factor (alpha + 4) * r^4 * kappa / 8; normalized
    to match ``fourier_defect`` on the corresponding patch.
    """
    k, t = kappa, tau
    f = (alpha + 4.0) * r**4 * k / 8.0
    A4 = f * (2.0 * cp * (c * (a * k + bp - c * t) + b * b * t)
              - b * (2.0 * a * k * (bp - 2.0 * c * t) + a * a * k * k
                     - 4.0 * c * t * bp + bp * bp
                     - t * t * (b * b - 3.0 * c * c) + r * r * k * k)
              + b * cp * cp)
    B4 = -f * (2.0 * a * k * (c * (bp - c * t) + b * cp + b * b * t)
               + a * a * c * k * k
               + c * (bp * bp - (b * t + cp) * (3.0 * b * t + cp) + r * r * k * k)
               + 2.0 * b * bp * (b * t + cp) - 2.0 * c * c * t * bp
               + c ** 3 * t * t)
    return A4, B4


def frenet_combination(a, b, c, bp, cp, r, kappa, tau, alpha):
    """Closed form of c*A4 - b*B4 (factorized): the case-splitting identity."""
    return ((alpha + 4.0) * r**4 * kappa * (b * b + c * c)
            * (b * tau + cp) * (a * kappa + bp - c * tau) / 4.0)


# ---------------------------------------------------------------------------
# the planar ODE family for exponent -2


def neg2_eq21(a, ap, app, r, rp, rpp, k, kp):
    """First defining equation of the planar family (n=1 cosine harmonic)."""
    return (a * a * r * (k * (-3.0 * ap**2 + r * rpp + 3.0 * rp**2) - r * rp * kp)
            + r**3 * (k * (ap**2 + r * rpp - rp**2) - r * rp * kp)
            + a**3 * (r * k * app + ap * (2.0 * k * rp - r * kp))
            + a * r * r * (r * k * app - ap * (6.0 * k * rp + r * kp)))


def neg2_eq22(a, ap, app, r, rp, rpp, k, kp):
    """Second defining equation (n=0 harmonic)."""
    return (a * r * rp * (2.0 * (ap**2 + rp**2) + r * r * k * k)
            + a**4 * k * k * ap
            + a * a * (r * app * rp - r * ap * rpp + ap * rp**2
                       + r * r * k * k * ap + ap**3)
            - r * r * (-r * app * rp + ap * (r * rpp + rp**2) + ap**3)
            + a**3 * r * k * k * rp)


def neg2_eq23(a, ap, app, r, rp, k, kp):
    """Reduced equation obtained by eliminating r'' between the two above."""
    return (a * r * k * (-2.0 * ap**2 + 2.0 * rp**2 + r * r * k * k)
            + r * r * (k * (r * app - 2.0 * ap * rp) - r * ap * kp)
            + a * a * (k * (r * app + 2.0 * ap * rp) - r * ap * kp)
            + a**3 * r * k**3)


def integrate_neg2_family(kappa, a0, a0p, r0, r0p, u_range,
                          max_step=1e-3) -> CyclicSpec:
    """Integrate the planar family of (-2)-exponent cyclic surfaces.

    The curvature of the foliation's base curve is prescribed; the centre
    offset a(u) and radius r(u) solve the two defining equations, which are
    linear in (r'', a'') and are solved pointwise as a 2x2 system.  Returns a
    frenet-mode CyclicSpec with the planar frame integrated from kappa.
    """
    kappa = as_scalar_func(kappa)
    u0, u1 = float(u_range[0]), float(u_range[1])
    if r0 <= 0.0:
        raise SpecValidationError("r0 must be positive")
    nsteps = max(1, int(math.ceil((u1 - u0) / max_step)))
    h = (u1 - u0) / nsteps

    def second_derivs(u, a, ap, r, rp):
        if r <= 0.0:
            raise FoliationCollapseError(f"radius collapsed at u={u:.6g}")
        k = float(kappa(u))
        kp = float(kappa.d1(u))
        # both equations are affine in (rpp, app): probe to build the system
        def f(rpp, app):
            return np.array([
                neg2_eq21(a, ap, app, r, rp, rpp, k, kp),
                neg2_eq23(a, ap, app, r, rp, k, kp),
            ])

        f0 = f(0.0, 0.0)
        M = np.column_stack([f(1.0, 0.0) - f0, f(0.0, 1.0) - f0])
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-14 * max(1.0, abs(M).max()) ** 2:
            raise DegenerateFamilyError(
                f"singular system for (r'', a'') at u={u:.6g}")
        rpp, app = np.linalg.solve(M, -f0)
        return float(app), float(rpp)

    def rhs(u, y):
        a, ap, r, rp = y
        app, rpp = second_derivs(u, a, ap, r, rp)
        return np.array([ap, app, rp, rpp])

    y = np.array([float(a0), float(a0p), float(r0), float(r0p)])
    us = [u0]
    rows = [np.concatenate([y, second_derivs(u0, *y)])]
    u = u0
    for _ in range(nsteps):
        k1 = rhs(u, y)
        k2 = rhs(u + h / 2, y + h / 2 * k1)
        k3 = rhs(u + h / 2, y + h / 2 * k2)
        k4 = rhs(u + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        u += h
        us.append(u)
        rows.append(np.concatenate([y, second_derivs(u, *y)]))
    us = np.array(us)
    rows = np.array(rows)  # columns a, a', r, r', a'', r''
    a_func = ScalarFunc.from_table(us, rows[:, 0], rows[:, 1], rows[:, 4])
    r_func = ScalarFunc.from_table(us, rows[:, 2], rows[:, 3], rows[:, 5])
    frame = frame_from_curvature(kappa, 0.0, (u0, u1), PLANAR_INIT,
                                 max_step=max_step)
    return frenet_spec(frame, a_func, 0.0, 0.0, r_func, (u0, u1),
                       label=f"neg2-family[{u0:.3g},{u1:.3g}]")


def log_spiral_example(u_range) -> ParametricPatch:
    """The explicit non-spherical (-2)-exponent example surface.

    Psi(u, v) = (-u sin(log u) cos v, u cos(log u) cos v, u sin v), u > 0.
    """
    u0, u1 = float(u_range[0]), float(u_range[1])
    if u0 <= 0.0:
        raise ValidationError("log-spiral example requires u > 0")

    def ev(u, v):
        th = np.log(u)
        s, cth = np.sin(th), np.cos(th)
        cv, sv = np.cos(v), np.sin(v)
        sp = s + cth          # d/du [u sin th]
        cm = cth - s          # d/du [u cos th]
        P = np.stack([-u * s * cv, u * cth * cv, u * sv], axis=-1)
        Pu = np.stack([-sp * cv, cm * cv, sv], axis=-1)
        Puu = np.stack([-cm / u * cv, -sp / u * cv, np.zeros_like(u)], axis=-1)
        Pv = np.stack([u * s * sv, -u * cth * sv, u * cv], axis=-1)
        Puv = np.stack([sp * sv, -cm * sv, cv], axis=-1)
        Pvv = np.stack([u * s * cv, -u * cth * cv, -u * sv], axis=-1)
        return Jet2(P, Pu, Pv, Puu, Puv, Pvv)

    return ParametricPatch(evaluator=ev, u_range=(u0, u1),
                           v_range=(0.0, 2.0 * math.pi), v_periodic=True,
                           label="log-spiral(-2)")


# ---------------------------------------------------------------------------
# serialization


def _table_dict(func: ScalarFunc, u_range, n=801):
    u = np.linspace(*u_range, n)
    f, d1, d2 = func.eval2(u)
    return {"u": u.tolist(), "f": f.tolist(), "d1": d1.tolist(), "d2": d2.tolist()}


def _func_from_table(d) -> ScalarFunc:
    return ScalarFunc.from_table(np.asarray(d["u"]), np.asarray(d["f"]),
                                 np.asarray(d["d1"]), np.asarray(d["d2"]))


def cyclic_spec_to_dict(spec: CyclicSpec) -> dict:
    out = {
        "mode": spec.mode,
        "u_range": list(spec.u_range),
        "u_periodic": spec.u_periodic,
        "label": spec.label,
        "a": _table_dict(spec.a, spec.u_range),
        "b": _table_dict(spec.b, spec.u_range),
        "r": _table_dict(spec.r, spec.u_range),
    }
    if spec.mode == "frenet":
        out["c"] = _table_dict(spec.c, spec.u_range)
        out["kappa"] = _table_dict(spec.frame.kappa, spec.u_range)
        out["tau"] = _table_dict(spec.frame.tau, spec.u_range)
        g0 = spec.frame.gamma[0]
        out["init_frame"] = [g0.tolist(), spec.frame.t[0].tolist(),
                             spec.frame.n[0].tolist(), spec.frame.b[0].tolist()]
    return out


def cyclic_spec_from_dict(d) -> CyclicSpec:
    mode = d["mode"]
    u_range = tuple(d["u_range"])
    a = _func_from_table(d["a"])
    b = _func_from_table(d["b"])
    r = _func_from_table(d["r"])
    if mode == "parallel":
        return CyclicSpec(mode="parallel", u_range=u_range, a=a, b=b, r=r,
                          u_periodic=bool(d.get("u_periodic", False)),
                          label=d.get("label", ""))
    c = _func_from_table(d["c"])
    kappa = _func_from_table(d["kappa"])
    tau = _func_from_table(d["tau"])
    init = tuple(np.asarray(x, dtype=float) for x in d["init_frame"])
    frame = frame_from_curvature(kappa, tau, u_range, init)
    return CyclicSpec(mode="frenet", u_range=u_range, a=a, b=b, c=c, r=r,
                      frame=frame, u_periodic=bool(d.get("u_periodic", False)),
                      label=d.get("label", ""))


def write_solution_csv(spec: CyclicSpec, path, n=201):
    """Solution curve table (u, a, r, kappa) for generated families."""
    u = np.linspace(*spec.u_range, n)
    a = spec.a(u)
    r = spec.r(u)
    k = spec.frame.kappa(u) if spec.mode == "frenet" else np.zeros_like(u)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "a", "r", "kappa"])
        for row in zip(u, a, r, k):
            w.writerow([f"{x:.17g}" for x in row])
