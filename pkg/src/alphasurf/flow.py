"""Discrete weighted-area energy and gradient descent on triangle meshes.

The energy sums |centroid|^alpha * area over triangles, which keeps the
gradient with respect to every vertex in closed form: a weighted area
gradient plus the derivative of the centroid weight.  Descent with
backtracking is monotone by construction and is used to confirm that the
smooth stationary surfaces are critical points of the discretized energy.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    FlowSingularityError,
    FlowStallError,
    OpenMeshError,
    OriginInFaceError,
    SpecValidationError,
    ValidationError,
)
from .surface_kernel import ParametricPatch, eval_jet2

MIN_TRIANGLE_AREA = 1e-14


@dataclass
class TriMesh:
    """Indexed triangle mesh; triangles wind consistently when closed."""

    vertices: np.ndarray   # (n, 3)
    triangles: np.ndarray  # (m, 3) int

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.triangles.size and (self.triangles.min() < 0
                                    or self.triangles.max() >= len(self.vertices)):
            raise ValidationError("triangle index out of range")

    def copy(self):
        return TriMesh(self.vertices.copy(), self.triangles.copy())

    def edge_count(self):
        e = np.sort(self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return len(np.unique(e, axis=0))

    def euler_characteristic(self):
        return len(self.vertices) - self.edge_count() + len(self.triangles)

    def is_closed(self):
        """Every directed edge appears exactly once, and so does its reverse."""
        d = self.triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
        seen = {}
        for a, b in map(tuple, d):
            key = (a, b)
            if key in seen:
                return False
            seen[key] = True
        for a, b in list(seen):
            if (b, a) not in seen:
                return False
        return True

    def triangle_geometry(self):
        """(centroids, area vectors, areas) for all triangles."""
        v = self.vertices[self.triangles]
        cent = v.mean(axis=1)
        avec = 0.5 * np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        area = np.linalg.norm(avec, axis=-1)
        return cent, avec, area


def _require_flowable(mesh: TriMesh):
    if not mesh.is_closed():
        raise OpenMeshError("flow requires a closed oriented mesh")
    _, _, area = mesh.triangle_geometry()
    if np.any(area <= MIN_TRIANGLE_AREA):
        raise ValidationError("mesh contains a degenerate triangle")
    if np.any(np.linalg.norm(mesh.vertices, axis=-1) < 1e-9):
        raise ValidationError("mesh has a vertex at the origin")


# ---------------------------------------------------------------------------
# sampling patches into meshes


def sample_mesh(patch: ParametricPatch, nu: int, nv: int,
                margin=None) -> TriMesh:
    """Structured triangulation of a patch.

    The v direction must be periodic.  In u, periodic patches wrap around
    and collapse-flagged endpoints (sphere poles) are closed with vertex
    fans; otherwise the mesh is open (flow refuses it, but export works).
    """
    if not patch.v_periodic:
        raise SpecValidationError("meshing requires a v-periodic patch")
    if nu < 2 or nv < 3:
        raise ValidationError("need nu >= 2 and nv >= 3")
    u0, u1 = patch.u_range
    v0, v1 = patch.v_range
    v = v0 + (v1 - v0) * np.arange(nv) / nv
    lo_fan, hi_fan = patch.u_collapse

    if patch.u_periodic:
        u_rows = u0 + (u1 - u0) * np.arange(nu) / nu
    else:
        u_rows = np.linspace(u0, u1, nu + 1)
        if lo_fan:
            u_rows = u_rows[1:]
        if hi_fan:
            u_rows = u_rows[:-1]
        if margin is not None and not (lo_fan or hi_fan):
            m = margin * (u1 - u0)
            u_rows = np.linspace(u0 + m, u1 - m, nu + 1)

    uu, vv = np.meshgrid(u_rows, v, indexing="ij")
    grid = eval_jet2(patch, uu, vv).P
    n_rows = len(u_rows)
    verts = [grid.reshape(-1, 3)]
    idx = np.arange(n_rows * nv).reshape(n_rows, nv)
    tris = []

    def quad_band(row_a, row_b):
        for j in range(nv):
            jn = (j + 1) % nv
            a, b = row_a[j], row_b[j]
            c, d = row_b[jn], row_a[jn]
            tris.append([a, b, c])
            tris.append([a, c, d])

    for i in range(n_rows - 1):
        quad_band(idx[i], idx[i + 1])
    if patch.u_periodic:
        quad_band(idx[-1], idx[0])
    next_vid = n_rows * nv
    if not patch.u_periodic and lo_fan:
        apex = eval_jet2(patch, np.array([u0]), np.array([v0])).P[0]
        verts.append(apex[None, :])
        for j in range(nv):
            tris.append([next_vid, idx[0][j], idx[0][(j + 1) % nv]])
        next_vid += 1
    if not patch.u_periodic and hi_fan:
        apex = eval_jet2(patch, np.array([u1]), np.array([v0])).P[0]
        verts.append(apex[None, :])
        for j in range(nv):
            tris.append([next_vid, idx[-1][(j + 1) % nv], idx[-1][j]])
        next_vid += 1
    return TriMesh(np.concatenate(verts, axis=0), np.array(tris))


# ---------------------------------------------------------------------------
# energy and gradient


def discrete_energy(mesh: TriMesh, alpha: float) -> float:
    cent, _, area = mesh.triangle_geometry()
    c2 = np.einsum("ij,ij->i", cent, cent)
    if np.any(c2 <= 0.0):
        raise OriginInFaceError("triangle centroid at the origin")
    return float(np.sum(c2 ** (alpha / 2.0) * area))


def discrete_gradient(mesh: TriMesh, alpha: float) -> np.ndarray:
    """Exact per-vertex gradient of ``discrete_energy``."""
    tri = mesh.triangles
    v = mesh.vertices[tri]
    cent, avec, area = mesh.triangle_geometry()
    bad = area <= MIN_TRIANGLE_AREA
    if np.any(bad):
        raise FlowSingularityError(
            f"{int(bad.sum())} degenerate triangle(s) in gradient evaluation")
    c2 = np.einsum("ij,ij->i", cent, cent)
    if np.any(c2 <= 0.0):
        raise OriginInFaceError("triangle centroid at the origin")
    w = c2 ** (alpha / 2.0)
    nhat = avec / area[:, None]
    grad = np.zeros_like(mesh.vertices)
    # area gradient at vertex i is (opposite edge) x nhat / 2
    for k in range(3):
        e = v[:, (k + 1) % 3] - v[:, (k + 2) % 3]
        darea = 0.5 * np.cross(e, nhat)
        term = w[:, None] * darea
        if alpha != 0.0:
            term = term + ((alpha / 3.0) * c2 ** (alpha / 2.0 - 1.0)
                           * area)[:, None] * cent
        np.add.at(grad, tri[:, k], term)
    return grad


# ---------------------------------------------------------------------------
# descent


@dataclass
class FlowTrace:
    rows: list  # (step, energy, grad_max, dt)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "energy", "grad_max", "dt"])
            for step, e, g, dt in self.rows:
                w.writerow([step, f"{e:.17g}", f"{g:.17g}", f"{dt:.17g}"])


def _min_area(verts, tris):
    v = verts[tris]
    avec = 0.5 * np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
    return float(np.min(np.linalg.norm(avec, axis=-1)))


def descend(mesh: TriMesh, alpha: float, steps: int, step_rule="backtracking",
            dt=1e-3, max_rejects=50):
    """Gradient descent on the discrete energy.

    ``step_rule`` is "backtracking" (monotone, halves dt on rejection) or
    "fixed" (constant dt, no acceptance test).  Returns (mesh, FlowTrace).
    """
    if step_rule not in ("backtracking", "fixed"):
        raise ValidationError(f"unknown step rule {step_rule!r}")
    _require_flowable(mesh)
    cur = mesh.copy()
    energy = discrete_energy(cur, alpha)
    trace = []
    dt = float(dt)
    for step in range(int(steps)):
        g = discrete_gradient(cur, alpha)
        gmax = float(np.max(np.linalg.norm(g, axis=-1)))
        trace.append((step, energy, gmax, dt))
        if step_rule == "fixed":
            cand = cur.vertices - dt * g
            if _min_area(cand, cur.triangles) <= MIN_TRIANGLE_AREA:
                raise FlowSingularityError(
                    f"triangle degenerated at step {step}", step=step)
            cur.vertices = cand
            energy = discrete_energy(cur, alpha)
            continue
        g2 = float(np.sum(g * g))
        rejects = 0
        while True:
            cand = cur.vertices - dt * g
            ok = _min_area(cand, cur.triangles) > MIN_TRIANGLE_AREA
            if ok:
                cand_mesh = TriMesh(cand, cur.triangles)
                try:
                    e_new = discrete_energy(cand_mesh, alpha)
                except OriginInFaceError:
                    ok = False
            if ok and e_new <= energy - 1e-4 * dt * g2:
                assert e_new <= energy
                cur.vertices = cand
                energy = e_new
                dt = min(dt * 1.5, 1.0)
                break
            dt *= 0.5
            rejects += 1
            if rejects > max_rejects:
                raise FlowStallError(
                    f"step {step}: {rejects} consecutive rejections", step=step)
    g = discrete_gradient(cur, alpha)
    trace.append((int(steps), energy, float(np.max(np.linalg.norm(g, axis=-1))), dt))
    return cur, FlowTrace(trace)


# ---------------------------------------------------------------------------
# OBJ I/O


def write_obj(mesh: TriMesh, path):
    with open(path, "w") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def read_obj(path) -> TriMesh:
    verts, tris = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise ValidationError("only triangle faces are supported")
                tris.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
    if not verts or not tris:
        raise ValidationError(f"no mesh data in {path!r}")
    return TriMesh(np.array(verts), np.array(tris))
