import numpy as np
import pytest

from alphasurf.catalog import catenoid_patch, helicoid_patch, plane_patch, sphere_patch
from alphasurf.errors import DegenerateParametrizationError, ParameterRangeError
from alphasurf.surface_kernel import (
    Jet2,
    ParametricPatch,
    eval_jet2,
    fd_jet2,
    fundamental_data,
    rotated,
    scaled,
    swapped_uv,
    translated,
)


def grid(patch, n=7):
    u, v = patch.domain_grid(n, n)
    return np.meshgrid(u, v, indexing="ij")


def test_sphere_mean_curvature_magnitude():
    for R in (0.5, 1.0, 3.0):
        patch = sphere_patch((0, 0, 0), R)
        uu, vv = grid(patch)
        fd = fundamental_data(eval_jet2(patch, uu, vv))
        assert np.max(np.abs(np.abs(fd.H) - 2.0 / R)) < 1e-12


def test_sphere_normal_is_radial():
    patch = sphere_patch((0, 0, 0), 1.0)
    uu, vv = grid(patch)
    jet = eval_jet2(patch, uu, vv)
    fd = fundamental_data(jet)
    # outward normal: N parallel to P with positive inner product
    assert np.min(np.einsum("...i,...i->...", fd.normal, jet.P)) > 0.999999


def test_catenoid_is_minimal_pointwise():
    patch = catenoid_patch(1.0)
    uu, vv = grid(patch, 9)
    fd = fundamental_data(eval_jet2(patch, uu, vv))
    assert np.max(np.abs(fd.H)) < 1e-13


def test_analytic_jets_match_finite_differences():
    for patch in (sphere_patch((0.3, -0.2, 0.5), 1.2), helicoid_patch(0.7),
                  catenoid_patch(0.8)):
        u, v = patch.domain_grid(5, 5, margin=0.05)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        aj = eval_jet2(patch, uu, vv)
        fj = fd_jet2(patch, uu, vv, 1e-4)
        for name in ("Pu", "Pv", "Puu", "Puv", "Pvv"):
            diff = np.max(np.abs(getattr(aj, name) - getattr(fj, name)))
            assert diff < 5e-6, (patch.label, name, diff)


def test_domain_check_raises_outside():
    patch = catenoid_patch(1.0)
    with pytest.raises(ParameterRangeError):
        eval_jet2(patch, np.array([10.0]), np.array([0.0]))
    # periodic v wraps instead of raising
    a = eval_jet2(patch, np.array([0.0]), np.array([0.1])).P
    b = eval_jet2(patch, np.array([0.0]), np.array([0.1 + 2 * np.pi])).P
    assert np.allclose(a, b)


def test_degenerate_parametrization_detected():
    def ev(u, v):
        # Pu and Pv parallel: rank-1 map
        d = np.stack([np.ones_like(u), np.zeros_like(u), np.zeros_like(u)], -1)
        z = np.zeros_like(d)
        P = (u + v)[..., None] * d
        return Jet2(P, d, d, z, z, z)

    patch = ParametricPatch(ev, (0.0, 1.0), (0.0, 1.0))
    with pytest.raises(DegenerateParametrizationError):
        fundamental_data(eval_jet2(patch, np.array([0.5]), np.array([0.5])))


def test_transforms_behave():
    patch = sphere_patch((0, 0, 0), 1.0)
    uu, vv = grid(patch)
    base = fundamental_data(eval_jet2(patch, uu, vv))

    lam = 2.5
    sc = fundamental_data(eval_jet2(scaled(patch, lam), uu, vv))
    assert np.allclose(sc.H, base.H / lam)

    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th), 0],
                  [np.sin(th), np.cos(th), 0], [0, 0, 1.0]])
    ro = fundamental_data(eval_jet2(rotated(patch, R), uu, vv))
    assert np.allclose(ro.H, base.H)
    assert np.allclose(ro.normal, base.normal @ R.T)

    tr = fundamental_data(eval_jet2(translated(patch, (1, 2, 3)), uu, vv))
    assert np.allclose(tr.H, base.H)

    sw = swapped_uv(patch)
    swf = fundamental_data(eval_jet2(sw, vv, uu))
    # orientation flip negates H
    assert np.allclose(swf.H, -base.H)


def test_domain_grid_periodic_uses_midpoints():
    patch = sphere_patch((0, 0, 0), 1.0)
    u, v = patch.domain_grid(4, 8)
    assert len(v) == 8
    # midpoint samples never hit the seam
    assert np.min(v) > 0.0 and np.max(v) < 2 * np.pi
    assert u[0] > 0.0 and u[-1] < np.pi
