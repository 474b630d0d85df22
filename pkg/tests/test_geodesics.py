import math

import numpy as np
import pytest

from gutkin_lab.errors import StepTooLarge
from gutkin_lab.geomnd import Ellipsoid, Revolution, Sphere
from gutkin_lab.geom2d import SupportCurve2D
from gutkin_lab.geodesics import (
    analytic_torsion, as_arrays, frenet_residual, geodesic_csv, integrate_geodesic,
    planarity_defect,
)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_great_circle(R):
    rng = np.random.default_rng(int(R * 10))
    u = rng.standard_normal(3)
    u /= np.linalg.norm(u)
    t = np.cross(u, rng.standard_normal(3))
    t /= np.linalg.norm(t)
    samples = integrate_geodesic(Sphere.unit(3, R), R * u, t, 2 * math.pi * R)
    s, x, v, n, w, k, tau = as_arrays(samples)
    np.testing.assert_allclose(k, 1 / R, atol=1e-8)
    assert np.max(np.abs(tau)) < 1e-8
    assert planarity_defect(samples) < 1e-8
    # a full great circle returns to its start
    assert np.linalg.norm(x[-1] - x[0]) < 1e-8


def test_symmetry_plane_geodesic():
    samples = integrate_geodesic(Ellipsoid.axis_aligned([2.0, 1.0, 1.0]), [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], 8.0)
    _, x, *_, tau = as_arrays(samples)
    assert np.max(np.abs(x[:, 2])) < 1e-12
    assert np.max(np.abs(tau)) < 1e-7
    assert planarity_defect(samples) < 1e-6


def test_generic_geodesic_twists():
    body = Ellipsoid.axis_aligned([2.0, 1.3, 1.0])
    samples = integrate_geodesic(body, [2.0, 0.0, 0.0], [0.0, 0.6, 0.8], 10.0)
    tau = as_arrays(samples)[-1]
    assert np.max(np.abs(tau)) > 1e-3
    assert planarity_defect(samples) > 1e-3
    # finite-difference torsion against the shape operator
    np.testing.assert_allclose(tau[2:-2], analytic_torsion(body, samples)[2:-2], atol=1e-4)


def test_frenet_consistency():
    body = Ellipsoid.axis_aligned([2.0, 1.3, 1.0])
    samples = integrate_geodesic(body, [0.0, 1.3, 0.0], [0.6, 0.0, 0.8], 6.0)
    assert frenet_residual(samples) < 1e-5
    s, x, v, n, w, k, tau = as_arrays(samples)
    h = s[1] - s[0]
    ndot = np.gradient(n, h, axis=0, edge_order=2)
    wdot = np.gradient(w, h, axis=0, edge_order=2)
    resid = ndot - (-k[:, None] * v + tau[:, None] * w)
    assert np.max(np.linalg.norm(resid, axis=1)) < 1e-4
    assert np.max(np.abs(np.sum(wdot * v, axis=1))) < 1e-4
    assert np.max(np.abs(np.sum(wdot * n, axis=1) + tau)) < 1e-4


def test_samples_stay_on_surface_with_unit_speed():
    body = Ellipsoid.axis_aligned([1.5, 1.2, 0.9])
    samples = integrate_geodesic(body, [1.5, 0.0, 0.0], [0.0, 1.0, 1.0], 5.0)
    _, x, v, n, *_ = as_arrays(samples)
    np.testing.assert_allclose(body.signed_gap(x), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(np.sum(v * n, axis=1), 0.0, atol=1e-12)
    assert samples[-1].s == pytest.approx(5.0)


def test_coarse_step_is_refused():
    with pytest.raises(StepTooLarge):
        integrate_geodesic(Ellipsoid.axis_aligned([3.0, 1.0, 0.5]), [3.0, 0.0, 0.0], [0.0, 0.3, 0.9], 5.0, step=0.5)


def test_bad_inputs():
    with pytest.raises(ValueError):
        integrate_geodesic(Sphere.unit(3), [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        integrate_geodesic(Sphere.unit(4), [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], 1.0)
    with pytest.raises(TypeError):
        integrate_geodesic(Revolution(SupportCurve2D(1.0)), [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 1.0)


def test_geodesic_csv():
    samples = integrate_geodesic(Sphere.unit(3), [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], 0.1, step=0.05)
    lines = geodesic_csv(samples, ["seed=0"]).splitlines()
    assert lines[:2] == ["# seed=0", "s,x,y,z,k,tau"]
    assert len(lines) == 2 + len(samples)
