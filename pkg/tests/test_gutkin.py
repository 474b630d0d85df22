import math

import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq

from gutkin_lab.errors import ConvexityViolation
from gutkin_lab.geom2d import SupportCurve2D, make_constant_width
from gutkin_lab.geomnd import Ellipsoid, Planar, Revolution, Sphere
from gutkin_lab.gutkin import (
    SamplerSpec, boundary_samples, defect_scan, harmonic_probe, loglog_slope,
    perturbation_scaling, root_collisions, solve_gutkin_delta, sphere_characterization_experiment,
)


def test_n_two_is_rejected():
    with pytest.raises(ValueError):
        solve_gutkin_delta(2)


def test_n_four_root_in_sign_change_bracket():
    roots = solve_gutkin_delta(4)
    lo, hi = math.pi / 4, 3 * math.pi / 8
    ref = brentq(lambda d: math.tan(4 * d) - 4 * math.tan(d), lo, hi - 1e-12, xtol=1e-16)
    inside = [r.delta for r in roots if lo < r.delta < hi]
    assert inside and min(abs(d - ref) for d in inside) < 1e-14


@pytest.mark.parametrize("n", range(4, 11))
def test_roots_replug_at_high_precision(n):
    roots = solve_gutkin_delta(n)
    assert roots
    with mpmath.workdps(60):
        for r in roots:
            d = mpmath.mpf(r.delta)
            assert abs(mpmath.tan(n * d) - n * mpmath.tan(d)) < 1e-10
            assert 0 < r.delta < math.pi / 2


def test_root_counts_grow_with_n():
    counts = [len(solve_gutkin_delta(n)) for n in range(4, 11)]
    assert counts == sorted(counts)
    # the scan finds every sign change of the pole-free form on a fine grid
    for n in (5, 8):
        d = np.linspace(1e-6, math.pi / 2 - 1e-6, 400_001)
        g = np.sin(n * d) * np.cos(d) - n * np.sin(d) * np.cos(n * d)
        assert np.count_nonzero(np.diff(np.sign(g)) != 0) == len(solve_gutkin_delta(n))


def test_no_root_collisions_up_to_twenty():
    assert root_collisions(20) == []


def test_unit_sphere_is_gutkin():
    r = defect_scan(Sphere.unit(3), 0.7, SamplerSpec(10_000, 0))
    assert r.max_defect < 1e-9
    assert r.sample_count == 10_000 and r.misses == 0


def test_five_sphere_is_gutkin():
    assert defect_scan(Sphere.unit(5), 0.3, SamplerSpec(10_000, 0)).max_defect < 1e-9


def test_elongated_ellipsoid_defect():
    r = defect_scan(Ellipsoid.axis_aligned([1.2, 1.0, 1.0]), 0.7, SamplerSpec(10_000, 0))
    assert r.max_defect > 1e-3
    # regression value for the default sampler
    assert r.max_defect == pytest.approx(0.18357784196854177, rel=1e-9)


def test_scan_is_thread_count_independent(monkeypatch):
    body = Revolution(make_constant_width(1.0, [(3, 0.05)]))
    monkeypatch.setenv("GUTKIN_LAB_THREADS", "1")
    one = defect_scan(body, 0.6, SamplerSpec(9000, 4)).to_dict()
    monkeypatch.setenv("GUTKIN_LAB_THREADS", "3")
    three = defect_scan(body, 0.6, SamplerSpec(9000, 4)).to_dict()
    assert one == three


@pytest.mark.parametrize("body", [
    Sphere.unit(4), Ellipsoid.axis_aligned([1.3, 1.0, 0.8]),
    Revolution(make_constant_width(1.0, [(3, 0.05)])), Planar(SupportCurve2D(1.0, [(3, 0.05)])),
])
def test_samples_are_boundary_tangent_pairs(body):
    feet, tangents = boundary_samples(body, SamplerSpec(500, 2))
    np.testing.assert_allclose(body.signed_gap(feet), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(tangents, axis=1), 1.0, atol=1e-12)
    normals = body.inner_normal_many(feet)
    np.testing.assert_allclose(np.sum(normals * tangents, axis=1), 0.0, atol=1e-10)


def test_samples_depend_on_seed():
    a, _ = boundary_samples(Sphere.unit(3), SamplerSpec(10, 0))
    b, _ = boundary_samples(Sphere.unit(3), SamplerSpec(10, 1))
    c, _ = boundary_samples(Sphere.unit(3), SamplerSpec(10, 0))
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, c)


def test_characterization_rows():
    family = [Sphere.unit(3), Ellipsoid.axis_aligned([1.1, 1.0, 1.0]),
              Revolution(make_constant_width(1.0, [(3, 0.05)]))]
    table = sphere_characterization_experiment(family, np.linspace(0.3, 1.2, 4), SamplerSpec(1024, 0))
    assert table.row_minimum[0] < 1e-9
    assert all(table.check().values())
    assert table.sphere_baseline == table.mean_defect[0].max()


@pytest.mark.parametrize("family", [[Sphere.unit(4)], [Revolution(SupportCurve2D(1.0))]])
def test_round_only_families(family):
    table = sphere_characterization_experiment(family, [0.4, 0.9], SamplerSpec(512, 0))
    assert table.mean_defect.max() < 1e-9


def test_probe_amplitude_limit():
    with pytest.raises(ConvexityViolation):
        harmonic_probe(5, 1.0 / 24.0)
    assert harmonic_probe(5, 0.0).is_circle


def test_zero_amplitude_has_no_defect():
    res = perturbation_scaling(5, 0.5, [0.0])
    assert res.rms_defect[0] < 1e-12
    assert res.slope is None


def test_generic_angle_scales_linearly():
    res = perturbation_scaling(5, 0.5, [1e-3, 2e-3, 4e-3, 8e-3])
    assert 0.8 <= res.slope <= 1.2
    text = res.to_csv(["n=5"])
    assert text.splitlines()[1] == "eps,rms_defect"
    assert text.splitlines()[-1].startswith("# slope=")


def test_loglog_slope_of_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert loglog_slope(x, 3 * x**2) == pytest.approx(2.0)
