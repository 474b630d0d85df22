import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gutkin_lab.errors import ConvexityViolation, NotConstantWidth
from gutkin_lab.geom2d import (
    SupportCurve2D, antipodal, chord_length_integral, eval_point, make_constant_width,
    turning_integral,
)
from gutkin_lab.lemmas import chord_integral_consistency

GRID = np.linspace(0.0, 2 * math.pi, 512, endpoint=False)


def test_circle_is_trivial():
    c = SupportCurve2D(1.0)
    assert c.is_circle and c.is_constant_width
    np.testing.assert_allclose(c.rho(GRID), 1.0)
    assert c.width == 2.0
    assert c.perimeter == pytest.approx(2 * math.pi)


def test_cubic_harmonic_curvature_radius():
    c = SupportCurve2D(1.0, [(3, 0.05)])
    np.testing.assert_allclose(c.rho(GRID), 1.0 - 0.4 * np.cos(3 * GRID), atol=1e-15)
    assert c.min_rho()[1] == pytest.approx(0.6, abs=1e-12)
    assert c.width == 2.0


def test_rho_matches_second_derivative():
    c = SupportCurve2D(1.3, [(3, 0.02, -0.01), (4, 0.004), (7, 0.0, 0.001)])
    np.testing.assert_allclose(c.rho(GRID), c.h(GRID) + c.h(GRID, 2), atol=1e-15)


def test_large_amplitude_is_not_convex():
    with pytest.raises(ConvexityViolation) as info:
        SupportCurve2D(1.0, [(3, 0.2)])
    assert info.value.min_rho == pytest.approx(1.0 - 1.6, abs=1e-9)


@pytest.mark.parametrize("kwargs", [{"r0": 0.0}, {"r0": 1.0, "harmonics": [(1, 0.1)]}])
def test_bad_parameters(kwargs):
    with pytest.raises(ValueError):
        SupportCurve2D(**kwargs)


def test_eval_point_circle():
    c = SupportCurve2D(1.0)
    p = eval_point(c, 0.0)
    np.testing.assert_allclose(p.position, [1.0, 0.0])
    np.testing.assert_allclose(p.inner_normal, [-1.0, 0.0])
    assert p.rho == 1.0
    q = eval_point(c, math.pi / 2)
    np.testing.assert_allclose(q.position, [0.0, 1.0], atol=1e-16)
    np.testing.assert_allclose(q.tangent, [-1.0, 0.0], atol=1e-16)


def test_eval_point_cubic():
    p = eval_point(SupportCurve2D(1.0, [(3, 0.05)]), 0.0)
    np.testing.assert_allclose(p.position, [1.05, 0.0], atol=1e-15)
    assert p.rho == pytest.approx(0.6, abs=1e-15)


def test_tangent_follows_position():
    c = SupportCurve2D(1.0, [(3, 0.05), (5, 0.0, 0.01)])
    t, dt = 0.83, 1e-6
    deriv = (c.position(t + dt) - c.position(t - dt)) / (2 * dt)
    np.testing.assert_allclose(deriv / np.linalg.norm(deriv), c.tangent(t), atol=1e-9)
    assert np.linalg.norm(deriv) == pytest.approx(float(c.rho(t)), rel=1e-8)


def test_arc_length_against_quadrature():
    from scipy.integrate import quad

    c = SupportCurve2D(1.0, [(3, 0.05), (4, 0.01, 0.003)])
    for t in (0.4, 2.0, 5.9):
        ref = quad(lambda x: float(c.rho(x)), 0.0, t, epsabs=1e-14)[0]
        assert float(c.arc_length(t)) == pytest.approx(ref, abs=1e-12)
    s = np.linspace(0, c.perimeter, 50, endpoint=False)
    np.testing.assert_allclose(c.arc_length(c.theta_at(s)), s, atol=1e-12)


def test_antipodal_chord():
    assert antipodal(SupportCurve2D(1.0), 0.0) == pytest.approx(math.pi)
    c = make_constant_width(1.0, [(3, 0.05)])
    t = 0.7
    tb = antipodal(c, t)
    assert tb == pytest.approx(t + math.pi)
    assert np.linalg.norm(c.position(t) - c.position(tb)) == pytest.approx(2.0, abs=1e-12)


def test_even_harmonic_has_no_antipode():
    with pytest.raises(NotConstantWidth):
        antipodal(SupportCurve2D(1.0, [(4, 0.01)]), 0.0)
    with pytest.raises(NotConstantWidth):
        make_constant_width(1.0, [(4, 0.01)])


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("delta", [0.1, math.pi / 6, 1.3])
def test_circle_chord_integral(R, delta):
    assert chord_length_integral(SupportCurve2D(R), 0.4, delta) == pytest.approx(2 * R * math.sin(delta), abs=1e-13)


def test_unit_circle_chord_at_pi_over_six():
    assert chord_length_integral(SupportCurve2D(1.0), 2.0, math.pi / 6) == pytest.approx(1.0, abs=1e-14)


def test_integral_matches_ray_shooting_with_actual_turn():
    c = SupportCurve2D(1.0, [(3, 0.05)])
    assert chord_integral_consistency(c, 0.3, 0.6) < 1e-8


def test_turning_integral_of_circle():
    # x-extent of a circular arc of turn phi is R sin(phi)
    assert turning_integral(SupportCurve2D(1.5), 0.2, 1.1) == pytest.approx(1.5 * math.sin(1.1), abs=1e-14)


def test_signed_distance_recovers_normal_angle():
    c = SupportCurve2D(1.0, [(3, 0.05), (5, 0.01)])
    thetas = np.linspace(0.05, 6.2, 40)
    gap, theta = c.signed_distance(c.position(thetas))
    np.testing.assert_allclose(gap, 0.0, atol=1e-14)
    np.testing.assert_allclose(theta, thetas, atol=1e-12)
    inside, _ = c.signed_distance(np.zeros((1, 2)))
    assert inside[0] < 0


def test_round_trip_dict():
    c = SupportCurve2D(1.2, [(3, 0.01, 0.02), (6, 0.001)])
    assert SupportCurve2D.from_dict(c.to_dict()) == c


odd = st.sampled_from([3, 5, 7, 9])
amp = st.floats(-1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 2.0), st.lists(st.tuples(odd, amp, amp), max_size=3))
def test_constant_width_radius_sum(r0, raw):
    # scale amplitudes so that rho stays positive
    budget = 0.5 * r0 / max(1, len(raw))
    harmonics = [(n, a * budget / (n * n - 1) / 2, b * budget / (n * n - 1) / 2) for n, a, b in raw]
    c = make_constant_width(r0, harmonics)
    err = np.abs(c.rho(GRID) + c.rho(GRID + math.pi) - 2 * r0)
    assert err.max() < 1e-12
    assert np.allclose(c.h(GRID) + c.h(GRID + math.pi), 2 * r0, atol=1e-12)
