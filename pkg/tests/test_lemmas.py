import math

import mpmath
import numpy as np
import pytest

from gutkin_lab.errors import DegenerateQuadratic, NotConstantWidth
from gutkin_lab.geom2d import SupportCurve2D, make_constant_width
from gutkin_lab.geomnd import Sphere
from gutkin_lab.gutkin import solve_gutkin_delta
from gutkin_lab.lemmas import (
    case_dichotomy_probe, check_curvature_inequality, chord_identities, curvature_quadratic,
    gutkin_defect_2d, osculating_check, quadratic_coefficients, run_lemma_suite,
    verify_antipodal_chords, verify_width_chord_identity,
)

ROOT5 = solve_gutkin_delta(5)[0].delta
CIRCLE = SupportCurve2D(1.0)
NEAR_CIRCLE = make_constant_width(1.0, [(5, 1e-3)])


@pytest.mark.parametrize("delta,theta", [(0.3, 0.0), (math.pi / 7, 1.234), (1.4, 4.0)])
def test_circle_antipodal_chords(delta, theta):
    assert verify_antipodal_chords(CIRCLE, delta, theta).claim_defect < 1e-10


def test_gutkin_perturbation_antipodal_chords():
    for theta in np.linspace(0, 2 * math.pi, 9):
        check = verify_antipodal_chords(NEAR_CIRCLE, ROOT5, theta)
        assert check.claim_defect < 1e-2 * 1e-3


def test_width_chord_identity_on_circle():
    for R in (0.5, 2.0):
        rho_err, chord_err = verify_width_chord_identity(SupportCurve2D(R), 0.5, 1.0)
        assert rho_err < 1e-12 and chord_err < 1e-12


@pytest.mark.parametrize("curve,delta,theta", [
    (make_constant_width(1.0, [(3, 0.05)]), 0.6, 0.3),
    (make_constant_width(1.0, [(3, 0.05), (5, 0.01)]), 1.1, 2.0),
])
def test_width_chord_identity(curve, delta, theta):
    rho_err, chord_err = verify_width_chord_identity(curve, delta, theta)
    assert rho_err < 1e-10 and chord_err < 1e-10


def test_width_chord_identity_needs_constant_width():
    with pytest.raises(NotConstantWidth):
        verify_width_chord_identity(SupportCurve2D(1.0, [(4, 0.01)]), 0.5, 0.0)


def test_circle_curvature_inequality():
    delta = 0.8
    rep = check_curvature_inequality(CIRCLE, delta)
    assert rep.min_margin == pytest.approx(math.sin(delta), abs=1e-12)
    assert set(rep.pair_classes) == {"equal"}
    np.testing.assert_allclose(rep.kl, 2 * math.sin(delta), atol=1e-12)


def test_perturbed_gutkin_curve_inequality():
    rep = check_curvature_inequality(NEAR_CIRCLE, ROOT5)
    assert rep.hypothesis_holds
    assert rep.min_margin > 0.9 * math.sin(ROOT5)
    assert rep.dichotomy_holds


def test_non_gutkin_curve_is_diagnostic_only():
    rep = check_curvature_inequality(make_constant_width(1.0, [(3, 0.05)]), 0.4)
    assert not rep.hypothesis_holds
    assert np.isfinite(rep.kl).all()


@pytest.mark.parametrize("curve", [
    SupportCurve2D(1.0, [(3, 0.05)]), SupportCurve2D(1.0, [(4, 0.02), (7, 0.0, 0.003)]), NEAR_CIRCLE,
])
def test_osculating_chord_is_longer(curve):
    for delta in (0.2, 0.9, 1.4):
        assert osculating_check(curve, delta).margin > 0.0


def test_osculating_chord_on_circle_is_equal():
    assert abs(osculating_check(SupportCurve2D(1.5), 0.7).margin) < 1e-12


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_sphere_quadratic(R):
    for delta in np.linspace(0.1, 1.5, 10):
        s = math.sin(delta)
        q = curvature_quadratic(1 / R, 2 * R * s, delta)
        assert q.A == pytest.approx(2 * R * s**3, rel=1e-14)
        assert q.B == pytest.approx(-2 * s**3, rel=1e-14)
        assert abs(q.C) < 1e-14
        assert q.positive_roots == pytest.approx((1 / R,), abs=1e-12)


def test_unit_sphere_quadratic_at_pi_over_six():
    q = curvature_quadratic(1.0, 1.0, math.pi / 6)
    assert (q.A, q.B) == pytest.approx((0.25, -0.25), abs=1e-15)
    assert abs(q.C) < 1e-16
    assert q.roots == pytest.approx((0.0, 1.0), abs=1e-12)


def test_excluded_value_is_degenerate():
    delta = 0.5
    with pytest.raises(DegenerateQuadratic):
        curvature_quadratic(math.sin(delta) / 0.8, 0.8, delta)


def test_second_case_has_two_positive_roots():
    delta = 0.5
    q = curvature_quadratic(3 * math.sin(delta) / 0.7, 0.7, delta)
    assert q.C > 0 and q.case == 2
    disc = q.B**2 - 4 * q.A * q.C
    if disc >= 0:
        assert len(q.positive_roots) == 2
        for r in q.roots:
            assert abs(q.A * r * r + q.B * r + q.C) < 1e-12
    else:
        assert q.roots == ()


def test_coefficients_echo_inputs():
    rng = np.random.default_rng(0)
    n = 100_000
    delta = rng.uniform(0.01, 1.56, n)
    l1 = rng.uniform(0.01, 4.0, n)
    k1 = rng.uniform(0.01, 10.0, n)
    s = np.sin(delta)
    ref = (l1 * s * (k1 * l1 - s), 2 * s - k1 * l1 * (1 + s * s), (s / l1) * (k1 * l1 - 2 * s))
    got = np.array([quadratic_coefficients(float(k), float(l), float(d)) for k, l, d in zip(k1, l1, delta)])
    for j in range(3):
        np.testing.assert_allclose(got[:, j], ref[j], rtol=1e-14, atol=0)


def test_coefficients_against_high_precision():
    rng = np.random.default_rng(1)
    with mpmath.workdps(40):
        for k1, l1, d in zip(rng.uniform(0.1, 5, 200), rng.uniform(0.1, 3, 200), rng.uniform(0.05, 1.5, 200)):
            s = mpmath.sin(mpmath.mpf(d))
            k, l = mpmath.mpf(k1), mpmath.mpf(l1)
            exact = (l * s * (k * l - s), 2 * s - k * l * (1 + s * s), (s / l) * (k * l - 2 * s))
            got = quadratic_coefficients(float(k1), float(l1), float(d))
            for g, e, scale in zip(got, exact, (l * s * k * l, k * l * 2, s * k)):
                assert abs(g - e) <= 1e-14 * float(scale) + 1e-300


def test_circle_dichotomy_is_all_first_case():
    rep = case_dichotomy_probe(CIRCLE, 0.6, np.linspace(0, 2 * math.pi, 32, endpoint=False))
    assert rep.case1_fraction == 1.0
    np.testing.assert_allclose(rep.continued_roots(), 1.0, atol=1e-12)


def test_perturbed_dichotomy_roots_stay_near_one():
    rep = case_dichotomy_probe(NEAR_CIRCLE, ROOT5, np.linspace(0, 2 * math.pi, 64, endpoint=False))
    assert 0.0 < rep.case1_fraction < 1.0
    assert np.max(np.abs(rep.continued_roots() - 1.0)) < 1e-2


def test_sphere_chord_identities():
    rng = np.random.default_rng(2)
    for R in (0.5, 2.0):
        for delta in (0.2, 1.0):
            u = rng.standard_normal(3)
            u /= np.linalg.norm(u)
            t = np.cross(u, rng.standard_normal(3))
            t /= np.linalg.norm(t)
            e1, e2 = chord_identities(Sphere.unit(3, R), R * u, t, delta)
            assert e1 < 1e-10 and e2 < 1e-10


def test_lemma_suite_modes():
    circle = run_lemma_suite(CIRCLE, 0.6, grid=16)
    assert all(c.passed is not False for c in circle)
    assert all(c.mode == "assert" for c in circle if c.lemma != "equal-angle defect")
    generic = run_lemma_suite(make_constant_width(1.0, [(3, 0.05)]), 0.6, grid=16)
    assert gutkin_defect_2d(make_constant_width(1.0, [(3, 0.05)]), 0.6) > 1e-3
    assert any(c.mode == "diagnostic" and c.passed is None for c in generic)
    assert all(c.passed is not False for c in generic)
