"""Numerical checks of the chord and curvature lemmas for equal-angle curves.

Checks whose hypotheses include the equal-angle property run in two modes:
``assert`` when the curve satisfies it (defect below ``GUTKIN_TOL``) and
``diagnostic`` otherwise, where values are reported but no verdict is given.
Conventions: curvature k and chord length l refer to the chord's launch
point; antipodal quantities use theta + pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .billiard import delta_chord, delta_chords
from .errors import DegenerateQuadratic, NotConstantWidth
from .geom2d import TWO_PI, SupportCurve2D, antipodal, chord_length_integral, turning_integral
from .geomnd import ConvexBody, Planar

GUTKIN_TOL = 1e-9
ROOT_SNAP = 1e-12


def _angle_gap(a: float, b: float) -> float:
    return abs((a - b + math.pi) % TWO_PI - math.pi)


def _chord_theta(curve: SupportCurve2D, theta: float, delta: float):
    """Geometric delta-chord from normal angle theta (counterclockwise launch)."""
    body = Planar(curve)
    foot = curve.position(theta)
    direction = math.cos(delta) * curve.tangent(theta) + math.sin(delta) * curve.inner_normal(theta)
    theta1, ok = body.exit_theta(foot[None, :], direction[None, :])
    rec = delta_chord(body, foot, curve.tangent(theta), delta)
    return float(theta1[0]), rec


def geometric_chords(curve: SupportCurve2D, thetas, delta: float):
    """Vectorized ccw delta-chords: (exit normal angles, lengths, defects)."""
    thetas = np.asarray(thetas, dtype=float)
    body = Planar(curve)
    feet = curve.position(thetas)
    batch = delta_chords(body, feet, curve.tangent(thetas), delta)
    theta1, _ = body.exit_theta(feet, batch.directions)
    return theta1, batch.lengths, batch.defects


def gutkin_defect_2d(curve: SupportCurve2D, delta: float, grid: int = 512) -> float:
    """Largest equal-angle defect over a uniform grid of ccw delta-chords."""
    _, _, defects = geometric_chords(curve, np.linspace(0.0, TWO_PI, grid, endpoint=False), delta)
    return float(defects.max())


# -- antipodal chords --------------------------------------------------------------


@dataclass(frozen=True)
class AntipodalCheck:
    claim_defect: float
    gutkin_defect: float
    theta_b: float
    theta_c: float


def verify_antipodal_chords(curve: SupportCurve2D, delta: float, theta_a: float) -> AntipodalCheck:
    """Angular distance between the far end c of the chord from the antipode of a
    and the antipode of the far end b of the chord from a."""
    theta_abar = antipodal(curve, theta_a)
    theta_b, rec_b = _chord_theta(curve, theta_a, delta)
    theta_c, rec_c = _chord_theta(curve, theta_abar, delta)
    claim = _angle_gap(theta_c, antipodal(curve, theta_b))
    return AntipodalCheck(claim, max(rec_b.defect, rec_c.defect), theta_b, theta_c)


# -- width and chord sums -------------------------------------------------------------


def verify_width_chord_identity(curve: SupportCurve2D, delta: float, theta_a: float) -> tuple[float, float]:
    """(|rho(a) + rho(a bar) - 2R|, |l + l bar - 4 R sin delta|) with l from the turning integral."""
    if not curve.is_constant_width:
        raise NotConstantWidth(f"{curve.label} is not of constant width")
    R = 0.5 * curve.width
    theta_abar = antipodal(curve, theta_a)
    rho_err = abs(float(curve.rho(theta_a) + curve.rho(theta_abar)) - 2.0 * R)
    l = chord_length_integral(curve, theta_a, delta)
    lbar = chord_length_integral(curve, theta_abar, delta)
    return rho_err, abs(l + lbar - 4.0 * R * math.sin(delta))


def chord_integral_consistency(curve: SupportCurve2D, theta: float, delta: float) -> float:
    """|geometric chord - turning integral over the actual turn / cos(delta)|.

    The actual turn between the ends of a chord is launch + arrival angle, so
    this agreement holds on every convex curve, unlike the 2-delta version.
    """
    theta1, rec = _chord_theta(curve, theta, delta)
    turn = (theta1 - theta) % TWO_PI
    return abs(rec.length - turning_integral(curve, theta, turn) / math.cos(delta))


# -- curvature inequality ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CurvatureInequalityReport:
    delta: float
    thetas: np.ndarray
    kl: np.ndarray  # k * l at each grid point
    min_margin: float  # min of k l - sin(delta)
    pair_classes: list[str]  # per antipodal pair
    gutkin_defect: float
    band: float

    @property
    def hypothesis_holds(self) -> bool:
        return self.gutkin_defect < GUTKIN_TOL

    @property
    def dichotomy_holds(self) -> bool:
        return all(c in ("a_below", "abar_below", "equal") for c in self.pair_classes)


def _classify_pair(kl_a: float, kl_abar: float, two_sin: float, band: float) -> str:
    da, db = kl_a - two_sin, kl_abar - two_sin
    if abs(da) <= band and abs(db) <= band:
        return "equal"
    if da < 0.0 < db:
        return "a_below"
    if db < 0.0 < da:
        return "abar_below"
    return "violation"


def check_curvature_inequality(
    curve: SupportCurve2D, delta: float, grid: int = 256, band: float = 1e-12
) -> CurvatureInequalityReport:
    """k l - sin(delta) over a grid and the side of 2 sin(delta) for each antipodal pair.

    ``grid`` must be even so that theta + pi is a grid point.
    """
    if not curve.is_constant_width:
        raise NotConstantWidth(f"{curve.label} is not of constant width")
    if grid % 2:
        raise ValueError("grid must be even")
    thetas = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    _, lengths, defects = geometric_chords(curve, thetas, delta)
    kl = lengths / curve.rho(thetas)
    half = grid // 2
    two_sin = 2.0 * math.sin(delta)
    classes = [_classify_pair(float(kl[i]), float(kl[i + half]), two_sin, band) for i in range(half)]
    return CurvatureInequalityReport(
        float(delta), thetas, kl, float(np.min(kl) - math.sin(delta)), classes,
        float(defects.max()), band,
    )


@dataclass(frozen=True)
class OsculatingCheck:
    theta_min: float
    rho_min: float
    chord: float
    bound: float  # 2 rho_min sin(delta)

    @property
    def margin(self) -> float:
        return self.chord - self.bound


def osculating_check(curve: SupportCurve2D, delta: float) -> OsculatingCheck:
    """Chord from the point of least curvature radius against 2 rho_min sin(delta).

    The osculating circle there lies inside the curve, so the chord is at
    least as long as the circle's chord, strictly unless the curve is a circle.
    """
    theta_min, rho_min = curve.min_rho()
    _, rec = _chord_theta(curve, theta_min, delta)
    return OsculatingCheck(theta_min, rho_min, rec.length, 2.0 * rho_min * math.sin(delta))


# -- curvature quadratic -------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticCoeffs:
    A: float
    B: float
    C: float
    k1_b: float
    l1: float
    delta: float
    roots: tuple[float, ...] = ()

    @property
    def positive_roots(self) -> tuple[float, ...]:
        return tuple(r for r in self.roots if r > 0.0)

    @property
    def case(self) -> int:
        """1 when C <= 0 (unique positive root), 2 otherwise."""
        return 1 if self.C <= 0.0 else 2


def quadratic_coefficients(k1_b: float, l1: float, delta: float) -> tuple[float, float, float]:
    s = math.sin(delta)
    A = l1 * s * (k1_b * l1 - s)
    B = 2.0 * s - k1_b * l1 * (1.0 + s * s)
    C = (s / l1) * (k1_b * l1 - 2.0 * s)
    return A, B, C


def _real_roots(A: float, B: float, C: float) -> tuple[float, ...]:
    disc = B * B - 4.0 * A * C
    if disc < 0.0:
        return ()
    q = -0.5 * (B + math.copysign(math.sqrt(disc), B))
    roots = [q / A]
    if q != 0.0:
        roots.append(C / q)
    else:
        roots.append(q / A)
    scale = max(abs(r) for r in roots) or 1.0
    return tuple(sorted(0.0 if abs(r) <= ROOT_SNAP * scale else r for r in roots))


def curvature_quadratic(k1_b: float, l1: float, delta: float) -> QuadraticCoeffs:
    """Coefficients and real roots of A x^2 + B x + C = 0 for the curvature across a chord.

    Raises DegenerateQuadratic when k1_b * l1 = sin(delta), where A vanishes.
    """
    if not l1 > 0:
        raise ValueError("chord length must be positive")
    if not 0.0 < delta < 0.5 * math.pi:
        raise ValueError(f"delta must lie in (0, pi/2), got {delta}")
    A, B, C = quadratic_coefficients(k1_b, l1, delta)
    if abs(A) < 1e-14:
        raise DegenerateQuadratic(
            f"A={A:.3g} vanishes (k1*l1 = sin delta)", -C / B if B != 0.0 else None
        )
    return QuadraticCoeffs(A, B, C, k1_b, l1, delta, _real_roots(A, B, C))


@dataclass(frozen=True)
class DichotomyEntry:
    theta_a: float
    theta_b: float
    coeffs: QuadraticCoeffs
    case: int


@dataclass(frozen=True, eq=False)
class DichotomyReport:
    delta: float
    entries: list[DichotomyEntry] = field(default_factory=list)
    c_tol: float = 1e-12

    @property
    def case1_fraction(self) -> float:
        return sum(e.case == 1 for e in self.entries) / len(self.entries)

    def continued_roots(self) -> np.ndarray:
        """The positive root continuing the round value: the unique one in case 1,
        the larger one in case 2."""
        return np.array([max(e.coeffs.positive_roots) for e in self.entries if e.coeffs.positive_roots])


def case_dichotomy_probe(curve: SupportCurve2D, delta: float, theta_grid, c_tol: float = 1e-12) -> DichotomyReport:
    """Classify each launch point by the sign of C in the curvature quadratic.

    C within ``c_tol`` of 0 counts as the case-1 boundary.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    theta_b, lengths, _ = geometric_chords(curve, thetas, delta)
    entries = []
    for ta, tb, l1 in zip(thetas, theta_b, lengths):
        q = curvature_quadratic(1.0 / float(curve.rho(tb)), float(l1), delta)
        if abs(q.C) <= c_tol:
            q = QuadraticCoeffs(q.A, q.B, 0.0, q.k1_b, q.l1, q.delta, _real_roots(q.A, q.B, 0.0))
        entries.append(DichotomyEntry(float(ta), float(tb), q, q.case))
    return DichotomyReport(float(delta), entries, c_tol)


# -- chord identities on bodies -------------------------------------------------------------


def chord_identities(body: ConvexBody, foot, tangent, delta: float) -> tuple[float, float]:
    """Errors of <n_from, q - p> = l sin(delta) and <n_to, q - p> = -l sin(delta)."""
    rec = delta_chord(body, foot, tangent, delta)
    chord = rec.p_to - rec.p_from
    n_from = body.inner_normal_many(rec.p_from[None, :])[0]
    n_to = rec.arrival_normal
    target = rec.length * math.sin(delta)
    return abs(float(n_from @ chord) - target), abs(float(n_to @ chord) + target)


@dataclass(frozen=True)
class LemmaCheck:
    lemma: str
    curve: str
    delta: float
    grid: int
    worst_error: float
    passed: bool | None  # None in diagnostic mode
    mode: str = "assert"

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma, "curve": self.curve, "delta": self.delta, "grid": self.grid,
            "worst_error": self.worst_error, "pass": self.passed, "mode": self.mode,
        }


def run_lemma_suite(curve: SupportCurve2D, delta: float, grid: int = 64) -> list[LemmaCheck]:
    """Every planar lemma check on one curve, in the order they build on each other."""
    if not curve.is_constant_width:
        raise NotConstantWidth(f"{curve.label} is not of constant width")
    thetas = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    label = curve.label
    defect = gutkin_defect_2d(curve, delta, max(grid, 256))
    hyp = defect < GUTKIN_TOL
    mode = "assert" if hyp else "diagnostic"

    def verdict(ok: bool) -> bool | None:
        return bool(ok) if hyp else None

    out = [LemmaCheck("equal-angle defect", label, delta, grid, defect, None, "diagnostic")]

    antipodal_err = max(verify_antipodal_chords(curve, delta, t).claim_defect for t in thetas)
    out.append(LemmaCheck("antipodal chords", label, delta, grid, antipodal_err,
                          verdict(antipodal_err < 1e-10), mode))

    pairs = [verify_width_chord_identity(curve, delta, t) for t in thetas]
    rho_err = max(p[0] for p in pairs)
    chord_err = max(p[1] for p in pairs)
    out.append(LemmaCheck("curvature radius sum", label, delta, grid, rho_err, rho_err < 1e-12))
    out.append(LemmaCheck("chord sum (integral)", label, delta, grid, chord_err, chord_err < 1e-10))
    gap = max(abs(_chord_theta(curve, t, delta)[1].length - chord_length_integral(curve, t, delta))
              for t in thetas)
    out.append(LemmaCheck("chord integral = geometric chord", label, delta, grid, gap,
                          verdict(gap < 1e-8), mode))

    even_grid = grid + grid % 2
    ineq = check_curvature_inequality(curve, delta, even_grid)
    out.append(LemmaCheck("k l > sin delta", label, delta, even_grid, -ineq.min_margin,
                          verdict(ineq.min_margin > 0.0), mode))
    out.append(LemmaCheck("antipodal 2 sin delta alternative", label, delta, even_grid,
                          float(sum(c == "violation" for c in ineq.pair_classes)),
                          verdict(ineq.dichotomy_holds), mode))
    osc = osculating_check(curve, delta)
    strict = not curve.is_circle
    ok = osc.margin > 0.0 if strict else abs(osc.margin) < 1e-12
    out.append(LemmaCheck("osculating chord bound", label, delta, 1, -osc.margin if strict else abs(osc.margin), ok))
    return out
