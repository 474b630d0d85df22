"""Planar convex curves given by a trigonometric support function.

A curve is parametrized by the angle ``theta`` of its outer unit normal
``u(theta) = (cos theta, sin theta)``.  With support function ``h`` the
boundary point is the envelope

    x(theta) = h(theta) u(theta) + h'(theta) u_perp(theta),

where ``u_perp = (-sin theta, cos theta)`` is also the counterclockwise unit
tangent.  The tangent angle is therefore ``theta + pi/2`` and
``dx/dtheta = rho(theta) u_perp(theta)`` with ``rho = h + h''``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from .errors import ConvexityViolation, NotConstantWidth

TWO_PI = 2.0 * math.pi

CONVEXITY_GRID = 4096
# minimum admissible curvature radius, relative to r0
CONVEXITY_MARGIN = 1e-9

GL_NODES = 64


@dataclass(frozen=True)
class Harmonic:
    n: int
    a: float
    b: float = 0.0


def _as_harmonic(item) -> Harmonic:
    if isinstance(item, Harmonic):
        return item
    if isinstance(item, dict):
        return Harmonic(int(item["n"]), float(item.get("a", 0.0)), float(item.get("b", 0.0)))
    n, *coeffs = item
    a = float(coeffs[0]) if coeffs else 0.0
    b = float(coeffs[1]) if len(coeffs) > 1 else 0.0
    return Harmonic(int(n), a, b)


@dataclass(frozen=True)
class SupportCurve2D:
    """Convex curve with h(theta) = r0 + sum(a_n cos n theta + b_n sin n theta).

    Construction checks strict convexity (rho > 0) on a dense grid and
    raises :class:`ConvexityViolation` otherwise.
    """

    r0: float
    harmonics: tuple[Harmonic, ...] = ()
    _n: np.ndarray = field(init=False, repr=False, compare=False)
    _a: np.ndarray = field(init=False, repr=False, compare=False)
    _b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        harmonics = tuple(_as_harmonic(h) for h in self.harmonics)
        object.__setattr__(self, "harmonics", harmonics)
        object.__setattr__(self, "r0", float(self.r0))
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")
        for h in harmonics:
            if h.n < 2:
                raise ValueError(f"harmonic order must be >= 2, got {h.n}")
        object.__setattr__(self, "_n", np.array([h.n for h in harmonics], dtype=float))
        object.__setattr__(self, "_a", np.array([h.a for h in harmonics], dtype=float))
        object.__setattr__(self, "_b", np.array([h.b for h in harmonics], dtype=float))
        theta, rho_min = self.min_rho()
        if rho_min <= CONVEXITY_MARGIN * self.r0:
            raise ConvexityViolation(theta, rho_min)

    # -- support function and derivatives ---------------------------------

    def h(self, theta, der: int = 0):
        """Support function or its ``der``-th derivative (der in 0..3)."""
        t = np.asarray(theta, dtype=float)
        if self._n.size == 0:
            base = self.r0 if der == 0 else 0.0
            return base + np.zeros_like(t)
        nt = np.multiply.outer(t, self._n)
        c, s = np.cos(nt), np.sin(nt)
        n = self._n
        if der == 0:
            terms = self._a * c + self._b * s
        elif der == 1:
            terms = n * (self._b * c - self._a * s)
        elif der == 2:
            terms = -(n**2) * (self._a * c + self._b * s)
        elif der == 3:
            terms = -(n**3) * (self._b * c - self._a * s)
        else:
            raise ValueError("der must be in 0..3")
        out = terms.sum(axis=-1)
        return out + self.r0 if der == 0 else out

    def rho(self, theta):
        """Curvature radius rho = h + h'' in closed form."""
        t = np.asarray(theta, dtype=float)
        if self._n.size == 0:
            return self.r0 + np.zeros_like(t)
        nt = np.multiply.outer(t, self._n)
        terms = (1.0 - self._n**2) * (self._a * np.cos(nt) + self._b * np.sin(nt))
        return self.r0 + terms.sum(axis=-1)

    def rho_prime(self, theta):
        return self.h(theta, 1) + self.h(theta, 3)

    def curvature(self, theta):
        return 1.0 / self.rho(theta)

    def min_rho(self) -> tuple[float, float]:
        """(theta, rho) at the minimum curvature radius, grid search plus refinement."""
        grid = np.linspace(0.0, TWO_PI, CONVEXITY_GRID, endpoint=False)
        values = self.rho(grid)
        i = int(np.argmin(values))
        if self._n.size == 0:
            return 0.0, self.r0
        step = TWO_PI / CONVEXITY_GRID
        res = minimize_scalar(
            lambda t: float(self.rho(t)),
            bounds=(grid[i] - step, grid[i] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if res.fun < values[i]:
            return float(res.x % TWO_PI), float(res.fun)
        return float(grid[i]), float(values[i])

    # -- classification ---------------------------------------------------

    @property
    def is_circle(self) -> bool:
        return all(h.a == 0.0 and h.b == 0.0 for h in self.harmonics)

    @property
    def is_constant_width(self) -> bool:
        return all(h.n % 2 == 1 or (h.a == 0.0 and h.b == 0.0) for h in self.harmonics)

    @property
    def is_symmetric(self) -> bool:
        """True when h(-theta) = h(theta), i.e. mirror symmetric about the x-axis."""
        return all(h.b == 0.0 for h in self.harmonics)

    @property
    def width(self) -> float:
        if not self.is_constant_width:
            raise NotConstantWidth("width is only defined for constant-width curves")
        return 2.0 * self.r0

    @property
    def perimeter(self) -> float:
        return TWO_PI * self.r0

    @property
    def radius_bound(self) -> float:
        """Upper bound on |x(theta)|."""
        return self.r0 + float(np.sum((1.0 + self._n) * np.hypot(self._a, self._b)))

    @property
    def diameter_bound(self) -> float:
        return 2.0 * (self.r0 + float(np.sum(np.hypot(self._a, self._b))))

    # -- geometry -----------------------------------------------------------

    def position(self, theta):
        t = np.asarray(theta, dtype=float)
        c, s = np.cos(t), np.sin(t)
        h, hp = self.h(t), self.h(t, 1)
        return np.stack([h * c - hp * s, h * s + hp * c], axis=-1)

    @staticmethod
    def tangent(theta):
        t = np.asarray(theta, dtype=float)
        return np.stack([-np.sin(t), np.cos(t)], axis=-1)

    @staticmethod
    def inner_normal(theta):
        t = np.asarray(theta, dtype=float)
        return np.stack([-np.cos(t), -np.sin(t)], axis=-1)

    def arc_length(self, theta):
        """Arc length from theta=0 to theta (not reduced modulo the perimeter)."""
        t = np.asarray(theta, dtype=float)
        if self._n.size == 0:
            return self.r0 * t
        n = self._n
        nt = np.multiply.outer(t, n)
        terms = (1.0 - n**2) / n * (self._a * np.sin(nt) - self._b * (np.cos(nt) - 1.0))
        return self.r0 * t + terms.sum(axis=-1)

    def theta_at(self, s):
        """Inverse of :meth:`arc_length` on [0, perimeter), vectorized Newton."""
        s = np.mod(np.asarray(s, dtype=float), self.perimeter)
        theta = s / self.r0
        for _ in range(60):
            step = (self.arc_length(theta) - s) / self.rho(theta)
            theta = theta - step
            if np.all(np.abs(step) < 1e-15):
                break
        return theta

    def signed_distance(self, points, period: float = TWO_PI, grid: int = 256):
        """Signed distance to the curve: max over theta of <p, u> - h, vectorized.

        Negative inside, positive outside.  Also returns the maximizing normal
        angle, which is the normal angle of the nearest boundary point.
        """
        p = np.asarray(points, dtype=float)
        return _support_gap(self, p[..., 0], p[..., 1], 0.0, period, grid)

    def exit_theta(self, origins, directions):
        """Normal angle of the forward exit point of rays from inside the curve.

        On the arc where <dir, u(theta)> > 0 the function
        g(theta) = cross(dir, x(theta) - origin) is strictly increasing and
        changes sign exactly once; it is bracketed by the two support points
        parallel to the ray and bisected to float resolution.
        """
        o = np.asarray(origins, dtype=float)
        d = np.asarray(directions, dtype=float)
        psi = np.arctan2(d[..., 1], d[..., 0])
        lo = psi - 0.5 * math.pi
        hi = psi + 0.5 * math.pi

        def g(t):
            x = self.position(t)
            return d[..., 0] * (x[..., 1] - o[..., 1]) - d[..., 1] * (x[..., 0] - o[..., 0])

        ok = (g(lo) < 0.0) & (g(hi) > 0.0)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            right = g(mid) > 0.0
            hi = np.where(right, mid, hi)
            lo = np.where(right, lo, mid)
        return np.mod(0.5 * (lo + hi), TWO_PI), ok

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "type": "support2d",
            "r0": self.r0,
            "harmonics": [{"n": h.n, "a": h.a, "b": h.b} for h in self.harmonics],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SupportCurve2D":
        if data.get("type", "support2d") != "support2d":
            raise ValueError(f"expected type 'support2d', got {data.get('type')!r}")
        return cls(float(data["r0"]), tuple(_as_harmonic(h) for h in data.get("harmonics", [])))

    @property
    def label(self) -> str:
        if not self.harmonics:
            return f"circle(r0={self.r0:g})"
        parts = "+".join(f"({h.n},{h.a:g},{h.b:g})" for h in self.harmonics)
        return f"support2d(r0={self.r0:g},{parts})"


def _support_gap(curve: SupportCurve2D, a, r, lo: float, hi: float, grid: int):
    """max over theta in [lo, hi] of a cos theta + r sin theta - h(theta).

    Grid maximum followed by safeguarded Newton steps on the derivative.
    """
    a = np.asarray(a, dtype=float)
    r = np.asarray(r, dtype=float)
    periodic = math.isclose(hi - lo, TWO_PI)
    thetas = np.linspace(lo, hi, grid, endpoint=not periodic)
    spacing = thetas[1] - thetas[0]
    cos_t, sin_t, h_t = np.cos(thetas), np.sin(thetas), curve.h(thetas)
    vals = np.multiply.outer(a, cos_t) + np.multiply.outer(r, sin_t) - h_t
    idx = np.argmax(vals, axis=-1)
    theta = thetas[idx]
    best = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]

    def value(t):
        return a * np.cos(t) + r * np.sin(t) - curve.h(t)

    for _ in range(8):
        c, s = np.cos(theta), np.sin(theta)
        d1 = -a * s + r * c - curve.h(theta, 1)
        d2 = -a * c - r * s - curve.h(theta, 2)
        step = np.where(d2 < 0.0, -d1 / np.where(d2 < 0.0, d2, -1.0), 0.0)
        step = np.clip(step, -spacing, spacing)
        cand = theta + step
        if not periodic:
            cand = np.clip(cand, lo, hi)
        cand_val = value(cand)
        # the value is flat to O(step^2) near the maximum; compare within rounding
        slack = 8.0 * np.finfo(float).eps * (np.abs(a) + np.abs(r) + curve.radius_bound)
        better = cand_val >= best - slack
        theta = np.where(better, cand, theta)
        best = np.where(better, cand_val, best)
        if np.all(np.abs(step) < 1e-15):
            break
    return best, theta


@dataclass(frozen=True)
class CurvePoint:
    theta: float
    position: np.ndarray
    tangent: np.ndarray
    inner_normal: np.ndarray
    rho: float


def make_constant_width(r0: float, odd_harmonics=()) -> SupportCurve2D:
    """Constant-width curve of width 2*r0 from odd harmonics (n, a[, b]), n >= 3.

    >>> make_constant_width(1.0, [(3, 0.05)]).width
    2.0
    """
    harmonics = tuple(_as_harmonic(h) for h in odd_harmonics)
    for h in harmonics:
        if h.n < 3 or h.n % 2 == 0:
            raise NotConstantWidth(f"harmonic order {h.n} is not odd and >= 3")
    return SupportCurve2D(r0, harmonics)


def eval_point(curve: SupportCurve2D, theta: float) -> CurvePoint:
    theta = float(theta)
    return CurvePoint(
        theta=theta,
        position=curve.position(theta),
        tangent=curve.tangent(theta),
        inner_normal=curve.inner_normal(theta),
        rho=float(curve.rho(theta)),
    )


def antipodal(curve: SupportCurve2D, theta: float) -> float:
    """Normal angle of the antipodal point (other end of the double normal)."""
    if not curve.is_constant_width:
        raise NotConstantWidth(f"{curve.label} has an even harmonic")
    return (float(theta) + math.pi) % TWO_PI


def _gauss_legendre(f, lo: float, hi: float, panels: int, nodes: int = GL_NODES) -> float:
    x, w = leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * x[None, :]
    return float(np.sum(half[:, None] * w[None, :] * f(pts)))


def turning_integral(curve: SupportCurve2D, theta: float, turn: float) -> float:
    """x-extent of the arc from theta along which the tangent turns by ``turn``.

    Measured along the tangent at theta:  integral_0^turn cos(phi) rho(theta + phi) dphi.
    Composite Gauss-Legendre, 64 nodes per quarter turn, doubled until the
    change drops below 1e-13 relative.
    """
    def integrand(phi):
        return np.cos(phi) * curve.rho(theta + phi)

    panels = max(1, math.ceil(abs(turn) / (0.5 * math.pi)))
    value = _gauss_legendre(integrand, 0.0, turn, panels)
    for _ in range(6):
        panels *= 2
        finer = _gauss_legendre(integrand, 0.0, turn, panels)
        if abs(finer - value) <= 1e-13 * max(1.0, abs(finer)):
            return finer
        value = finer
    return value


def chord_length_integral(curve: SupportCurve2D, theta: float, delta: float) -> float:
    """Chord length from the turning-angle integral with total turn 2*delta.

    Equals the geometric delta-chord exactly when the chord also meets the
    curve at angle delta at its far end.
    """
    if not 0.0 < delta < 0.5 * math.pi:
        raise ValueError(f"delta must lie in (0, pi/2), got {delta}")
    return turning_integral(curve, theta, 2.0 * delta) / math.cos(delta)
