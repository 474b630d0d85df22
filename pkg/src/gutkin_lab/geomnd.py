"""Convex bodies in R^d with analytic boundaries.

Every body answers three questions: is a point inside, where does a ray
from inside leave, and what is the inner normal (and, where closed-form,
the shape operator) at a boundary point.  Ray exits are batched: origins and
directions are ``(N, d)`` arrays and a boolean mask flags rays that miss.

Shape operators are returned in an orthonormal tangent frame with the sign
convention that makes them positive definite on convex bodies: the outer
unit normal changes along a tangent vector t by ``L t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConstantWidth, NotOnBoundary, RayMisses
from .geom2d import SupportCurve2D, _support_gap

BOUNDARY_TOL = 1e-9
# forward hits closer than this (relative to diameter) count as misses
MIN_TRAVEL = 1e-12


@dataclass(frozen=True)
class SurfacePoint:
    position: np.ndarray
    inner_normal: np.ndarray
    shape_operator: np.ndarray | None = None
    tangent_frame: np.ndarray | None = None  # (d, d-1), columns orthonormal

    @property
    def principal_curvatures(self) -> np.ndarray | None:
        if self.shape_operator is None:
            return None
        return np.linalg.eigvalsh(self.shape_operator)


def tangent_frame(normal: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the hyperplane orthogonal to ``normal``."""
    n = np.asarray(normal, dtype=float)
    d = n.size
    q, _ = np.linalg.qr(np.column_stack([n, np.eye(d)]))
    return q[:, 1:d]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class ConvexBody:
    """Interface shared by all body variants."""

    d: int
    kind: str

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def is_round(self) -> bool:
        return False

    def contains(self, x) -> bool:
        return bool(self.signed_gap(np.asarray(x, dtype=float)[None, :])[0] <= 0.0)

    def signed_gap(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exit_many(self, origins, directions):
        """Batched forward exits: (positions, inner_normals, ok)."""
        raise NotImplementedError

    def inner_normal_many(self, positions) -> np.ndarray:
        raise NotImplementedError

    def ray_exit(self, origin, direction) -> SurfacePoint:
        o = np.asarray(origin, dtype=float).reshape(1, self.d)
        v = np.asarray(direction, dtype=float).reshape(1, self.d)
        pos, nrm, ok = self.exit_many(o, v)
        if not ok[0]:
            raise RayMisses(f"ray from {o[0]} along {v[0]} has no forward exit from {self.label}")
        return SurfacePoint(pos[0], nrm[0])

    def surface_point(self, position) -> SurfacePoint:
        x = np.asarray(position, dtype=float)
        gap = float(self.signed_gap(x[None, :])[0])
        if abs(gap) > BOUNDARY_TOL * max(1.0, self.diameter):
            raise NotOnBoundary(f"point {x} is {gap:.3g} away from the boundary of {self.label}")
        return SurfacePoint(x, self.inner_normal_many(x[None, :])[0])

    @property
    def label(self) -> str:
        return self.kind

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Sphere(ConvexBody):
    center: np.ndarray
    radius: float
    kind: str = field(default="sphere", init=False)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if c.size < 2:
            raise ValueError("dimension must be at least 2")

    @classmethod
    def unit(cls, d: int, radius: float = 1.0) -> "Sphere":
        return cls(np.zeros(d), radius)

    @property
    def d(self) -> int:
        return self.center.size

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def is_round(self) -> bool:
        return True

    def signed_gap(self, x):
        return np.linalg.norm(np.asarray(x) - self.center, axis=-1) - self.radius

    def inner_normal_many(self, positions):
        return -_unit(np.asarray(positions) - self.center)

    def exit_many(self, origins, directions):
        oc = np.asarray(origins, dtype=float) - self.center
        v = np.asarray(directions, dtype=float)
        a = np.einsum("ij,ij->i", v, v)
        b = np.einsum("ij,ij->i", oc, v)
        c0 = np.einsum("ij,ij->i", oc, oc) - self.radius**2
        disc = b * b - a * c0
        ok = (disc > 0.0) & (c0 <= BOUNDARY_TOL * self.radius**2)
        root = np.sqrt(np.where(ok, disc, 0.0))
        # larger root of a t^2 + 2 b t + c0, written without cancellation
        t = np.where(b <= 0.0, (root - b) / a, -c0 / np.where(root + b > 0, root + b, 1.0))
        ok &= t > MIN_TRAVEL * self.diameter
        pos = self.center + oc + t[:, None] * v
        return pos, self.inner_normal_many(pos), ok

    def surface_point(self, position):
        sp = super().surface_point(position)
        frame = tangent_frame(sp.inner_normal)
        return SurfacePoint(sp.position, sp.inner_normal, np.eye(self.d - 1) / self.radius, frame)

    def to_dict(self):
        out = {"type": "sphere", "d": self.d, "radius": self.radius}
        if np.any(self.center != 0.0):
            out["center"] = self.center.tolist()
        return out

    @property
    def label(self):
        return f"sphere(d={self.d},R={self.radius:g})"


@dataclass(frozen=True, eq=False)
class Ellipsoid(ConvexBody):
    """Ellipsoid sum(y_i^2 / a_i^2) <= 1 with y = frame^T (x - center)."""

    center: np.ndarray
    semi_axes: np.ndarray
    frame: np.ndarray | None = None
    kind: str = field(default="ellipsoid", init=False)

    def __post_init__(self):
        a = np.asarray(self.semi_axes, dtype=float).reshape(-1)
        d = a.size
        c = np.zeros(d) if self.center is None else np.asarray(self.center, dtype=float).reshape(-1)
        q = np.eye(d) if self.frame is None else np.asarray(self.frame, dtype=float)
        if c.size != d or q.shape != (d, d):
            raise ValueError("center, semi_axes and frame dimensions disagree")
        if np.any(a <= 0):
            raise ValueError("semi-axes must be positive")
        if not np.allclose(q.T @ q, np.eye(d), atol=1e-12):
            raise ValueError("axis frame must be orthonormal")
        object.__setattr__(self, "semi_axes", a)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "frame", q)

    @classmethod
    def axis_aligned(cls, semi_axes) -> "Ellipsoid":
        a = np.asarray(semi_axes, dtype=float)
        return cls(np.zeros(a.size), a)

    @property
    def d(self):
        return self.semi_axes.size

    @property
    def diameter(self):
        return 2.0 * float(self.semi_axes.max())

    @property
    def is_round(self):
        return bool(np.all(self.semi_axes == self.semi_axes[0]))

    def _local(self, x):
        return (np.asarray(x, dtype=float) - self.center) @ self.frame

    def level(self, x):
        """Quadratic form F = sum (y/a)^2 - 1."""
        z = self._local(x) / self.semi_axes
        return np.sum(z * z, axis=-1) - 1.0

    def gradient(self, x):
        return 2.0 * (self._local(x) / self.semi_axes**2) @ self.frame.T

    def hessian(self):
        return 2.0 * (self.frame / self.semi_axes**2) @ self.frame.T

    def signed_gap(self, x):
        # first-order distance estimate F / |grad F|, exact sign
        return self.level(x) / np.linalg.norm(self.gradient(x), axis=-1)

    def contains(self, x):
        return bool(self.level(np.asarray(x, dtype=float)[None, :])[0] <= 0.0)

    def inner_normal_many(self, positions):
        return -_unit(self.gradient(positions))

    def project(self, x):
        """Radial scaling of x onto the boundary in the normalized frame."""
        z = self._local(x) / self.semi_axes
        z = z / np.linalg.norm(z, axis=-1, keepdims=True)
        return self.center + (z * self.semi_axes) @ self.frame.T

    def parametric_point(self, unit_vectors):
        """Boundary point c + Q (a * u) for unit vectors u."""
        return self.center + (np.asarray(unit_vectors) * self.semi_axes) @ self.frame.T

    def exit_many(self, origins, directions):
        z0 = self._local(origins) / self.semi_axes
        e = (np.asarray(directions, dtype=float) @ self.frame) / self.semi_axes
        a = np.einsum("ij,ij->i", e, e)
        b = np.einsum("ij,ij->i", z0, e)
        c0 = np.einsum("ij,ij->i", z0, z0) - 1.0
        disc = b * b - a * c0
        ok = (disc > 0.0) & (c0 <= BOUNDARY_TOL)
        root = np.sqrt(np.where(ok, disc, 0.0))
        t = np.where(b <= 0.0, (root - b) / a, -c0 / np.where(root + b > 0, root + b, 1.0))
        ok &= t > MIN_TRAVEL * self.diameter
        pos = np.asarray(origins, dtype=float) + t[:, None] * np.asarray(directions, dtype=float)
        return pos, self.inner_normal_many(pos), ok

    def surface_point(self, position):
        x = np.asarray(position, dtype=float)
        g = self.gradient(x[None, :])[0]
        gnorm = np.linalg.norm(g)
        dist = abs(float(self.level(x[None, :])[0])) / gnorm
        if dist > BOUNDARY_TOL * max(1.0, self.diameter):
            raise NotOnBoundary(f"point {x} is {dist:.3g} away from the boundary of {self.label}")
        inner = -g / gnorm
        frame = tangent_frame(inner)
        shape = frame.T @ self.hessian() @ frame / gnorm
        return SurfacePoint(x, inner, 0.5 * (shape + shape.T), frame)

    def to_dict(self):
        out = {"type": "ellipsoid", "semi_axes": self.semi_axes.tolist()}
        if np.any(self.center != 0.0):
            out["center"] = self.center.tolist()
        if not np.array_equal(self.frame, np.eye(self.d)):
            out["frame"] = self.frame.tolist()
        return out

    @property
    def label(self):
        axes = ",".join(f"{x:g}" for x in self.semi_axes)
        return f"ellipsoid({axes})"


@dataclass(frozen=True, eq=False)
class Revolution(ConvexBody):
    """Body in R^3 obtained by rotating a symmetric constant-width profile.

    The profile's x-axis (normal angle 0) is the rotation axis; a point of the
    body has profile coordinates (axial component, radial distance).
    """

    profile: SupportCurve2D
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kind: str = field(default="revolution", init=False)
    grid: int = 256

    def __post_init__(self):
        if not self.profile.is_constant_width:
            raise NotConstantWidth(f"revolution profile {self.profile.label} is not constant width")
        if not self.profile.is_symmetric:
            raise ValueError("revolution profile must satisfy h(-theta) = h(theta)")
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        object.__setattr__(self, "axis", axis / np.linalg.norm(axis))
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        perp = tangent_frame(self.axis)
        object.__setattr__(self, "_perp", perp)

    @property
    def d(self):
        return 3

    @property
    def diameter(self):
        return self.profile.width

    @property
    def is_round(self):
        return self.profile.is_circle

    def profile_coords(self, x):
        w = np.asarray(x, dtype=float) - self.center
        axial = w @ self.axis
        radial_vec = w - axial[..., None] * self.axis
        return axial, np.linalg.norm(radial_vec, axis=-1), radial_vec

    def _gap_theta(self, x):
        axial, radial, _ = self.profile_coords(x)
        return _support_gap(self.profile, axial, radial, 0.0, math.pi, self.grid)

    def signed_gap(self, x):
        return self._gap_theta(x)[0]

    def _normals_from(self, theta, radial_vec):
        rnorm = np.linalg.norm(radial_vec, axis=-1, keepdims=True)
        fallback = np.broadcast_to(self._perp[:, 0], radial_vec.shape)
        e_r = np.where(rnorm > 0.0, radial_vec / np.where(rnorm > 0.0, rnorm, 1.0), fallback)
        outer = np.cos(theta)[..., None] * self.axis + np.sin(theta)[..., None] * e_r
        return -outer

    def inner_normal_many(self, positions):
        _, theta = self._gap_theta(positions)
        _, _, radial_vec = self.profile_coords(positions)
        return self._normals_from(theta, radial_vec)

    def boundary_point(self, theta, phi):
        """Boundary point and frame from profile normal angle theta in [0, pi] and azimuth phi.

        Returns (position, inner_normal, meridian_tangent, azimuthal_tangent).
        """
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        e1, e2 = self._perp[:, 0], self._perp[:, 1]
        e_r = np.cos(phi)[..., None] * e1 + np.sin(phi)[..., None] * e2
        e_phi = -np.sin(phi)[..., None] * e1 + np.cos(phi)[..., None] * e2
        xy = self.profile.position(theta)
        pos = self.center + xy[..., 0:1] * self.axis + xy[..., 1:2] * e_r
        outer = np.cos(theta)[..., None] * self.axis + np.sin(theta)[..., None] * e_r
        meridian = -np.sin(theta)[..., None] * self.axis + np.cos(theta)[..., None] * e_r
        return pos, -outer, meridian, e_phi

    def exit_many(self, origins, directions, bisect_steps: int = 32):
        """Bracket-and-bisect on the signed gap along each ray, then Newton polish.

        The gap is a convex function of the ray parameter, so Newton steps
        started beyond the exit decrease monotonically onto it.
        """
        o = np.asarray(origins, dtype=float)
        v = np.asarray(directions, dtype=float)
        diam = self.profile.diameter_bound
        ok = self.signed_gap(o) <= BOUNDARY_TOL * diam
        lo = np.zeros(len(o))
        hi = np.full(len(o), 1.01 * diam)
        for _ in range(bisect_steps):
            mid = 0.5 * (lo + hi)
            outside = self.signed_gap(o + mid[:, None] * v) > 0.0
            hi = np.where(outside, mid, hi)
            lo = np.where(outside, lo, mid)
        t = hi
        for _ in range(6):
            x = o + t[:, None] * v
            gap, theta = self._gap_theta(x)
            axial, radial, radial_vec = self.profile_coords(x)
            d_axial = v @ self.axis
            safe_r = np.where(radial > 0.0, radial, 1.0)
            d_radial = np.einsum("ij,ij->i", radial_vec, v - d_axial[:, None] * self.axis) / safe_r
            slope = np.cos(theta) * d_axial + np.sin(theta) * d_radial
            step = np.where(slope > 0.0, gap / np.where(slope > 0.0, slope, 1.0), 0.0)
            t = np.clip(t - step, lo, hi)
            if np.all(np.abs(step) < 1e-15 * diam):
                break
        pos = o + t[:, None] * v
        gap, theta = self._gap_theta(pos)
        _, _, radial_vec = self.profile_coords(pos)
        ok &= (np.abs(gap) < 1e-12 * diam) & (t > MIN_TRAVEL * diam)
        return pos, self._normals_from(theta, radial_vec), ok

    def to_dict(self):
        out = {"type": "revolution", "profile": self.profile.to_dict()}
        if not np.array_equal(self.axis, [0.0, 0.0, 1.0]):
            out["axis"] = self.axis.tolist()
        if np.any(self.center != 0.0):
            out["center"] = self.center.tolist()
        return out

    @property
    def label(self):
        return f"revolution[{self.profile.label}]"


@dataclass(frozen=True, eq=False)
class Planar(ConvexBody):
    """A support-function curve viewed as a body in R^2."""

    curve: SupportCurve2D
    kind: str = field(default="support2d", init=False)

    @property
    def d(self):
        return 2

    @property
    def diameter(self):
        return self.curve.diameter_bound

    @property
    def is_round(self):
        return self.curve.is_circle

    def signed_gap(self, x):
        return self.curve.signed_distance(x)[0]

    def inner_normal_many(self, positions):
        _, theta = self.curve.signed_distance(positions)
        return self.curve.inner_normal(theta)

    def exit_theta(self, origins, directions):
        theta, ok = self.curve.exit_theta(origins, directions)
        ok &= self.signed_gap(np.asarray(origins, dtype=float)) <= BOUNDARY_TOL * self.diameter
        return theta, ok

    def exit_many(self, origins, directions):
        theta, ok = self.exit_theta(origins, directions)
        pos = self.curve.position(theta)
        travel = np.linalg.norm(pos - np.asarray(origins, dtype=float), axis=-1)
        ok &= travel > MIN_TRAVEL * self.diameter
        return pos, self.curve.inner_normal(theta), ok

    def surface_point(self, position):
        x = np.asarray(position, dtype=float)
        gap, theta = self.curve.signed_distance(x[None, :])
        if abs(gap[0]) > BOUNDARY_TOL * max(1.0, self.diameter):
            raise NotOnBoundary(f"point {x} is {gap[0]:.3g} away from {self.label}")
        t = float(theta[0])
        return SurfacePoint(
            x, self.curve.inner_normal(t), np.array([[1.0 / float(self.curve.rho(t))]]),
            self.curve.tangent(t)[:, None],
        )

    def to_dict(self):
        return self.curve.to_dict()

    @property
    def label(self):
        return self.curve.label


# module-level forms of the body queries


def contains(body: ConvexBody, x) -> bool:
    return body.contains(x)


def ray_exit(body: ConvexBody, origin, direction) -> SurfacePoint:
    return body.ray_exit(origin, direction)


def surface_point(body: ConvexBody, position) -> SurfacePoint:
    return body.surface_point(position)


def body_from_dict(data: dict) -> ConvexBody:
    kind = data.get("type")
    if kind == "sphere":
        center = data.get("center")
        d = int(data.get("d", len(center) if center is not None else 3))
        return Sphere(np.zeros(d) if center is None else center, float(data.get("radius", 1.0)))
    if kind == "ellipsoid":
        axes = data["semi_axes"]
        return Ellipsoid(data.get("center"), axes, data.get("frame"))
    if kind == "revolution":
        profile = SupportCurve2D.from_dict(data["profile"])
        kwargs = {}
        if "axis" in data:
            kwargs["axis"] = data["axis"]
        if "center" in data:
            kwargs["center"] = data["center"]
        return Revolution(profile, **kwargs)
    if kind == "support2d":
        return Planar(SupportCurve2D.from_dict(data))
    raise ValueError(f"unknown body type {kind!r}")
