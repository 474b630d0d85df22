"""Geodesics on quadric surfaces in R^3 with their Frenet data.

For a level set F = 0 the unit-speed geodesic equation is

    x'' = -(v^T H v / |grad F|^2) grad F,

so the curvature in space is k = v^T H v / |grad F| along the inner normal.
Torsion is read off dn/ds = -k v + tau w with w = v x n.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import StepTooLarge
from .geomnd import ConvexBody, Ellipsoid, Sphere, SurfacePoint

DRIFT_TOL = 1e-6
FRENET_TOL = 1e-5
MAX_HALVINGS = 4


@dataclass(frozen=True, eq=False)
class GeodesicSample:
    s: float
    position: np.ndarray
    v: np.ndarray
    n: np.ndarray
    w: np.ndarray
    k: float
    tau: float


def _quadric(body: ConvexBody):
    if isinstance(body, Sphere):
        q = Ellipsoid(body.center, np.full(body.d, body.radius))
    elif isinstance(body, Ellipsoid):
        q = body
    else:
        raise TypeError(f"geodesics need a sphere or ellipsoid, got {type(body).__name__}")
    if q.d != 3:
        raise ValueError(f"geodesics are integrated in d=3 only, got d={q.d}")
    return q


def _accel(q: Ellipsoid, hess: np.ndarray, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    g = q.gradient(x[None, :])[0]
    return -(v @ hess @ v) / (g @ g) * g


def _rk4(q, hess, x, v, h):
    k1x, k1v = v, _accel(q, hess, x, v)
    k2x, k2v = v + 0.5 * h * k1v, _accel(q, hess, x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, _accel(q, hess, x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, _accel(q, hess, x + h * k3x, v + h * k3v)
    x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = v + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v


def _integrate(q: Ellipsoid, x0, v0, length: float, step: float):
    hess = q.hessian()
    count = max(2, math.ceil(length / step))
    h = length / count
    xs = np.empty((count + 1, 3))
    vs = np.empty((count + 1, 3))
    xs[0], vs[0] = x0, v0
    x, v = x0, v0
    for i in range(1, count + 1):
        x, v = _rk4(q, hess, x, v, h)
        n = q.inner_normal_many(x[None, :])[0]
        drift = max(abs(float(q.signed_gap(x[None, :])[0])), abs(float(v @ n)), abs(np.linalg.norm(v) - 1.0))
        if drift > DRIFT_TOL:
            raise StepTooLarge(f"frame drift {drift:.3g} at s={i * h:.6g}; reduce the step")
        x = q.project(x[None, :])[0]
        n = q.inner_normal_many(x[None, :])[0]
        v = v - (v @ n) * n
        v = v / np.linalg.norm(v)
        xs[i], vs[i] = x, v
    return h * np.arange(count + 1), xs, vs, h


def _frames(q: Ellipsoid, s, xs, vs, h):
    ns = q.inner_normal_many(xs)
    grads = q.gradient(xs)
    hess = q.hessian()
    ks = np.einsum("ij,jk,ik->i", vs, hess, vs) / np.linalg.norm(grads, axis=1)
    ws = np.cross(vs, ns)
    ndot = np.gradient(ns, h, axis=0, edge_order=2)
    taus = np.einsum("ij,ij->i", ndot + ks[:, None] * vs, ws)
    return ns, ws, ks, taus


def frenet_residual(samples: list[GeodesicSample]) -> float:
    """max |finite-difference dv/ds - k n| along the samples."""
    s, _, v, n, _, k, _ = as_arrays(samples)
    vdot = np.gradient(v, s[1] - s[0], axis=0, edge_order=2)
    return float(np.max(np.linalg.norm(vdot - k[:, None] * n, axis=1)))


def integrate_geodesic(
    body: ConvexBody, start, direction, length: float, step: float | None = None
) -> list[GeodesicSample]:
    """Unit-speed geodesic from ``start`` along the tangent ``direction``.

    RK4 on the geodesic equation, with the position scaled back onto the
    surface and the velocity re-projected to the tangent plane after each
    step.  Without an explicit ``step`` the default 1e-3 * diameter is halved
    until the finite-difference Frenet residual is below FRENET_TOL.
    """
    q = _quadric(body)
    x0 = np.asarray(start.position if isinstance(start, SurfacePoint) else start, dtype=float)
    sp = q.surface_point(x0)
    v0 = np.asarray(direction, dtype=float)
    if abs(float(v0 @ sp.inner_normal)) > 1e-10:
        raise ValueError("direction is not tangent at the start point")
    v0 = v0 / np.linalg.norm(v0)
    auto = step is None
    h = 1e-3 * q.diameter if auto else float(step)
    for _ in range(MAX_HALVINGS + 1):
        s, xs, vs, h_used = _integrate(q, x0, v0, length, h)
        ns, ws, ks, taus = _frames(q, s, xs, vs, h_used)
        samples = [GeodesicSample(float(s[i]), xs[i], vs[i], ns[i], ws[i], float(ks[i]), float(taus[i]))
                   for i in range(len(s))]
        if not auto or frenet_residual(samples) < FRENET_TOL:
            return samples
        h *= 0.5
    return samples


def as_arrays(samples: list[GeodesicSample]):
    """(s, position, v, n, w, k, tau) stacked as arrays."""
    return (
        np.array([x.s for x in samples]),
        np.array([x.position for x in samples]),
        np.array([x.v for x in samples]),
        np.array([x.n for x in samples]),
        np.array([x.w for x in samples]),
        np.array([x.k for x in samples]),
        np.array([x.tau for x in samples]),
    )


def analytic_torsion(body: ConvexBody, samples: list[GeodesicSample]) -> np.ndarray:
    """Torsion from the shape operator: tau = <dn/ds, w> = -<L v, w>.

    Independent of the finite differences used during integration.
    """
    q = _quadric(body)
    _, xs, vs, _, ws, _, _ = as_arrays(samples)
    grads = np.linalg.norm(q.gradient(xs), axis=1)
    return -np.einsum("ij,jk,ik->i", vs, q.hessian(), ws) / grads


def planarity_defect(samples: list[GeodesicSample]) -> float:
    """max(distance of points from their least-squares plane, integral of |tau| ds)."""
    if len(samples) < 10:
        raise ValueError("need at least 10 samples")
    s, xs, *_, taus = as_arrays(samples)
    centered = xs - xs.mean(axis=0)
    normal = np.linalg.svd(centered, full_matrices=False)[2][-1]
    plane = float(np.max(np.abs(centered @ normal)))
    tau_mass = float(trapezoid(np.abs(taus), s))
    return max(plane, tau_mass)


def geodesic_csv(samples: list[GeodesicSample], header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write("s,x,y,z,k,tau\n")
    for x in samples:
        buf.write(",".join(repr(float(v)) for v in (x.s, *x.position, x.k, x.tau)) + "\n")
    return buf.getvalue()
