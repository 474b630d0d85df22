"""Birkhoff billiard map, delta-chords and the 2D area-preservation check.

A delta-chord starts at a boundary point ``foot`` in the direction
``cos(delta) * t + sin(delta) * n`` where ``t`` is a unit tangent and ``n`` the
inner normal.  The angle a chord makes with a tangent hyperplane is
``atan2(|<d, n>|, |d - <d, n> n|)``, i.e. ``arcsin |<d, n>|`` computed without
the loss of accuracy near pi/2.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePhase, RayMisses
from .geom2d import SupportCurve2D
from .geomnd import ConvexBody, Planar

UNIT_TOL = 1e-12
TANGENT_TOL = 1e-10
TANGENCY_GUARD = 1e-3
FD_STEP = 1e-5
JACOBIAN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class OrientedLine:
    foot: np.ndarray
    dir: np.ndarray


@dataclass(frozen=True)
class PhasePoint2D:
    """Boundary coordinates: arc length ``s`` and ``p = cos`` of the angle to the tangent."""

    s: float
    p: float


@dataclass(frozen=True, eq=False)
class ChordRecord:
    p_from: np.ndarray
    p_to: np.ndarray
    length: float
    launch_angle: float
    arrival_angle: float
    defect: float
    direction: np.ndarray | None = None
    arrival_normal: np.ndarray | None = None
    # |tangential part of the chord at arrival| - cos(delta); set by sigma_orbit
    tangent_drift: float | None = None

    def to_dict(self) -> dict:
        out = {
            "p_from": self.p_from.tolist(),
            "p_to": self.p_to.tolist(),
            "length": self.length,
            "launch_angle": self.launch_angle,
            "arrival_angle": self.arrival_angle,
            "defect": self.defect,
        }
        if self.tangent_drift is not None:
            out["tangent_drift"] = self.tangent_drift
        return out


def angle_to_hyperplane(direction, normal):
    """Angle in [0, pi/2] between unit ``direction`` and the hyperplane orthogonal to ``normal``."""
    direction = np.asarray(direction, dtype=float)
    normal = np.asarray(normal, dtype=float)
    along = np.sum(direction * normal, axis=-1)
    across = np.linalg.norm(direction - along[..., None] * normal, axis=-1)
    return np.arctan2(np.abs(along), across)


@dataclass(frozen=True, eq=False)
class ChordBatch:
    """Vectorized delta-chords; rows where ``ok`` is False missed."""

    feet: np.ndarray
    directions: np.ndarray
    exits: np.ndarray
    exit_normals: np.ndarray
    lengths: np.ndarray
    arrival: np.ndarray
    defects: np.ndarray
    ok: np.ndarray
    delta: float

    def record(self, i: int) -> ChordRecord:
        return ChordRecord(
            p_from=self.feet[i], p_to=self.exits[i], length=float(self.lengths[i]),
            launch_angle=self.delta, arrival_angle=float(self.arrival[i]),
            defect=float(self.defects[i]), direction=self.directions[i],
            arrival_normal=self.exit_normals[i],
        )


def delta_chords(body: ConvexBody, feet, tangents, delta: float) -> ChordBatch:
    feet = np.atleast_2d(np.asarray(feet, dtype=float))
    tangents = np.atleast_2d(np.asarray(tangents, dtype=float))
    normals = body.inner_normal_many(feet)
    dirs = math.cos(delta) * tangents + math.sin(delta) * normals
    exits, exit_normals, ok = body.exit_many(feet, dirs)
    lengths = np.linalg.norm(exits - feet, axis=-1)
    arrival = angle_to_hyperplane(dirs, exit_normals)
    return ChordBatch(feet, dirs, exits, exit_normals, lengths, arrival,
                      np.abs(arrival - delta), ok, float(delta))


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 0.5 * math.pi:
        raise ValueError(f"delta must lie in (0, pi/2), got {delta}")


def delta_chord(body: ConvexBody, foot, tangent_dir, delta: float) -> ChordRecord:
    """Launch the chord making angle ``delta`` with the tangent hyperplane at ``foot``."""
    _check_delta(delta)
    foot = np.asarray(foot, dtype=float)
    t = np.asarray(tangent_dir, dtype=float)
    n = body.inner_normal_many(foot[None, :])[0]
    if abs(float(t @ n)) > TANGENT_TOL or abs(np.linalg.norm(t) - 1.0) > TANGENT_TOL:
        raise ValueError("tangent_dir must be a unit vector orthogonal to the inner normal")
    batch = delta_chords(body, foot[None, :], t[None, :], delta)
    if not batch.ok[0]:
        raise RayMisses(f"delta-chord from {foot} misses {body.label}")
    return batch.record(0)


def reflect(body: ConvexBody, line: OrientedLine) -> OrientedLine:
    """One step of the billiard map on oriented lines."""
    hit = body.ray_exit(line.foot, line.dir)
    n = hit.inner_normal
    d = np.asarray(line.dir, dtype=float)
    return OrientedLine(hit.position, d - 2.0 * float(d @ n) * n)


def sigma_orbit(body: ConvexBody, start_foot, start_tangent, delta: float, n_steps: int) -> list[ChordRecord]:
    """Chain delta-chords, re-launching along the tangential part of each arrival.

    The drift of that tangential part from cos(delta) is kept on each record;
    it vanishes on bodies with the equal-angle property.
    """
    foot = np.asarray(start_foot, dtype=float)
    tangent = np.asarray(start_tangent, dtype=float)
    records = []
    for _ in range(n_steps):
        rec = delta_chord(body, foot, tangent, delta)
        n = rec.arrival_normal
        tangential = rec.direction - float(rec.direction @ n) * n
        size = float(np.linalg.norm(tangential))
        records.append(ChordRecord(
            rec.p_from, rec.p_to, rec.length, rec.launch_angle, rec.arrival_angle,
            rec.defect, rec.direction, n, size - math.cos(delta),
        ))
        foot = rec.p_to
        tangent = tangential / size
    return records


def orbit_csv(records: list[ChordRecord], header_lines: list[str] = ()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    d = records[0].p_from.size if records else 0
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["step", *[f"foot_{i}" for i in range(d)],
                     "length", "launch_angle", "arrival_angle", "defect"])
    for step, rec in enumerate(records):
        writer.writerow([step, *map(repr, rec.p_from.tolist()), repr(rec.length),
                         repr(rec.launch_angle), repr(rec.arrival_angle), repr(rec.defect)])
    return buf.getvalue()


# -- planar billiard map in (s, p) coordinates ---------------------------------


def billiard_map_2d(curve: SupportCurve2D, s, p):
    """Image (s', p') of boundary coordinates under the billiard map; vectorized."""
    s = np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    theta = curve.theta_at(s)
    foot = curve.position(theta)
    direction = p[..., None] * curve.tangent(theta) + np.sqrt(1.0 - p * p)[..., None] * curve.inner_normal(theta)
    theta1, ok = Planar(curve).exit_theta(foot, direction)
    if not np.all(ok):
        raise RayMisses("billiard map ray missed the curve")
    s1 = np.mod(curve.arc_length(theta1), curve.perimeter)
    # reflection keeps the tangential component
    p1 = np.sum(direction * curve.tangent(theta1), axis=-1)
    return s1, p1


def _wrap(ds, period):
    return (ds + 0.5 * period) % period - 0.5 * period


def phase_jacobian(curve: SupportCurve2D, phase: PhasePoint2D, step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of the billiard map at ``phase``."""
    period = curve.perimeter
    s0, p0 = phase.s, phase.p
    s_pts = np.array([s0 + step, s0 - step, s0, s0])
    p_pts = np.array([p0, p0, p0 + step, p0 - step])
    s1, p1 = billiard_map_2d(curve, s_pts, p_pts)
    return np.array([
        [_wrap(s1[0] - s1[1], period), _wrap(s1[2] - s1[3], period)],
        [p1[0] - p1[1], p1[2] - p1[3]],
    ]) / (2.0 * step)


def symplectic_jacobian(curve: SupportCurve2D, phase: PhasePoint2D, step: float = FD_STEP) -> float:
    """Determinant of the billiard map Jacobian in (s, p); equals 1 for an area-preserving map.

    Falls back to one Richardson extrapolation when the plain central
    difference is off by more than the working tolerance.
    """
    if abs(phase.p) >= 1.0 - TANGENCY_GUARD:
        raise DegeneratePhase(f"p={phase.p} is within {TANGENCY_GUARD} of tangency")
    jac = phase_jacobian(curve, phase, step)
    det = float(np.linalg.det(jac))
    if abs(det - 1.0) <= JACOBIAN_TOL:
        return det
    half = phase_jacobian(curve, phase, 0.5 * step)
    return float(np.linalg.det((4.0 * half - jac) / 3.0))


def canonical_phase(curve: SupportCurve2D, s: float, p: float) -> PhasePoint2D:
    if not -1.0 < p < 1.0:
        raise ValueError(f"p must lie in (-1, 1), got {p}")
    return PhasePoint2D(float(s) % curve.perimeter, float(p))
