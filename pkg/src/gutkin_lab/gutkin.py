"""Equal-angle (Gutkin) computations.

* roots of tan(n delta) = n tan(delta) on (0, pi/2),
* defect scans: sup/mean/rms of |arrival - launch| over sampled delta-chords,
* the sphere-characterization table and the harmonic perturbation probe.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .billiard import ChordRecord, delta_chords
from .errors import RayMisses
from .geom2d import TWO_PI, SupportCurve2D
from .geomnd import ConvexBody, Ellipsoid, Planar, Revolution, Sphere

log = logging.getLogger(__name__)

POLE_EXCLUSION = 1e-8
RESIDUAL_TOL = 1e-10
BRANCH_GRID = 256
MISS_FRACTION = 1e-3
CHUNK = 4096


# -- tan(n delta) = n tan(delta) -----------------------------------------------


@dataclass(frozen=True)
class DeltaRoot:
    n: int
    delta: float
    residual: float

    def to_dict(self) -> dict:
        return {"n": self.n, "delta": self.delta, "residual": self.residual}


def gutkin_residual(n: int, delta: float, dps: int = 34) -> float:
    """|tan(n delta) - n tan(delta)| evaluated at ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        d = mpmath.mpf(delta)
        return float(abs(mpmath.tan(n * d) - n * mpmath.tan(d)))


def _branch_edges(n: int) -> list[float]:
    poles = [(2 * k + 1) * math.pi / (2 * n) for k in range(n) if (2 * k + 1) < n]
    return [0.0, *poles, 0.5 * math.pi]


def solve_gutkin_delta(n: int) -> list[DeltaRoot]:
    """All roots of tan(n delta) = n tan(delta) in (0, pi/2), sorted.

    Between consecutive poles of tan(n delta) the pole-free form
    sin(n d) cos(d) - n sin(d) cos(n d) has the sign of the difference times a
    fixed sign, so sign changes on a sub-grid of each branch bracket the roots,
    which are then bisected to float resolution.

    Roots whose residual at the nearest float still exceeds RESIDUAL_TOL are
    dropped with a warning.  This happens only close to pi/2 for large n,
    where one ulp of delta moves the residual by more than the tolerance.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")

    def g(d):
        return math.sin(n * d) * math.cos(d) - n * math.sin(d) * math.cos(n * d)

    roots = []
    edges = _branch_edges(n)
    for lo_edge, hi_edge in zip(edges[:-1], edges[1:]):
        grid = np.linspace(lo_edge + POLE_EXCLUSION, hi_edge - POLE_EXCLUSION, BRANCH_GRID)
        vals = [g(x) for x in grid]
        for i in range(len(grid) - 1):
            if vals[i] == 0.0:
                roots.append(float(grid[i]))
                continue
            if vals[i + 1] == 0.0 or vals[i] * vals[i + 1] > 0.0:
                continue
            lo, hi, glo = float(grid[i]), float(grid[i + 1]), vals[i]
            while True:
                mid = 0.5 * (lo + hi)
                if mid in (lo, hi):
                    break
                gm = g(mid)
                if (gm > 0.0) == (glo > 0.0):
                    lo, glo = mid, gm
                else:
                    hi = mid
            best = min((lo, hi), key=lambda x: abs(math.tan(n * x) - n * math.tan(x)))
            roots.append(best)
    out = []
    for d in sorted(roots):
        residual = gutkin_residual(n, d)
        if residual < RESIDUAL_TOL:
            out.append(DeltaRoot(n, d, residual))
        else:
            log.warning("dropping root n=%d delta=%r: residual %.3g at float resolution", n, d, residual)
    return out


def root_collisions(n_max: int = 40, tol: float = 1e-6) -> list[tuple[DeltaRoot, DeltaRoot]]:
    """Pairs of roots for different n closer than ``tol``.

    A diagnostic for the uniqueness question; an empty list proves nothing.
    """
    pool = sorted(
        (r for n in range(4, n_max + 1) for r in solve_gutkin_delta(n)), key=lambda r: r.delta
    )
    return [
        (a, b) for a, b in zip(pool[:-1], pool[1:]) if a.n != b.n and b.delta - a.delta < tol
    ]


# -- sampling ---------------------------------------------------------------------


@dataclass(frozen=True)
class SamplerSpec:
    count: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be >= 1")


def _unit_rows(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _gaussian_halton(dim: int, count: int, seed: int) -> np.ndarray:
    u = qmc.Halton(d=dim, scramble=True, seed=np.random.default_rng(seed)).random(count)
    return ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))


def boundary_samples(body: ConvexBody, sampler: SamplerSpec) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic (foot, unit tangent) pairs covering the boundary of ``body``.

    Spheres and ellipsoids: scrambled Halton points mapped to Gaussian vectors;
    the first d coordinates pick the foot, the last d a tangent direction.
    Revolution bodies: seed-shifted product grid over (profile angle,
    azimuth, tangent angle).  Planar curves: seed-shifted grid over the
    normal angle with alternating orientation.
    """
    if isinstance(body, (Sphere, Ellipsoid)):
        d = body.d
        g = _gaussian_halton(2 * d, sampler.count, sampler.seed)
        u = _unit_rows(g[:, :d])
        feet = body.center + body.radius * u if isinstance(body, Sphere) else body.parametric_point(u)
        n = body.inner_normal_many(feet)
        t = g[:, d:]
        t = t - np.sum(t * n, axis=-1, keepdims=True) * n
        return feet, _unit_rows(t)
    shift = np.random.default_rng(sampler.seed).random(3)
    if isinstance(body, Revolution):
        m = max(2, math.ceil(sampler.count ** (1.0 / 3.0)))
        theta = math.pi * (np.arange(m) + shift[0]) / m
        phi = TWO_PI * (np.arange(m) + shift[1]) / m
        psi = TWO_PI * (np.arange(m) + shift[2]) / m
        th, ph, ps = (x.reshape(-1) for x in np.meshgrid(theta, phi, psi, indexing="ij"))
        feet, _, meridian, azimuth = body.boundary_point(th, ph)
        tangents = np.cos(ps)[:, None] * meridian + np.sin(ps)[:, None] * azimuth
        return feet, tangents
    if isinstance(body, Planar):
        theta = TWO_PI * (np.arange(sampler.count) + shift[0]) / sampler.count
        sign = np.where(np.arange(sampler.count) % 2 == 0, 1.0, -1.0)
        return body.curve.position(theta), sign[:, None] * body.curve.tangent(theta)
    raise TypeError(f"no sampler for {type(body).__name__}")


def worker_count() -> int:
    env = os.environ.get("GUTKIN_LAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer GUTKIN_LAB_THREADS=%r", env)
    return min(4, os.cpu_count() or 1)


# -- defect scans -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DefectReport:
    body: str
    delta: float
    sample_count: int
    max_defect: float
    mean_defect: float
    rms_defect: float
    worst_chord: ChordRecord
    seed: int = 0
    misses: int = 0

    def to_dict(self) -> dict:
        return {
            "body": self.body,
            "delta": self.delta,
            "samples": self.sample_count,
            "seed": self.seed,
            "max_defect": self.max_defect,
            "mean_defect": self.mean_defect,
            "rms_defect": self.rms_defect,
            "misses": self.misses,
            "worst_chord": self.worst_chord.to_dict(),
        }


def defect_scan(body: ConvexBody, delta: float, sampler: SamplerSpec = SamplerSpec()) -> DefectReport:
    """Statistics of the equal-angle defect over sampled delta-chords.

    Chunks may run on several threads; the reduction uses exactly rounded
    sums, so the report does not depend on the worker count.
    """
    if not 0.0 < delta < 0.5 * math.pi:
        raise ValueError(f"delta must lie in (0, pi/2), got {delta}")
    feet, tangents = boundary_samples(body, sampler)
    starts = range(0, len(feet), CHUNK)

    def run(i):
        return delta_chords(body, feet[i:i + CHUNK], tangents[i:i + CHUNK], delta)

    workers = worker_count()
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(run, starts))
    else:
        batches = [run(i) for i in starts]

    total = len(feet)
    defects = np.concatenate([b.defects for b in batches])
    ok = np.concatenate([b.ok for b in batches])
    misses = int(total - ok.sum())
    if misses:
        if misses >= MISS_FRACTION * total:
            raise RayMisses(f"{misses} of {total} delta-chords missed {body.label}", count=misses)
        log.info("%d of %d delta-chords missed %s; excluded", misses, total, body.label)
    good = defects[ok]
    worst = int(np.flatnonzero(ok)[np.argmax(good)])
    chunk, row = divmod(worst, CHUNK)
    return DefectReport(
        body=body.label,
        delta=float(delta),
        sample_count=int(good.size),
        max_defect=float(good.max()),
        mean_defect=math.fsum(good.tolist()) / good.size,
        rms_defect=math.sqrt(math.fsum((good * good).tolist()) / good.size),
        worst_chord=batches[chunk].record(row),
        seed=sampler.seed,
        misses=misses,
    )


# -- experiments --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CharacterizationTable:
    bodies: list[str]
    round_flags: list[bool]
    deltas: list[float]
    mean_defect: np.ndarray  # (bodies, deltas)
    sampler: SamplerSpec = field(default_factory=SamplerSpec)

    @property
    def row_minimum(self) -> np.ndarray:
        return self.mean_defect.min(axis=1)

    @property
    def sphere_baseline(self) -> float:
        """Largest mean defect seen on any round body (0 when none is present)."""
        rows = self.mean_defect[np.array(self.round_flags, dtype=bool)]
        return float(rows.max()) if rows.size else 0.0

    def check(self, sphere_tol: float = 1e-9, factor: float = 100.0) -> dict[str, bool]:
        baseline = self.sphere_baseline
        out = {}
        for label, is_round, low in zip(self.bodies, self.round_flags, self.row_minimum):
            out[label] = bool(low < sphere_tol) if is_round else bool(low > factor * baseline)
        return out

    def to_dict(self) -> dict:
        return {
            "deltas": self.deltas,
            "samples": self.sampler.count,
            "seed": self.sampler.seed,
            "sphere_baseline": self.sphere_baseline,
            "rows": [
                {"body": b, "round": r, "mean_defect": m.tolist(), "min_mean_defect": float(m.min())}
                for b, r, m in zip(self.bodies, self.round_flags, self.mean_defect)
            ],
            "pass": self.check(),
        }


def sphere_characterization_experiment(
    family: list[ConvexBody], delta_grid, sampler: SamplerSpec = SamplerSpec(4096, 0)
) -> CharacterizationTable:
    """Mean defect for every (body, delta); only round bodies reach ~0 for some delta."""
    deltas = [float(d) for d in delta_grid]
    table = np.array([[defect_scan(b, d, sampler).mean_defect for d in deltas] for b in family])
    return CharacterizationTable(
        [b.label for b in family], [b.is_round for b in family], deltas, table, sampler
    )


@dataclass(frozen=True)
class ScalingResult:
    n: int
    delta: float
    eps: tuple[float, ...]
    rms_defect: tuple[float, ...]
    slope: float | None

    def to_csv(self, header_lines=()) -> str:
        lines = [f"# {h}" for h in header_lines]
        lines.append("eps,rms_defect")
        lines += [f"{e!r},{r!r}" for e, r in zip(self.eps, self.rms_defect)]
        lines.append(f"# slope={self.slope!r}")
        return "\n".join(lines) + "\n"


def loglog_slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def harmonic_probe(n: int, eps: float) -> SupportCurve2D:
    """The curve h = 1 + eps cos(n theta); raises ConvexityViolation when eps >= 1/(n^2 - 1)."""
    return SupportCurve2D(1.0, ((n, eps, 0.0),) if eps else ())


def perturbation_scaling(n: int, delta: float, eps_list, samples: int = 720, seed: int = 0) -> ScalingResult:
    """RMS defect of the harmonic probe curve against eps, with the fitted log-log slope."""
    eps_list = [float(e) for e in eps_list]
    rms = []
    for eps in eps_list:
        curve = harmonic_probe(n, eps)
        rms.append(defect_scan(Planar(curve), delta, SamplerSpec(samples, seed)).rms_defect)
    positive = [(e, r) for e, r in zip(eps_list, rms) if e > 0 and r > 0]
    slope = loglog_slope(*zip(*positive)) if len(positive) >= 2 else None
    return ScalingResult(n, float(delta), tuple(eps_list), tuple(rms), slope)
