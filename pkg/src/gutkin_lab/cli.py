"""Command-line front end.

Every subcommand builds an :class:`ExperimentConfig`, runs it and writes one
report (JSON, or CSV with ``#`` provenance lines).  Reports carry the
config, seed and tool version and contain no timestamps, so identical
configurations give byte-identical output.

Exit status: 0 success, 1 configuration or I/O error, 2 when an assert-mode
check failed (the report is still written, with ``pass`` false).
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .billiard import PhasePoint2D, orbit_csv, sigma_orbit, symplectic_jacobian
from .errors import ConfigError, GutkinLabError
from .geom2d import SupportCurve2D
from .geodesics import geodesic_csv, integrate_geodesic, planarity_defect
from .geomnd import body_from_dict
from .gutkin import (
    SamplerSpec, boundary_samples, defect_scan, perturbation_scaling, root_collisions,
    solve_gutkin_delta, sphere_characterization_experiment,
)
from .lemmas import run_lemma_suite

COMMANDS = ("solve-delta", "defect", "lemmas", "orbit", "scaling", "symplectic", "geodesic", "characterize")
CSV_COMMANDS = ("orbit", "scaling", "geodesic")
SPHERE_TOL = 1e-9
FIELDS = {
    "solve-delta": ("n", "n_max"),
    "defect": ("body", "delta", "samples"),
    "lemmas": ("curve", "delta", "grid"),
    "orbit": ("body", "delta", "steps", "start", "dir"),
    "scaling": ("n", "delta", "eps", "samples"),
    "symplectic": ("curve", "samples"),
    "geodesic": ("body", "start", "dir", "length", "step"),
    "characterize": ("bodies", "delta_grid", "samples"),
}


@dataclass
class ExperimentConfig:
    command: str
    body: dict | None = None
    bodies: list = field(default_factory=list)
    curve: dict | None = None
    delta: float | None = None
    delta_grid: list = field(default_factory=list)
    samples: int = 10_000
    seed: int = 0
    n: int | None = None
    n_max: int | None = None
    eps: list = field(default_factory=list)
    steps: int = 50
    grid: int = 64
    start: list | None = None
    dir: list | None = None
    length: float = 2.0 * math.pi
    step: float | None = None
    out: str | None = None
    format: str = "json"

    def provenance(self) -> dict:
        data = asdict(self)
        keep = ("command", "seed", "format") + FIELDS.get(self.command, ())
        return {k: data[k] for k in keep if data[k] not in (None, [])}


# -- config loading ------------------------------------------------------------------


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf'"{re.escape(key)}"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _load_json(source: str, field_name: str):
    """Inline JSON or a path to a JSON file; returns (data, source text)."""
    text = source if source.lstrip().startswith(("{", "[")) else None
    if text is None:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(field_name, f"file not found: {source}")
        text = path.read_text()
    try:
        return json.loads(text), text
    except json.JSONDecodeError as exc:
        raise ConfigError(field_name, exc.msg, exc.lineno) from None


def _checked_shape(data, text: str, field_name: str, builder):
    try:
        return builder(data)
    except KeyError as exc:
        key = exc.args[0]
        raise ConfigError(f"{field_name}.{key}", "missing", _line_of(text, field_name) or 1) from None
    except (ValueError, TypeError, GutkinLabError) as exc:
        raise ConfigError(field_name, str(exc), _line_of(text, "type") or 1) from None


def _check_delta(value: float, name: str, line: int | None = None) -> float:
    if value is None:
        raise ConfigError(name, "required", line)
    if not 0.0 < value < 0.5 * math.pi:
        raise ConfigError(name, f"{value} is not in (0, pi/2)", line)
    return float(value)


def load_config_file(path: str) -> ExperimentConfig:
    data, text = _load_json(path, "config")
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object", 1)
    known = set(ExperimentConfig.__dataclass_fields__)
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown field", _line_of(text, key))
    if data.get("command") not in COMMANDS:
        raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}", _line_of(text, "command"))
    cfg = ExperimentConfig(**data)
    validate(cfg, text)
    return cfg


def validate(cfg: ExperimentConfig, text: str = "") -> None:
    def line(key):
        return _line_of(text, key) if text else None

    if cfg.command not in COMMANDS:
        raise ConfigError("command", f"must be one of {', '.join(COMMANDS)}", line("command"))
    if cfg.samples < 1:
        raise ConfigError("samples", "must be >= 1", line("samples"))
    if cfg.format not in ("json", "csv"):
        raise ConfigError("format", "must be json or csv", line("format"))
    if cfg.format == "csv" and cfg.command not in CSV_COMMANDS:
        raise ConfigError("format", f"csv output is not available for {cfg.command}", line("format"))
    if cfg.command in ("defect", "lemmas", "orbit") or (cfg.command == "scaling" and cfg.delta is not None):
        _check_delta(cfg.delta, "delta", line("delta"))
    if cfg.command == "characterize":
        if not cfg.delta_grid:
            raise ConfigError("delta_grid", "required", line("delta_grid"))
        for d in cfg.delta_grid:
            _check_delta(d, "delta_grid", line("delta_grid"))
        if not cfg.bodies:
            raise ConfigError("bodies", "at least one body is required", line("bodies"))
    if cfg.command in ("defect", "orbit", "geodesic") and cfg.body is None:
        raise ConfigError("body", "required", line("body"))
    if cfg.command in ("lemmas", "symplectic") and cfg.curve is None:
        raise ConfigError("curve", "required", line("curve"))
    if cfg.command in ("solve-delta", "scaling") and cfg.n is None:
        raise ConfigError("n", "required", line("n"))
    if cfg.command == "solve-delta" and cfg.n < 4:
        raise ConfigError("n", "must be >= 4", line("n"))
    if cfg.command == "scaling" and not cfg.eps:
        raise ConfigError("eps", "required", line("eps"))


def _body(cfg_value, field_name):
    return _checked_shape(cfg_value, json.dumps(cfg_value, indent=1), field_name, body_from_dict)


def _curve(cfg_value, field_name="curve"):
    return _checked_shape(cfg_value, json.dumps(cfg_value, indent=1), field_name, SupportCurve2D.from_dict)


# -- experiments -----------------------------------------------------------------------


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _provenance_lines(cfg: ExperimentConfig) -> list[str]:
    return [
        f"tool=gutkin-lab version={__version__}",
        f"seed={cfg.seed}",
        "config=" + json.dumps(cfg.provenance(), sort_keys=True, separators=(",", ":")),
    ]


def _run_solve_delta(cfg):
    roots = [r.to_dict() for r in solve_gutkin_delta(cfg.n)]
    result = {"roots": roots}
    if cfg.n_max:
        result["collisions"] = [[a.to_dict(), b.to_dict()] for a, b in root_collisions(cfg.n_max)]
    return result, all(r["residual"] < 1e-10 for r in roots)


def _run_defect(cfg):
    body = _body(cfg.body, "body")
    report = defect_scan(body, cfg.delta, SamplerSpec(cfg.samples, cfg.seed)).to_dict()
    passed = report["max_defect"] < SPHERE_TOL if body.is_round else None
    return report, passed


def _run_lemmas(cfg):
    curve = _curve(cfg.curve)
    checks = [c.to_dict() for c in run_lemma_suite(curve, cfg.delta, cfg.grid)]
    failed = any(c["pass"] is False for c in checks)
    return {"checks": checks}, not failed


def _orbit_start(body, seed):
    feet, tangents = boundary_samples(body, SamplerSpec(1, seed))
    return feet[0], tangents[0]


def _run_orbit(cfg):
    body = _body(cfg.body, "body")
    foot, tangent = _orbit_start(body, cfg.seed)
    if cfg.start is not None:
        foot = np.asarray(cfg.start, dtype=float)
        sp = body.surface_point(foot)
        t = np.asarray(cfg.dir if cfg.dir is not None else tangent, dtype=float)
        t = t - (t @ sp.inner_normal) * sp.inner_normal
        tangent = t / np.linalg.norm(t)
    records = sigma_orbit(body, foot, tangent, cfg.delta, cfg.steps)
    passed = max(r.defect for r in records) < SPHERE_TOL if body.is_round else None
    return records, passed


def _run_scaling(cfg):
    delta = cfg.delta if cfg.delta is not None else solve_gutkin_delta(cfg.n)[0].delta
    return perturbation_scaling(cfg.n, delta, cfg.eps, samples=cfg.samples, seed=cfg.seed), None


def _run_symplectic(cfg):
    curve = _curve(cfg.curve)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for _ in range(cfg.samples):
        s, p = rng.uniform(0.0, curve.perimeter), rng.uniform(-0.999, 0.999)
        det = symplectic_jacobian(curve, PhasePoint2D(float(s), float(p)))
        tol = 1e-5 if abs(p) > 0.9 else 1e-6
        rows.append({"s": float(s), "p": float(p), "det": det, "pass": abs(det - 1.0) < tol})
    passed = all(r["pass"] for r in rows)
    worst = max(abs(r["det"] - 1.0) for r in rows)
    return {"curve": curve.label, "points": rows, "max_abs_det_minus_1": worst, "pass": passed}, passed


def _run_geodesic(cfg):
    body = _body(cfg.body, "body")
    if cfg.start is None or cfg.dir is None:
        raise ConfigError("start", "geodesic needs both start and dir")
    samples = integrate_geodesic(body, cfg.start, cfg.dir, cfg.length, cfg.step)
    return samples, None


def _run_characterize(cfg):
    family = [_body(b, f"bodies[{i}]") for i, b in enumerate(cfg.bodies)]
    table = sphere_characterization_experiment(family, cfg.delta_grid, SamplerSpec(cfg.samples, cfg.seed))
    result = table.to_dict()
    return result, all(result["pass"].values())


RUNNERS = {
    "solve-delta": _run_solve_delta,
    "defect": _run_defect,
    "lemmas": _run_lemmas,
    "orbit": _run_orbit,
    "scaling": _run_scaling,
    "symplectic": _run_symplectic,
    "geodesic": _run_geodesic,
    "characterize": _run_characterize,
}


def render(cfg: ExperimentConfig, result, passed) -> str:
    if cfg.format == "csv":
        header = _provenance_lines(cfg) + [f"pass={passed}"]
        if cfg.command == "orbit":
            return orbit_csv(result, header)
        if cfg.command == "geodesic":
            return geodesic_csv(result, header)
        return result.to_csv(header)
    if cfg.command == "orbit":
        result = {"chords": [r.to_dict() for r in result]}
    elif cfg.command == "geodesic":
        result = {"samples": [{"s": x.s, "position": x.position, "k": x.k, "tau": x.tau} for x in result],
                  "planarity_defect": planarity_defect(result) if len(result) >= 10 else None}
    elif cfg.command == "scaling":
        result = {"n": result.n, "delta": result.delta, "eps": result.eps,
                  "rms_defect": result.rms_defect, "slope": result.slope}
    report = {
        "tool": "gutkin-lab",
        "version": __version__,
        "command": cfg.command,
        "seed": cfg.seed,
        "config": cfg.provenance(),
        "pass": passed,
        "result": result,
    }
    return json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"


def run(cfg: ExperimentConfig) -> tuple[int, str]:
    """Run one experiment; returns (exit status, report text) and writes ``cfg.out`` if set."""
    validate(cfg)
    result, passed = RUNNERS[cfg.command](cfg)
    text = render(cfg, result, passed)
    if cfg.out:
        Path(cfg.out).write_text(text)
    return (2 if passed is False else 0), text


# -- argument parsing -------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(x) for x in re.split(r"[,\s]+", text.strip()) if x]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gutkin-lab", description="Equal-angle chord experiments on convex bodies.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON experiment config (replaces the subcommand)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--degrees", action="store_true", help="angles on the command line are in degrees")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("solve-delta", parents=[common], help="roots of tan(n d) = n tan d")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n-max", type=int, help="also cross-index roots for 4..n_max")

    p = sub.add_parser("defect", parents=[common], help="equal-angle defect scan of a body")
    p.add_argument("--body", required=True, help="body JSON file or inline JSON")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--samples", type=int, default=10_000)

    p = sub.add_parser("lemmas", parents=[common], help="planar lemma checks on a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--grid", type=int, default=64)

    p = sub.add_parser("orbit", parents=[common], help="chained delta-chords")
    p.add_argument("--body", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--start", type=_floats)
    p.add_argument("--dir", type=_floats)

    p = sub.add_parser("scaling", parents=[common], help="defect against harmonic amplitude")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, help="default: smallest root for n")
    p.add_argument("--eps", type=_floats, required=True)
    p.add_argument("--samples", type=int, default=720)

    p = sub.add_parser("symplectic", parents=[common], help="Jacobian determinant of the 2D map")
    p.add_argument("--curve", required=True)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("geodesic", parents=[common], help="geodesic with curvature and torsion")
    p.add_argument("--body", required=True)
    p.add_argument("--start", type=_floats, required=True)
    p.add_argument("--dir", type=_floats, required=True)
    p.add_argument("--length", type=float, default=2.0 * math.pi)
    p.add_argument("--step", type=float)

    p = sub.add_parser("characterize", parents=[common], help="mean defect table over bodies and angles")
    p.add_argument("--body", action="append", required=True, dest="bodies")
    p.add_argument("--delta-grid", type=_floats, required=True)
    p.add_argument("--samples", type=int, default=4096)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    scale = math.pi / 180.0 if getattr(args, "degrees", False) else 1.0
    cfg = ExperimentConfig(command=args.command, seed=args.seed, out=args.out, format=args.format)
    for name in ("samples", "n", "n_max", "steps", "grid", "start", "dir", "length", "step", "eps"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "delta", None) is not None:
        cfg.delta = args.delta * scale
    if getattr(args, "delta_grid", None):
        cfg.delta_grid = [d * scale for d in args.delta_grid]
    if getattr(args, "body", None):
        cfg.body = _load_json(args.body, "body")[0]
    if getattr(args, "bodies", None):
        cfg.bodies = [_load_json(b, f"bodies[{i}]")[0] for i, b in enumerate(args.bodies)]
    if getattr(args, "curve", None):
        cfg.curve = _load_json(args.curve, "curve")[0]
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            cfg = load_config_file(args.config)
        elif args.command:
            cfg = config_from_args(args)
        else:
            parser.print_help(sys.stderr)
            return 1
        status, text = run(cfg)
    except (ConfigError, OSError) as exc:
        print(f"gutkin-lab: error: {exc}", file=sys.stderr)
        return 1
    if not cfg.out:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
