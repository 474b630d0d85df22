"""Numerical laboratory for equal-angle chords in convex billiards."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, ConvexityViolation, DegeneratePhase, DegenerateQuadratic, GutkinLabError,
    NotConstantWidth, NotOnBoundary, RayMisses, StepTooLarge,
)
from .geom2d import SupportCurve2D, make_constant_width  # noqa: E402
from .geomnd import Ellipsoid, Planar, Revolution, Sphere, body_from_dict  # noqa: E402
from .gutkin import SamplerSpec, defect_scan, solve_gutkin_delta  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError", "ConvexityViolation", "DegeneratePhase", "DegenerateQuadratic", "GutkinLabError",
    "NotConstantWidth", "NotOnBoundary", "RayMisses", "StepTooLarge",
    "SupportCurve2D", "make_constant_width",
    "Ellipsoid", "Planar", "Revolution", "Sphere", "body_from_dict",
    "SamplerSpec", "defect_scan", "solve_gutkin_delta",
]
