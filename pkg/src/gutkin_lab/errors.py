"""Exception types shared across the package."""


class GutkinLabError(Exception):
    """Base class for all errors raised by gutkin_lab."""


class ConvexityViolation(GutkinLabError, ValueError):
    """Curvature radius is not strictly positive somewhere on the curve."""

    def __init__(self, theta: float, min_rho: float):
        self.theta = theta
        self.min_rho = min_rho
        super().__init__(
            f"curve is not strictly convex: min curvature radius {min_rho:.6g} "
            f"at theta={theta:.6f}"
        )


class NotConstantWidth(GutkinLabError, ValueError):
    pass


class RayMisses(GutkinLabError):
    """Ray does not produce a forward boundary intersection."""

    def __init__(self, message: str = "ray misses the body", count: int = 1):
        self.count = count
        super().__init__(message)


class NotOnBoundary(GutkinLabError, ValueError):
    pass


class DegeneratePhase(GutkinLabError, ValueError):
    pass


class DegenerateQuadratic(GutkinLabError, ArithmeticError):
    """Leading coefficient vanishes; ``linear_root`` holds -C/B when B != 0."""

    def __init__(self, message: str, linear_root: float | None = None):
        self.linear_root = linear_root
        super().__init__(message)


class StepTooLarge(GutkinLabError):
    pass


class ConfigError(GutkinLabError, ValueError):
    """Invalid experiment configuration; names the field and, if known, the line."""

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"config field '{field}'{where}: {message}")
