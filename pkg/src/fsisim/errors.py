"""Exception types raised by the simulator."""


class FsiError(Exception):
    """Base class for all simulator errors."""


class DimensionTooSmall(FsiError, ValueError):
    pass


class NonpositiveLength(FsiError, ValueError):
    pass


class NonpositiveDensity(FsiError, ValueError):
    pass


class AdmissibilityViolated(FsiError):
    """Raised when ``1 + eta`` drops below the admissibility margin ``delta0``."""

    def __init__(self, min_value, index, delta0):
        self.min_value = float(min_value)
        self.index = int(index)
        self.delta0 = float(delta0)
        super().__init__(
            f"min(1+eta) = {self.min_value:.6g} at node {self.index} "
            f"is below delta0 = {self.delta0:.6g}"
        )


class CoefficientOutOfBounds(FsiError):
    pass


class LinearSolveDiverged(FsiError):
    pass


class ShapeMismatch(FsiError, ValueError):
    pass


class WindowUnderflow(FsiError):
    """Window halving reached the configured minimum without a converged window."""


class ParseError(FsiError, ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(FsiError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class FormatError(FsiError, ValueError):
    pass


class DensityBoundsViolated(FsiError):
    """Density left the admissible band ``[m/2, 2M]``."""


class ConfigError(FsiError, ValueError):
    pass


class IncompatibleInitialData(FsiError):
    """Initial velocity does not match the beam velocity on the walls."""
