"""Exception hierarchy shared by all modules."""


class BiflatError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BiflatError, ValueError):
    """A point or finite-difference stencil leaves the admissible domain."""


class DegeneracyError(BiflatError, ValueError):
    """A quantity appearing in a denominator is (numerically) zero."""


class PoleError(DomainError):
    """An independent variable is too close to a fixed singular point."""

    def __init__(self, pole: float, z: float, guard: float):
        self.pole = pole
        self.z = z
        self.guard = guard
        super().__init__(f"z={z!r} is within {guard:g} of the pole z={pole:g}")


class BranchError(BiflatError, ValueError):
    """A square-root radicand changes sign, or is negative in real mode."""


class DegenerateConstantsError(BiflatError, ValueError):
    """Logarithm of a non-positive quantity while building integration constants."""


class InvalidModelError(BiflatError, ValueError):
    """Model parameters violate their defining constraints."""


class NumericError(BiflatError, RuntimeError):
    """A numerical kernel (eigen-solver, integrator) failed."""


class DriftError(NumericError):
    """Conserved-quantity drift exceeded the configured bound during integration."""

    def __init__(self, message: str, z: float, drift: tuple[float, float]):
        self.z = z
        self.drift = drift
        super().__init__(message)
