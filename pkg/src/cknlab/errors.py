"""Exception types shared across the package."""


class CknLabError(Exception):
    """Base class for all package errors."""


class OutOfCone(CknLabError):
    """Parameter point violates the admissible cone.

    Carries ``violations``, a list of (constraint, margin) pairs where
    margin < 0 quantifies by how much the constraint failed.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(f"{name} (margin {m:.6g})" for name, m in self.violations)
        super().__init__(f"parameters outside the admissible cone: {msg}")


class ImageOutsideCone(OutOfCone):
    """Cylinder parameters map to a flat point outside the cone."""


class PreconditionViolated(CknLabError):
    pass


class NonConvergent(CknLabError):
    """Improper integral fails the tail/origin decay test."""


class ToleranceNotMet(CknLabError):
    """Adaptive quadrature exhausted its depth above the requested tolerance."""


class NotInSymmetryRegion(CknLabError):
    """Radial profile only gives a lower bound on the optimal constant here."""


class CrossCheckFailed(CknLabError):
    """Two independent computation routes disagree beyond tolerance."""


class FitFailed(CknLabError):
    pass


class ShootingFailed(CknLabError):
    """Bisection bracket could not be established or refined.

    ``reason`` is 'blow_up' (every candidate crosses zero) or
    'extinction_before_tail' (every candidate turns around before decaying).
    """

    def __init__(self, reason, detail=""):
        self.reason = reason
        super().__init__(f"shooting failed ({reason}) {detail}".rstrip())


class WindowTooNarrow(CknLabError):
    pass


class GridTooCoarse(CknLabError):
    pass


class NonPositiveDensity(CknLabError):
    pass


class StabilityViolated(CknLabError):
    """Time step too large: negative density or mass drift detected."""


class ConstraintViolated(CknLabError):
    """Trial function violates the orthogonality side condition."""


class CertificateFailed(CknLabError):
    def __init__(self, msg, trial=None):
        self.trial = trial
        super().__init__(msg)


class DimensionUnsupported(CknLabError):
    pass
