"""Exception types raised by the numerical geometry engines.

Every operation documents which of these it can raise; anything else
escaping a public entry point is a bug.
"""


class GeometryError(Exception):
    """Base class for all toolkit errors."""


class StencilOutsideDomain(GeometryError):
    """A finite-difference stencil point fails the field's domain guard."""


class NonFinite(GeometryError):
    """A field evaluation returned NaN or infinity."""


class DegenerateLog(GeometryError):
    """An inner logarithm vanished where the exhaustion formula needs it."""


class OriginNotInDomain(GeometryError):
    """The punctured-disc metric was requested at the puncture."""


class SingularMetric(GeometryError):
    """A metric matrix is singular or indefinite where invertibility is required."""


class SingularVerticalMetric(SingularMetric):
    """The fiberwise Hessian of a Finsler metric is not invertible."""


class SingularForm(GeometryError):
    """A reference (1,1)-form is degenerate where positivity is required."""


class ZeroVector(GeometryError):
    """A direction argument that must be nonzero was zero."""


class ZeroSectionPoint(GeometryError):
    """A fiber point on the zero section where the metric is not smooth."""


class NotPositive(GeometryError):
    """A form that must be positive definite has a nonpositive eigenvalue."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoFiniteExponent(GeometryError):
    """No exponent in the search grid makes the comparison inequality hold."""


class IndeterminacyPoint(GeometryError):
    """All components of a projective map vanish at a quadrature node."""


class QuadratureBudgetExceeded(GeometryError):
    """A requested integration needs more field evaluations than allowed."""


class OriginInDivisorImage(GeometryError):
    """Counting from s = 0 requested for a divisor meeting the origin."""


class SigmaVanishesOnShell(GeometryError):
    """A proximity integrand hit a zero of the section even after retries."""


class SigmaIdenticallyZero(GeometryError):
    """The supplied section is identically zero."""


class DegenerateMap(GeometryError):
    """The map is too degenerate for the requested operation."""


class RootFindingFailure(GeometryError):
    """The plane-preimage solver failed for one sampled plane."""


class WindowTooSmall(GeometryError):
    """An order fit was requested on fewer than five grid points."""


class SchemaError(GeometryError):
    """A scenario file failed JSON parsing or schema validation."""


class CheckFailure(GeometryError):
    """At least one verification check failed."""


class NumericalBreakdown(GeometryError):
    """A numerical engine broke down; carries the offending witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
