"""Exception hierarchy shared by all phigeom modules."""


class PhiGeomError(Exception):
    """Base class for every error raised by phigeom."""


class PhiOverflowError(PhiGeomError, OverflowError):
    """phi(u) left the floating range; ``u`` holds the offending argument."""

    def __init__(self, u, message=None):
        self.u = u
        super().__init__(message or f"phi overflow at u={u!r}")


class PhiValidationError(PhiGeomError):
    """A candidate phi-function produced non-finite values during validation."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message)


class DegenerateWeightError(PhiGeomError):
    """The normalizing integral of u0 * phi'(f) vanished."""


class DensityError(PhiGeomError, ValueError):
    """Input values do not define a strictly positive normalized density."""


class DegenerateDirectionError(PhiGeomError, ValueError):
    """A direction collapsed to zero or the direction set is rank deficient."""


class NormalizerError(PhiGeomError):
    """The normalizing function could not be solved at the requested parameter."""


class UnboundedNormalizerError(NormalizerError):
    """The normalizer bracket grew past its limit without enclosing a root."""


class NotPositiveDefiniteError(PhiGeomError):
    """Metric failed the positive-definiteness certificate."""

    def __init__(self, spectrum, message=None):
        self.spectrum = spectrum
        super().__init__(message or f"metric is not positive definite; spectrum={list(spectrum)}")


class SingularWeightError(PhiGeomError):
    """(phi^-1)'(p) vanished or was non-finite inside the divergence."""


class TruncatedPathError(PhiGeomError):
    """An integrator could not continue; ``last_t`` is the last valid time."""

    def __init__(self, last_t, path, cause):
        self.last_t = last_t
        self.path = path
        self.cause = cause
        super().__init__(f"path truncated at t={last_t}: {cause}")
