"""Exception hierarchy shared across the package."""


class HyperDiscoveryError(Exception):
    """Base class for all package errors."""


class SchemaError(HyperDiscoveryError, ValueError):
    """Malformed dataset, model or config file."""


class GeometryError(HyperDiscoveryError, ValueError):
    """Degenerate mesh geometry (zero-area element, unresolved hole, ...)."""


class PartitionError(HyperDiscoveryError, ValueError):
    """A degree of freedom was assigned to more than one subset."""


class InvertedElementError(HyperDiscoveryError, ValueError):
    """Deformation gradient with non-positive Jacobian."""


class FeatureDomainError(HyperDiscoveryError, ValueError):
    """Feature evaluated outside its domain, e.g. log of a non-positive invariant."""


class DataQualityError(HyperDiscoveryError):
    """Too many elements had to be rejected during assembly."""


class NonConverged(HyperDiscoveryError):
    """A fixed-point run did not converge."""


class AllStartsFailed(HyperDiscoveryError):
    """No fixed-point start converged for the current penalty."""


class EmptyModel(HyperDiscoveryError):
    """Thresholding removed every feature."""


class DiscoveryFailed(HyperDiscoveryError):
    """Penalty escalation hit its cap without an admissible model.

    ``trail`` holds the per-penalty verdicts collected so far.
    """

    def __init__(self, message, trail=None):
        super().__init__(message)
        self.trail = trail or []


class SolverError(HyperDiscoveryError):
    """Newton iteration of the forward solver diverged."""
