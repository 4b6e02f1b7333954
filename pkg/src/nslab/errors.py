"""Exception taxonomy shared across the package.

Gate violations (CFL, contraction, smallness) and coverage problems get
distinct types so the CLI can map them to exit codes.
"""


class NslabError(Exception):
    """Base class for all package errors."""


class ConfigError(NslabError):
    """Malformed or inconsistent experiment configuration."""


class BallTooLarge(NslabError):
    """Requested ball does not fit in the periodic box."""


class DomainExceeded(NslabError):
    """Evaluation points leave the represented domain."""


class SeamMismatch(NslabError):
    """Annulus profile fails its matching condition at the seam."""


class NonIntegrableProfile(NslabError):
    """Cumulative radial mass diverges under refinement."""


class ShellUnresolved(NslabError):
    """Dyadic shell is below the grid resolution."""


class SingularPoint(NslabError):
    """Kernel evaluated at its singularity."""


class SingularQuadrature(NslabError):
    """Principal-value regularization failed its self-consistency check."""


class AdmissibilityViolation(NslabError):
    """Exponent pair violates the admissibility relation."""


class NegativeTime(NslabError):
    """Heat flow requested for t < 0."""


class MeshTooCoarse(NslabError):
    """Time mesh has too few samples for the quadrature."""


class ExponentOrder(NslabError):
    """Exponents supplied in the wrong order (needs q <= p)."""


class GateViolation(NslabError):
    """A configured numerical smallness gate was violated."""


class NoContraction(GateViolation):
    """Picard iteration failed to contract (data too large)."""


class CflViolation(GateViolation):
    """Advective CFL gate exceeded."""


class NanGuard(NslabError):
    """Non-finite values appeared during time stepping."""


class CoverageGap(NslabError):
    """Trajectory does not cover the requested time window."""


class UnresolvedCylinder(CoverageGap):
    """Parabolic cylinder below grid or snapshot resolution."""


class SupportViolation(CoverageGap):
    """Test function support leaves the trajectory's space-time extent."""


class CompatibilityViolation(NslabError):
    """Divergence data violates the zero-mean compatibility condition."""
