"""Exception types shared by all zpscan modules."""


class ZpError(Exception):
    """Base class for all zpscan errors."""


class DomainError(ZpError):
    """Input outside the mathematical domain of the operation (e.g. tau in the lower half-plane)."""


class NonConvergence(ZpError):
    """An iteration or series failed to reach the requested tolerance within its budget."""


class DegenerateInput(ZpError):
    """Structurally degenerate input: singular matrix, identically-zero polynomial, zero pivot."""


class StructureViolation(ZpError):
    """A structural identity that should hold for consistent inputs failed numerically."""


class UnsupportedConfiguration(ZpError):
    """A coordinate/isogeny configuration outside the implemented relation cases."""


class MissingAssignment(ZpError):
    """Polynomial evaluation was requested with an unassigned variable."""


class Inconclusive(ZpError):
    """A sampling certificate search exhausted its budget without a verdict.

    Raised by the ideal non-membership test.  It never certifies membership;
    it merely reports that no witness point was found within the budget.
    """
