"""Exception types raised across the package.

Each condition the library can reject gets its own class so that callers and
tests can discriminate failures without string matching.
"""


class CodedOptError(Exception):
    """Base class for all package-specific errors."""


# --- dense linear algebra ---

class NonPowerOfTwoLength(CodedOptError, ValueError):
    """Transform length is not a power of two."""


class NotSquare(CodedOptError, ValueError):
    """Matrix expected to be square."""


class NotSymmetric(CodedOptError, ValueError):
    """Matrix expected to be symmetric within tolerance."""


class CmxFormatError(CodedOptError, ValueError):
    """Malformed CMX1 matrix file."""


# --- encoding construction ---

class NonPowerOfTwo(CodedOptError, ValueError):
    """Construction order must be a power of two."""


class TooSmall(CodedOptError, ValueError):
    """Construction order below the minimum supported size."""


class NotPrime(CodedOptError, ValueError):
    """Parameter must be prime."""


class WrongResidueClass(CodedOptError, ValueError):
    """Prime lies in the wrong residue class for this construction."""


class BadBeta(CodedOptError, ValueError):
    """Redundancy factor must be at least one."""


class DivisibilityError(CodedOptError, ValueError):
    """A divisibility precondition on (n, beta, m) failed."""


class DimensionMismatch(CodedOptError, ValueError):
    """Operand shapes are inconsistent."""


class IndexOutOfRange(CodedOptError, IndexError):
    """Block or row index outside the valid range."""


class EmptySubset(CodedOptError, ValueError):
    """Node subset must be nonempty."""


class IndivisibleRows(CodedOptError, ValueError):
    """Row count is not divisible by the partition count."""


# --- problem construction ---

class BadShape(CodedOptError, ValueError):
    """Problem dimensions violate n > p."""


class SingularSystem(CodedOptError, ValueError):
    """Normal equations are singular or numerically unsolvable."""


# --- solver ---

class EmptyReplySet(CodedOptError, ValueError):
    """Gradient aggregation needs at least one worker reply."""


class EmptyOverlap(CodedOptError, ValueError):
    """Consecutive reply sets share no nodes; no curvature pair exists."""


class NonFiniteInput(CodedOptError, ValueError):
    """Vector contains NaN or infinity."""


class DegenerateDirection(CodedOptError, ValueError):
    """Line-search denominator vanished; no step can be chosen."""


class NoGuarantee(CodedOptError, ValueError):
    """Convergence envelope undefined because kappa * gamma >= 1."""


class RankDeficientSubset(CodedOptError, ValueError):
    """Subset Gram matrix is singular."""


class NotPositiveDefinite(CodedOptError, ValueError):
    """Matrix expected to be positive definite."""


# --- straggler models ---

class BadK(CodedOptError, ValueError):
    """Quorum size k outside 1..m."""


class DelayModelError(CodedOptError, ValueError):
    """Unparseable delay-model specification string."""


# --- wire protocol / cluster ---

class BadMagic(CodedOptError, ValueError):
    """Frame does not start with the protocol magic bytes."""


class Truncated(CodedOptError, ValueError):
    """Frame or stream ended before a complete message."""


class Oversize(CodedOptError, ValueError):
    """Declared payload length exceeds the 1 GiB limit."""


class ProtocolOrderViolation(CodedOptError, RuntimeError):
    """Message arrived before the worker was initialized."""


class QuorumTimeout(CodedOptError, RuntimeError):
    """Fewer than k replies arrived within the round timeout."""


class ConnectionLost(CodedOptError, RuntimeError):
    """A worker connection dropped mid-round."""


# --- configuration ---

class ConfigError(CodedOptError, ValueError):
    """Invalid experiment configuration file."""
