"""Exception hierarchy.

Every error carries ``exit_code``: 2 for invalid input or unmet preconditions,
3 for reconstructions that ran but could not produce a trustworthy answer.
The CLI maps these directly to process exit codes.
"""


class MomrecError(Exception):
    exit_code = 3

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    @property
    def name(self) -> str:
        return type(self).__name__


class ValidationError(MomrecError, ValueError):
    exit_code = 2


class ReconstructionError(MomrecError):
    exit_code = 3


# polycore
class ZeroPolynomial(ValidationError):
    pass


# moments
class InsufficientMoments(ValidationError):
    pass


class InvalidMoments(ValidationError):
    pass


class InvalidDomain(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class MissingMoment(ValidationError, KeyError):
    pass


# prony
class RankDeficient(ReconstructionError):
    pass


class NonRealNode(ReconstructionError):
    pass


class AmplitudeNotUnit(ReconstructionError):
    pass


class NodeCollision(ReconstructionError):
    pass


# reconstructions
class BreakpointRecoveryFailed(ReconstructionError):
    pass


class ResidualTooLarge(ReconstructionError):
    pass


class BranchCrossing(ReconstructionError):
    pass


# elliptic
class NotElliptic(ValidationError):
    pass


class SingularSystem(ReconstructionError):
    pass


class QuadratureFailure(ReconstructionError):
    pass


# invisibility
class DecompositionInconclusive(ReconstructionError):
    pass


class UnboundedSublevelSet(ValidationError):
    pass
