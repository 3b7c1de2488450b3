"""Exception hierarchy shared by all modules."""


class PhsError(Exception):
    """Base class for errors raised by phstruct."""


class DimensionError(PhsError, ValueError):
    """Matrix or block sizes are inconsistent."""


class ConditionViolation(PhsError, ValueError):
    """A defining condition of a structure or system does not hold.

    Attributes
    ----------
    condition : str
        Short machine-readable name of the failed condition.
    residual : float or None
        Size of the violation (norm, rank defect, or negative eigenvalue).
    witness : ndarray or None
        A vector certifying the violation, when one exists.
    """

    def __init__(self, condition, message, residual=None, witness=None):
        super().__init__(message)
        self.condition = condition
        self.residual = residual
        self.witness = witness


class NotMaximalMonotone(ConditionViolation):
    pass


class PreconditionFailed(ConditionViolation):
    pass


class SingularStepPencil(PhsError):
    pass


class SingularResolvent(PhsError):
    pass


class InfeasibleConstraints(PhsError):
    pass


class InconsistentInput(PhsError):
    pass
