"""Exception hierarchy shared by every tracelab module."""


class TracelabError(Exception):
    """Base class for all library errors."""


class EmptyAlgebra(TracelabError):
    pass


class NonpositiveWeight(TracelabError):
    pass


class ZeroDimension(TracelabError):
    pass


class AlgebraMismatch(TracelabError):
    """Two elements do not share the same block structure."""


class InvalidElement(TracelabError):
    """Block shapes disagree with the algebra, or entries are not finite."""


class NotSelfAdjoint(TracelabError):
    pass


class NegativeSpectrum(TracelabError):
    """A Gram matrix produced an eigenvalue too negative to be round-off."""


class DomainOverflow(TracelabError):
    pass


class NonpositiveP(TracelabError):
    pass


class WeightConstraintViolated(TracelabError):
    pass


class WrongConvexityClass(TracelabError):
    pass


class NotPositive(TracelabError):
    pass


class ClassificationMismatch(TracelabError):
    pass


class UnknownClaimId(TracelabError):
    pass


class UnknownFunctionId(TracelabError):
    pass
