class SchedError(Exception):
    "Root of every error raised on purpose by samplesched"


class NoDensity(SchedError):
    "Deterministic and finite-discrete laws have no density"


class OrderViolation(SchedError):
    "A pair was passed against priority order"


class DegenerateInstance(SchedError):
    "L == H, so the relative optimality gap is undefined"


class QuadratureFailure(SchedError):
    "Adaptive quadrature could not reach the requested tolerance"


class NonPositivePriority(SchedError, ValueError):
    pass


class TooLarge(SchedError):
    "Exact enumeration would exceed its budget"


class NotDiscrete(SchedError):
    "Exact enumeration needs every job to be Deterministic or FiniteDiscrete"


class ParseError(SchedError, ValueError):
    "Malformed instance file or distribution encoding"
