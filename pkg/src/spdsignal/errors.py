"""Exception hierarchy.

Two families map onto CLI exit codes: :class:`InputError` (bad or
insufficient data, exit 1) and :class:`NumericalError` (an estimator or
solver cannot produce a value, exit 2).
"""


class SpdSignalError(Exception):
    exit_code = 1


class InputError(SpdSignalError):
    exit_code = 1


class NumericalError(SpdSignalError):
    exit_code = 2


# distributions
class ZeroMass(InputError):
    pass


class EmptyDistribution(InputError):
    pass


class NonContiguousBins(InputError):
    pass


class NegativeProbability(InputError):
    pass


class NoClosedNeighbor(InputError):
    pass


# moment estimators
class IndeterminateMode(NumericalError):
    pass


class MeanNearZero(NumericalError):
    pass


class DegenerateIQR(NumericalError):
    pass


class ZeroStdDev(NumericalError):
    pass


class DegenerateRange(NumericalError):
    pass


class DegenerateOctiles(NumericalError):
    pass


class InsufficientData(InputError):
    pass


# signal / SSI
class EmptyRound(InputError):
    pass


class AllZeroSeries(NumericalError):
    pass


class AlignmentError(InputError):
    pass


# growth-at-risk
class RankDeficient(NumericalError):
    pass


class LayoutMismatch(InputError):
    pass


class NumericalFailure(NumericalError):
    pass


class NonIncreasingQuantiles(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class InsufficientHistory(InputError):
    pass


# ingestion
class SchemaError(InputError):
    def __init__(self, message, lines=()):
        if lines:
            message = f"{message} (line {', '.join(str(n) for n in lines)})"
        super().__init__(message)
        self.lines = tuple(lines)


class ParseError(InputError):
    pass


class DuplicateQuarter(InputError):
    pass


class NoOverlap(InputError):
    pass


class ConfigError(InputError):
    pass
