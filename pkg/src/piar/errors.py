"""Exception hierarchy.

Every error carries a short ``code`` used by the command-line front end
to print a machine-parseable first line.
"""


class PiarError(Exception):
    code = "PiarError"


class InputError(PiarError, ValueError):
    code = "InputError"


class IncompleteYear(InputError):
    code = "IncompleteYear"


class DimensionMismatch(InputError):
    code = "DimensionMismatch"


class PeriodMismatch(InputError):
    code = "PeriodMismatch"


class SeriesTooShort(InputError):
    code = "SeriesTooShort"


class InsufficientData(InputError):
    code = "InsufficientData"


class InsufficientHistory(InputError):
    code = "InsufficientHistory"


class AlignmentError(InputError):
    code = "AlignmentError"


class ZeroEigenvalue(InputError):
    code = "ZeroEigenvalue"


class ZeroSeedEntry(InputError):
    code = "ZeroSeedEntry"


class OrderTooHigh(InputError):
    code = "OrderTooHigh"


class NonStationaryCoefficients(InputError):
    code = "NonStationaryCoefficients"


class NumericalError(PiarError, ArithmeticError):
    code = "NumericalError"


class SingularSimilarity(NumericalError):
    code = "SingularSimilarity"


class SingularSystem(NumericalError):
    """A per-season PI-parameter system is singular or ill-conditioned."""

    code = "SingularSystem"

    def __init__(self, message, season=None):
        super().__init__(message)
        self.season = season


class DegenerateSeeds(SingularSystem):
    code = "DegenerateSeeds"


class CollinearLags(NumericalError):
    code = "CollinearLags"


class DegenerateVariance(NumericalError):
    code = "DegenerateVariance"


class OptimizerFailed(NumericalError):
    code = "OptimizerFailed"


class FitFailed(NumericalError):
    code = "FitFailed"
