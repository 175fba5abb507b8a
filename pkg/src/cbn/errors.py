"""Exception hierarchy.

Every exception carries the process exit code the CLI uses for it:
2 for parse/data problems, 3 for model problems, 4 when a size cap is hit.
"""


class CbnError(Exception):
    exit_code = 1


class DataError(CbnError):
    exit_code = 2


class ModelError(CbnError):
    exit_code = 3


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InconsistentWidth(DataError):
    pass


class EmptyData(DataError):
    pass


class IncompatibleData(DataError):
    def __init__(self, message, genotypes=()):
        super().__init__(message)
        self.genotypes = tuple(genotypes)


class CallerMustMerge(DataError):
    pass


class CycleError(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class NotIdealError(ModelError):
    pass


class DegenerateMixture(ModelError):
    pass


class NotNested(ModelError):
    pass


class DomainError(ModelError, ValueError):
    pass


class ZeroPolynomial(ModelError, ValueError):
    pass


class CapExceeded(CbnError):
    exit_code = 4
