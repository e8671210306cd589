"""Exception hierarchy.

Every exception carries a ``kind`` used by the command line front end to
produce ``error: <kind>: <detail>`` lines and pick an exit code.
"""


class SyncGeomError(Exception):
    kind = "error"


class ValidationError(SyncGeomError, ValueError):
    kind = "validation"


class NumericalError(SyncGeomError, ArithmeticError):
    kind = "numerical"


class ParseError(ValidationError):
    kind = "parse"

    def __init__(self, message, path=None, line=None, column=None):
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
            if column is not None:
                where += f":{column}"
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line
        self.column = column


class SelfLoop(ValidationError):
    pass


class DuplicateEdge(ValidationError):
    pass


class NonpositiveWeight(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NoSuchEdge(ValidationError, KeyError):
    pass


class ZeroNorm(ValidationError):
    pass


class EmptySubset(ValidationError):
    pass


class BrokenPath(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class NotGraphical(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class ZeroVolumeClass(ValidationError):
    pass


class DegenerateWeights(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NotSynchronizable(NumericalError):
    pass


class RetriesExhausted(NumericalError):
    pass
