"""Exception hierarchy for consensus_kit."""


class ConsensusKitError(Exception):
    """Base class for all library errors."""


class ValidationError(ConsensusKitError, ValueError):
    """Input does not describe a valid row-stochastic matrix."""


class NonSquare(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class RowSumViolation(ValidationError):
    def __init__(self, row, deviation, factor=None):
        self.row = row
        self.deviation = deviation
        self.factor = factor
        where = f"factor {factor}, row {row}" if factor is not None else f"row {row}"
        super().__init__(f"{where} deviates from 1 by {deviation:.3e}")


class ZeroRow(ValidationError):
    pass


class DimensionMismatch(ConsensusKitError, ValueError):
    pass


class SourceExhausted(ConsensusKitError, IndexError):
    pass


class MissingPositiveDiagonal(ConsensusKitError, ValueError):
    pass


class BlockAboveDiagonal(ConsensusKitError, IndexError):
    pass


class EigenSolverFailure(ConsensusKitError, RuntimeError):
    pass


class BlockTooSmall(ConsensusKitError, ValueError):
    pass


class FormMismatch(ConsensusKitError, ValueError):
    pass


class MonotonicityViolation(ConsensusKitError, RuntimeError):
    """A column envelope moved the wrong way during accumulation.

    Carries the window index, column and the offending values so callers
    can report a witness.
    """

    def __init__(self, window, column, kind, before, after):
        self.window = window
        self.column = column
        self.kind = kind
        self.before = before
        self.after = after
        super().__init__(
            f"column {kind} of column {column} moved from {before!r} to "
            f"{after!r} at window {window}"
        )


class ParameterOutOfRange(ConsensusKitError, ValueError):
    pass


class InvalidDelta(ParameterOutOfRange):
    pass


class BudgetExhausted(ConsensusKitError, RuntimeError):
    pass
