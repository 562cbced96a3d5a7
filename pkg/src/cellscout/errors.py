"""Exception hierarchy shared across the package."""


class CellscoutError(Exception):
    """Base class for all package-specific errors."""


class IoError(CellscoutError):
    pass


class RaggedRows(CellscoutError):
    """A CSV record has the wrong field count. ``row`` is the 1-based record
    number in the file (header line included)."""

    def __init__(self, row: int, expected: int, got: int):
        self.row = row
        self.expected = expected
        self.got = got
        super().__init__(f"record {row} has {got} fields, expected {expected}")


class EmptyTable(CellscoutError):
    pass


class ShapeMismatch(CellscoutError):
    def __init__(self, dimension: str, message: str = ""):
        self.dimension = dimension  # "rows" | "cols" | "schema"
        super().__init__(message or f"shape mismatch in {dimension}")


class OutOfBounds(CellscoutError):
    pass


class VersionMismatch(CellscoutError):
    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"snapshot format version {found!r}, expected {expected!r}")


class DecodeError(CellscoutError):
    pass


class SnapshotMismatch(CellscoutError):
    """Snapshot does not belong to the supplied table/config."""


class LengthDrift(CellscoutError):
    """A column's per-row feature vector length changed between rows."""


class BadProbability(CellscoutError):
    pass


class UnknownToken(CellscoutError):
    pass


class FeatureLengthMismatch(CellscoutError):
    pass


class NotTrained(CellscoutError):
    pass


class BudgetExhausted(CellscoutError):
    pass


class NoSelectableColumn(CellscoutError):
    pass


class ColumnExhausted(CellscoutError):
    pass


class LabelMismatch(CellscoutError):
    """Submitted labels do not cover exactly the pending batch."""


class BadPlan(CellscoutError):
    pass


class EmptyLog(CellscoutError):
    pass
