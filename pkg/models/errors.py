from __future__ import annotations

from typing import Sequence


class BfpmError(Exception):
    """Base class for every failure the toolkit reports to its callers."""

    exit_code = 1


class ConfigError(BfpmError):
    """Invalid parameters or inconsistent run configuration."""

    exit_code = 2


class DatasetError(BfpmError, ValueError):
    """Malformed or unusable input data."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column '{column}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


class DimensionMismatchError(BfpmError, ValueError):
    pass


class DegenerateClusterError(BfpmError):
    """One or more clusters lost every membership; drivers reseed them."""

    def __init__(self, clusters: Sequence[int]):
        self.clusters = tuple(int(i) for i in clusters)
        super().__init__(f"clusters with all-zero memberships: {list(self.clusters)}")


class DegenerateDistanceError(BfpmError):
    pass


class UndefinedMeasureError(BfpmError):
    """A measure whose denominator vanished on the given input."""


class InvalidPartitionError(BfpmError, ValueError):
    """A membership matrix that breaks an operation's precondition."""
