"""Exception hierarchy for the mining engine.

Every error the CLI can surface carries its own exit code so scripts can
tell a bad query apart from a bad graph file.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2


class ComineError(Exception):
    """Base class for all engine errors."""

    exit_code = 1


class QueryError(ComineError, ValueError):
    """Malformed query document or invalid query parameters.

    Example:
        raise QueryError("duplicate motif: 'tri' and 'cycle3' are identical")
    """

    exit_code = 3

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GraphFormatError(ComineError, ValueError):
    """Malformed edge-list line, bad header or unreadable index cache."""

    exit_code = 4

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OracleGuardError(ComineError):
    """Brute-force enumeration refused because the input is too large."""

    exit_code = 5


class TreeError(ComineError):
    """Empty motif group or a tree that fails validation."""

    exit_code = 6


class GraphReadError(ComineError):
    """Graph file missing or unreadable."""

    exit_code = 4
