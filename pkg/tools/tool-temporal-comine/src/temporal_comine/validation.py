"""Input validation shared by the query parser and the CLI.

Validators return the normalized value or raise QueryError.
"""

from __future__ import annotations

import os
import re
from decimal import Decimal, InvalidOperation

from .errors import QueryError


class QueryValidator:
    """Validates query parameters before they reach the engine."""

    # Size limits (keep accidental exponential searches out)
    MAX_MOTIFS = 64
    MAX_MOTIF_EDGES = 12
    MAX_NAME_LENGTH = 64
    MAX_THREADS = 1024

    NAME_PATTERN = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
    # Labels of grouping nodes in the MG-Tree
    RESERVED_NAME_PATTERN = re.compile(r"^I\d+$")

    MODES = ("count", "enumerate")
    BALANCES = ("none", "dynamic", "context_split")

    def validate_motif_name(self, name: str, line: int | None = None) -> str:
        """Validate a motif name.

        Args:
            name: Motif name as written in the query
            line: Source line for error messages

        Returns:
            The stripped name

        Raises:
            QueryError: If the name is empty, too long, has invalid characters
                or collides with a grouping-node label (I1, I2, ...)
        """
        name = (name or "").strip()
        if not name:
            raise QueryError("motif name cannot be empty", line)
        if len(name) > self.MAX_NAME_LENGTH:
            raise QueryError(f"motif name too long (max {self.MAX_NAME_LENGTH} chars)", line)
        if not self.NAME_PATTERN.match(name):
            raise QueryError(f"invalid motif name {name!r}", line)
        if self.RESERVED_NAME_PATTERN.match(name):
            raise QueryError(f"motif name {name!r} is reserved for MG-Tree grouping nodes", line)
        return name

    def validate_delta(self, raw: str, line: int | None = None) -> Decimal:
        """Parse and validate the time window.

        Raises:
            QueryError: If delta is not a positive number
        """
        try:
            delta = Decimal(raw.strip())
        except (InvalidOperation, AttributeError):
            raise QueryError(f"delta must be a number, got {raw!r}", line) from None
        if not delta.is_finite() or delta <= 0:
            raise QueryError(f"delta must be positive, got {raw!r}", line)
        return delta

    def validate_mode(self, raw: str, line: int | None = None) -> str:
        mode = raw.strip().lower()
        if mode not in self.MODES:
            raise QueryError(f"mode must be one of {', '.join(self.MODES)}", line)
        return mode

    def validate_balance(self, raw: str, line: int | None = None) -> str:
        balance = raw.strip().lower().replace("-", "_")
        if balance not in self.BALANCES:
            raise QueryError(f"balance must be one of {', '.join(self.BALANCES)}", line)
        return balance

    def validate_threads(self, raw: str | int, line: int | None = None) -> int:
        """Validate a worker count.

        Raises:
            QueryError: If the count is not an integer in [1, MAX_THREADS]
        """
        try:
            threads = int(raw)
        except (TypeError, ValueError):
            raise QueryError(f"threads must be an integer, got {raw!r}", line) from None
        if threads < 1:
            raise QueryError("threads must be positive", line)
        if threads > self.MAX_THREADS:
            raise QueryError(f"too many threads (max {self.MAX_THREADS})", line)
        return threads

    def validate_motif_edges(self, name: str, edges: list[tuple[str, str]], line: int | None = None) -> None:
        """Check edge count and reject self-loops.

        Raises:
            QueryError: If the motif is empty, too large or has a self-loop edge
        """
        if not edges:
            raise QueryError(f"motif {name!r} has no edges", line)
        if len(edges) > self.MAX_MOTIF_EDGES:
            raise QueryError(f"motif {name!r} too large (max {self.MAX_MOTIF_EDGES} edges)", line)
        for rank, (u, v) in enumerate(edges, start=1):
            if u == v:
                raise QueryError(f"motif {name!r} edge {rank} is a self-loop ({u} -> {v})", line)

    def validate_motif_count(self, count: int) -> int:
        if count < 1:
            raise QueryError("query must declare at least one motif")
        if count > self.MAX_MOTIFS:
            raise QueryError(f"too many motifs (max {self.MAX_MOTIFS})")
        return count

    def validate_path(self, raw: str, line: int | None = None) -> str:
        path = raw.strip()
        if not path:
            raise QueryError("graph path cannot be empty", line)
        if "\x00" in path:
            raise QueryError("graph path contains a NUL byte", line)
        return path


def default_threads() -> int:
    """Hardware thread count, at least 1."""
    return os.cpu_count() or 1
