"""Runtime configuration for the mining engine."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}") from None


@dataclass(frozen=True)
class RuntimeConfig:
    """Configuration for scheduling, heuristics and guards.

    Attributes:
        inter_interval: Candidate visits between rebalance epochs (COMINE_INTER_INTRVL)
        intra_interval: Candidate visits between idle-worker polls (COMINE_INTRA_INTRVL)
        idle_fraction: Idle-worker fraction that triggers a rebalance epoch (COMINE_IDLE_FRAC)
        chunks_per_worker: Root-candidate chunks queued per worker in dynamic mode
        sm_threshold: Similarity Metric at or above which co-mining is chosen
        oracle_max_edges: Graph size up to which the oracle enumerates any motif
        merge_run_size: Match rows sorted in memory at a time when merging worker output
        log_level: Logging level name (COMINE_LOG_LEVEL)

    Example:
        config = RuntimeConfig.from_env()
        fast = config.replace(inter_interval=512)
    """

    inter_interval: int = field(default_factory=lambda: _env_int("COMINE_INTER_INTRVL", 4096))

    intra_interval: int = field(default_factory=lambda: _env_int("COMINE_INTRA_INTRVL", 64))

    idle_fraction: float = field(default_factory=lambda: _env_float("COMINE_IDLE_FRAC", 0.25))

    chunks_per_worker: int = field(default_factory=lambda: _env_int("COMINE_CHUNKS_PER_WORKER", 16))

    sm_threshold: float = field(default_factory=lambda: _env_float("COMINE_SM_THRESHOLD", 0.44))

    oracle_max_edges: int = field(default_factory=lambda: _env_int("COMINE_ORACLE_MAX_EDGES", 500))

    merge_run_size: int = field(default_factory=lambda: _env_int("COMINE_MERGE_RUN_SIZE", 100_000))

    log_level: str = field(default_factory=lambda: os.getenv("COMINE_LOG_LEVEL", "WARNING").upper())

    def __post_init__(self) -> None:
        if self.inter_interval < 1:
            raise ValueError("inter_interval must be positive")
        if self.intra_interval < 1:
            raise ValueError("intra_interval must be positive")
        if not 0.0 < self.idle_fraction <= 1.0:
            raise ValueError("idle_fraction must be in (0, 1]")
        if self.chunks_per_worker < 1:
            raise ValueError("chunks_per_worker must be positive")
        if not 0.0 <= self.sm_threshold <= 1.0:
            raise ValueError("sm_threshold must be in [0, 1]")
        if self.merge_run_size < 1:
            raise ValueError("merge_run_size must be positive")

    @classmethod
    def from_env(cls) -> RuntimeConfig:
        """Create configuration from environment variables."""
        return cls()

    def replace(self, **overrides: object) -> RuntimeConfig:
        """Return a copy with the given fields overridden."""
        return dataclasses.replace(self, **overrides)  # type: ignore[arg-type]
