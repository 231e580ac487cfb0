"""Run-scoped context for log correlation.

Several queries may run concurrently inside one host process; each run and
each worker thread tags its log records through these context variables
instead of threading ids through every call.
"""

from __future__ import annotations

import logging
import secrets
from collections.abc import Iterator
from contextlib import contextmanager
from contextvars import ContextVar

# Identifier of the mining run the current code executes for
_current_run_id: ContextVar[str | None] = ContextVar("current_run_id", default=None)

# Index of the worker thread, None on the orchestrating thread
_current_worker: ContextVar[int | None] = ContextVar("current_worker", default=None)


def new_run_id() -> str:
    """Generate a short random run id."""
    return secrets.token_hex(4)


def get_current_run_id() -> str | None:
    """Get the run id of the current context, or None outside a run."""
    return _current_run_id.get()


def get_current_worker() -> int | None:
    """Get the worker index of the current context."""
    return _current_worker.get()


@contextmanager
def run_context(run_id: str | None = None) -> Iterator[str]:
    """Context manager that tags everything inside with a run id.

    Example:
        with run_context() as run_id:
            result, stats = run_parallel(...)
    """
    run_id = run_id or new_run_id()
    token = _current_run_id.set(run_id)
    try:
        yield run_id
    finally:
        _current_run_id.reset(token)


@contextmanager
def worker_context(worker: int) -> Iterator[None]:
    """Context manager for the body of a worker thread."""
    token = _current_worker.set(worker)
    try:
        yield
    finally:
        _current_worker.reset(token)


class RunContextFilter(logging.Filter):
    """Adds ``run_id`` and ``worker`` attributes to every log record."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = get_current_run_id() or "-"
        worker = get_current_worker()
        record.worker = "main" if worker is None else f"w{worker}"
        return True
