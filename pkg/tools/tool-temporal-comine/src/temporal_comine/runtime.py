"""Parallel execution of co-mining.

Root candidates (the first motif edge) are cut into contiguous WorkItems.
With balance=none every worker owns one item; with balance=dynamic idle
workers pull items from a shared pool; balance=context_split additionally
lets busy workers hand unexplored sibling nodes to idle workers and, at
epoch boundaries, split their suspended searches into independent contexts.
"""

from __future__ import annotations

import contextvars
import logging
import threading
import time
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

from .config import RuntimeConfig
from .context import worker_context
from .graph import TemporalGraph
from .mgtree import MGTree, construct_mg_tree
from .miner import MatchResult, MatchSink
from .motif import Balance, Mode, Motif
from .plan import PlanExecutor, SearchContext, TraversalPlan, specialize_plan

logger = logging.getLogger(__name__)

SinkFactory = Callable[[int], MatchSink]


@dataclass(frozen=True)
class WorkItem:
    """Contiguous window [lo, hi) of root-candidate edge ids."""

    lo: int
    hi: int

    def __len__(self) -> int:
        return max(0, self.hi - self.lo)


def partition(num_edges: int, parts: int) -> list[WorkItem]:
    """Cut [0, num_edges) into at most ``parts`` non-empty contiguous items."""
    if num_edges <= 0:
        return []
    parts = max(1, min(parts, num_edges))
    bounds = [num_edges * i // parts for i in range(parts + 1)]
    return [WorkItem(lo, hi) for lo, hi in zip(bounds, bounds[1:])]


@dataclass
class WorkerStats:
    """Counters of one worker; private to it until the final reduction."""

    worker: int
    visits: int = 0
    expansions: int = 0
    matches: int = 0
    contexts: int = 0
    busy_ms: float = 0.0
    handoffs: int = 0
    epochs: int = 0
    rebalances: int = 0
    splits: int = 0

    def to_dict(self) -> dict[str, object]:
        return {
            "worker": self.worker,
            "visits": self.visits,
            "expansions": self.expansions,
            "matches": self.matches,
            "contexts": self.contexts,
            "busy_ms": round(self.busy_ms, 3),
            "handoffs": self.handoffs,
            "epochs": self.epochs,
            "rebalances": self.rebalances,
            "splits": self.splits,
        }


@dataclass
class RunStats:
    """Statistics of a parallel run.

    ``sigma`` is the match density (matches per graph edge); ``imbalance``
    is the max/mean ratio of worker busy time.
    """

    balance: Balance
    num_edges: int
    workers: list[WorkerStats] = field(default_factory=list)
    wall_ms: float = 0.0
    work_items: int = 0

    @property
    def visits(self) -> int:
        return sum(w.visits for w in self.workers)

    @property
    def expansions(self) -> int:
        return sum(w.expansions for w in self.workers)

    @property
    def matches(self) -> int:
        return sum(w.matches for w in self.workers)

    @property
    def handoffs(self) -> int:
        return sum(w.handoffs for w in self.workers)

    @property
    def epochs(self) -> int:
        return sum(w.epochs for w in self.workers)

    @property
    def rebalances(self) -> int:
        return sum(w.rebalances for w in self.workers)

    @property
    def splits(self) -> int:
        return sum(w.splits for w in self.workers)

    @property
    def sigma(self) -> float:
        return self.matches / self.num_edges if self.num_edges else 0.0

    @staticmethod
    def _ratio(values: list[float]) -> float:
        if not values:
            return 1.0
        mean = sum(values) / len(values)
        return max(values) / mean if mean > 0 else 1.0

    @property
    def imbalance(self) -> float:
        return self._ratio([w.busy_ms for w in self.workers])

    @property
    def visit_imbalance(self) -> float:
        return self._ratio([float(w.visits) for w in self.workers])

    def absorb(self, other: RunStats) -> RunStats:
        """Add the counters of a run executed after this one, worker by worker."""
        for i, theirs in enumerate(other.workers):
            if i == len(self.workers):
                self.workers.append(replace(theirs))
                continue
            mine = self.workers[i]
            for f in fields(WorkerStats):
                if f.name != "worker":
                    setattr(mine, f.name, getattr(mine, f.name) + getattr(theirs, f.name))
        self.wall_ms += other.wall_ms
        self.work_items += other.work_items
        return self

    def to_dict(self) -> dict[str, object]:
        return {
            "balance": self.balance.value,
            "workers": len(self.workers),
            "wall_ms": round(self.wall_ms, 3),
            "work_items": self.work_items,
            "visits": self.visits,
            "expansions": self.expansions,
            "matches": self.matches,
            "sigma": self.sigma,
            "imbalance": self.imbalance,
            "visit_imbalance": self.visit_imbalance,
            "epochs": self.epochs,
            "rebalances": self.rebalances,
            "splits": self.splits,
            "handoffs": self.handoffs,
            "per_worker": [w.to_dict() for w in self.workers],
        }


class ContextPool:
    """Shared queue of search contexts with idle-worker accounting.

    ``get`` blocks while the queue is empty and some worker is still busy;
    once every worker is waiting on an empty queue no new work can appear
    and all of them are released with None.
    """

    def __init__(self, workers: int) -> None:
        self._cond = threading.Condition()
        self._queue: deque[SearchContext] = deque()
        self._workers = workers
        self._idle = 0
        self._closed = False
        self.submitted = 0
        self.taken = 0

    def put(self, ctx: SearchContext) -> None:
        self.put_many([ctx])

    def put_many(self, contexts: Iterable[SearchContext]) -> None:
        with self._cond:
            for ctx in contexts:
                self._queue.append(ctx)
                self.submitted += 1
            self._cond.notify_all()

    def get(self) -> SearchContext | None:
        with self._cond:
            self._idle += 1
            while not self._queue:
                if self._closed:
                    return None
                if self._idle == self._workers:
                    self._closed = True
                    self._cond.notify_all()
                    return None
                self._cond.wait()
            self._idle -= 1
            self.taken += 1
            return self._queue.popleft()

    def abort(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    @property
    def idle_workers(self) -> int:
        with self._cond:
            return self._idle

    @property
    def drained(self) -> bool:
        with self._cond:
            return not self._queue and self.submitted == self.taken


def split_context(ctx: SearchContext, executor: PlanExecutor, ways: int = 2) -> list[SearchContext]:
    """Decompose a suspended context into independent contexts.

    At every depth the remaining candidates are cut into at most ``ways``
    contiguous ranges, each paired with the path above it; every pending
    sibling node gets a fresh context from the same path. The path edges are
    carried as skip markers only, so replaying all returned contexts covers
    exactly what ``ctx`` would still have explored.
    """
    ways = max(1, ways)
    pieces: list[SearchContext] = []
    for depth, level in enumerate(ctx.levels):
        n = level.remaining
        if n:
            size = -(-n // min(ways, n))
            for lo in range(level.lo, level.hi, size):
                pieces.append(executor.branch(ctx, depth, level.node, lo, min(lo + size, level.hi)))
        for sibling in level.pending:
            pieces.append(executor.branch(ctx, depth, sibling))
    logger.debug("Split context at depth %d into %d contexts", ctx.depth, len(pieces))
    return pieces


def sibling_handoff(ctx: SearchContext, executor: PlanExecutor) -> tuple[SearchContext, SearchContext] | None:
    """Give away one unexplored sibling of the deepest level that has one.

    The sibling is removed from ``ctx`` so it is explored by the new context only.
    """
    for depth in range(len(ctx.levels) - 1, -1, -1):
        level = ctx.levels[depth]
        if level.pending:
            sibling = level.pending.pop(0)
            handed = executor.branch(ctx, depth, sibling)
            logger.debug("Handed off sibling node %d at depth %d", sibling, depth)
            return ctx, handed
    return None


def rebalance_epoch(
    contexts: list[SearchContext],
    executor: PlanExecutor,
    workers: int,
    idle: int,
    idle_fraction: float,
) -> list[list[SearchContext]] | None:
    """Split all ``contexts`` and deal the pieces round-robin over ``workers`` bins.

    No-op (None) unless the idle share of workers reaches ``idle_fraction``.
    """
    if workers <= 0 or idle <= 0 or idle / workers < idle_fraction:
        return None
    pieces: list[SearchContext] = []
    for ctx in contexts:
        pieces.extend(split_context(ctx, executor, ways=idle + 1))
    bins: list[list[SearchContext]] = [[] for _ in range(workers)]
    for i, piece in enumerate(pieces):
        bins[i % workers].append(piece)
    logger.debug("Rebalanced %d contexts into %d pieces (%d idle of %d)", len(contexts), len(pieces), idle, workers)
    return bins


class _Worker:
    """Mining loop of one worker thread."""

    def __init__(
        self,
        index: int,
        executor: PlanExecutor,
        pool: ContextPool,
        workers: int,
        balance: Balance,
        config: RuntimeConfig,
    ) -> None:
        self.index = index
        self.executor = executor
        self.pool = pool
        self.workers = workers
        self.balance = balance
        self.config = config
        self.stats = WorkerStats(worker=index)
        self._since_epoch = 0

    def __call__(self) -> WorkerStats:
        with worker_context(self.index):
            try:
                while (ctx := self.pool.get()) is not None:
                    started = time.perf_counter()
                    self.stats.contexts += 1
                    if self.balance is Balance.CONTEXT_SPLIT:
                        self._process_splittable(ctx)
                    else:
                        self.executor.run(ctx)
                    self.stats.busy_ms += (time.perf_counter() - started) * 1000
            except BaseException:
                self.pool.abort()
                raise
        search = self.executor.stats
        self.stats.visits = search.visits
        self.stats.expansions = search.expansions
        self.stats.matches = search.matches
        return self.stats

    def _process_splittable(self, ctx: SearchContext) -> None:
        executor = self.executor
        config = self.config
        local: deque[SearchContext] = deque([ctx])
        while local:
            current = local.popleft()
            while True:
                before = executor.stats.visits
                if executor.run(current, budget=config.intra_interval):
                    break
                self._since_epoch += executor.stats.visits - before
                if self.pool.idle_workers:
                    handed = sibling_handoff(current, executor)
                    if handed is not None:
                        self.pool.put(handed[1])
                        self.stats.handoffs += 1
                if self._since_epoch < config.inter_interval:
                    continue
                self._since_epoch = 0
                self.stats.epochs += 1
                bins = rebalance_epoch(
                    [current, *local], executor, self.workers, self.pool.idle_workers, config.idle_fraction
                )
                if bins is None:
                    continue
                self.stats.rebalances += 1
                self.stats.splits += sum(len(b) for b in bins)
                local = deque(bins[0])
                self.pool.put_many(ctx for b in bins[1:] for ctx in b)
                break


def run_parallel(
    g: TemporalGraph,
    tree: MGTree,
    delta: int,
    mode: Mode = Mode.COUNT,
    workers: int = 1,
    balance: Balance = Balance.DYNAMIC,
    config: RuntimeConfig | None = None,
    sink_factory: SinkFactory | None = None,
    plan: TraversalPlan | None = None,
) -> tuple[MatchResult, RunStats]:
    """Co-mine ``tree`` on ``g`` with ``workers`` threads.

    Results do not depend on ``workers`` or ``balance``: counts are summed
    and enumerated matches are sorted per motif, which is the order a
    single-threaded search emits them in.

    Args:
        g: Indexed temporal graph (shared read-only)
        tree: Validated MG-Tree
        delta: Window length in graph time units
        mode: count or enumerate
        workers: Number of worker threads (>= 1)
        balance: none (static chunks), dynamic (shared queue) or context_split
        config: Scheduling thresholds; read from the environment by default
        sink_factory: Builds a per-worker match sink for enumerate mode;
            matches are kept in memory when omitted

    Returns:
        (merged result, run statistics)
    """
    if workers < 1:
        raise ValueError("workers must be at least 1")
    config = config or RuntimeConfig.from_env()
    plan = plan or specialize_plan(tree)
    g.warm()

    per_worker = 1 if balance is Balance.NONE else config.chunks_per_worker
    items = partition(g.num_edges, workers * per_worker)
    executors = [
        PlanExecutor(plan, g, delta, mode, sink_factory(i) if sink_factory is not None else None)
        for i in range(workers)
    ]
    roots = [executors[0].root_context((item.lo, item.hi)) for item in items]

    if balance is Balance.NONE:
        pools = [ContextPool(1) for _ in range(workers)]
        for i, ctx in enumerate(roots):
            pools[i].put(ctx)
    else:
        shared = ContextPool(workers)
        shared.put_many(roots)
        pools = [shared] * workers

    run_workers = [_Worker(i, executors[i], pools[i], workers, balance, config) for i in range(workers)]
    started = time.perf_counter()
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="comine") as pool_executor:
        futures = [pool_executor.submit(contextvars.copy_context().run, worker) for worker in run_workers]
        worker_stats = [future.result() for future in futures]
    wall_ms = (time.perf_counter() - started) * 1000

    for pool in {id(p): p for p in pools}.values():
        if not pool.drained:
            raise AssertionError(f"context pool not drained: {pool.submitted} submitted, {pool.taken} taken")

    result = MatchResult.empty(plan.motif_names, mode, collect=sink_factory is None)
    for executor in executors:
        result.merge(executor.result)
    if result.matches is not None:
        for found in result.matches.values():
            found.sort()

    stats = RunStats(balance=balance, num_edges=g.num_edges, workers=worker_stats, wall_ms=wall_ms, work_items=len(items))
    logger.info(
        "Run finished: %d matches, %d visits, %d workers (%s), %.1f ms",
        stats.matches,
        stats.visits,
        workers,
        balance.value,
        wall_ms,
    )
    return result, stats


def run_individually(
    g: TemporalGraph,
    motifs: Sequence[Motif],
    delta: int,
    mode: Mode = Mode.COUNT,
    workers: int = 1,
    balance: Balance = Balance.DYNAMIC,
    config: RuntimeConfig | None = None,
    sink_factory: SinkFactory | None = None,
) -> tuple[MatchResult, RunStats]:
    """Baseline: one parallel run per motif, results and statistics summed."""
    result = MatchResult.empty([m.name for m in motifs], mode, collect=sink_factory is None)
    stats = RunStats(balance=balance, num_edges=g.num_edges)
    for m in motifs:
        single, single_stats = run_parallel(g, construct_mg_tree([m]), delta, mode, workers, balance, config, sink_factory)
        result.merge(single)
        stats.absorb(single_stats)
    return result, stats
