"""Command-line front end: ``comine mine|plan|verify|bench``."""

from __future__ import annotations

import argparse
import contextlib
import csv
import heapq
import itertools
import json
import logging
import random
import shutil
import statistics
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from dotenv import load_dotenv

from . import __version__
from .config import RuntimeConfig
from .context import RunContextFilter, run_context
from .errors import EXIT_MISMATCH, EXIT_OK, ComineError, GraphReadError, QueryError, TreeError
from .generators import GENERATORS, generate, random_motif
from .graph import TemporalGraph, Triple, build_indexed_graph, graph_summary, load_graph
from .mgtree import Choice, Decision, MGTree, co_mining_heuristic, construct_mg_tree, dump_tree, similarity_metric, validate_tree
from .miner import FileSink, MatchResult
from .motif import Balance, Mode, Motif, Query, delta_units, load_query, motif_catalog
from .oracle import brute_force_count, check_guard
from .plan import specialize_plan
from .runtime import RunStats, run_individually, run_parallel
from .validation import QueryValidator

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s [%(run_id)s %(worker)s] %(name)s: %(message)s"
DEFAULT_DELTA_MULTS = "1/4,1/3,1/2,1,2,3,4"
DEFAULT_BENCH_GROUP = ("4-cycle", "4-cycle-chord")

BENCH_COLUMNS = (
    "delta_mult",
    "delta",
    "workers",
    "mode",
    "wall_ms",
    "wall_ms_min",
    "wall_ms_median",
    "visits",
    "speedup",
    "visit_speedup",
    "counts",
)


# Output records


@dataclass
class MotifOutcome:
    """Count (and match file, in enumerate mode) of one query motif."""

    name: str
    count: int
    matches_path: str | None = None

    def to_dict(self) -> dict[str, object]:
        return {"name": self.name, "count": self.count, "matches_path": self.matches_path}


@dataclass
class OutputRecord:
    """Everything ``mine`` reports; serialized as result.json."""

    run_id: str
    mode: str
    strategy: str
    delta: int
    motifs: list[MotifOutcome]
    decision: dict[str, object]
    run_stats: dict[str, object]
    graph: dict[str, int] = field(default_factory=dict)
    override: str | None = None

    @property
    def counts(self) -> dict[str, int]:
        return {m.name: m.count for m in self.motifs}

    def to_dict(self) -> dict[str, object]:
        return {
            "run_id": self.run_id,
            "mode": self.mode,
            "strategy": self.strategy,
            "override": self.override,
            "delta": self.delta,
            "motifs": [m.to_dict() for m in self.motifs],
            "decision": self.decision,
            "run_stats": self.run_stats,
            "graph": self.graph,
        }

    def counts_tsv(self) -> str:
        return "".join(f"{m.name}\t{m.count}\n" for m in self.motifs)


def parse_counts_tsv(text: str) -> dict[str, int]:
    """Read a counts.tsv back; raises ValueError on a malformed row."""
    counts: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[1].isdigit():
            raise ValueError(f"counts.tsv line {lineno}: expected '<motif>\\t<count>'")
        counts[parts[0]] = int(parts[1])
    return counts


def validate_output_record(data: object) -> list[str]:
    """Schema check of a result.json document. Empty list means valid."""
    if not isinstance(data, dict):
        return ["record is not an object"]
    errors: list[str] = []
    expected = ["run_id", "mode", "strategy", "override", "delta", "motifs", "decision", "run_stats", "graph"]
    if list(data) != expected:
        errors.append(f"keys {list(data)} != {expected}")
    if not isinstance(data.get("run_id"), str):
        errors.append("run_id must be a string")
    if data.get("mode") not in {m.value for m in Mode}:
        errors.append("mode must be count or enumerate")
    if data.get("strategy") not in {c.value for c in Choice}:
        errors.append("strategy must be co_mine or mine_individually")
    if data.get("override") not in (None, "force_comine", "force_individual"):
        errors.append("override must be null, force_comine or force_individual")
    delta = data.get("delta")
    if not isinstance(delta, int) or isinstance(delta, bool) or delta <= 0:
        errors.append("delta must be a positive integer")
    motifs = data.get("motifs")
    if not isinstance(motifs, list) or not motifs:
        errors.append("motifs must be a non-empty list")
        motifs = []
    for i, entry in enumerate(motifs):
        if not isinstance(entry, dict) or list(entry) != ["name", "count", "matches_path"]:
            errors.append(f"motifs[{i}] must have name, count, matches_path")
            continue
        if not isinstance(entry["name"], str):
            errors.append(f"motifs[{i}].name must be a string")
        if not isinstance(entry["count"], int) or entry["count"] < 0:
            errors.append(f"motifs[{i}].count must be a nonnegative integer")
        if entry["matches_path"] is not None and not isinstance(entry["matches_path"], str):
            errors.append(f"motifs[{i}].matches_path must be a string or null")
        if data.get("mode") == Mode.ENUMERATE.value and entry["matches_path"] is None:
            errors.append(f"motifs[{i}] has no matches file in enumerate mode")
    decision = data.get("decision")
    if not isinstance(decision, dict) or decision.get("decision") not in {c.value for c in Choice}:
        errors.append("decision must be a decision record")
    run_stats = data.get("run_stats")
    if not isinstance(run_stats, dict) or not isinstance(run_stats.get("visits"), int):
        errors.append("run_stats must carry integer visits")
    if not isinstance(data.get("graph"), dict):
        errors.append("graph must be an object")
    return errors


# Loading


def _load_query(path: str) -> Query:
    try:
        return load_query(path)
    except OSError as e:
        raise QueryError(f"cannot read query {path}: {e.strerror or e}") from e


def _load_graph(path: str | Path) -> TemporalGraph:
    try:
        return load_graph(path)
    except OSError as e:
        raise GraphReadError(f"cannot read graph {path}: {e.strerror or e}") from e


def _graph_path(args: argparse.Namespace, query: Query | None) -> Path | None:
    if getattr(args, "graph", None):
        return Path(args.graph)
    if query is None or query.graph_path is None:
        return None
    path = Path(query.graph_path)
    if not path.is_absolute() and args.query:
        beside = Path(args.query).parent / path
        if beside.exists():
            return beside
    return path


def _build_tree(motifs: Sequence[Motif]) -> MGTree:
    tree = construct_mg_tree(motifs)
    violations = validate_tree(tree, motifs)
    if violations:
        raise TreeError("invalid MG-Tree: " + "; ".join(violations))
    return tree


def _settings(args: argparse.Namespace, query: Query) -> tuple[Mode, int, Balance]:
    validator = QueryValidator()
    mode = Mode(validator.validate_mode(args.mode)) if args.mode else query.mode
    threads = validator.validate_threads(args.threads) if args.threads else query.threads
    balance = Balance(validator.validate_balance(args.balance)) if args.balance else query.balance
    return mode, threads, balance


def _choose(args: argparse.Namespace, decision: Decision) -> tuple[bool, str | None]:
    if args.force_comine:
        return True, "force_comine"
    if args.force_individual:
        return False, "force_individual"
    return decision.co_mine, None


# Enumeration output


def _row_key(line: str) -> tuple[int, ...]:
    _, ids = line.split(": ", 1)
    return tuple(int(x) for x in ids.split(","))


class _WorkerSinks:
    """Per-worker FileSinks under ``parts``; merged into one file per motif afterwards.

    The merge is an external sort: each part file is cut into sorted runs of
    at most ``run_size`` rows, then the runs are streamed through
    ``heapq.merge`` into the target.
    """

    def __init__(self, parts: Path, run_size: int = 100_000) -> None:
        self.parts = parts
        self.run_size = run_size
        self.sinks: list[FileSink] = []

    def __call__(self, worker: int) -> FileSink:
        sink = FileSink(self.parts / f"w{worker}-{len(self.sinks)}")
        self.sinks.append(sink)
        return sink

    def close(self) -> None:
        for sink in self.sinks:
            sink.close()

    def _sorted_runs(self, name: str) -> list[Path]:
        runs: list[Path] = []
        run_dir = self.parts / "runs"
        run_dir.mkdir(parents=True, exist_ok=True)
        for sink in self.sinks:
            path = sink.path_for(name)
            if not path.exists():
                continue
            with open(path, encoding="utf-8") as f:
                while chunk := list(itertools.islice(f, self.run_size)):
                    chunk.sort(key=_row_key)
                    run = run_dir / f"{name}.{len(runs)}"
                    run.write_text("".join(chunk), encoding="utf-8")
                    runs.append(run)
        return runs

    def merge(self, names: Sequence[str], out: Path) -> dict[str, Path]:
        self.close()
        merged: dict[str, Path] = {}
        for name in names:
            runs = self._sorted_runs(name)
            target = out / f"matches_{name}.txt"
            with contextlib.ExitStack() as stack, open(target, "w", encoding="utf-8") as f:
                streams = [stack.enter_context(open(run, encoding="utf-8")) for run in runs]
                f.writelines(heapq.merge(*streams, key=_row_key))
            logger.debug("Merged %d sorted runs into %s", len(runs), target)
            merged[name] = target
        shutil.rmtree(self.parts, ignore_errors=True)
        return merged


def run_strategy(
    g: TemporalGraph,
    motifs: Sequence[Motif],
    tree: MGTree,
    delta: int,
    co_mine: bool,
    mode: Mode,
    workers: int,
    balance: Balance,
    config: RuntimeConfig,
    sink_factory: Callable[[int], FileSink] | None = None,
) -> tuple[MatchResult, RunStats]:
    if co_mine:
        return run_parallel(g, tree, delta, mode, workers, balance, config, sink_factory)
    return run_individually(g, motifs, delta, mode, workers, balance, config, sink_factory)


# Commands


def cmd_mine(args: argparse.Namespace, config: RuntimeConfig, run_id: str) -> int:
    query = _load_query(args.query)
    mode, threads, balance = _settings(args, query)
    path = _graph_path(args, query)
    if path is None:
        raise QueryError("no graph given: set 'graph' in the query or pass --graph")
    g = _load_graph(path)
    delta = query.delta_units(g.scale)
    motifs = list(query.motifs)
    tree = _build_tree(motifs)
    decision = co_mining_heuristic(g, motifs, tree, delta, config.sm_threshold)
    co_mine, override = _choose(args, decision)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sinks = _WorkerSinks(out / ".parts", config.merge_run_size) if mode is Mode.ENUMERATE else None
    try:
        result, stats = run_strategy(g, motifs, tree, delta, co_mine, mode, threads, balance, config, sinks)
    finally:
        if sinks is not None:
            sinks.close()
    files = sinks.merge([m.name for m in motifs], out) if sinks is not None else {}

    record = OutputRecord(
        run_id=run_id,
        mode=mode.value,
        strategy=(Choice.CO_MINE if co_mine else Choice.MINE_INDIVIDUALLY).value,
        override=override,
        delta=delta,
        motifs=[
            MotifOutcome(m.name, result.counts[m.name], str(files[m.name]) if m.name in files else None) for m in motifs
        ],
        decision=decision.to_dict(),
        run_stats=stats.to_dict(),
        graph=graph_summary(g).to_dict(),
    )
    (out / "counts.tsv").write_text(record.counts_tsv(), encoding="utf-8")
    with open(out / "result.json", "w", encoding="utf-8") as f:
        json.dump(record.to_dict(), f, indent=2)
        f.write("\n")
    sys.stdout.write(record.counts_tsv())
    return EXIT_OK


def cmd_plan(args: argparse.Namespace, config: RuntimeConfig, run_id: str) -> int:
    query = _load_query(args.query)
    motifs = list(query.motifs)
    tree = _build_tree(motifs)
    dump = dump_tree(tree)
    sm = similarity_metric(motifs, tree)
    plan = specialize_plan(tree)

    decision: Decision | None = None
    path = _graph_path(args, query)
    if path is not None:
        g = _load_graph(path)
        decision = co_mining_heuristic(g, motifs, tree, query.delta_units(g.scale), config.sm_threshold)

    if args.dot:
        Path(args.dot).write_text(dump.dot, encoding="utf-8")

    if args.json:
        payload = {
            "tree": dump.outline.splitlines(),
            "sm": sm,
            "branch_points": {str(k): v for k, v in plan.branch_points().items()},
            "decision": decision.to_dict() if decision else None,
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK

    print(dump.outline)
    print(f"\nSM: {sm:.4f}")
    if decision is None:
        print("decision: no graph given")
    else:
        print(f"decision: {decision.choice.value}")
        for reason in decision.reasons:
            print(f"  - {reason}")
    print("\nplan:")
    print(plan.describe())
    return EXIT_OK


@dataclass
class Mismatch:
    """First motif whose mined count differs from the oracle."""

    motif: Motif
    expected: int
    actual: int
    delta: int
    seed: int | None = None
    witness: list[Triple] | None = None

    def report(self) -> str:
        lines = [
            f"mismatch on motif {self.motif.name!r} ({self.motif.describe()}), delta {self.delta}"
            + (f", seed {self.seed}" if self.seed is not None else "")
            + f": oracle {self.expected}, miner {self.actual}"
        ]
        if self.witness is not None:
            lines.append(f"witness graph ({len(self.witness)} edges):")
            lines.extend(f"  {s} {d} {t}" for s, d, t in self.witness)
        return "\n".join(lines)


def miner_counts(
    g: TemporalGraph,
    motifs: Sequence[Motif],
    delta: int,
    workers: int = 1,
    balance: Balance = Balance.DYNAMIC,
    config: RuntimeConfig | None = None,
) -> dict[str, int]:
    """Counts through the production path (co-mined plan on the parallel runtime)."""
    result, _ = run_parallel(g, construct_mg_tree(motifs), delta, Mode.COUNT, workers, balance, config)
    return result.counts


def check_instance(
    g: TemporalGraph,
    motifs: Sequence[Motif],
    delta: int,
    workers: int = 1,
    balance: Balance = Balance.DYNAMIC,
    config: RuntimeConfig | None = None,
    allow_large: bool = False,
) -> Mismatch | None:
    config = config or RuntimeConfig.from_env()
    for m in motifs:
        check_guard(g, m, config.oracle_max_edges, allow_large)
    mined = miner_counts(g, motifs, delta, workers, balance, config)
    for m in motifs:
        expected = brute_force_count(g, m, delta, config.oracle_max_edges, allow_large)
        if mined[m.name] != expected:
            return Mismatch(m, expected, mined[m.name], delta)
    return None


def shrink_witness(
    triples: Sequence[Triple],
    motif: Motif,
    delta: int,
    config: RuntimeConfig | None = None,
) -> list[Triple]:
    """Drop edges one at a time while the miner still disagrees with the oracle."""
    current = list(triples)
    i = 0
    while i < len(current):
        trial = current[:i] + current[i + 1 :]
        if check_instance(build_indexed_graph(trial), [motif], delta, config=config, allow_large=True) is not None:
            current = trial
        else:
            i += 1
    return current


def fuzz_instance(seed: int, ties: bool = False) -> tuple[list[Triple], list[Motif], int]:
    """Random small instance: <= 30 vertices, <= 200 edges, 1-3 motifs of <= 4 edges.

    With ``ties`` the time span shrinks to about a sixteenth, so most
    timestamps are shared by several edges and equal-time ordering is exercised.
    """
    rng = random.Random(seed)
    num_vertices = rng.randint(2, 30)
    num_edges = rng.randint(0, 200)
    span = rng.randint(max(num_edges, 1), 4 * max(num_edges, 1) + 10)
    if ties:
        span = max(1, span // 16)
    triples = generate("uniform", num_vertices, num_edges, span, seed=seed)
    delta = rng.randint(1, max(1, 20 * span // max(num_edges, 1)))
    motifs: dict[tuple, Motif] = {}
    wanted = rng.randint(1, 3)
    while len(motifs) < wanted:
        m = random_motif(rng, max_edges=4, max_vertices=4)
        motifs.setdefault(m.edges, m.renamed(f"m{len(motifs) + 1}"))
    return triples, list(motifs.values()), delta


def cmd_verify(args: argparse.Namespace, config: RuntimeConfig, run_id: str) -> int:
    threads = QueryValidator().validate_threads(args.threads) if args.threads else 1
    balance = Balance(QueryValidator().validate_balance(args.balance)) if args.balance else Balance.DYNAMIC

    if args.fuzz:
        for seed in range(args.seed, args.seed + args.fuzz):
            triples, motifs, delta = fuzz_instance(seed, args.ties)
            mismatch = check_instance(build_indexed_graph(triples), motifs, delta, threads, balance, config)
            if mismatch is None:
                continue
            mismatch.seed = seed
            if args.shrink:
                mismatch.witness = shrink_witness(triples, mismatch.motif, delta, config)
            logger.error("Verification failed at seed %d%s", seed, " (tied timestamps)" if args.ties else "")
            print(mismatch.report())
            return EXIT_MISMATCH
        print(f"ok: {args.fuzz} instances agree with the oracle")
        return EXIT_OK

    if not args.query:
        raise QueryError("verify needs --query or --fuzz N")
    query = _load_query(args.query)
    path = _graph_path(args, query)
    if path is None:
        raise QueryError("no graph given: set 'graph' in the query or pass --graph")
    g = _load_graph(path)
    delta = query.delta_units(g.scale)
    mismatch = check_instance(g, query.motifs, delta, threads, balance, config, args.allow_large)
    if mismatch is not None:
        if args.shrink:
            triples = [(e.src, e.dst, e.t) for e in g.edges]
            mismatch.witness = shrink_witness(triples, mismatch.motif, delta, config)
        logger.error("Verification failed for %s", mismatch.motif.name)
        print(mismatch.report())
        return EXIT_MISMATCH
    print(f"ok: {len(query.motifs)} motifs agree with the oracle")
    return EXIT_OK


def parse_delta_mults(raw: str) -> list[Fraction]:
    try:
        mults = [Fraction(part.strip()) for part in raw.split(",") if part.strip()]
    except (ValueError, ZeroDivisionError):
        raise QueryError(f"invalid --delta-mult list {raw!r}") from None
    if not mults or any(m <= 0 for m in mults):
        raise QueryError("--delta-mult values must be positive")
    return mults


def _parse_workers(raw: str) -> list[int]:
    validator = QueryValidator()
    return [validator.validate_threads(part) for part in raw.split(",") if part.strip()]


def _bench_inputs(args: argparse.Namespace) -> tuple[TemporalGraph, list[Motif], int]:
    query: Query | None = None
    if args.query:
        query = _load_query(args.query)
        motifs = list(query.motifs)
    else:
        catalog = motif_catalog()
        motifs = [catalog[name] for name in DEFAULT_BENCH_GROUP]

    path = _graph_path(args, query)
    if path is not None:
        g = _load_graph(path)
    else:
        if args.generator not in GENERATORS:
            raise QueryError(f"unknown generator {args.generator!r}; choose from {', '.join(GENERATORS)}")
        vertices = args.vertices or max(2, args.edges // 100)
        span = args.time_span or max(1, args.edges * 10)
        g = build_indexed_graph(generate(args.generator, vertices, args.edges, span, seed=args.seed))

    if args.delta is not None:
        delta = delta_units(QueryValidator().validate_delta(args.delta), g.scale)
    elif query is not None:
        delta = query.delta_units(g.scale)
    else:
        span = int(g.t[-1] - g.t[0]) if g.num_edges else 0
        delta = max(1, 8 * span // max(g.num_edges, 1))
    return g, motifs, delta


def cmd_bench(args: argparse.Namespace, config: RuntimeConfig, run_id: str) -> int:
    g, motifs, base_delta = _bench_inputs(args)
    mults = parse_delta_mults(args.delta_mult)
    worker_counts = _parse_workers(args.workers)
    balance = Balance(QueryValidator().validate_balance(args.balance)) if args.balance else Balance.DYNAMIC
    tree = _build_tree(motifs)
    names = [m.name for m in motifs]
    logger.info("Benchmark: %d edges, %d motifs, base delta %d", g.num_edges, len(motifs), base_delta)

    rows: list[dict[str, object]] = []
    status = EXIT_OK
    for mult in mults:
        delta = max(1, int(base_delta * mult))
        for workers in worker_counts:
            measured: dict[str, tuple[list[float], int, dict[str, int]]] = {}
            for co_mine in (True, False):
                walls: list[float] = []
                visits = 0
                counts: dict[str, int] = {}
                for _ in range(args.repeat):
                    result, stats = run_strategy(g, motifs, tree, delta, co_mine, Mode.COUNT, workers, balance, config)
                    walls.append(stats.wall_ms)
                    visits = stats.visits
                    counts = result.counts
                measured["co_mine" if co_mine else "individual"] = (walls, visits, counts)

            co_walls, co_visits, co_counts = measured["co_mine"]
            ind_walls, ind_visits, ind_counts = measured["individual"]
            if co_counts != ind_counts:
                logger.error("Co-mined counts %s differ from individual counts %s", co_counts, ind_counts)
                status = EXIT_MISMATCH
            for mode, (walls, visits, counts) in measured.items():
                median = statistics.median(walls)
                is_co = mode == "co_mine"
                rows.append(
                    {
                        "delta_mult": str(mult),
                        "delta": delta,
                        "workers": workers,
                        "mode": mode,
                        "wall_ms": round(median, 3),
                        "wall_ms_min": round(min(walls), 3),
                        "wall_ms_median": round(median, 3),
                        "visits": visits,
                        "speedup": round(statistics.median(ind_walls) / median, 4) if is_co and median > 0 else 1.0,
                        "visit_speedup": round(ind_visits / co_visits, 6) if is_co and co_visits else 1.0,
                        "counts": ";".join(f"{name}={counts[name]}" for name in names),
                    }
                )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "bench.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    print(f"{'delta_mult':<11} {'workers':>7} {'mode':<11} {'wall_ms':>10} {'visits':>12} {'speedup':>8}")
    for row in rows:
        print(
            f"{row['delta_mult']:<11} {row['workers']:>7} {row['mode']:<11} "
            f"{row['wall_ms']:>10} {row['visits']:>12} {row['speedup']:>8}"
        )
    return status


# Entry point


def setup_logging(verbosity: int, default_level: str) -> None:
    if verbosity >= 2:
        level = logging.DEBUG
    elif verbosity == 1:
        level = logging.INFO
    else:
        level = logging.getLevelName(default_level)
        if not isinstance(level, int):
            level = logging.WARNING
    handler = logging.StreamHandler(sys.stderr)
    handler.addFilter(RunContextFilter())
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=[handler], force=True)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="More logging (-vv for debug)")
    common.add_argument("--seed", type=int, default=0, help="Seed for synthetic inputs (default: 0)")

    query_opts = argparse.ArgumentParser(add_help=False)
    query_opts.add_argument("--query", help="Query document")
    query_opts.add_argument("--graph", help="Edge-list or .npz index; overrides the query's graph")

    run_opts = argparse.ArgumentParser(add_help=False)
    run_opts.add_argument("--threads", help="Worker threads (default: from the query)")
    run_opts.add_argument("--balance", help="none | dynamic | context_split")

    parser = argparse.ArgumentParser(prog="comine", description="Exact temporal motif co-mining")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", parents=[common, query_opts, run_opts], help="Count or enumerate motif matches")
    mine.add_argument("--mode", help="count | enumerate (default: from the query)")
    force = mine.add_mutually_exclusive_group()
    force.add_argument("--force-comine", action="store_true", help="Co-mine regardless of the heuristic")
    force.add_argument("--force-individual", action="store_true", help="Mine each motif on its own")
    mine.add_argument("--out", default=".", help="Output directory (default: .)")
    mine.set_defaults(handler=cmd_mine)

    plan = sub.add_parser("plan", parents=[common, query_opts], help="Show the MG-Tree, SM and decision")
    plan.add_argument("--dot", help="Write the tree as DOT to this file")
    plan.add_argument("--json", action="store_true", help="Print a JSON record instead of text")
    plan.set_defaults(handler=cmd_plan)

    verify = sub.add_parser("verify", parents=[common, query_opts, run_opts], help="Check the miner against the oracle")
    verify.add_argument("--fuzz", type=int, default=0, metavar="N", help="Check N random instances instead")
    verify.add_argument("--ties", action="store_true", help="Fuzz with many edges sharing a timestamp")
    verify.add_argument("--shrink", action="store_true", help="Minimize the witness graph of a mismatch")
    verify.add_argument("--allow-large", action="store_true", help="Skip the oracle size guard")
    verify.set_defaults(handler=cmd_verify)

    bench = sub.add_parser("bench", parents=[common, query_opts], help="Co-mining vs. individual mining sweep")
    bench.add_argument("--delta-mult", default=DEFAULT_DELTA_MULTS, help=f"Delta multipliers (default: {DEFAULT_DELTA_MULTS})")
    bench.add_argument("--delta", help="Base delta (default: from the query, else derived from the graph)")
    bench.add_argument("--workers", default="1", help="Comma-separated worker counts (default: 1)")
    bench.add_argument("--balance", help="none | dynamic | context_split")
    bench.add_argument("--repeat", type=int, default=1, help="Runs per configuration (default: 1)")
    bench.add_argument("--generator", default="uniform", help=f"Synthetic graph: {', '.join(GENERATORS)}")
    bench.add_argument("--edges", type=int, default=20000, help="Synthetic graph edges (default: 20000)")
    bench.add_argument("--vertices", type=int, help="Synthetic graph vertices (default: edges / 100)")
    bench.add_argument("--time-span", type=int, help="Synthetic graph time span (default: edges * 10)")
    bench.add_argument("--out", default=".", help="Directory for bench.csv (default: .)")
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    load_dotenv(".env.local")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RuntimeConfig.from_env()
    except ValueError as e:
        parser.error(str(e))
    setup_logging(args.verbose, config.log_level)

    if args.command in ("mine", "plan") and not args.query:
        parser.error(f"{args.command} needs --query")
    if getattr(args, "repeat", 1) < 1:
        parser.error("--repeat must be at least 1")

    with run_context() as run_id:
        try:
            return args.handler(args, config, run_id)
        except ComineError as e:
            logger.error("%s", e)
            print(f"error: {e}", file=sys.stderr)
            return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
