"""Tests for plan specialization and the resumable plan interpreter."""

import pytest
from conftest import comining_instance, make_graph

from temporal_comine.generators import uniform_graph
from temporal_comine.graph import build_indexed_graph
from temporal_comine.mgtree import construct_mg_tree
from temporal_comine.miner import co_mine
from temporal_comine.motif import Mode, Motif, motif_catalog
from temporal_comine.plan import (
    GLOBAL,
    NO_EDGE,
    DstCheck,
    Level,
    PlanExecutor,
    SearchContext,
    Source,
    execute_plan,
    specialize_plan,
)

CATALOG = motif_catalog()


def _shape(plan):
    return [(step.source, step.dst_check) for node in plan.nodes for step in node.steps]


class TestSpecializePlan:
    """Tests for the step table."""

    def test_single_edge_motif(self):
        plan = specialize_plan(construct_mg_tree([CATALOG["edge"]]))
        assert len(plan.nodes) == 1
        (step,) = plan.root.steps
        assert (step.source, step.dst_check, step.completes) == (Source.ALL, DstCheck.INJECT, True)

    def test_three_cycle(self):
        plan = specialize_plan(construct_mg_tree([CATALOG["3-cycle"]]))
        assert _shape(plan) == [
            (Source.ALL, DstCheck.INJECT),
            (Source.ADJACENCY, DstCheck.INJECT),
            (Source.ADJACENCY, DstCheck.EQUAL),
        ]
        assert [step.completes for step in plan.root.steps] == [False, False, True]
        assert plan.root.steps[2].describe() == "rank 2: adjacency(2) for 2->0, dst == 0"

    def test_unmapped_source_scans_all_edges(self):
        plan = specialize_plan(construct_mg_tree([CATALOG["3-star-in"]]))
        assert _shape(plan) == [
            (Source.ALL, DstCheck.INJECT),
            (Source.ALL, DstCheck.EQUAL),
            (Source.ALL, DstCheck.EQUAL),
        ]

    def test_walkthrough_nodes(self, walkthrough_group):
        plan = specialize_plan(construct_mg_tree(walkthrough_group))
        assert [(n.label, n.start, n.end, n.query) for n in plan.nodes] == [
            ("I1", 0, 2, None),
            ("M3", 2, 3, "M3"),
            ("I2", 2, 3, None),
            ("M4", 3, 4, "M4"),
            ("M5", 3, 4, "M5"),
        ]
        assert plan.root.children == (1, 2)
        assert plan.nodes[2].children == (3, 4)
        assert plan.depth == 4
        assert plan.motif_names == ("M3", "M4", "M5")

    def test_walkthrough_branch_points(self, walkthrough_group):
        plan = specialize_plan(construct_mg_tree(walkthrough_group))
        assert plan.branch_points() == {2: ["M3", "I2"], 3: ["M4", "M5"]}

    def test_child_steps_see_parent_mapping(self, walkthrough_group):
        plan = specialize_plan(construct_mg_tree(walkthrough_group))
        m5_step = plan.nodes[4].step(3)
        assert m5_step.edge == (3, 1)
        assert (m5_step.source, m5_step.dst_check) == (Source.ADJACENCY, DstCheck.EQUAL)

    def test_describe_lists_every_node(self, walkthrough_group):
        text = specialize_plan(construct_mg_tree(walkthrough_group)).describe()
        assert "I1 ranks [0, 2) children: M3, I2" in text
        assert "M4 ranks [3, 4) emit M4 children: -" in text


class TestExecutePlan:
    """Tests for plan execution against the recursive co-miner."""

    @pytest.mark.parametrize("names", [["edge"], ["3-cycle"], ["4-cycle", "4-cycle-chord"]])
    def test_catalog_plans_match_co_mine(self, walkthrough_graph, names):
        tree = construct_mg_tree([CATALOG[n] for n in names])
        for mode in Mode:
            planned = execute_plan(specialize_plan(tree), walkthrough_graph, 100, mode)
            recursive = co_mine(walkthrough_graph, tree, 100, mode)
            assert planned.counts == recursive.counts
            assert planned.matches == recursive.matches

    def test_walkthrough(self, walkthrough_graph, walkthrough_group):
        tree = construct_mg_tree(walkthrough_group)
        result = execute_plan(specialize_plan(tree), walkthrough_graph, 100, Mode.ENUMERATE)
        assert result.counts == {"M3": 1, "M4": 1, "M5": 0}
        assert result.matches["M4"] == [(0, 1, 3, 4)]

    def test_empty_root(self):
        group = [Motif("a", ((0, 1),)), Motif("b", ((1, 0), (0, 2)))]
        tree = construct_mg_tree(group)
        g = make_graph("0 1 1\n1 2 2\n2 0 3\n0 2 4")
        planned = execute_plan(specialize_plan(tree), g, 10)
        recursive = co_mine(g, tree, 10)
        assert planned.counts == recursive.counts
        assert planned.stats.visits == recursive.stats.visits

    @pytest.mark.parametrize("seed", range(25))
    def test_generated_instances(self, seed):
        inst = comining_instance(seed)
        tree = construct_mg_tree(inst.motifs)
        plan = specialize_plan(tree)
        for mode in Mode:
            planned = execute_plan(plan, inst.graph, inst.delta, mode)
            recursive = co_mine(inst.graph, tree, inst.delta, mode)
            assert planned.counts == recursive.counts
            assert planned.matches == recursive.matches
            assert planned.stats.visits == recursive.stats.visits
            assert planned.stats.node_visits == recursive.stats.node_visits

    @pytest.mark.slow
    def test_200_generated_instances(self):
        for seed in range(200):
            inst = comining_instance(seed)
            tree = construct_mg_tree(inst.motifs)
            planned = execute_plan(specialize_plan(tree), inst.graph, inst.delta, Mode.ENUMERATE)
            recursive = co_mine(inst.graph, tree, inst.delta, Mode.ENUMERATE)
            assert planned.matches == recursive.matches, f"seed {seed}"


class TestPlanExecutor:
    """Tests for budgeted, resumable execution."""

    @pytest.fixture
    def setup(self, walkthrough_group):
        g = build_indexed_graph(uniform_graph(10, 300, 600, seed=5))
        plan = specialize_plan(construct_mg_tree(walkthrough_group))
        expected = execute_plan(plan, g, 30, Mode.ENUMERATE)
        return g, plan, expected

    def test_small_budgets_reach_the_same_result(self, setup):
        g, plan, expected = setup
        executor = PlanExecutor(plan, g, 30, Mode.ENUMERATE)
        ctx = executor.root_context()
        rounds = 0
        while not executor.run(ctx, budget=7):
            rounds += 1
        assert rounds > 0
        assert executor.result.matches == expected.matches
        assert executor.stats.visits == expected.stats.visits

    def test_suspended_context_moves_between_executors(self, setup):
        g, plan, expected = setup
        first = PlanExecutor(plan, g, 30)
        ctx = first.root_context()
        assert not first.run(ctx, budget=200)

        moved = SearchContext.from_dict(ctx.to_dict())
        assert moved == ctx
        second = PlanExecutor(plan, g, 30)
        assert second.run(moved)
        total = {name: first.result.counts[name] + second.result.counts[name] for name in plan.motif_names}
        assert total == expected.counts

    def test_root_chunks_partition_the_work(self, setup):
        g, plan, expected = setup
        executor = PlanExecutor(plan, g, 30)
        for lo, hi in [(0, 100), (100, 101), (101, g.num_edges)]:
            assert executor.run(executor.root_context((lo, hi)))
        assert executor.result.counts == expected.counts
        assert executor.stats.visits == expected.stats.visits

    def test_loop_head_shape_after_budget(self, setup):
        g, plan, _ = setup
        executor = PlanExecutor(plan, g, 30)
        ctx = executor.root_context()
        executor.run(ctx, budget=250)
        assert ctx.levels[-1].chosen == NO_EDGE
        assert all(level.chosen != NO_EDGE for level in ctx.levels[:-1])
        assert len(ctx.e_stack) == ctx.depth - 1
        assert set(ctx.skip_markers) == set(range(ctx.depth - 1))

    def test_finished_context_is_exhausted(self, walkthrough_graph, walkthrough_group):
        executor = PlanExecutor(specialize_plan(construct_mg_tree(walkthrough_group)), walkthrough_graph, 100)
        ctx = executor.root_context()
        assert executor.run(ctx)
        assert ctx.levels == []
        assert ctx.exhausted
        assert ctx.node is None


class TestLevel:
    """Tests for the suspended-search records."""

    def test_pinned_keeps_path_edge_only(self):
        level = Level(node=2, rank=3, source=GLOBAL, lo=4, hi=9, chosen=6, pending=[3])
        pinned = level.pinned()
        assert (pinned.lo, pinned.hi, pinned.chosen, pinned.pending) == (9, 9, 6, [])
        assert pinned.remaining == 0
        assert level.remaining == 5

    def test_dict_round_trip(self):
        level = Level(node=1, rank=2, source=7, lo=0, hi=3, chosen=NO_EDGE, pending=[4, 5])
        assert Level.from_dict(level.to_dict()) == level
