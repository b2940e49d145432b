"""Tests for the brute-force oracle: enumeration, index files, closure."""

from random import Random

import pytest

from blockdec.blocks import load_block_data
from blockdec.decompose import enumerate_decompositions
from blockdec.diagram import (
    QUIVER,
    S_DIAGRAM,
    canonical_key,
    from_canonical_key,
    make_diagram,
)
from blockdec.gluing import glue, plan_key
from blockdec.oracle import (
    OracleError,
    build_index,
    enumerate_plans,
    loads_index,
    random_plan,
    sweep_nonunique,
)


@pytest.fixture(scope="module")
def data():
    return load_block_data()


@pytest.fixture(scope="module")
def quiver_index_2(data):
    return build_index(2, QUIVER, data)


class TestEnumeration:
    def test_single_block_quiver_plans(self, data):
        plans = list(enumerate_plans(data, QUIVER, max_blocks=1, max_nodes=5))
        assert len(plans) == 6  # one per elementary block
        assert {p.instances[0].tag for p in plans} == {
            "Spike", "Triangle", "Infork", "Outfork", "Diamond", "Square",
        }

    def test_single_block_s_plans(self, data):
        plans = list(enumerate_plans(data, S_DIAGRAM, max_blocks=1, max_nodes=5))
        assert len(plans) == 13

    def test_first_use_numbering(self, data):
        for plan in enumerate_plans(data, QUIVER, max_blocks=2, max_nodes=6):
            used = {v for inst in plan.instances for v in inst.nodes}
            assert used == set(range(len(used)))

    def test_all_plans_glue(self, data):
        for plan in enumerate_plans(data, S_DIAGRAM, max_blocks=2, max_nodes=6):
            glue(data, plan)  # must not raise

    def test_no_duplicate_plan_keys(self, data):
        keys = [
            plan_key(data, p)
            for p in enumerate_plans(data, QUIVER, max_blocks=3, max_nodes=4)
        ]
        assert len(keys) == len(set(keys))

    def test_node_budget_respected(self, data):
        for plan in enumerate_plans(data, QUIVER, max_blocks=3, max_nodes=3):
            used = {v for inst in plan.instances for v in inst.nodes}
            assert len(used) <= 3


class TestIndex:
    def test_single_block_index_sizes(self, data):
        assert len(build_index(1, QUIVER, data).entries) == 6
        # Ia and Ib glue to isomorphic single-weight-2-edge diagrams, so the
        # thirteen blocks produce twelve distinct diagrams.
        assert len(build_index(1, S_DIAGRAM, data).entries) == 12

    def test_weight2_edge_has_two_single_block_plans(self, data):
        index = build_index(1, S_DIAGRAM, data)
        diagram = make_diagram(2, [(1, 0, 2)], mode=S_DIAGRAM)
        assert len(index.closed_plans(diagram, data)) == 2

    def test_three_cycle_lookup(self, data):
        index = build_index(3, QUIVER, data, max_nodes=3)
        diagram = make_diagram(3, [(0, 1, 1), (1, 2, 1), (2, 0, 1)])
        closed = index.closed_plans(diagram, data)
        mine = {
            plan_key(data, p)
            for p in enumerate_decompositions(diagram, data).plans
        }
        assert closed == mine
        assert len(closed) == 2

    def test_closure_expands_symmetric_plans(self, data, quiver_index_2):
        # The out-star on four leaves stores one abstract two-outfork plan;
        # closure under its S4 leaf symmetry yields the three leaf pairings.
        diagram = make_diagram(5, [(0, i, 1) for i in range(1, 5)])
        assert len(quiver_index_2.closed_plans(diagram, data)) == 3

    def test_empty_two_node_diagram_indexed(self, data, quiver_index_2):
        diagram = make_diagram(2, [])
        closed = quiver_index_2.closed_plans(diagram, data)
        assert len(closed) == 1

    def test_monotone_in_block_budget(self, data):
        small = build_index(2, QUIVER, data, max_nodes=4)
        large = build_index(3, QUIVER, data, max_nodes=4)
        for dkey, pkeys in small.entries.items():
            assert pkeys <= large.entries[dkey]

    def test_save_load_round_trip(self, data, quiver_index_2, tmp_path):
        path = tmp_path / "oracle.idx"
        quiver_index_2.save(path)
        loaded = loads_index(path.read_text())
        assert loaded == quiver_index_2

    def test_dump_is_sorted_and_parametrised(self, quiver_index_2):
        text = quiver_index_2.dumps()
        lines = text.splitlines()
        assert "mode=quiver" in lines[0]
        assert "max_blocks=2" in lines[0]
        body = lines[1:]
        assert body == sorted(body)

    def test_load_rejects_garbage(self):
        with pytest.raises(OracleError):
            loads_index("not an index\n")
        with pytest.raises(OracleError):
            loads_index("# blockdec-oracle-index v1 mode=quiver\n")


class TestSweep:
    def test_quiver_sweep_three_nodes(self, data):
        # Engine truth: four connected quiver diagrams on <=3 nodes have two
        # or more decompositions (in-fork, out-fork, path, three-cycle).
        sweep = sweep_nonunique(3, QUIVER, data)
        assert sweep == {
            "quiver|3|1>0*1;2>0*1": 2,
            "quiver|3|1>2*1;2>0*1": 2,
            "quiver|3|0>1*1;1>2*1;2>0*1": 2,
            "quiver|3|1>0*1;1>2*1": 2,
        }

    def test_quiver_sweep_two_nodes_empty(self, data):
        assert sweep_nonunique(2, QUIVER, data) == {}

    def test_s_sweep_two_nodes_is_weight2_edge(self, data):
        sweep = sweep_nonunique(2, S_DIAGRAM, data)
        assert set(sweep) == {canonical_key(make_diagram(2, [(0, 1, 2)], S_DIAGRAM))}

    def test_sweep_keys_round_trip(self, data):
        for dkey in sweep_nonunique(3, QUIVER, data):
            assert canonical_key(from_canonical_key(dkey)) == dkey


class TestRandomPlans:
    def test_deterministic_for_seed(self, data):
        a = [random_plan(data, QUIVER, Random(7)) for _ in range(20)]
        b = [random_plan(data, QUIVER, Random(7)) for _ in range(20)]
        assert a == b

    def test_random_plans_always_glue(self, data):
        rng = Random(11)
        for i in range(200):
            mode = QUIVER if i % 2 else S_DIAGRAM
            glue(data, random_plan(data, mode, rng))  # must not raise

    def test_random_plan_refound_sample(self, data):
        rng = Random(3)
        for _ in range(25):
            plan = random_plan(data, QUIVER, rng, max_blocks=3)
            diagram = glue(data, plan).diagram
            keys = {
                plan_key(data, p)
                for p in enumerate_decompositions(diagram, data).plans
            }
            assert plan_key(data, plan) in keys
