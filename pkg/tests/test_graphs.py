import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_max_cut
from qopt_bench.graphs import (
    GraphError,
    GraphInstance,
    InstanceFormatError,
    complete_graph,
    cut_values,
    cycle_graph,
    exact_max_cut,
    generate_3_regular,
    generate_instances,
    instance_filename,
    load_instance,
    solve,
    store_instance,
)
from qopt_bench.hamiltonian import cut_size


def test_n4_is_k4():
    for seed in range(5):
        g = generate_3_regular(4, seed)
        assert g.edges == complete_graph(4).edges


def test_odd_or_small_sizes_rejected():
    with pytest.raises(GraphError):
        generate_3_regular(3, 0)
    with pytest.raises(GraphError):
        generate_3_regular(2, 0)
    with pytest.raises(GraphError):
        generate_3_regular(7, 0)


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12, 20, 40])
def test_generated_graph_is_simple_3_regular(n):
    g = generate_3_regular(n, 7)
    assert g.num_edges == 3 * n // 2
    assert np.all(g.degrees() == 3)
    assert len(set(g.edges)) == g.num_edges
    assert all(i < j < n for i, j in g.edges)


def test_generation_is_reproducible():
    assert generate_3_regular(14, 3).edges == generate_3_regular(14, 3).edges
    assert generate_3_regular(14, 3).edges != generate_3_regular(14, 4).edges


def test_small_known_max_cuts(k4):
    assert exact_max_cut(k4).size == 4
    assert exact_max_cut(cycle_graph(4)).size == 4
    assert exact_max_cut(cycle_graph(5)).size == 4


def test_max_cut_partition_attains_size():
    g = generate_3_regular(10, 1)
    res = exact_max_cut(g)
    assert cut_size(g, res.partition) == res.size


def test_over_limit_reports_unknown():
    g = generate_3_regular(12, 0)
    res = exact_max_cut(g, limit=10)
    assert res.size is None and not res.exhausted and not res.known


@settings(max_examples=25, deadline=None)
@given(n=st.sampled_from([4, 6, 8]), seed=st.integers(0, 10_000), perm_seed=st.integers(0, 10_000))
def test_max_cut_invariant_under_relabeling(n, seed, perm_seed):
    g = generate_3_regular(n, seed)
    perm = np.random.default_rng(perm_seed).permutation(n)
    h = GraphInstance(n, tuple((int(perm[i]), int(perm[j])) for i, j in g.edges))
    assert exact_max_cut(g).size == exact_max_cut(h).size == brute_force_max_cut(n, g.edges)


def test_no_bitstring_beats_the_optimum():
    g = generate_3_regular(16, 2)
    best = exact_max_cut(g).size
    idx = np.random.default_rng(0).integers(0, 1 << 16, 1000)
    assert cut_values(g.edge_array(), idx).max() <= best


def test_store_load_round_trip(tmp_path, k4):
    g = solve(k4)
    store_instance(g, tmp_path / "k4.json")
    assert load_instance(tmp_path / "k4.json") == g


def test_unknown_optimum_round_trips(tmp_path):
    g = solve(generate_3_regular(8, 0), limit=4)
    store_instance(g, tmp_path / "g.json")
    assert json.loads((tmp_path / "g.json").read_text())["optimal_cut_size"] == "unknown"
    assert load_instance(tmp_path / "g.json").optimal_cut_size is None


@pytest.mark.parametrize(
    "payload, field",
    [
        ({"nodes": 3, "edges": [[0, 1], [1, 0]]}, "edges"),
        ({"nodes": 3, "edges": [[0, 3]]}, "edges"),
        ({"nodes": 0, "edges": []}, "nodes"),
        ({"nodes": 2, "edges": [[0, 1]], "optimal_cut_size": -1}, "optimal_cut_size"),
        ({"nodes": 2, "edges": [[0, 1]], "optimal_cut_size": 1, "optimal_partition": "00"}, "optimal_partition"),
        ({"nodes": 2, "edges": [[0, 1]], "seed": "x"}, "seed"),
    ],
)
def test_malformed_files_name_the_field(tmp_path, payload, field):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(payload))
    with pytest.raises(InstanceFormatError) as info:
        load_instance(path)
    assert info.value.field == field


def test_generate_instances_writes_solved_files(tmp_path):
    paths = generate_instances([4, 6], seed=5, out_dir=tmp_path)
    assert [p.name for p in paths] == [instance_filename(4), instance_filename(6)]
    assert load_instance(paths[0]).optimal_cut_size == 4
