import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PLANTED, synthetic_points
from qopt_bench.config import BenchmarkConfig
from qopt_bench.runner import run_benchmark
from qopt_bench.strategy import (
    ResourcePoint,
    StrategyError,
    analyze,
    parse_grid,
    points_from_records,
    recommend_params,
    resource_of,
    split_instances,
    virtual_best,
)


def test_resource_of():
    assert resource_of(10, 30, 50) == 15000
    assert resource_of(1, 1, 1) == 1
    assert resource_of(1, 30, 1000) == 30000
    with pytest.raises(StrategyError):
        resource_of(0, 1, 1)


def test_grid_parsing():
    g = parse_grid("log:1:1e6:25")
    assert len(g) == 25 and g[0] == pytest.approx(1) and g[-1] == pytest.approx(1e6)
    with pytest.raises(StrategyError):
        parse_grid("log:1:1e6")


def test_virtual_best_single_point():
    curve = virtual_best([ResourcePoint("a", 1, 2, 3, 0.7)], [1, 5, 6, 100])["a"]
    assert curve == [None, None, 0.7, 0.7]
    with pytest.raises(StrategyError):
        virtual_best([ResourcePoint("a", 1, 1, 1, 0.5)], [])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 5), st.integers(1, 30), st.integers(1, 100), st.floats(0, 1)),
                min_size=1, max_size=30))
def test_virtual_best_monotone(rows):
    pts = [ResourcePoint("x", *row) for row in rows]
    curve = virtual_best(pts, parse_grid("log:1:1e5:30"))["x"]
    defined = [v for v in curve if v is not None]
    assert defined == sorted(defined)
    assert curve.index(defined[0]) == len(curve) - len(defined)


def test_one_instance_one_triple():
    train = [ResourcePoint("a", 2, 3, 4, 0.6)]
    test = [ResourcePoint("b", 2, 3, 4, 0.5)]
    rec = recommend_params(train, test, [10, 24, 100])
    assert rec.recommended == [None, (2, 3, 4), (2, 3, 4)]
    assert rec.test_quality == [None, 0.5, 0.5]


def test_tie_break_prefers_fewer_shots_then_restarts():
    train = [ResourcePoint("a", 1, 10, 100, 0.8), ResourcePoint("a", 2, 10, 50, 0.8),
             ResourcePoint("a", 1, 10, 50, 0.8), ResourcePoint("a", 1, 5, 50, 0.8)]
    rec = recommend_params(train, [], [1e4])
    assert rec.recommended == [(1, 5, 50)]


def test_planted_optimum_recovered():
    pts = synthetic_points([f"i{k}" for k in range(10)])
    train_keys, test_keys = split_instances({p.instance for p in pts}, 0.8, seed=1)
    assert len(train_keys) == 8 and len(test_keys) == 2
    train = [p for p in pts if p.instance in train_keys]
    test = [p for p in pts if p.instance in test_keys]
    grid = parse_grid("log:1:1e6:25")
    rec = recommend_params(train, test, grid)
    for r, t, tq, vb in zip(grid, rec.recommended, rec.test_quality, rec.virtual_best_test):
        if r >= resource_of(*PLANTED):
            assert t == PLANTED
        if tq is not None:
            assert tq <= vb + 1e-12


def test_overlap_rejected():
    with pytest.raises(StrategyError):
        recommend_params([ResourcePoint("a", 1, 1, 1, 0.5)], [ResourcePoint("a", 1, 1, 1, 0.5)], [1])


def test_split_is_deterministic():
    keys = [f"k{i}" for i in range(20)]
    assert split_instances(keys, 0.8, 3) == split_instances(reversed(keys), 0.8, 3)


def test_points_from_records_prefix_maxima():
    recs = [{"type": "iteration", "solver": "qaoa", "size": 4, "restart": r, "iteration": i,
             "quality": {"approximation_ratio": q}}
            for r, qs in ((1, [0.5, 0.7, 0.6]), (2, [0.8, 0.4, 0.9])) for i, q in enumerate(qs)]
    pts = {(p.restarts, p.iterations): p.quality for p in points_from_records(recs, 100, {4: "g4"})}
    assert pts == {(1, 1): 0.5, (1, 2): 0.7, (1, 3): 0.7, (2, 1): 0.8, (2, 2): 0.8, (2, 3): 0.9}


def test_analyze_runs(tmp_path):
    dirs = []
    for shots in (50, 200):
        cfg = BenchmarkConfig(min_size=4, max_size=10, max_restarts=2, max_iterations=6, num_shots=shots,
                              shots_list=[shots], out=str(tmp_path / f"s{shots}"))
        dirs.append(run_benchmark(cfg))
    rec = analyze(dirs, tmp_path / "out", grid="log:1:1e5:12")
    assert len(rec.train_instances) == 3 and len(rec.test_instances) == 1
    perf = json.loads((tmp_path / "out" / "performance.json").read_text())
    assert perf["reference_resource"] == 30000
    assert (tmp_path / "out" / "strategy.svg").exists()
    again = analyze(dirs, tmp_path / "out2", grid="log:1:1e5:12")
    assert (tmp_path / "out" / "strategy.svg").read_bytes() == (tmp_path / "out2" / "strategy.svg").read_bytes()
    assert again.recommended == rec.recommended
