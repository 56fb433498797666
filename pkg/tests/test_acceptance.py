"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <k> PASS|FAIL: ...`` line; the lines
are repeated in the terminal summary so they show without ``-s``.
"""

import itertools
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from conftest import PLANTED, brute_force_max_cut, dense_single_edge_expected_cut, single_edge, synthetic_points
from qopt_bench.cli import report_run
from qopt_bench.config import BenchmarkConfig
from qopt_bench.graphs import cycle_graph, complete_graph, exact_max_cut, generate_3_regular
from qopt_bench.hamiltonian import diagonal_cost_table
from qopt_bench.metrics import PRESETS, annealing_timing, gate_model_timing, quality_record
from qopt_bench.qaoa import AnsatzParams, evolve_ansatz, expected_cut
from qopt_bench.runner import RECORDS_FILE, load_run, run_benchmark
from qopt_bench.samples import SampleSet
from qopt_bench.strategy import parse_grid, recommend_params, resource_of, split_instances, virtual_best

pytestmark = pytest.mark.acceptance

LINES = []


def verdict(k, ok, detail):
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def test_1_oracle_correctness():
    t0 = time.perf_counter()
    mismatches = 0
    for n in (4, 6, 8, 10):
        for seed in range(20):
            g = generate_3_regular(n, seed)
            mismatches += exact_max_cut(g).size != brute_force_max_cut(n, g.edges)
    k4, c4 = exact_max_cut(complete_graph(4)).size, exact_max_cut(cycle_graph(4)).size
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and k4 == 4 and c4 == 4 and elapsed < 10
    verdict(1, ok, f"80 graphs, {mismatches} mismatches vs loop oracle; K4={k4}, C4={c4}; {elapsed:.2f}s")


def test_2_single_edge_analytics():
    g = single_edge()
    cuts = diagonal_cost_table(g).cut_sizes
    # 20 x 20 grid at pi/16 and pi/8 spacing, so it contains the analytic peak
    betas = np.arange(20) * np.pi / 16
    gammas = np.arange(20) * np.pi / 8
    worst, best = 0.0, 0.0
    for b, c in itertools.product(betas, gammas):
        got = expected_cut(evolve_ansatz(g, AnsatzParams((b,), (c,))), cuts)
        worst = max(worst, abs(got - dense_single_edge_expected_cut(b, c)))
        best = max(best, got)
    ar = best / exact_max_cut(g).size
    verdict(2, worst < 1e-9 and abs(ar - 1) < 1e-9, f"max |engine - dense| = {worst:.1e}; grid max AR = {ar:.12f}")


def test_3_metric_identities():
    rng = np.random.default_rng(2024)
    graphs = [generate_3_regular(n, s) for n, s in ((6, 0), (8, 1), (10, 2))]
    tables = [diagonal_cost_table(g) for g in graphs]
    order_fail = cvar1_fail = gibbs_fail = gap_fail = 0
    worst_gibbs = 0.0
    for _ in range(10_000):
        k = rng.integers(len(graphs))
        g, table = graphs[k], tables[k]
        probs = rng.dirichlet(np.full(1 << g.num_nodes, rng.uniform(0.05, 2.0)))
        idx = rng.choice(1 << g.num_nodes, size=int(rng.integers(1, 300)), p=probs)
        samples = SampleSet.from_indices(g.num_nodes, idx)
        e_min = -table.max_cut
        recs = {a: quality_record(samples, table.cut_sizes, e_min, alpha=a) for a in (0.05, 0.1, 0.5, 1.0)}
        ar = recs[1.0].approximation_ratio
        for q in recs.values():
            order_fail += not (q.best_measurement_ratio >= q.cvar_ratio - 1e-12 and q.cvar_ratio >= ar - 1e-12)
        cvar1_fail += recs[1.0].cvar_ratio != ar
        gibbs = quality_record(samples, table.cut_sizes, e_min, eta=1e-6).gibbs_ratio
        worst_gibbs = max(worst_gibbs, abs(gibbs - ar))
        gibbs_fail += abs(gibbs - ar) >= 1e-4
        gap_fail += recs[1.0].optimality_gap_pct != (1.0 - ar) * 100
    ok = not (order_fail or cvar1_fail or gibbs_fail or gap_fail)
    verdict(3, ok, f"10000 sample sets: ordering fails={order_fail}, CVaR1!=AR {cvar1_fail}, "
                   f"max |Gibbs(1e-6)-AR|={worst_gibbs:.1e}, gap fails={gap_fail}")


def test_4_throughput_arithmetic():
    def extra(profile):
        hi = gate_model_timing(profile, 5000, iterations=30)[-1].cum_quantum
        lo = gate_model_timing(profile, 1000, iterations=30)[-1].cum_quantum
        return hi - lo

    sc, ion = extra(PRESETS["superconducting"]), extra(PRESETS["ion-trap"])
    qa = annealing_timing(PRESETS["annealer"], 1000, 1.0)[0].t_quantum
    ok = abs(sc - 51.6) < 1e-9 and abs(sc - 52) <= 1 and abs(ion - 1752) < 1e-9 and abs(ion - 1755) <= 5 \
        and abs(qa - 0.267) < 1e-12
    verdict(4, ok, f"superconducting +{sc:.1f}s (52 +- 1), ion-trap +{ion:.0f}s (1755 +- 5), annealer {qa * 1e3:.1f}ms")


def test_5_qaoa_end_to_end(tmp_path):
    t0 = time.perf_counter()
    cfg = BenchmarkConfig(min_size=4, max_size=12, size_step=2, num_shots=1000, rounds=2, max_iterations=30,
                          max_restarts=3, seed=0, out=str(tmp_path / "qaoa"))
    run = load_run(run_benchmark(cfg))
    elapsed = time.perf_counter() - t0
    groups = run.of_type("group")
    rows = [(g["size"], g["quality"]["best_measurement_ratio"], g["quality"]["approximation_ratio"], g["uniform_ar"])
            for g in groups]
    ok = (len(groups) == 5 and not run.of_type("error") and elapsed < 300
          and all(best == 1.0 and ar > uni for _, best, ar, uni in rows))
    detail = "; ".join(f"n={n} best-gap={(1 - b) * 100:.0f}% AR={a:.3f}>{u:.3f}" for n, b, a, u in rows)
    verdict(5, ok, f"{detail}; {elapsed:.1f}s")


@pytest.mark.slow
def test_6_qa_end_to_end(tmp_path):
    t0 = time.perf_counter()
    short, long_, counts_ok = {}, {}, True
    for seed in range(5):
        cfg = BenchmarkConfig(solver="qa", min_size=4, max_size=12, size_step=2, num_shots=1000,
                              anneal_min=1.0, anneal_max=256.0, anneal_factor=2.0, seed=seed,
                              out=str(tmp_path / f"qa{seed}"))
        run = load_run(run_benchmark(cfg))
        for n in cfg.sizes:
            recs = sorted((r for r in run.of_type("iteration") if r["size"] == n), key=lambda r: r["anneal_time"])
            counts_ok &= len(recs) == 9 and all(r["backend"] == "schrodinger" for r in recs)
            short.setdefault(n, []).append(recs[0]["quality"]["approximation_ratio"])
            long_.setdefault(n, []).append(recs[-1]["quality"]["approximation_ratio"])
    elapsed = time.perf_counter() - t0
    trend = {n: (np.mean(short[n]), np.mean(long_[n])) for n in short}
    ok = (counts_ok and elapsed < 600 and all(b >= a for a, b in trend.values())
          and all(min(long_[n]) > 0.95 for n in trend if n <= 8))
    detail = "; ".join(f"n={n} AR {a:.3f}->{b:.3f}" for n, (a, b) in sorted(trend.items()))
    verdict(6, ok, f"9 records per size: {counts_ok}; {detail}; {elapsed:.0f}s")


def test_7_noise_monotonicity(tmp_path):
    fids = []
    for seed in range(5):
        cfg = BenchmarkConfig(method=1, min_size=8, max_size=8, rounds=1, rounds_list=list(range(1, 9)),
                              noise="typical", seed=seed, out=str(tmp_path / f"n{seed}"))
        recs = sorted(load_run(run_benchmark(cfg)).of_type("fidelity"), key=lambda r: r["rounds"])
        fids.append([r["normalized_fidelity"] for r in recs])
    mean = np.mean(fids, axis=0)
    rho = spearmanr(np.arange(1, 9), mean).statistic
    verdict(7, rho < 0, f"mean normalized fidelity p=1..8: {np.round(mean, 3).tolist()}; Spearman rho={rho:.3f}")


def test_8_shots_effect(tmp_path):
    acc = {}
    for seed in range(5):
        cfg = BenchmarkConfig(method=1, min_size=4, max_size=16, size_step=2, num_shots=1000,
                              shots_list=[1000, 5000], seed=seed, out=str(tmp_path / f"s{seed}"))
        for r in load_run(run_benchmark(cfg)).of_type("fidelity"):
            acc.setdefault((r["size"], r["shots"]), []).append(r["normalized_fidelity"])
    sizes = sorted({n for n, _ in acc})
    pairs = [(n, np.mean(acc[(n, 1000)]), np.mean(acc[(n, 5000)])) for n in sizes]
    ok = len(sizes) == 7 and all(hi >= lo for _, lo, hi in pairs)
    verdict(8, ok, "; ".join(f"n={n} {lo:.3f}<={hi:.3f}" for n, lo, hi in pairs))


def test_9_strategy():
    pts = synthetic_points([f"inst{k}" for k in range(10)], seed=9)
    train_keys, test_keys = split_instances({p.instance for p in pts}, 0.8, seed=0)
    train = [p for p in pts if p.instance in train_keys]
    test = [p for p in pts if p.instance in test_keys]
    grid = parse_grid("log:1:1e6:25")
    curves = virtual_best(test, grid)
    monotone = all(
        [v for v in c if v is not None] == sorted(v for v in c if v is not None) for c in curves.values()
    )
    rec = recommend_params(train, test, grid)
    planted = all(t == PLANTED for r, t in zip(grid, rec.recommended) if r >= resource_of(*PLANTED))
    bounded = all(tq <= vb + 1e-12 for tq, vb in zip(rec.test_quality, rec.virtual_best_test) if tq is not None)
    verdict(9, monotone and planted and bounded,
            f"virtual best monotone={monotone}, planted {PLANTED} recovered={planted}, recommended<=virtual best={bounded}")


def test_10_reproducibility(tmp_path):
    outputs = []
    for tag in ("a", "b"):
        records, svgs = [], {}
        for cfg in (
            BenchmarkConfig(min_size=4, max_size=12, max_restarts=3, seed=11, out=str(tmp_path / tag / "qaoa")),
            BenchmarkConfig(solver="qa", min_size=4, max_size=6, anneal_max=32.0, seed=11, out=str(tmp_path / tag / "qa")),
            BenchmarkConfig(method=1, min_size=4, max_size=6, rounds_list=[1, 2], noise="typical", seed=11,
                            out=str(tmp_path / tag / "m1")),
        ):
            out = run_benchmark(cfg)
            records.append((out / RECORDS_FILE).read_text().splitlines()[1:])
            for path in report_run(out, formats=("svg",)):
                svgs[f"{out.name}/{path.name}"] = path.read_bytes()
        outputs.append((records, svgs))
    (ra, sa), (rb, sb) = outputs
    same_records = ra == rb
    same_svgs = sa.keys() == sb.keys() and all(sa[k] == sb[k] for k in sa)
    verdict(10, same_records and same_svgs,
            f"{sum(map(len, ra))} metric lines identical={same_records}; {len(sa)} SVGs identical={same_svgs}")

