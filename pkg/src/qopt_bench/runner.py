"""Benchmark loops for QAOA and quantum annealing, persisted as JSON lines.

A run directory holds:

- ``records.jsonl``: a header line (schema version, tool version, config)
  followed by one JSON object per record. Records carry a ``type`` of
  ``iteration``, ``restart``, ``group``, ``fidelity`` or ``error``. The file is
  a pure function of the config.
- ``wallclock.jsonl``: measured simulator wall-clock times per execution.
- ``manifest.json``: config snapshot, instance seeds and start/end timestamps.
- ``instances/``: the solved graph of every size.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from . import __version__
from .annealer import AnnealSchedule, anneal_and_sample, classical_proxy_sample, evolve_schedule
from .config import BenchmarkConfig
from .graphs import (
    GraphInstance,
    generate_3_regular,
    instance_filename,
    instance_seed,
    load_instance,
    solve,
    store_instance,
)
from .hamiltonian import diagonal_cost_table
from .metrics import (
    QualityRecord,
    annealing_timing,
    gate_model_timing,
    load_profile,
    quality_record,
)
from .optimizer import initial_angles, load_angle_table, minimize
from .qaoa import NOISE_PRESETS, AnsatzParams, circuit_resources, evolve_ansatz, hellinger_fidelities, noisy_sample, sample

SCHEMA_VERSION = 1
RECORDS_FILE = "records.jsonl"
WALLCLOCK_FILE = "wallclock.jsonl"
MANIFEST_FILE = "manifest.json"
INSTANCE_DIR = "instances"

log = logging.getLogger(__name__)


def dumps(obj) -> str:
    """Canonical JSON used for every persisted line."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent RNG stream for one (size, restart, ...) cell."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


@dataclass
class IterationRecord:
    solver: str
    size: int
    restart: int
    iteration: int
    quality: QualityRecord
    cut_histogram: Dict[int, int]
    objective_value: float
    backend: str
    params: Optional[AnsatzParams] = None
    anneal_time: Optional[float] = None
    timing: Optional[dict] = None
    reference_cut: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "type": "iteration",
            "solver": self.solver,
            "size": self.size,
            "restart": self.restart,
            "iteration": self.iteration,
            "anneal_time": self.anneal_time,
            "params": self.params.to_dict() if self.params else None,
            "quality": self.quality.to_dict(),
            "timing": self.timing,
            "cut_histogram": {str(k): v for k, v in self.cut_histogram.items()},
            "objective_value": self.objective_value,
            "backend": self.backend,
            "reference_cut": self.reference_cut,
        }


def build_instance(cfg: BenchmarkConfig, n: int, instances_dir: Optional[Path] = None) -> GraphInstance:
    if instances_dir is not None:
        path = Path(instances_dir) / instance_filename(n)
        if path.exists():
            g = load_instance(path)
            return g if g.optimal_cut_size is not None else solve(g, cfg.exhaustion_limit)
    g = generate_3_regular(n, instance_seed(cfg.graph_seed, n))
    return solve(g, cfg.exhaustion_limit)


def _angles(cfg: BenchmarkConfig, p: int, restart: int, rng, table):
    # restart 1 honours the configured mode; later restarts start from random angles
    mode = cfg.angle_mode
    if mode == "default" and restart > 1:
        mode = "random"
    return initial_angles(p, mode, seed=rng, table=table)


def _quality(cfg: BenchmarkConfig, hist: Dict[int, int], reference_cut: int) -> QualityRecord:
    return quality_record(hist, None, -reference_cut, cfg.alpha, cfg.eta)


# --- QAOA, method 2 -----------------------------------------------------------

def _qaoa_size(cfg: BenchmarkConfig, g: GraphInstance) -> Tuple[List[dict], List[dict]]:
    n = g.num_nodes
    table = diagonal_cost_table(g, cfg.statevector_limit)
    opt = int(g.optimal_cut_size)
    noise = NOISE_PRESETS[cfg.noise]
    profile = load_profile(cfg.profile_name)
    angle_table = load_angle_table(cfg.angle_table) if cfg.angle_mode == "fixed" else None
    records: List[dict] = []
    walls: List[dict] = []
    results = []
    for restart in range(1, cfg.max_restarts + 1):
        rng = stream(cfg.seed, n, restart)
        init = _angles(cfg, cfg.rounds, restart, rng, angle_table)
        iters: List[IterationRecord] = []

        def objective(params: AnsatzParams) -> float:
            t0 = time.perf_counter()
            if noise.is_noiseless:
                samples = sample(evolve_ansatz(g, params, cfg.statevector_limit, table.cut_sizes), cfg.num_shots, rng)
            else:
                samples = noisy_sample(g, params, cfg.num_shots, noise, rng, cfg.statevector_limit)
            t_exec = time.perf_counter() - t0
            hist = samples.cut_histogram(g.edges)
            q = _quality(cfg, hist, opt)
            value = -q.ratio(cfg.objective)
            iters.append(IterationRecord("qaoa", n, restart, len(iters), q, hist, value,
                                         "statevector" if noise.is_noiseless else f"trajectories:{cfg.noise}",
                                         params=params, reference_cut=opt))
            walls.append({"size": n, "restart": restart, "iteration": len(iters) - 1, "execute_s": t_exec})
            return value

        t0 = time.perf_counter()
        _, trace = minimize(objective, init, cfg.max_iterations, method=cfg.minimizer)
        walls.append({"size": n, "restart": restart, "minimize_total_s": time.perf_counter() - t0})
        timings = gate_model_timing(profile, cfg.num_shots, iterations=len(iters))
        for rec, t in zip(iters, timings):
            rec.timing = t.to_dict()
            records.append(rec.to_dict())
        best = trace.best()
        chosen = iters[best.eval_index]
        results.append((restart, chosen))
        records.append({
            "type": "restart", "solver": "qaoa", "size": n, "restart": restart,
            "iterations": len(iters), "result_iteration": chosen.iteration,
            "objective_value": chosen.objective_value, "params": chosen.params.to_dict(),
            "quality": chosen.quality.to_dict(),
            "cut_histogram": {str(k): v for k, v in chosen.cut_histogram.items()},
            "timing": iters[-1].timing,
        })
    records.append(_group_record("qaoa", g, results, table.cut_sizes.mean() / opt))
    return records, walls


def _group_record(solver: str, g: GraphInstance, results, uniform_ar: Optional[float], reference_cut=None) -> dict:
    # best restart = lowest objective value (first restart wins ties)
    restart, chosen = min(results, key=lambda rc: (rc[1].objective_value, rc[0]))
    return {
        "type": "group", "solver": solver, "size": g.num_nodes, "best_restart": restart,
        "result_iteration": chosen.iteration, "anneal_time": chosen.anneal_time,
        "objective_value": chosen.objective_value,
        "quality": chosen.quality.to_dict(),
        "cut_histogram": {str(k): v for k, v in chosen.cut_histogram.items()},
        "optimal_cut": g.optimal_cut_size,
        "reference_cut": reference_cut if reference_cut is not None else g.optimal_cut_size,
        "uniform_ar": uniform_ar,
        "num_edges": g.num_edges,
    }


# --- QA -------------------------------------------------------------------------

def _qa_size(cfg: BenchmarkConfig, g: GraphInstance) -> Tuple[List[dict], List[dict]]:
    n = g.num_nodes
    times = cfg.anneal_schedule_times
    profile = load_profile(cfg.profile_name)
    quantum = n <= cfg.anneal_qubit_limit
    backend = "schrodinger" if quantum else "sa-proxy"
    states = {}
    raw = []
    walls: List[dict] = []
    for restart in range(1, cfg.max_restarts + 1):
        rng = stream(cfg.seed, n, restart)
        for k, t in enumerate(times):
            t0 = time.perf_counter()
            if quantum:
                if t not in states:
                    states[t] = evolve_schedule(g, AnnealSchedule(t, time_scale=cfg.time_scale))
                samples = anneal_and_sample(g, t, cfg.num_shots, rng, state=states[t])
            else:
                samples = classical_proxy_sample(g, t, cfg.num_shots, rng, cfg.proxy_sweeps_per_us)
            walls.append({"size": n, "restart": restart, "iteration": k, "execute_s": time.perf_counter() - t0})
            raw.append((restart, k, t, samples.cut_histogram(g.edges)))

    if g.optimal_cut_size is not None:
        reference = int(g.optimal_cut_size)
    else:
        # no exact optimum past the exhaustion limit: normalize by the best cut observed
        reference = max(max(h) for *_, h in raw)
    timings = annealing_timing(profile, cfg.num_shots, times)
    records: List[dict] = []
    results = []
    per_restart: Dict[int, List[IterationRecord]] = {}
    for restart, k, t, hist in raw:
        q = _quality(cfg, hist, reference)
        rec = IterationRecord("qa", n, restart, k, q, hist, -q.ratio(cfg.objective), backend,
                              anneal_time=t, timing=timings[k].to_dict(), reference_cut=reference)
        per_restart.setdefault(restart, []).append(rec)
        records.append(rec.to_dict())
    for restart, recs in per_restart.items():
        # each anneal restarts from scratch; the reported result is the longest anneal
        chosen = recs[-1]
        results.append((restart, chosen))
        records.append({
            "type": "restart", "solver": "qa", "size": n, "restart": restart,
            "iterations": len(recs), "result_iteration": chosen.iteration,
            "anneal_time": chosen.anneal_time, "objective_value": chosen.objective_value,
            "quality": chosen.quality.to_dict(),
            "cut_histogram": {str(k): v for k, v in chosen.cut_histogram.items()},
            "timing": chosen.timing,
        })
    uniform = g.num_edges / 2 / reference
    records.append(_group_record("qa", g, results, uniform, reference))
    return records, walls


# --- QAOA, method 1 --------------------------------------------------------------

def _method1_size(cfg: BenchmarkConfig, g: GraphInstance) -> Tuple[List[dict], List[dict]]:
    n = g.num_nodes
    table = diagonal_cost_table(g, cfg.statevector_limit)
    opt = int(g.optimal_cut_size)
    noise = NOISE_PRESETS[cfg.noise]
    profile = load_profile(cfg.profile_name)
    angle_table = load_angle_table(cfg.angle_table) if cfg.angle_mode == "fixed" else None
    records, walls = [], []
    for p in cfg.rounds_list:
        params = initial_angles(p, cfg.angle_mode, seed=stream(cfg.seed, n, p, 0), table=angle_table)
        ideal = evolve_ansatz(g, params, cfg.statevector_limit, table.cut_sizes)
        resources = circuit_resources(g, p)
        for shots in cfg.shots_list:
            timing = gate_model_timing(profile, shots, iterations=1)[0]
            for rep in range(1, cfg.max_restarts + 1):
                rng = stream(cfg.seed, n, p, shots, rep)
                t0 = time.perf_counter()
                if noise.is_noiseless:
                    samples = sample(ideal, shots, rng)
                else:
                    samples = noisy_sample(g, params, shots, noise, rng, cfg.statevector_limit)
                walls.append({"size": n, "rounds": p, "shots": shots, "restart": rep,
                              "execute_s": time.perf_counter() - t0})
                raw_f, norm_f = hellinger_fidelities(samples, ideal.probabilities())
                hist = samples.cut_histogram(g.edges)
                records.append({
                    "type": "fidelity", "solver": "qaoa", "size": n, "rounds": p, "shots": shots,
                    "restart": rep, "params": params.to_dict(),
                    "hellinger_fidelity": raw_f, "normalized_fidelity": norm_f,
                    "resources": resources.to_dict(),
                    "quality": _quality(cfg, hist, opt).to_dict(),
                    "cut_histogram": {str(k): v for k, v in hist.items()},
                    "timing": timing.to_dict(), "noise": cfg.noise,
                })
    return records, walls


# --- driver ---------------------------------------------------------------------

def _size_task(args):
    cfg, n, instances_dir = args
    try:
        g = build_instance(cfg, n, instances_dir)
    except Exception as exc:  # recorded, the run continues with other sizes
        return n, None, [{"type": "error", "size": n, "stage": "instance", "message": str(exc)}], []
    try:
        if cfg.solver == "qa":
            recs, walls = _qa_size(cfg, g)
        elif cfg.method == 1:
            recs, walls = _method1_size(cfg, g)
        else:
            recs, walls = _qaoa_size(cfg, g)
    except Exception as exc:
        log.exception("size %d failed", n)
        return n, g, [{"type": "error", "size": n, "stage": "execute", "message": f"{type(exc).__name__}: {exc}"}], []
    return n, g, recs, walls


def run_benchmark(cfg: BenchmarkConfig, instances_dir: Optional[Path] = None) -> Path:
    """Execute the configured benchmark and write its run directory."""
    cfg.validate()
    out = Path(cfg.out)
    (out / INSTANCE_DIR).mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    tasks = [(cfg, n, instances_dir) for n in cfg.sizes]
    if cfg.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_size_task, tasks))
    else:
        results = [_size_task(t) for t in tasks]

    header = {"type": "header", "schema_version": SCHEMA_VERSION, "tool_version": __version__,
              "config": cfg.to_dict()}
    seeds = {}
    with open(out / RECORDS_FILE, "w") as fh, open(out / WALLCLOCK_FILE, "w") as wf:
        fh.write(dumps(header) + "\n")
        for n, g, recs, walls in results:
            log.info("size %d: %d records", n, len(recs))
            if g is not None:
                store_instance(g, out / INSTANCE_DIR / instance_filename(n))
                seeds[str(n)] = g.seed
            for rec in recs:
                fh.write(dumps(rec) + "\n")
            for w in walls:
                wf.write(dumps(w) + "\n")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "config": cfg.to_dict(),
        "instance_seeds": seeds,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    (out / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return out


def run_qaoa_benchmark(cfg: BenchmarkConfig, instances_dir=None) -> Path:
    if cfg.solver != "qaoa" or cfg.method != 2:
        raise ValueError("run_qaoa_benchmark needs solver=qaoa, method=2")
    return run_benchmark(cfg, instances_dir)


def run_method1_qaoa(cfg: BenchmarkConfig, instances_dir=None) -> Path:
    if cfg.solver != "qaoa" or cfg.method != 1:
        raise ValueError("run_method1_qaoa needs solver=qaoa, method=1")
    return run_benchmark(cfg, instances_dir)


def run_qa_benchmark(cfg: BenchmarkConfig, instances_dir=None) -> Path:
    if cfg.solver != "qa":
        raise ValueError("run_qa_benchmark needs solver=qa")
    if cfg.method == 1:
        cfg.anneal_max = cfg.anneal_min
    return run_benchmark(cfg, instances_dir)


# --- reading runs -------------------------------------------------------------------

@dataclass
class RunData:
    path: Path
    header: dict
    records: List[dict]

    @property
    def config(self) -> BenchmarkConfig:
        return BenchmarkConfig.from_dict(self.header["config"])

    def of_type(self, kind: str) -> List[dict]:
        return [r for r in self.records if r.get("type") == kind]

    def instance(self, n: int) -> GraphInstance:
        return load_instance(self.path / INSTANCE_DIR / instance_filename(n))


def load_run(path) -> RunData:
    path = Path(path)
    lines = (path / RECORDS_FILE).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path / RECORDS_FILE} is empty")
    header = json.loads(lines[0])
    if header.get("type") != "header":
        raise ValueError(f"{path / RECORDS_FILE} does not start with a header line")
    if header.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {header.get('schema_version')}")
    return RunData(path, header, [json.loads(l) for l in lines[1:] if l.strip()])


def iter_records(records: Iterable[dict], kind: str = "iteration"):
    return (r for r in records if r.get("type") == kind)
