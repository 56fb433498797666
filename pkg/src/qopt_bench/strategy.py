"""Parameter-strategy analysis: resource accounting, virtual best, recommendations.

The resource spent by a QAOA run is ``restarts * iterations * shots``. For each
resource budget we compare two curves on held-out instances: the virtual best
(per-instance best quality at any setting within budget, an upper bound) and
the quality reached by the single setting that did best on training instances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .metrics import OBJECTIVE_FIELDS

Triple = Tuple[int, int, int]
REFERENCE_SETTING = (1, 30, 1000)  # restarts, iterations, shots
_TIE = 1e-12


class StrategyError(ValueError):
    pass


def resource_of(restarts: int, iterations: int, shots: int) -> int:
    for name, v in (("restarts", restarts), ("iterations", iterations), ("shots", shots)):
        if int(v) != v or v < 1:
            raise StrategyError(f"{name} must be a positive integer, got {v}")
    return int(restarts) * int(iterations) * int(shots)


@dataclass(frozen=True)
class ResourcePoint:
    instance: str
    restarts: int
    iterations: int
    shots: int
    quality: float

    @property
    def triple(self) -> Triple:
        return (self.restarts, self.iterations, self.shots)

    @property
    def resource(self) -> int:
        return resource_of(self.restarts, self.iterations, self.shots)


def parse_grid(text: str) -> List[float]:
    """``"log:1:1e6:25"`` -> 25 log-spaced values from 1 to 1e6; ``"lin:a:b:k"`` likewise."""
    try:
        kind, lo, hi, k = text.split(":")
        lo, hi, k = float(lo), float(hi), int(k)
    except ValueError:
        raise StrategyError(f"cannot parse grid {text!r}; expected log:MIN:MAX:COUNT") from None
    if k < 1 or lo <= 0 or hi < lo:
        raise StrategyError(f"invalid grid {text!r}")
    if kind == "log":
        return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), k)]
    if kind == "lin":
        return [float(v) for v in np.linspace(lo, hi, k)]
    raise StrategyError(f"grid kind must be log or lin, got {kind!r}")


def _by_instance(points: Iterable[ResourcePoint]) -> Dict[str, List[ResourcePoint]]:
    out: Dict[str, List[ResourcePoint]] = {}
    for p in points:
        out.setdefault(p.instance, []).append(p)
    return out


def _best_within(points: Sequence[ResourcePoint], r: float) -> Optional[ResourcePoint]:
    best = None
    for p in points:
        if p.resource <= r and (best is None or p.quality > best.quality + _TIE):
            best = p
    return best


def virtual_best(points: Sequence[ResourcePoint], grid: Sequence[float]) -> Dict[str, List[Optional[float]]]:
    """Per-instance envelope: best quality among points with resource <= r.

    Grid values below an instance's smallest resource map to None.
    """
    if not len(grid):
        raise StrategyError("resource grid is empty")
    if not points:
        raise StrategyError("no result points")
    out = {}
    for inst, pts in sorted(_by_instance(points).items()):
        out[inst] = [None if (b := _best_within(pts, r)) is None else b.quality for r in grid]
    return out


def _mean_curve(curves: Iterable[List[Optional[float]]], stat) -> List[Optional[float]]:
    cols = list(zip(*curves))
    return [None if any(v is None for v in col) else float(stat(col)) for col in cols]


@dataclass
class Recommendation:
    grid: List[float]
    recommended: List[Optional[Triple]]
    train_quality: List[Optional[float]]
    test_quality: List[Optional[float]]
    virtual_best_test: List[Optional[float]]
    virtual_best_params: Dict[str, List[Optional[float]]] = field(default_factory=dict)
    train_instances: List[str] = field(default_factory=list)
    test_instances: List[str] = field(default_factory=list)

    def performance_dict(self, quality_label: str = "quality") -> dict:
        return {
            "plot": "performance", "schema_version": 1, "grid": self.grid,
            "quality_label": quality_label,
            "reference_resource": resource_of(*REFERENCE_SETTING),
            "test_curves": {"virtual_best": self.virtual_best_test, "recommended": self.test_quality},
            "train_curve": self.train_quality,
            "train_instances": self.train_instances, "test_instances": self.test_instances,
        }

    def strategy_dict(self) -> dict:
        return {
            "plot": "strategy", "schema_version": 1, "grid": self.grid,
            "recommended": [None if t is None else dict(zip(("restarts", "iterations", "shots"), t))
                            for t in self.recommended],
            "virtual_best_params": self.virtual_best_params,
        }


def recommend_params(
    train: Sequence[ResourcePoint],
    test: Sequence[ResourcePoint],
    grid: Sequence[float],
    statistic: str = "mean",
) -> Recommendation:
    """Pick, per budget, the triple with the best training statistic and score it on test.

    Ties in training quality go to fewer shots, then fewer restarts, then fewer
    iterations.
    """
    if not len(grid):
        raise StrategyError("resource grid is empty")
    stat = {"mean": np.mean, "median": np.median}.get(statistic)
    if stat is None:
        raise StrategyError(f"statistic must be mean or median, got {statistic!r}")
    train_inst, test_inst = _by_instance(train), _by_instance(test)
    if set(train_inst) & set(test_inst):
        raise StrategyError("train and test instance sets overlap")

    def table(groups):
        out: Dict[Triple, Dict[str, float]] = {}
        for inst, pts in groups.items():
            for p in pts:
                out.setdefault(p.triple, {})[inst] = p.quality
        return out

    train_tab, test_tab = table(train_inst), table(test_inst)
    # only triples observed on every training instance compete
    scored = sorted(
        (float(stat(list(q.values()))), t) for t, q in train_tab.items() if len(q) == len(train_inst)
    )
    rec, train_q, test_q = [], [], []
    for r in grid:
        best: Optional[Tuple[float, Triple]] = None
        for q, t in scored:
            if resource_of(*t) > r:
                continue
            key = (t[2], t[0], t[1])
            if best is None or q > best[0] + _TIE or (abs(q - best[0]) <= _TIE and key < (best[1][2], best[1][0], best[1][1])):
                best = (q, t)
        if best is None:
            rec.append(None)
            train_q.append(None)
            test_q.append(None)
            continue
        rec.append(best[1])
        train_q.append(best[0])
        tq = test_tab.get(best[1], {})
        test_q.append(float(stat([tq[i] for i in test_inst])) if tq and len(tq) == len(test_inst) else None)

    vb_curves = virtual_best(test, grid) if test else {}
    vb_test = _mean_curve(vb_curves.values(), stat) if vb_curves else [None] * len(grid)

    # parameters behind the virtual best, averaged over test instances
    vb_params: Dict[str, List[Optional[float]]] = {"restarts": [], "iterations": [], "shots": []}
    for r in grid:
        picks = [_best_within(pts, r) for pts in test_inst.values()]
        for k, name in enumerate(("restarts", "iterations", "shots")):
            vals = [p.triple[k] for p in picks if p is not None]
            vb_params[name].append(float(np.mean(vals)) if vals and len(vals) == len(picks) else None)

    return Recommendation(list(map(float, grid)), rec, train_q, test_q, vb_test, vb_params,
                          sorted(train_inst), sorted(test_inst))


def split_instances(instances: Iterable[str], train_fraction: float = 0.8, seed: int = 0) -> Tuple[List[str], List[str]]:
    """Deterministic train/test split of instance keys."""
    keys = sorted(set(instances))
    if len(keys) < 2:
        raise StrategyError("need at least two instances to split")
    if not 0.0 < train_fraction < 1.0:
        raise StrategyError("train fraction must lie in (0, 1)")
    order = np.random.default_rng(seed).permutation(len(keys))
    k = min(max(1, round(train_fraction * len(keys))), len(keys) - 1)
    return sorted(keys[i] for i in order[:k]), sorted(keys[i] for i in order[k:])


# --- extraction from runs ---------------------------------------------------------

def points_from_records(records: Sequence[dict], shots: int, instance_keys: Dict[int, str], ratio: str = "ar") -> List[ResourcePoint]:
    """Points for every (restarts r, iterations i) prefix of a QAOA run.

    Quality at (r, i) is the best ratio seen within the first ``i`` iterations
    of the first ``r`` restarts.
    """
    key = OBJECTIVE_FIELDS.get(ratio, ratio)
    per: Dict[int, Dict[int, List[float]]] = {}
    for rec in records:
        if rec.get("type") == "iteration" and rec.get("solver") == "qaoa":
            per.setdefault(rec["size"], {}).setdefault(rec["restart"], []).append(rec["quality"][key])
    out = []
    for n, restarts in sorted(per.items()):
        runs = [np.maximum.accumulate(restarts[r]) for r in sorted(restarts)]
        depth = min(len(x) for x in runs)
        for r in range(1, len(runs) + 1):
            for i in range(1, depth + 1):
                q = max(float(x[i - 1]) for x in runs[:r])
                out.append(ResourcePoint(instance_keys[n], r, i, shots, q))
    return out


def points_from_runs(run_dirs: Iterable, ratio: str = "ar") -> List[ResourcePoint]:
    from .runner import load_run

    points = []
    for d in run_dirs:
        run = load_run(d)
        cfg = run.config
        sizes = sorted({r["size"] for r in run.of_type("iteration")})
        keys = {n: f"n{n}-seed{run.instance(n).seed}" for n in sizes}
        points.extend(points_from_records(run.records, cfg.num_shots, keys, ratio))
    if not points:
        raise StrategyError("no QAOA iteration records found in the given runs")
    return points


def analyze(
    run_dirs: Sequence,
    out_dir,
    train_fraction: float = 0.8,
    grid: str = "log:1:1e6:25",
    seed: int = 0,
    ratio: str = "ar",
    statistic: str = "mean",
    formats: Sequence[str] = ("json", "svg"),
) -> Recommendation:
    """Run the full train/test analysis and write performance and strategy plots."""
    points = points_from_runs(run_dirs, ratio)
    train_keys, test_keys = split_instances({p.instance for p in points}, train_fraction, seed)
    train = [p for p in points if p.instance in set(train_keys)]
    test = [p for p in points if p.instance in set(test_keys)]
    rec = recommend_params(train, test, parse_grid(grid), statistic)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, payload in (("performance", rec.performance_dict(ratio)), ("strategy", rec.strategy_dict())):
        if "json" in formats:
            (out / f"{name}.json").write_text(json.dumps(payload, indent=1, sort_keys=True, allow_nan=False) + "\n")
        if "svg" in formats:
            from .plotting import render_svg

            render_svg(payload, out / f"{name}.svg")
    return rec
