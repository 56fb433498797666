"""Plot data for the five report families, derived purely from run records.

Every builder returns a small dataclass with ``to_dict`` (JSON payload) and
``to_rows`` (flat table for CSV); :mod:`qopt_bench.plotting` draws them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .graphs import GraphInstance
from .hamiltonian import STATEVECTOR_LIMIT, diagonal_cost_table
from .metrics import OBJECTIVE_FIELDS, RATIO_NAMES, distribution_stats, optimality_gap
from .samples import histogram_from_mapping

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1
VIOLIN_BINS = 50
QAOA_COLOR_SCALE = (0.0, 1.0)
QA_COLOR_SCALE = (0.9, 1.0)
TIME_FIELDS = {
    "quantum": ("t_quantum", "cum_quantum"),
    "elapsed": ("t_elapsed_quantum", "cum_elapsed_quantum"),
    "classical": ("t_classical", "cum_classical"),
}


class ReportError(ValueError):
    pass


def _finite(x: float, lo: float = -math.inf, hi: float = math.inf) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ReportError(f"non-finite value {x} in plot data")
    return min(max(x, lo), hi)


def _ratio_field(name: str) -> str:
    if name in OBJECTIVE_FIELDS:
        return OBJECTIVE_FIELDS[name]
    if name in RATIO_NAMES:
        return name
    raise ReportError(f"unknown ratio {name!r}")


def _best_restarts(records: Sequence[dict]) -> Dict[int, int]:
    return {r["size"]: r["best_restart"] for r in records if r.get("type") == "group"}


# --- area plots -----------------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    x_start: float
    width: float
    color_value: float


@dataclass
class AreaPlotData:
    solver: str
    layout: str
    time_field: str
    ratio: str
    color_scale: tuple
    rows: Dict[int, List[Rect]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "plot": "area", "schema_version": REPORT_SCHEMA_VERSION,
            "solver": self.solver, "layout": self.layout, "time_field": self.time_field,
            "ratio": self.ratio, "color_scale": list(self.color_scale),
            "rows": [{"size": n, "rects": [vars(r) for r in rects]} for n, rects in sorted(self.rows.items())],
        }

    def to_rows(self) -> List[dict]:
        return [{"size": n, "index": k, "x_start": r.x_start, "width": r.width, "color_value": r.color_value}
                for n, rects in sorted(self.rows.items()) for k, r in enumerate(rects)]


def area_plot_data(records: Sequence[dict], time_field: str = "quantum", ratio: str = "ar") -> AreaPlotData:
    """Rectangles per problem size: width = execution time, color = quality.

    QAOA iterations are stacked along cumulative time; QA executions restart
    from scratch and are overlaid from x = 0. With several restarts the best
    restart of each size is shown.
    """
    if time_field not in TIME_FIELDS:
        raise ReportError(f"time field must be one of {sorted(TIME_FIELDS)}")
    ratio_key = _ratio_field(ratio)
    iters = [r for r in records if r.get("type") == "iteration"]
    solvers = {r["solver"] for r in iters}
    if len(solvers) > 1:
        raise ReportError(f"records mix solvers {sorted(solvers)}")
    solver = solvers.pop() if solvers else "qaoa"
    layout = "overlaid" if solver == "qa" else "stacked"
    scale = QA_COLOR_SCALE if solver == "qa" else QAOA_COLOR_SCALE
    data = AreaPlotData(solver, layout, time_field, ratio, scale)
    best = _best_restarts(records)
    per_key, cum_key = TIME_FIELDS[time_field]
    for r in iters:
        n = r["size"]
        if r["restart"] != best.get(n, 1):
            continue
        width = _finite(r["timing"][per_key], 0.0)
        x0 = 0.0 if layout == "overlaid" else _finite(r["timing"][cum_key] - r["timing"][per_key], 0.0)
        data.rows.setdefault(n, []).append(Rect(x0, width, _finite(r["quality"][ratio_key], 0.0, 1.0)))
    if layout == "stacked":
        # re-anchor each rectangle on its predecessor so the rows abut exactly
        for rects in data.rows.values():
            x = 0.0
            for k, rect in enumerate(rects):
                rects[k] = Rect(x, rect.width, rect.color_value)
                x += rect.width
    return data


# --- optimality gaps ------------------------------------------------------------

@dataclass
class OptgapSummary:
    sizes: List[int] = field(default_factory=list)
    gaps: Dict[str, List[float]] = field(default_factory=dict)
    quartiles: List[tuple] = field(default_factory=list)
    violins: List[List[float]] = field(default_factory=list)
    bin_edges: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "plot": "optgap", "schema_version": REPORT_SCHEMA_VERSION,
            "bin_edges": self.bin_edges,
            "sizes": [
                {"size": n, "gaps": {k: v[i] for k, v in self.gaps.items()},
                 "quartiles": list(self.quartiles[i]), "violin": self.violins[i]}
                for i, n in enumerate(self.sizes)
            ],
        }

    def to_rows(self) -> List[dict]:
        rows = []
        for i, n in enumerate(self.sizes):
            row = {"size": n}
            row.update({f"gap_{k}": v[i] for k, v in self.gaps.items()})
            row.update({"q1": self.quartiles[i][0], "q2": self.quartiles[i][1], "q3": self.quartiles[i][2]})
            rows.append(row)
        return rows


def _final_records(records: Sequence[dict]) -> List[dict]:
    groups = [r for r in records if r.get("type") == "group"]
    if groups:
        return sorted(groups, key=lambda r: r["size"])
    # method-1 runs: one record per size at the largest shots/rounds setting
    fid = {}
    for r in records:
        if r.get("type") == "fidelity":
            fid[r["size"]] = r
    return [fid[n] for n in sorted(fid)]


def optgap_summary_data(records: Sequence[dict]) -> OptgapSummary:
    """Final optimality gaps for all four ratios plus the per-shot gap distribution."""
    edges = np.linspace(0.0, 1.0, VIOLIN_BINS + 1)
    out = OptgapSummary(gaps={k: [] for k in RATIO_NAMES}, bin_edges=[float(e) for e in edges])
    for r in _final_records(records):
        hist = histogram_from_mapping(r["cut_histogram"])
        reference = r.get("reference_cut") or r.get("optimal_cut")
        if reference is None:
            reference = max(hist)
        stats = distribution_stats(hist, int(reference))
        out.sizes.append(r["size"])
        for k in RATIO_NAMES:
            out.gaps[k].append(_finite(optimality_gap(r["quality"][k]), 0.0, 100.0))
        out.quartiles.append(tuple(_finite(q, 0.0, 1.0) for q in stats.quartiles))
        counts, _ = np.histogram(np.clip(stats.values, 0.0, 1.0), bins=edges, weights=stats.counts)
        total = counts.sum()
        out.violins.append([float(c / total) for c in counts])
    return out


# --- cut-size distribution -------------------------------------------------------

@dataclass
class CutsizeDistribution:
    size: int
    optimal_cut: int
    empirical: Dict[int, int]
    baseline: Dict[int, float]
    baseline_exact: bool
    markers: Dict[str, float]

    def to_dict(self) -> dict:
        return {
            "plot": "cutsize", "schema_version": REPORT_SCHEMA_VERSION, "size": self.size,
            "optimal_cut": self.optimal_cut, "baseline_exact": self.baseline_exact,
            "empirical": {str(k): v for k, v in self.empirical.items()},
            "baseline": {str(k): v for k, v in self.baseline.items()},
            "markers": self.markers,
        }

    def to_rows(self) -> List[dict]:
        cuts = sorted(set(self.empirical) | set(self.baseline))
        shots = sum(self.empirical.values()) or 1
        return [{"cut_size": c, "empirical_count": self.empirical.get(c, 0),
                 "empirical_probability": self.empirical.get(c, 0) / shots,
                 "baseline_probability": self.baseline.get(c, 0.0)} for c in cuts]


def uniform_cut_baseline(g: GraphInstance, limit: int = STATEVECTOR_LIMIT, samples: int = 100_000, seed: int = 0):
    """Cut-size law of uniformly random bitstrings: exact when enumerable, else sampled."""
    if g.num_nodes <= limit:
        dist = diagonal_cost_table(g, limit).cut_distribution()
        total = dist.sum()
        return {int(c): float(v / total) for c, v in enumerate(dist) if v}, True
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(samples, g.num_nodes), dtype=np.uint8)
    e = g.edge_array()
    cuts = (bits[:, e[:, 0]] ^ bits[:, e[:, 1]]).sum(axis=1)
    vals, counts = np.unique(cuts, return_counts=True)
    return {int(c): float(k / samples) for c, k in zip(vals, counts)}, False


def cutsize_distribution_data(record: dict, g: GraphInstance, limit: int = STATEVECTOR_LIMIT) -> CutsizeDistribution:
    """Empirical cut histogram of a final record against the uniform-random law."""
    hist = histogram_from_mapping(record["cut_histogram"])
    reference = record.get("reference_cut") or g.optimal_cut_size or max(hist)
    baseline, exact = uniform_cut_baseline(g, limit)
    if not exact:
        log.warning("size %d exceeds the cost-table limit; baseline is sampled", g.num_nodes)
    markers = {k: _finite(record["quality"][k], 0.0, 1.0) * reference for k in RATIO_NAMES}
    return CutsizeDistribution(g.num_nodes, int(reference), hist, baseline, exact, markers)


# --- volumetric -----------------------------------------------------------------------

@dataclass
class VolumetricData:
    cells: List[dict]
    backdrop: Optional[dict]

    def to_dict(self) -> dict:
        return {"plot": "volumetric", "schema_version": REPORT_SCHEMA_VERSION,
                "cells": self.cells, "backdrop": self.backdrop}

    def to_rows(self) -> List[dict]:
        return [dict(c) for c in self.cells]


def volumetric_data(records: Sequence[dict], quantum_volume: Optional[int] = 32) -> VolumetricData:
    """Mean normalized fidelity per (width, depth) cell of method-1 records."""
    acc: Dict[tuple, List[float]] = {}
    for r in records:
        if r.get("type") != "fidelity":
            continue
        res = r["resources"]
        acc.setdefault((res["width"], res["algorithmic_depth"]), []).append(r["normalized_fidelity"])
    cells = [{"width": w, "depth": d, "normalized_fidelity": _finite(np.mean(v), 0.0, 1.0), "count": len(v)}
             for (w, d), v in sorted(acc.items())]
    backdrop = None
    if quantum_volume:
        side = int(math.log2(quantum_volume))
        backdrop = {"quantum_volume": quantum_volume, "max_width": side, "max_depth": side}
    return VolumetricData(cells, backdrop)


# --- rendering ------------------------------------------------------------------------

def write_json(data, path) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(data.to_dict(), indent=1, sort_keys=True, allow_nan=False) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def write_csv(data, path) -> Path:
    path = Path(path)
    rows = data.to_rows()
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    try:
        path.write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def render(data, fmt: str, path) -> Path:
    """Write plot data as ``json``, ``csv`` or ``svg``. Output is deterministic."""
    if fmt == "json":
        return write_json(data, path)
    if fmt == "csv":
        return write_csv(data, path)
    if fmt == "svg":
        from .plotting import render_svg

        return render_svg(data, path)
    raise ReportError(f"unknown format {fmt!r}")
