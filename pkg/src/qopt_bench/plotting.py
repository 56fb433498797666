"""Minimal SVG renderings of report and strategy plot data.

Colors map a ratio in the plot's color scale onto matplotlib's ``viridis``
colormap (dark purple = low quality, yellow = high). Output is byte-stable:
the SVG hash salt is fixed and no creation date is embedded.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import colormaps, rcParams
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.colors import Normalize
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle

COLORMAP = "viridis"
RATIO_LABELS = {
    "approximation_ratio": "AR",
    "cvar_ratio": "CVaR",
    "gibbs_ratio": "Gibbs",
    "best_measurement_ratio": "best",
}


def _figure(width=6.4, height=4.0):
    fig = Figure(figsize=(width, height))
    FigureCanvasSVG(fig)
    return fig, fig.add_subplot(1, 1, 1)


def _save(fig, path) -> Path:
    path = Path(path)
    rcParams["svg.hashsalt"] = "qopt-bench"
    rcParams["svg.fonttype"] = "none"
    try:
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def _empty(ax, what):
    ax.text(0.5, 0.5, f"no {what} records", ha="center", va="center", transform=ax.transAxes)


def _area(d, ax, fig):
    lo, hi = d["color_scale"]
    norm = Normalize(lo, hi, clip=True)
    cmap = colormaps[COLORMAP]
    rows = d["rows"]
    xmax = 0.0
    for row in rows:
        n = row["size"]
        # draw long rectangles first so overlaid short anneals stay visible
        for r in sorted(row["rects"], key=lambda r: -(r["x_start"] + r["width"])):
            ax.add_patch(Rectangle((r["x_start"], n - 0.8), r["width"], 1.6,
                                   facecolor=cmap(norm(r["color_value"])), edgecolor="white", linewidth=0.3))
            xmax = max(xmax, r["x_start"] + r["width"])
    if not rows:
        _empty(ax, "iteration")
        return
    sizes = [row["size"] for row in rows]
    ax.set_xlim(0, xmax * 1.02 or 1)
    ax.set_ylim(min(sizes) - 1.5, max(sizes) + 1.5)
    ax.set_xlabel(f"cumulative {d['time_field']} time (s)")
    ax.set_ylabel("problem size")
    ax.set_title(f"{d['solver'].upper()} area plot ({d['layout']}, {d['ratio']})")
    fig.colorbar(matplotlib.cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label=d["ratio"])


def _optgap(d, ax, fig):
    sizes = d["sizes"]
    if not sizes:
        _empty(ax, "final")
        return
    names = list(RATIO_LABELS)
    width = 0.8 / len(names)
    for k, name in enumerate(names):
        xs = [i + (k - 1.5) * width for i in range(len(sizes))]
        ax.bar(xs, [s["gaps"][name] for s in sizes], width, label=RATIO_LABELS[name])
    edges = np.asarray(d["bin_edges"])
    centers = (edges[:-1] + edges[1:]) / 2 * 100
    for i, s in enumerate(sizes):
        v = np.asarray(s["violin"])
        if v.max() > 0:
            ax.fill_betweenx(centers, i + 0.45, i + 0.45 + 0.4 * v / v.max(), color="pink", step="mid")
        for q in s["quartiles"]:
            ax.plot([i + 0.42, i + 0.48], [q * 100, q * 100], color="black", linewidth=0.8)
    ax.set_xticks(range(len(sizes)), [str(s["size"]) for s in sizes])
    ax.set_xlabel("problem size")
    ax.set_ylabel("optimality gap (%)")
    ax.set_ylim(0, 100)
    ax.legend(fontsize="small")


def _cutsize(d, ax, fig):
    emp = {int(k): v for k, v in d["empirical"].items()}
    base = {int(k): v for k, v in d["baseline"].items()}
    shots = sum(emp.values()) or 1
    if emp:
        ax.bar(sorted(emp), [emp[c] / shots for c in sorted(emp)], color="tab:blue", label="measured")
    xs = sorted(base)
    ax.plot(xs, [base[c] for c in xs], color="pink", linewidth=2,
            label="uniform random" + ("" if d["baseline_exact"] else " (sampled)"))
    for k, (name, x) in enumerate(sorted(d["markers"].items())):
        ax.axvline(x, color=f"C{k + 1}", linestyle="--", linewidth=1, label=RATIO_LABELS.get(name, name))
    ax.axvline(d["optimal_cut"], color="black", linewidth=1, label="optimal")
    ax.set_xlabel("cut size")
    ax.set_ylabel("probability")
    ax.set_title(f"cut-size distribution, n = {d['size']}")
    ax.legend(fontsize="small")


def _volumetric(d, ax, fig):
    cells = d["cells"]
    back = d["backdrop"]
    if back:
        ax.add_patch(Rectangle((0.5, 0.5), back["max_width"], back["max_depth"], facecolor="0.85",
                               edgecolor="0.3", label=f"QV {back['quantum_volume']}"))
    norm = Normalize(0.0, 1.0, clip=True)
    cmap = colormaps[COLORMAP]
    for c in cells:
        ax.add_patch(Rectangle((c["width"] - 0.4, c["depth"] - 0.4), 0.8, 0.8,
                               facecolor=cmap(norm(c["normalized_fidelity"])), edgecolor="black", linewidth=0.3))
    if not cells:
        _empty(ax, "fidelity")
    wmax = max([c["width"] for c in cells] + [back["max_width"] if back else 1]) + 1
    dmax = max([c["depth"] for c in cells] + [back["max_depth"] if back else 1]) + 1
    ax.set_xlim(0, wmax)
    ax.set_yscale("log")
    ax.set_ylim(0.5, dmax * 1.5)
    ax.set_xlabel("circuit width (qubits)")
    ax.set_ylabel("circuit depth")
    fig.colorbar(matplotlib.cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label="normalized fidelity")


def _performance(d, ax, fig):
    grid = d["grid"]
    for key, label, style in (("virtual_best", "virtual best", "-"), ("recommended", "recommended", "--")):
        ys = [np.nan if v is None else v for v in d["test_curves"][key]]
        ax.plot(grid, ys, style, label=label)
    if d.get("reference_resource"):
        ax.axvline(d["reference_resource"], color="gray", linestyle=":", label="reference setting")
    ax.set_xscale("log")
    ax.set_xlabel("resource (restarts x iterations x shots)")
    ax.set_ylabel(d.get("quality_label", "quality"))
    ax.legend(fontsize="small")


def _strategy(d, ax, fig):
    grid = d["grid"]
    for k, name in enumerate(("restarts", "iterations", "shots")):
        rec = [np.nan if v is None else v[name] for v in d["recommended"]]
        ax.plot(grid, rec, "-", color=f"C{k}", label=f"{name} (recommended)")
        vb = d.get("virtual_best_params", {}).get(name)
        if vb:
            ax.plot(grid, [np.nan if v is None else v for v in vb], ":", color=f"C{k}", label=f"{name} (virtual best)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("resource (restarts x iterations x shots)")
    ax.set_ylabel("parameter value")
    ax.legend(fontsize="small")


_DRAW = {
    "area": _area,
    "optgap": _optgap,
    "cutsize": _cutsize,
    "volumetric": _volumetric,
    "performance": _performance,
    "strategy": _strategy,
}


def render_svg(data, path) -> Path:
    d = data.to_dict() if hasattr(data, "to_dict") else data
    fig, ax = _figure()
    _DRAW[d["plot"]](d, ax, fig)
    fig.tight_layout()
    return _save(fig, path)
