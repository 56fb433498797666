"""Derivative-free minimization over QAOA angles with a hard evaluation cap.

One objective evaluation is one ansatz execution and counts as one iteration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .qaoa import AnsatzParams

DEFAULT_MAX_ITERATIONS = 30
BETA_RANGE = (0.0, math.pi)
GAMMA_RANGE = (0.0, 2.0 * math.pi)


class OptimizationError(RuntimeError):
    pass


class AngleConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TraceEntry:
    params: AnsatzParams
    objective_value: float
    eval_index: int


@dataclass
class MinimizerTrace:
    entries: List[TraceEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def best(self) -> TraceEntry:
        # first occurrence wins ties, so the result is reproducible
        return min(self.entries, key=lambda e: (e.objective_value, e.eval_index))


class _Budget(Exception):
    """Raised internally when the evaluation cap is hit."""


class _CountedObjective:
    def __init__(self, fn, max_evals: int, trace: MinimizerTrace, as_params):
        self.fn = fn
        self.max_evals = max_evals
        self.trace = trace
        self.as_params = as_params

    def __call__(self, x) -> float:
        if len(self.trace) >= self.max_evals:
            raise _Budget
        params = self.as_params(np.array(x, dtype=float))
        value = float(self.fn(params))
        if not math.isfinite(value):
            raise OptimizationError(
                f"objective returned {value} at evaluation {len(self.trace)} for {params}"
            )
        self.trace.entries.append(TraceEntry(params, value, len(self.trace)))
        return value


def nelder_mead(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    step: float = 0.5,
    xatol: float = 1e-6,
    fatol: float = 1e-9,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
) -> None:
    """Standard Nelder-Mead simplex; runs until convergence or ``f`` raises.

    Trial points are clipped into ``bounds`` when given.
    """
    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    x0 = np.asarray(x0, dtype=float)
    d = len(x0)
    if bounds is not None:
        lo = np.array([b[0] for b in bounds])
        hi = np.array([b[1] for b in bounds])
        clip = lambda x: np.clip(x, lo, hi)  # noqa: E731
    else:
        clip = lambda x: x  # noqa: E731

    simplex = [clip(x0)]
    for k in range(d):
        x = x0.copy()
        x[k] += step
        simplex.append(clip(x))
    values = [f(x) for x in simplex]
    while True:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        spread = max(np.max(np.abs(x - simplex[0])) for x in simplex[1:]) if d else 0.0
        if spread <= xatol and values[-1] - values[0] <= fatol:
            return
        centroid = np.mean(simplex[:-1], axis=0)
        xr = clip(centroid + alpha * (centroid - simplex[-1]))
        fr = f(xr)
        if values[0] <= fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[0]:
            xe = clip(centroid + gamma * (xr - centroid))
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = clip(centroid + rho * (xr - centroid))
            fc = f(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = clip(centroid + rho * (simplex[-1] - centroid))
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for i in range(1, d + 1):
            simplex[i] = clip(simplex[0] + sigma * (simplex[i] - simplex[0]))
            values[i] = f(simplex[i])


def _cobyla(f, x0, step: float = 0.5, **_) -> None:
    from scipy.optimize import minimize

    # maxiter is scipy's evaluation cap; the counted objective enforces ours
    minimize(f, x0, method="COBYLA", options={"rhobeg": step, "maxiter": 10**6, "tol": 1e-8})


MINIMIZERS = {"nelder-mead": nelder_mead, "cobyla": _cobyla}


def minimize(
    objective: Callable[[AnsatzParams], float],
    initial: AnsatzParams,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    method: str = "nelder-mead",
    step: float = 0.5,
    bounds: Optional[Sequence[Tuple[float, float]]] = None,
) -> Tuple[AnsatzParams, MinimizerTrace]:
    """Minimize ``objective`` with at most ``max_iterations`` evaluations.

    Returns the best parameters seen and the full evaluation trace. A
    non-finite objective value aborts with :class:`OptimizationError`.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    try:
        run = MINIMIZERS[method]
    except KeyError:
        raise ValueError(f"unknown minimizer {method!r}; choose from {sorted(MINIMIZERS)}") from None
    trace = MinimizerTrace()
    counted = _CountedObjective(objective, max_iterations, trace, AnsatzParams.from_vector)
    try:
        if method == "nelder-mead":
            run(counted, initial.to_vector(), step=step, bounds=bounds)
        else:
            run(counted, initial.to_vector(), step=step)
    except _Budget:
        pass
    if not trace.entries:
        counted(initial.to_vector())
    return trace.best().params, trace


def load_angle_table(path) -> dict:
    """Read a fixed-angle table ``{p: {betas, gammas, source}}`` from JSON."""
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise AngleConfigError(f"cannot read angle table {path}: {exc}") from None
    table = {}
    for key, entry in raw.items():
        try:
            p = int(key)
            betas, gammas = entry["betas"], entry["gammas"]
        except (ValueError, KeyError, TypeError):
            raise AngleConfigError(f"malformed angle table entry {key!r} in {path}") from None
        if len(betas) != p or len(gammas) != p:
            raise AngleConfigError(f"entry for p={p} must list {p} betas and {p} gammas")
        table[p] = {"betas": list(map(float, betas)), "gammas": list(map(float, gammas)),
                    "source": str(entry.get("source", ""))}
    return table


def initial_angles(p: int, mode: str = "default", seed=None, table: Optional[dict] = None) -> AnsatzParams:
    """Starting angles: all ones, uniform random, or a fixed-table lookup.

    Random betas are drawn from [0, pi) and gammas from [0, 2*pi).
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if mode == "default":
        return AnsatzParams((1.0,) * p, (1.0,) * p)
    if mode == "random":
        rng = np.random.default_rng(seed)
        betas = rng.uniform(*BETA_RANGE, size=p)
        gammas = rng.uniform(*GAMMA_RANGE, size=p)
        return AnsatzParams(tuple(betas), tuple(gammas))
    if mode == "fixed":
        if not table:
            raise AngleConfigError("fixed angle mode needs an angle table")
        entry = table.get(p, table.get(str(p)))
        if entry is None:
            raise AngleConfigError(f"angle table has no entry for p={p}")
        return AnsatzParams(tuple(entry["betas"]), tuple(entry["gammas"]))
    raise AngleConfigError(f"unknown angle mode {mode!r}")
