"""Solution-quality ratios and the execution-time model.

All four ratios are normalized by ``|E_min|`` and reported as nonnegative
values in [0, 1] (1 is optimal); energies are ``E = -cut``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .samples import SampleSet

DEFAULT_ALPHA = 0.1
DEFAULT_ETA = 0.5

RATIO_NAMES = ("approximation_ratio", "cvar_ratio", "gibbs_ratio", "best_measurement_ratio")
OBJECTIVE_FIELDS = {
    "ar": "approximation_ratio",
    "cvar": "cvar_ratio",
    "gibbs": "gibbs_ratio",
    "best": "best_measurement_ratio",
}


class DegenerateInstanceError(ValueError):
    """The instance has no edges to cut (E_min = 0)."""


@dataclass(frozen=True)
class QualityRecord:
    energy_expectation: float
    approximation_ratio: float
    cvar_ratio: float
    gibbs_ratio: float
    best_measurement_ratio: float
    optimality_gap_pct: float
    alpha: float = DEFAULT_ALPHA
    eta: float = DEFAULT_ETA

    def ratio(self, name: str) -> float:
        return getattr(self, OBJECTIVE_FIELDS.get(name, name))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "QualityRecord":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


def optimality_gap(ratio: float) -> float:
    return (1.0 - ratio) * 100.0


def _cut_arrays(samples, evaluator):
    """``(cut sizes, counts)`` from a SampleSet, a cut histogram, or arrays."""
    if isinstance(samples, SampleSet):
        if callable(evaluator):
            keys = sorted(samples.counts)
            return (np.array([evaluator(k) for k in keys], dtype=np.int64),
                    np.array([samples.counts[k] for k in keys], dtype=np.int64))
        if isinstance(evaluator, np.ndarray):
            idx, cnt = samples.arrays()
            return evaluator[idx].astype(np.int64), cnt
        return samples.cuts(evaluator)
    if isinstance(samples, Mapping):
        items = sorted((int(k), int(v)) for k, v in samples.items() if int(v) > 0)
        if not items:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        c, k = zip(*items)
        return np.asarray(c, dtype=np.int64), np.asarray(k, dtype=np.int64)
    cuts, counts = samples
    return np.asarray(cuts, dtype=np.int64), np.asarray(counts, dtype=np.int64)


def quality_record(
    samples,
    evaluator=None,
    e_min: Optional[float] = None,
    alpha: float = DEFAULT_ALPHA,
    eta: float = DEFAULT_ETA,
) -> QualityRecord:
    """All quality ratios for one batch of measurements.

    ``samples`` is a SampleSet (with ``evaluator`` a cost table indexed by
    basis state, a cut function of a bitstring, or an edge list), or directly a
    ``{cut: count}`` histogram. ``e_min`` is the (negative) ground energy,
    i.e. minus the optimal cut.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    if e_min is None:
        raise ValueError("e_min is required")
    if e_min >= 0:
        raise DegenerateInstanceError(f"ground energy must be negative, got {e_min}")
    cuts, counts = _cut_arrays(samples, evaluator)
    shots = int(counts.sum())
    if shots == 0:
        raise ValueError("empty sample set")
    scale = abs(float(e_min))
    energies = -cuts.astype(float)

    mean_e = float(energies @ counts) / shots

    # lowest ceil(alpha * N) energies = largest cuts
    tail = math.ceil(alpha * shots - 1e-12)
    order = np.argsort(energies, kind="stable")
    taken = np.minimum(counts[order], np.maximum(0, tail - np.concatenate(([0], np.cumsum(counts[order])[:-1]))))
    cvar = float(energies[order] @ taken) / tail

    # ln <exp(-eta E)>, evaluated stably
    log_mean = float(logsumexp(-eta * energies, b=counts / shots))
    gibbs = log_mean / (eta * scale)

    best = float(energies.min())

    ar = abs(mean_e) / scale
    return QualityRecord(
        energy_expectation=mean_e,
        approximation_ratio=ar,
        cvar_ratio=abs(cvar) / scale,
        gibbs_ratio=min(max(gibbs, 0.0), 1.0),
        best_measurement_ratio=abs(best) / scale,
        optimality_gap_pct=optimality_gap(ar),
        alpha=alpha,
        eta=eta,
    )


@dataclass(frozen=True)
class DistributionStats:
    values: np.ndarray
    counts: np.ndarray
    quartiles: tuple

    def per_shot(self) -> np.ndarray:
        return np.repeat(self.values, self.counts)


def distribution_stats(samples, optimal_cut: int, evaluator=None) -> DistributionStats:
    """Per-shot normalized gaps ``1 - cut / optimal`` and their quartiles.

    Quartiles use linear interpolation between order statistics.
    """
    cuts, counts = _cut_arrays(samples, evaluator)
    if counts.sum() == 0:
        raise ValueError("empty sample set")
    if optimal_cut <= 0:
        raise DegenerateInstanceError("optimal cut must be positive")
    values = 1.0 - cuts / float(optimal_cut)
    order = np.argsort(values, kind="stable")
    values, counts = values[order], counts[order]
    q = np.percentile(np.repeat(values, counts), [25, 50, 75])
    return DistributionStats(values, counts, tuple(float(v) for v in q))


# --- timing -----------------------------------------------------------------

@dataclass(frozen=True)
class DeviceProfile:
    """Throughput constants in seconds; anneal times are given in microseconds."""

    name: str
    paradigm: str = "gate"
    t_init: float = 0.0
    t_shot: float = 0.0
    t_delay: float = 0.0
    t_compile: float = 0.0
    t_load: float = 0.0
    t_queue: float = 0.0
    t_create: float = 0.0
    t_optimize: float = 0.0
    t_programming: float = 0.0
    t_readout_per_read: float = 0.0
    t_embed: float = 0.0
    t_sample: float = 0.0
    t_resolve: float = 0.0
    description: str = ""

    def __post_init__(self):
        if self.paradigm not in ("gate", "anneal"):
            raise ValueError(f"paradigm must be 'gate' or 'anneal', got {self.paradigm!r}")
        for f in fields(self):
            if f.type in ("float", float) and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")

    @property
    def seconds_per_shot(self) -> float:
        return self.t_shot + self.t_delay

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DeviceProfile":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown device profile fields: {sorted(unknown)}")
        return cls(**d)


# Per-shot rates come from the shots-difference arithmetic on published runs:
# 0.43 ms/shot (superconducting), 14.6 ms/shot (ion trap), and the annealer's
# ~16 ms programming plus ~0.25 ms readout per read.
PRESETS: Dict[str, DeviceProfile] = {
    "ideal": DeviceProfile(name="ideal", description="zero-cost device"),
    "superconducting": DeviceProfile(
        name="superconducting",
        t_init=3.17,
        t_shot=0.43e-3,
        t_create=0.01,
        t_optimize=0.005,
        description="superconducting transmon class, 0.43 ms/shot",
    ),
    "ion-trap": DeviceProfile(
        name="ion-trap",
        t_shot=14.6e-3,
        t_create=0.01,
        t_optimize=0.005,
        description="trapped-ion class, 14.6 ms/shot",
    ),
    "annealer": DeviceProfile(
        name="annealer",
        paradigm="anneal",
        t_programming=16e-3,
        t_readout_per_read=0.25e-3,
        description="annealer class, 16 ms programming + 0.25 ms readout per read",
    ),
}


def load_profile(name_or_path: str) -> DeviceProfile:
    if name_or_path in PRESETS:
        return PRESETS[name_or_path]
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        return DeviceProfile.from_dict(json.loads(path.read_text()))
    raise ValueError(f"unknown device profile {name_or_path!r}; presets: {sorted(PRESETS)}")


@dataclass(frozen=True)
class TimingBreakdown:
    t_quantum: float
    t_elapsed_quantum: float
    t_classical: float
    cum_quantum: float
    cum_elapsed_quantum: float
    cum_classical: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TimingBreakdown":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


def gate_quantum_time(profile: DeviceProfile, shots: int) -> float:
    return profile.t_init + shots * (profile.t_shot + profile.t_delay)


def gate_elapsed_time(profile: DeviceProfile, shots: int) -> float:
    return profile.t_queue + profile.t_compile + profile.t_load + gate_quantum_time(profile, shots)


def anneal_quantum_time(profile: DeviceProfile, reads: int, anneal_time_us: float) -> float:
    return profile.t_programming + reads * (anneal_time_us * 1e-6 + profile.t_readout_per_read)


def anneal_elapsed_time(profile: DeviceProfile, reads: int, anneal_time_us: float) -> float:
    return (profile.t_queue + profile.t_embed + profile.t_sample
            + anneal_quantum_time(profile, reads, anneal_time_us) + profile.t_resolve)


def accumulate(quantum: Sequence[float], elapsed: Sequence[float], classical: Sequence[float]) -> List[TimingBreakdown]:
    """Per-iteration breakdowns with running totals."""
    out = []
    cq = ce = cc = 0.0
    for q, e, c in zip(quantum, elapsed, classical):
        cq += q
        ce += e
        cc += c
        out.append(TimingBreakdown(q, e, c, cq, ce, cc))
    return out


def gate_model_timing(
    profile: DeviceProfile,
    shots,
    classical_times: Optional[Sequence[float]] = None,
    iterations: Optional[int] = None,
) -> List[TimingBreakdown]:
    """Timing for a sequence of ansatz executions.

    ``shots`` is a count (repeated ``iterations`` times, or once per classical
    time) or a per-iteration sequence. ``classical_times`` defaults to the
    profile's modeled ``t_create + t_optimize``.
    """
    if np.ndim(shots) == 0:
        k = iterations if iterations is not None else (len(classical_times) if classical_times is not None else 1)
        shots = [int(shots)] * k
    if classical_times is None:
        classical_times = [profile.t_create + profile.t_optimize] * len(shots)
    if len(classical_times) != len(shots):
        raise ValueError("need one classical time per iteration")
    q = [gate_quantum_time(profile, s) for s in shots]
    e = [gate_elapsed_time(profile, s) for s in shots]
    return accumulate(q, e, classical_times)


def annealing_timing(
    profile: DeviceProfile,
    reads: int,
    anneal_times,
    classical_times: Optional[Sequence[float]] = None,
) -> List[TimingBreakdown]:
    """Timing for one or more anneal executions (anneal times in microseconds)."""
    if np.ndim(anneal_times) == 0:
        anneal_times = [float(anneal_times)]
    if classical_times is None:
        classical_times = [profile.t_create + profile.t_optimize] * len(anneal_times)
    q = [anneal_quantum_time(profile, reads, a) for a in anneal_times]
    e = [anneal_elapsed_time(profile, reads, a) for a in anneal_times]
    return accumulate(q, e, classical_times)
