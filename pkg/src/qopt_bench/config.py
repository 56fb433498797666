"""Benchmark configuration: defaults, range syntax, file loading, validation."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple

from .metrics import OBJECTIVE_FIELDS, PRESETS


class ConfigError(ValueError):
    pass


_INT_RANGE = re.compile(r"^\s*(\d+)\s*(?:\.\.\s*(\d+)\s*(?::\s*(\d+))?)?\s*$")
_GEOM_RANGE = re.compile(r"^\s*([\d.]+)\s*(?:\.\.\s*([\d.]+)\s*(?:x\s*([\d.]+))?)?\s*$")


def parse_int_range(text: str) -> Tuple[int, int, int]:
    """``"4..16:2"`` -> (4, 16, 2); ``"8"`` -> (8, 8, 1). Bounds are inclusive."""
    m = _INT_RANGE.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse range {text!r}; expected MIN..MAX[:STEP]")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) else lo
    step = int(m.group(3)) if m.group(3) else 1
    if lo > hi:
        raise ConfigError(f"range {text!r} is empty: {lo} > {hi}")
    if step < 1:
        raise ConfigError(f"range step must be >= 1 in {text!r}")
    return lo, hi, step


def parse_int_list(text) -> List[int]:
    """Comma-separated integers or ranges: ``"1000,5000"``, ``"1..8"``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    out: List[int] = []
    for part in str(text).split(","):
        lo, hi, step = parse_int_range(part)
        out.extend(range(lo, hi + 1, step))
    return out


def parse_anneal_range(text: str) -> Tuple[float, float, float]:
    """``"1..256x2"`` -> (1, 256, 2); ``"20"`` -> a single anneal time."""
    m = _GEOM_RANGE.match(str(text))
    if not m:
        raise ConfigError(f"cannot parse anneal range {text!r}; expected MIN..MAXxFACTOR")
    lo = float(m.group(1))
    hi = float(m.group(2)) if m.group(2) else lo
    factor = float(m.group(3)) if m.group(3) else 2.0
    if lo <= 0 or lo > hi:
        raise ConfigError(f"anneal range {text!r} must satisfy 0 < min <= max")
    if factor <= 1.0 and hi > lo:
        raise ConfigError("anneal growth factor must exceed 1")
    return lo, hi, factor


def anneal_times(lo: float, hi: float, factor: float) -> List[float]:
    lo, hi, factor = float(lo), float(hi), float(factor)
    out = [lo]
    while out[-1] * factor <= hi * (1 + 1e-9) and hi > lo:
        out.append(out[-1] * factor)
    return out


@dataclass
class BenchmarkConfig:
    solver: str = "qaoa"
    method: int = 2
    min_size: int = 4
    max_size: int = 12
    size_step: int = 2
    max_restarts: int = 1
    num_shots: int = 1000
    rounds: int = 2
    max_iterations: int = 30
    objective: str = "ar"
    angle_mode: str = "default"
    angle_table: Optional[str] = None
    minimizer: str = "nelder-mead"
    anneal_min: float = 1.0
    anneal_max: float = 256.0
    anneal_factor: float = 2.0
    profile: Optional[str] = None
    noise: str = "noiseless"
    seed: int = 0
    instance_seed: Optional[int] = None
    alpha: float = 0.1
    eta: float = 0.5
    shots_list: List[int] = field(default_factory=lambda: [1000])
    rounds_list: List[int] = field(default_factory=lambda: [2])
    statevector_limit: int = 20
    anneal_qubit_limit: int = 14
    exhaustion_limit: int = 24
    time_scale: float = 10.0
    proxy_sweeps_per_us: float = 1.0
    jobs: int = 1
    out: str = "runs/latest"

    @property
    def sizes(self) -> List[int]:
        return list(range(self.min_size, self.max_size + 1, self.size_step))

    @property
    def anneal_schedule_times(self) -> List[float]:
        return anneal_times(self.anneal_min, self.anneal_max, self.anneal_factor)

    @property
    def profile_name(self) -> str:
        if self.profile:
            return self.profile
        return "annealer" if self.solver == "qa" else "superconducting"

    @property
    def graph_seed(self) -> int:
        return self.seed if self.instance_seed is None else self.instance_seed

    def validate(self) -> "BenchmarkConfig":
        if self.solver not in ("qaoa", "qa"):
            raise ConfigError(f"solver must be 'qaoa' or 'qa', got {self.solver!r}")
        if self.method not in (1, 2):
            raise ConfigError(f"method must be 1 or 2, got {self.method!r}")
        if self.min_size > self.max_size:
            raise ConfigError(f"min_size {self.min_size} exceeds max_size {self.max_size}")
        if self.min_size < 1 or self.size_step < 1:
            raise ConfigError("sizes and size_step must be positive")
        for name in ("max_restarts", "num_shots", "rounds", "max_iterations", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if any(s < 1 for s in self.shots_list) or any(p < 1 for p in self.rounds_list):
            raise ConfigError("shots_list and rounds_list entries must be >= 1")
        if self.method == 2 and (len(self.shots_list) > 1 or len(self.rounds_list) > 1):
            raise ConfigError("lists of shots or rounds are only valid for method 1")
        if self.objective not in OBJECTIVE_FIELDS:
            raise ConfigError(f"objective must be one of {sorted(OBJECTIVE_FIELDS)}, got {self.objective!r}")
        if self.angle_mode not in ("default", "random", "fixed"):
            raise ConfigError(f"angle mode must be default, random or fixed, got {self.angle_mode!r}")
        if self.angle_mode == "fixed" and not self.angle_table:
            raise ConfigError("fixed angle mode requires angle_table")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.eta <= 0:
            raise ConfigError("eta must be positive")
        if self.anneal_min <= 0 or self.anneal_min > self.anneal_max:
            raise ConfigError("anneal range must satisfy 0 < min <= max")
        from .optimizer import MINIMIZERS
        from .qaoa import NOISE_PRESETS

        if self.minimizer not in MINIMIZERS:
            raise ConfigError(f"unknown minimizer {self.minimizer!r}")
        if self.noise not in NOISE_PRESETS:
            raise ConfigError(f"unknown noise preset {self.noise!r}; choose from {sorted(NOISE_PRESETS)}")
        name = self.profile_name
        if name in PRESETS:
            paradigm = PRESETS[name].paradigm
            if (paradigm == "anneal") != (self.solver == "qa"):
                raise ConfigError(f"device profile {name!r} does not fit solver {self.solver!r}")
        elif not Path(name).exists():
            raise ConfigError(f"unknown device profile {name!r}; presets: {sorted(PRESETS)}")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def load_config_file(path) -> dict:
    """Config file contents as a dict of :class:`BenchmarkConfig` fields.

    Range-valued keys may be written as strings: ``sizes``, ``anneal``,
    ``shots`` and ``rounds`` use the same syntax as the command line.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return expand_shorthand(data)


def expand_shorthand(data: dict) -> dict:
    out = dict(data)
    if "sizes" in out:
        out["min_size"], out["max_size"], out["size_step"] = parse_int_range(out.pop("sizes"))
    if "anneal" in out:
        out["anneal_min"], out["anneal_max"], out["anneal_factor"] = parse_anneal_range(out.pop("anneal"))
    if "shots" in out:
        shots = parse_int_list(out.pop("shots"))
        out["shots_list"] = shots
        out["num_shots"] = shots[0]
    if "rounds" in out:
        out["rounds_list"] = parse_int_list(out["rounds"])
        out["rounds"] = out["rounds_list"][0]
    if "num_shots" in out and "shots_list" not in out:
        out["shots_list"] = [int(out["num_shots"])]
    if "restarts" in out:
        out["max_restarts"] = int(out.pop("restarts"))
    if "max_iters" in out:
        out["max_iterations"] = int(out.pop("max_iters"))
    if "angles" in out:
        out["angle_mode"] = out.pop("angles")
    return out
