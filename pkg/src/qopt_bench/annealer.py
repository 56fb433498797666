"""Quantum-annealing solver: transverse-field Ising evolution and a classical proxy.

The annealing Hamiltonian is ``H(s) = A(s) * H_init + B(s) * H_target`` with
``H_init = -sum_k X_k`` (whose ground state is the uniform superposition) and
``H_target`` the Ising energy ``sum_{(i,j)} z_i z_j`` of the graph. Time runs
over ``anneal_time_us * time_scale`` dimensionless units with ``s = t / T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .graphs import GraphInstance, cut_values
from .hamiltonian import ResourceLimitError, ising_encoding
from .qaoa import Statevector, sample_probabilities, uniform_mixer, uniform_state
from .samples import SampleSet

ANNEAL_QUBIT_LIMIT = 14
DEFAULT_TIME_SCALE = 10.0
DEFAULT_STEPS = 1000
MAX_DT = 0.05
NORM_TOLERANCE = 1e-4
PROXY_SWEEPS_PER_US = 1.0


class IntegrationError(RuntimeError):
    pass


def _linear_a(s):
    return 1.0 - s


def _linear_b(s):
    return s


@dataclass(frozen=True)
class AnnealSchedule:
    anneal_time: float
    A: Callable[[float], float] = _linear_a
    B: Callable[[float], float] = _linear_b
    time_scale: float = DEFAULT_TIME_SCALE

    @property
    def duration(self) -> float:
        """Total evolution time in dimensionless energy units."""
        return self.anneal_time * self.time_scale

    def satisfies_endpoints(self, ratio: float = 10.0) -> bool:
        a0, b0, a1, b1 = self.A(0.0), self.B(0.0), self.A(1.0), self.B(1.0)
        return a0 >= ratio * b0 and b1 >= ratio * a1


def default_dt(duration: float) -> float:
    return min(duration / DEFAULT_STEPS, MAX_DT) if duration > 0 else 0.0


def evolve_schedule(
    g: GraphInstance,
    schedule: AnnealSchedule,
    dt: Optional[float] = None,
    limit: int = ANNEAL_QUBIT_LIMIT,
    target_diagonal: Optional[np.ndarray] = None,
) -> Statevector:
    """Integrate the annealing Schrodinger equation from the uniform superposition.

    Second-order split step: half a diagonal step, a full transverse-field
    step, half a diagonal step, with the schedule evaluated at the midpoint.
    Both sub-steps are exact exponentials.
    """
    n = g.num_nodes
    if n > limit:
        raise ResourceLimitError(f"{n} qubits exceeds the annealing statevector limit of {limit}")
    psi = uniform_state(n)
    duration = schedule.duration
    if duration <= 0:
        return Statevector(n, psi)
    if dt is None:
        dt = default_dt(duration)
    steps = max(1, math.ceil(duration / dt - 1e-9))
    dt = duration / steps
    if target_diagonal is None:
        cuts = cut_values(g.edge_array(), np.arange(1 << n))
        target_diagonal = (g.num_edges - 2 * cuts).astype(float)
    # the diagonal takes few distinct values: exponentiate those, then gather
    levels, level_index = np.unique(target_diagonal, return_inverse=True)
    for k in range(steps):
        s = (k + 0.5) / steps
        a, b = schedule.A(s), schedule.B(s)
        half = np.exp(-0.5j * dt * b * levels)[level_index]
        psi *= half
        # exp(-i dt a (-X)) = cos(a dt) + i sin(a dt) X on every qubit
        psi = uniform_mixer(psi, n, math.cos(a * dt), 1j * math.sin(a * dt))
        psi *= half
    drift = abs(np.linalg.norm(psi) - 1.0)
    if drift > NORM_TOLERANCE:
        raise IntegrationError(f"norm drift {drift:.2e} exceeds {NORM_TOLERANCE}; reduce dt below {dt}")
    return Statevector(n, psi)


def anneal_and_sample(
    g: GraphInstance,
    anneal_time: float,
    reads: int,
    rng_seed=None,
    schedule: Optional[AnnealSchedule] = None,
    dt: Optional[float] = None,
    limit: int = ANNEAL_QUBIT_LIMIT,
    state: Optional[Statevector] = None,
) -> SampleSet:
    """Anneal for ``anneal_time`` microseconds and draw ``reads`` samples.

    A precomputed final ``state`` may be passed to skip the evolution.
    """
    if reads < 1:
        raise ValueError("reads must be >= 1")
    if state is None:
        if schedule is None:
            schedule = AnnealSchedule(anneal_time)
        state = evolve_schedule(g, schedule, dt, limit)
    rng = np.random.default_rng(rng_seed)
    counts = sample_probabilities(state.probabilities(), reads, rng)
    nz = np.nonzero(counts)[0]
    return SampleSet.from_indices(g.num_nodes, nz, counts[nz])


def classical_proxy_sample(
    g: GraphInstance,
    anneal_time: float,
    reads: int,
    rng_seed=None,
    sweeps_per_us: float = PROXY_SWEEPS_PER_US,
    beta_range=(0.1, 5.0),
) -> SampleSet:
    """Metropolis simulated annealing on the Ising encoding, one chain per read.

    The sweep count is proportional to ``anneal_time``; the inverse temperature
    rises geometrically over ``beta_range``. Each read returns its final spins.
    """
    if reads < 1:
        raise ValueError("reads must be >= 1")
    n = g.num_nodes
    rng = np.random.default_rng(rng_seed)
    enc = ising_encoding(g)
    nbrs = [[] for _ in range(n)]
    for (i, j), c in enc.J.items():
        nbrs[i].append((j, c))
        nbrs[j].append((i, c))
    nbr_idx = [np.array([j for j, _ in row], dtype=np.int64) for row in nbrs]
    nbr_w = [np.array([c for _, c in row]) for row in nbrs]
    spins = rng.choice(np.array([-1.0, 1.0]), size=(reads, n))
    sweeps = max(1, int(round(sweeps_per_us * anneal_time)))
    betas = np.geomspace(beta_range[0], beta_range[1], sweeps)
    for beta in betas:
        u = rng.random((n, reads))
        for k in range(n):
            if not len(nbr_idx[k]):
                continue
            field = spins[:, nbr_idx[k]] @ nbr_w[k]
            delta = -2.0 * spins[:, k] * field
            accept = (delta <= 0) | (u[k] < np.exp(-beta * np.maximum(delta, 0.0)))
            spins[accept, k] *= -1
    return SampleSet.from_bit_rows(spins < 0)
