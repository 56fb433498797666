"""Cost functions and Ising encodings shared by the QAOA and annealing solvers.

Energies are ``E(s) = -cut_size(s)``, so every eigenvalue of the problem
Hamiltonian is <= 0 and the ground states are the maximum cuts.

The annealer's Ising form uses spins ``z_k = 1 - 2*bit_k`` and energy
``sum_{(i,j) in E} J_ij z_i z_j`` with ``J_ij = +1`` on every edge. Aligned
spins cost +1, anti-aligned spins -1, hence ``ising = |E| - 2*cut`` and the
Ising ground states coincide with the maximum cuts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from .graphs import GraphInstance, cut_values

STATEVECTOR_LIMIT = 20


class ResourceLimitError(RuntimeError):
    """The requested dense representation exceeds the configured qubit limit."""


def cut_size(g: GraphInstance, s: str) -> int:
    if len(s) != g.num_nodes:
        raise ValueError(f"bitstring has length {len(s)}, graph has {g.num_nodes} nodes")
    index = int(s, 2)
    return sum(((index >> i) ^ (index >> j)) & 1 for i, j in g.edges)


def energy(g: GraphInstance, s: str) -> int:
    return -cut_size(g, s)


@dataclass(frozen=True)
class DiagonalCostTable:
    num_qubits: int
    cut_sizes: np.ndarray

    @property
    def max_cut(self) -> int:
        return int(self.cut_sizes.max())

    @property
    def energies(self) -> np.ndarray:
        return -self.cut_sizes

    def cut_distribution(self) -> np.ndarray:
        """Number of basis states with each cut size 0..max."""
        return np.bincount(self.cut_sizes)


def diagonal_cost_table(g: GraphInstance, limit: int = STATEVECTOR_LIMIT) -> DiagonalCostTable:
    if g.num_nodes > limit:
        raise ResourceLimitError(f"{g.num_nodes} qubits exceeds the statevector limit of {limit}")
    idx = np.arange(1 << g.num_nodes, dtype=np.int64)
    return DiagonalCostTable(g.num_nodes, cut_values(g.edge_array(), idx))


@dataclass(frozen=True)
class IsingEncoding:
    h: np.ndarray
    J: Dict[Tuple[int, int], float]

    @property
    def num_spins(self) -> int:
        return len(self.h)

    def energy(self, spins) -> float:
        z = np.asarray(spins)
        return float(self.h @ z + sum(c * z[i] * z[j] for (i, j), c in self.J.items()))

    def matrix(self) -> np.ndarray:
        """Symmetric coupling matrix."""
        m = np.zeros((self.num_spins, self.num_spins))
        for (i, j), c in self.J.items():
            m[i, j] = m[j, i] = c
        return m

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(self.matrix().astype(int).tolist())


def ising_encoding(g: GraphInstance) -> IsingEncoding:
    return IsingEncoding(h=np.zeros(g.num_nodes), J={e: 1.0 for e in g.edges})


def bits_to_spins(s: str) -> np.ndarray:
    """Spin vector (node order) for a bitstring; bit 0 -> +1, bit 1 -> -1."""
    bits = np.array([int(c) for c in reversed(s)])
    return 1 - 2 * bits


def spins_to_bits(spins) -> str:
    z = np.asarray(spins)
    return "".join("1" if v < 0 else "0" for v in reversed(z))


def ising_diagonal(g: GraphInstance, limit: int = STATEVECTOR_LIMIT) -> np.ndarray:
    """Ising energy of every basis state, ``|E| - 2 * cut``."""
    table = diagonal_cost_table(g, limit)
    return (g.num_edges - 2 * table.cut_sizes).astype(float)
