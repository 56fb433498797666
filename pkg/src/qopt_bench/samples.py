from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping

import numpy as np

from .graphs import index_to_bitstring


@dataclass(frozen=True)
class SampleSet:
    """Measured bitstrings with multiplicities; the output of every solver."""

    num_qubits: int
    counts: Dict[str, int]

    def __post_init__(self):
        for k, v in self.counts.items():
            if len(k) != self.num_qubits:
                raise ValueError(f"bitstring {k!r} does not have {self.num_qubits} bits")
            if v <= 0:
                raise ValueError(f"count for {k!r} must be positive, got {v}")

    @property
    def shots(self) -> int:
        return sum(self.counts.values())

    @classmethod
    def from_indices(cls, num_qubits: int, indices, counts=None) -> "SampleSet":
        """Build from basis indices, either one per shot or paired with ``counts``."""
        indices = np.asarray(indices, dtype=np.int64)
        if counts is None:
            indices, counts = np.unique(indices, return_counts=True)
        out: Dict[str, int] = {}
        for i, c in zip(indices.tolist(), np.asarray(counts).tolist()):
            if c > 0:
                key = index_to_bitstring(i, num_qubits)
                out[key] = out.get(key, 0) + int(c)
        return cls(num_qubits, dict(sorted(out.items())))

    def arrays(self):
        """``(indices, counts)`` as integer arrays, ordered by index."""
        items = sorted((int(k, 2), v) for k, v in self.counts.items())
        if not items:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        idx, cnt = zip(*items)
        return np.asarray(idx, dtype=np.int64), np.asarray(cnt, dtype=np.int64)

    def probabilities(self) -> Dict[str, float]:
        total = self.shots
        return {k: v / total for k, v in self.counts.items()}

    @classmethod
    def from_bit_rows(cls, bits) -> "SampleSet":
        """Build from a ``(shots, n)`` 0/1 array whose column k is node k."""
        bits = np.asarray(bits, dtype=np.uint8)
        rows, counts = np.unique(bits[:, ::-1], axis=0, return_counts=True)
        out = {"".join(map(str, r.tolist())): int(c) for r, c in zip(rows, counts)}
        return cls(bits.shape[1], dict(sorted(out.items())))

    def bit_matrix(self):
        """``(bits, counts)``: one row per distinct bitstring, column k is node k."""
        keys = sorted(self.counts)
        bits = np.array([[c == "1" for c in reversed(k)] for k in keys], dtype=np.uint8)
        return bits.reshape(len(keys), self.num_qubits), np.array([self.counts[k] for k in keys])

    def cuts(self, edges):
        """``(cut sizes, counts)`` per distinct bitstring; works for any width."""
        bits, cnt = self.bit_matrix()
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        cuts = (bits[:, e[:, 0]] ^ bits[:, e[:, 1]]).sum(axis=1).astype(np.int64)
        return cuts, cnt

    def cut_histogram(self, edges) -> Dict[int, int]:
        """Shots per cut size."""
        cuts, cnt = self.cuts(edges)
        hist: Dict[int, int] = {}
        for c, k in zip(cuts.tolist(), cnt.tolist()):
            hist[c] = hist.get(c, 0) + k
        return dict(sorted(hist.items()))


def histogram_from_mapping(data: Mapping) -> Dict[int, int]:
    """Cut histogram with integer keys (JSON turns them into strings)."""
    return {int(k): int(v) for k, v in sorted(data.items(), key=lambda kv: int(kv[0]))}
