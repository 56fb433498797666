"""Exact statevector evolution of the QAOA ansatz, shot sampling and noise.

Conventions: the problem Hamiltonian is ``H_P = -C`` (C = cut size), so the
phase layer ``exp(-i*gamma*H_P)`` multiplies each basis amplitude by
``exp(+i*gamma*cut(s))``; the mixer is ``exp(-i*beta*X)`` on every qubit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Tuple, Union

import numpy as np

from .graphs import GraphInstance, cut_values, index_to_bitstring
from .hamiltonian import STATEVECTOR_LIMIT, ResourceLimitError
from .samples import SampleSet

# trajectories are simulated in batches of at most this many amplitudes
_TRAJECTORY_BATCH_AMPLITUDES = 1 << 21


@dataclass(frozen=True)
class AnsatzParams:
    betas: Tuple[float, ...]
    gammas: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if len(self.betas) != len(self.gammas) or not self.betas:
            raise ValueError(
                f"need p >= 1 betas and gammas of equal length, got {len(self.betas)} and {len(self.gammas)}"
            )

    @property
    def p(self) -> int:
        return len(self.betas)

    def to_vector(self) -> np.ndarray:
        """Flat ``[betas..., gammas...]`` vector used by the minimizers."""
        return np.array(self.betas + self.gammas)

    @classmethod
    def from_vector(cls, x) -> "AnsatzParams":
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or len(x) % 2:
            raise ValueError("angle vector must have even length 2p")
        p = len(x) // 2
        return cls(tuple(x[:p]), tuple(x[p:]))

    def to_dict(self) -> dict:
        return {"betas": list(self.betas), "gammas": list(self.gammas)}


@dataclass(frozen=True)
class Statevector:
    num_qubits: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.p1 == 0.0 and self.p2 == 0.0


NOISE_PRESETS = {
    "noiseless": NoiseModel(0.0, 0.0),
    "typical": NoiseModel(0.003, 0.03),
}


@dataclass(frozen=True)
class CircuitResources:
    width: int
    two_qubit_gate_count: int
    one_qubit_gate_count: int
    mixer_gate_count: int
    algorithmic_depth: int

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "two_qubit_gate_count": self.two_qubit_gate_count,
            "one_qubit_gate_count": self.one_qubit_gate_count,
            "mixer_gate_count": self.mixer_gate_count,
            "algorithmic_depth": self.algorithmic_depth,
        }


def _check_limit(n: int, limit: int) -> None:
    if n > limit:
        raise ResourceLimitError(f"{n} qubits exceeds the statevector limit of {limit}")


def uniform_state(n: int) -> np.ndarray:
    return np.full(1 << n, (1 << n) ** -0.5, dtype=complex)


def _hamming_matrix(k: int) -> np.ndarray:
    idx = np.arange(1 << k)
    x = idx[:, None] ^ idx[None, :]
    return np.array([bin(v).count("1") for v in x.ravel()]).reshape(x.shape)


_HAMMING = {}


def uniform_mixer(psi: np.ndarray, n: int, c, s) -> np.ndarray:
    """Apply ``[[c, s], [s, c]]`` to every qubit of a single state, returning a new array.

    The n-fold tensor power is split into a high and a low factor, each a dense
    matrix with entries ``c**(k - d) * s**d`` (d = Hamming distance), so the
    whole layer costs two matrix products.
    """
    lo = n // 2
    hi = n - lo
    mats = []
    for k in (hi, lo):
        if k not in _HAMMING:
            _HAMMING[k] = _hamming_matrix(k)
        j = np.arange(k + 1)
        mats.append(((c ** (k - j)) * (s ** j))[_HAMMING[k]])
    m = psi.reshape(1 << hi, 1 << lo)
    return (mats[0] @ m @ mats[1]).reshape(-1)


def apply_rx_all(psi: np.ndarray, n: int, beta: float) -> np.ndarray:
    """Apply ``exp(-i*beta*X)`` to every qubit; ``psi`` may carry a leading batch axis."""
    c, s = np.cos(beta), -1j * np.sin(beta)
    if psi.ndim == 1:
        psi[:] = uniform_mixer(psi, n, c, s)
        return psi
    batch = psi.shape[:-1]
    for k in range(n):
        apply_rx(psi, n, k, c, s, batch)
    return psi


def apply_rx(psi: np.ndarray, n: int, k: int, c, s, batch=()) -> None:
    """In-place ``[[c, s], [s, c]]`` on qubit ``k``."""
    view = psi.reshape(*batch, 1 << (n - 1 - k), 2, 1 << k)
    a0 = view[..., 0, :].copy()
    a1 = view[..., 1, :]
    view[..., 0, :] = c * a0 + s * a1
    view[..., 1, :] = s * a0 + c * a1


def evolve_ansatz(
    g: GraphInstance,
    params: AnsatzParams,
    limit: int = STATEVECTOR_LIMIT,
    cuts: np.ndarray | None = None,
) -> Statevector:
    n = g.num_nodes
    _check_limit(n, limit)
    if cuts is None:
        cuts = cut_values(g.edge_array(), np.arange(1 << n))
    psi = uniform_state(n)
    for beta, gamma in zip(params.betas, params.gammas):
        psi *= np.exp(1j * gamma * cuts)
        apply_rx_all(psi, n, beta)
    return Statevector(n, psi)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def sample_probabilities(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    probs = probs / probs.sum()
    return rng.multinomial(shots, probs)


def sample(state: Statevector, shots: int, rng_seed=None) -> SampleSet:
    """``shots`` independent computational-basis measurements of ``state``."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    counts = sample_probabilities(state.probabilities(), shots, _rng(rng_seed))
    nz = np.nonzero(counts)[0]
    return SampleSet.from_indices(state.num_qubits, nz, counts[nz])


def _gate_sequence(g: GraphInstance, params: AnsatzParams):
    """Logical gates in circuit order as ``(kind, qubits, angle)``."""
    n = g.num_nodes
    gates = [("h", (q,), 0.0) for q in range(n)]
    for beta, gamma in zip(params.betas, params.gammas):
        gates.extend(("zz", (int(i), int(j)), gamma) for i, j in g.edges)
        gates.extend(("rx", (q,), beta) for q in range(n))
    return gates


def _apply_pauli(psi: np.ndarray, rows: np.ndarray, q: int, code: int, idx: np.ndarray) -> None:
    # 1 = X, 2 = Y, 3 = Z; the global phase of Y is irrelevant for sampling
    if code in (1, 2):
        psi[rows] = psi[rows][:, idx ^ (1 << q)]
    if code in (2, 3):
        psi[rows] *= 1 - 2 * ((idx >> q) & 1)


def noisy_sample(
    g: GraphInstance,
    params: AnsatzParams,
    shots: int,
    noise: NoiseModel,
    rng_seed=None,
    limit: int = STATEVECTOR_LIMIT,
) -> SampleSet:
    """Sample the ansatz under stochastic Pauli noise, one trajectory per shot.

    After every logical gate, with probability ``p1`` (one-qubit gates) or
    ``p2`` (two-qubit gates) a uniformly random non-identity Pauli acts on the
    gate's qubits. Shots whose trajectory drew no error are sampled from the
    ideal state; the rest are simulated as batched trajectories.
    """
    n = g.num_nodes
    _check_limit(n, limit)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = _rng(rng_seed)
    gates = _gate_sequence(g, params)
    two = np.array([len(q) == 2 for _, q, _ in gates])
    rates = np.where(two, noise.p2, noise.p1)
    errors = rng.random((shots, len(gates))) < rates
    paulis = np.where(two, rng.integers(1, 16, (shots, len(gates))), rng.integers(1, 4, (shots, len(gates))))

    cuts = cut_values(g.edge_array(), np.arange(1 << n))
    noisy_rows = np.nonzero(errors.any(axis=1))[0]
    clean = shots - len(noisy_rows)
    total = np.zeros(1 << n, dtype=np.int64)
    if clean:
        ideal = evolve_ansatz(g, params, limit, cuts)
        total += sample_probabilities(ideal.probabilities(), clean, rng)
    if len(noisy_rows):
        batch = max(1, _TRAJECTORY_BATCH_AMPLITUDES >> n)
        for start in range(0, len(noisy_rows), batch):
            rows = noisy_rows[start : start + batch]
            probs = _trajectories(n, gates, errors[rows], paulis[rows])
            u = rng.random(len(rows))
            cdf = np.cumsum(probs, axis=1)
            cdf /= cdf[:, -1:]
            picks = (cdf < u[:, None]).sum(axis=1)
            total += np.bincount(np.minimum(picks, (1 << n) - 1), minlength=1 << n)
    nz = np.nonzero(total)[0]
    return SampleSet.from_indices(n, nz, total[nz])


def _trajectories(n: int, gates, errors: np.ndarray, paulis: np.ndarray) -> np.ndarray:
    """Final outcome probabilities for a batch of error trajectories."""
    b = len(errors)
    idx = np.arange(1 << n)
    psi = np.tile(uniform_state(n), (b, 1))
    phases = {}
    for gi, (kind, qubits, angle) in enumerate(gates):
        if kind == "zz":
            i, j = qubits
            key = (i, j, angle)
            if key not in phases:
                phases[key] = np.exp(1j * angle * (((idx >> i) ^ (idx >> j)) & 1))
            psi *= phases[key]
        elif kind == "rx":
            apply_rx(psi, n, qubits[0], np.cos(angle), -1j * np.sin(angle), (b,))
        # "h" gates: the batch starts in the uniform superposition they prepare
        rows = np.nonzero(errors[:, gi])[0]
        if not len(rows):
            continue
        codes = paulis[rows, gi]
        if len(qubits) == 1:
            for code in (1, 2, 3):
                sel = rows[codes == code]
                if len(sel):
                    _apply_pauli(psi, sel, qubits[0], code, idx)
        else:
            for code in range(1, 16):
                sel = rows[codes == code]
                if not len(sel):
                    continue
                a, c = divmod(code, 4)
                if a:
                    _apply_pauli(psi, sel, qubits[0], a, idx)
                if c:
                    _apply_pauli(psi, sel, qubits[1], c, idx)
    return np.abs(psi) ** 2


def _as_distribution(dist, n: int) -> np.ndarray:
    if isinstance(dist, SampleSet):
        idx, cnt = dist.arrays()
        out = np.zeros(1 << n)
        out[idx] = cnt
        return out / out.sum()
    if isinstance(dist, Mapping):
        out = np.zeros(1 << n)
        for k, v in dist.items():
            out[int(k, 2) if isinstance(k, str) else int(k)] = v
        return out
    return np.asarray(dist, dtype=float)


def hellinger_fidelities(
    measured: SampleSet,
    ideal: Union[Mapping, np.ndarray, SampleSet],
) -> Tuple[float, float]:
    """Raw and normalized Hellinger fidelity of ``measured`` against ``ideal``.

    The normalized value rescales so that a uniformly random output scores 0
    and the ideal distribution scores 1, clamped to [0, 1].
    """
    if measured.shots == 0:
        raise ValueError("empty sample set")
    n = measured.num_qubits
    p = _as_distribution(measured, n)
    q = _as_distribution(ideal, n)
    if q.shape != p.shape:
        raise ValueError("measured and ideal distributions cover different outcome spaces")
    q = q / q.sum()
    raw = float(np.sum(np.sqrt(p * q)) ** 2)
    u = float(np.sum(np.sqrt(q / len(q))) ** 2)
    if 1.0 - u < 1e-12:
        # ideal is itself uniform: the rescaling is undefined
        normalized = 1.0 if raw > 1.0 - 1e-12 else 0.0
    else:
        normalized = (raw - u) / (1.0 - u)
    return min(raw, 1.0), float(np.clip(normalized, 0.0, 1.0))


def edge_layers(g: GraphInstance) -> int:
    """ASAP depth of the edge gates of one round, applied in edge order."""
    ready = [0] * g.num_nodes
    depth = 0
    for i, j in g.edges:
        layer = max(ready[i], ready[j]) + 1
        ready[i] = ready[j] = layer
        depth = max(depth, layer)
    return depth


def circuit_resources(g: GraphInstance, p: int) -> CircuitResources:
    n = g.num_nodes
    return CircuitResources(
        width=n,
        two_qubit_gate_count=p * g.num_edges,
        one_qubit_gate_count=n + p * n,
        mixer_gate_count=p * n,
        algorithmic_depth=1 + p * (edge_layers(g) + 1),
    )


def ideal_probabilities(g: GraphInstance, params: AnsatzParams, limit: int = STATEVECTOR_LIMIT) -> dict:
    """Exact outcome distribution as a ``bitstring -> probability`` map (nonzero entries)."""
    probs = evolve_ansatz(g, params, limit).probabilities()
    return {index_to_bitstring(i, g.num_nodes): float(probs[i]) for i in np.nonzero(probs > 0)[0]}


def expected_cut(state: Statevector, cuts: np.ndarray) -> float:
    return float(state.probabilities() @ cuts)
