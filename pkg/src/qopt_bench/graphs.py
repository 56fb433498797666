"""Max-Cut problem instances: random 3-regular graphs and an exhaustive oracle.

Bitstrings follow one convention throughout the package: the basis index of a
partition is ``sum(bit_k << k)``, so node 0 is the least-significant bit and the
text form is the binary numeral of the index (node 0 is the rightmost
character).
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

Edge = Tuple[int, int]

EXHAUSTION_LIMIT = 24
_MAX_PAIRING_ATTEMPTS = 10_000
_CHUNK = 1 << 20


class GraphError(ValueError):
    """Raised for infeasible or malformed graph definitions."""


class InstanceFormatError(GraphError):
    """Raised when an instance file cannot be parsed.

    The offending field name is kept in ``field``.
    """

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class GraphInstance:
    num_nodes: int
    edges: Tuple[Edge, ...]
    seed: Optional[int] = None
    optimal_cut_size: Optional[int] = None
    optimal_partition: Optional[str] = None
    regular: bool = field(default=False, compare=False)

    def __post_init__(self):
        edges = tuple(_normalize_edges(self.edges, self.num_nodes))
        object.__setattr__(self, "edges", edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` integer array."""
        if not self.edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def with_solution(self, size: Optional[int], partition: Optional[str]) -> "GraphInstance":
        return replace(self, optimal_cut_size=size, optimal_partition=partition)


def _normalize_edges(edges: Iterable[Sequence[int]], num_nodes: int) -> list:
    if num_nodes < 1:
        raise GraphError(f"num_nodes must be positive, got {num_nodes}")
    seen = set()
    out = []
    for e in edges:
        if len(e) != 2:
            raise GraphError(f"edge {e!r} is not a node pair")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise GraphError(f"self-loop on node {i}")
        if not (0 <= i < num_nodes and 0 <= j < num_nodes):
            raise GraphError(f"edge ({i}, {j}) references a node outside 0..{num_nodes - 1}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    out.sort()
    return out


def _is_connected(num_nodes: int, edges: Sequence[Edge]) -> bool:
    adj = [[] for _ in range(num_nodes)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == num_nodes


def generate_3_regular(n: int, seed: int) -> GraphInstance:
    """Random simple, connected 3-regular graph on ``n`` nodes.

    Uses the pairing (configuration) model: 3n stubs are shuffled and paired,
    and the whole pairing is redrawn if it contains a self-loop, a repeated
    edge, or more than one component. Deterministic for fixed ``(n, seed)``.
    """
    if n < 4 or (3 * n) % 2:
        raise GraphError(f"no 3-regular graph on {n} nodes (need n even and n >= 4)")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), 3)
    for _ in range(_MAX_PAIRING_ATTEMPTS):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = {(int(min(a, b)), int(max(a, b))) for a, b in pairs}
        if len(keys) != len(pairs):
            continue
        edges = sorted(keys)
        if not _is_connected(n, edges):
            continue
        return GraphInstance(num_nodes=n, edges=tuple(edges), seed=seed, regular=True)
    raise GraphError(f"pairing model failed to produce a simple graph for n={n}")


def cycle_graph(n: int) -> GraphInstance:
    return GraphInstance(num_nodes=n, edges=tuple((k, (k + 1) % n) for k in range(n)))


def complete_graph(n: int) -> GraphInstance:
    return GraphInstance(
        num_nodes=n, edges=tuple((i, j) for i in range(n) for j in range(i + 1, n))
    )


def index_to_bitstring(index: int, num_nodes: int) -> str:
    return format(int(index), f"0{num_nodes}b")


def bitstring_to_index(bits: str) -> int:
    return int(bits, 2)


def cut_values(edges: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Cut size of every basis index in ``indices`` (vectorized)."""
    indices = np.asarray(indices, dtype=np.int64)
    cuts = np.zeros(indices.shape, dtype=np.int64)
    for i, j in edges:
        cuts += ((indices >> int(i)) ^ (indices >> int(j))) & 1
    return cuts


@dataclass(frozen=True)
class MaxCutResult:
    size: Optional[int]
    partition: Optional[str]
    exhausted: bool = True

    @property
    def known(self) -> bool:
        return self.size is not None


def exact_max_cut(g: GraphInstance, limit: int = EXHAUSTION_LIMIT) -> MaxCutResult:
    """Exhaustive Max-Cut over the 2^(n-1) partitions that keep node n-1 on side 0.

    Graphs above ``limit`` nodes are refused: the result has ``size=None`` and
    ``exhausted=False`` instead of an approximate answer.
    """
    n = g.num_nodes
    if n > limit:
        return MaxCutResult(size=None, partition=None, exhausted=False)
    edges = g.edge_array()
    if len(edges) == 0:
        return MaxCutResult(size=0, partition="0" * n)
    total = 1 << (n - 1)
    best, best_index = -1, 0
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cuts = cut_values(edges, idx)
        k = int(np.argmax(cuts))
        if cuts[k] > best:
            best, best_index = int(cuts[k]), int(idx[k])
    return MaxCutResult(size=best, partition=index_to_bitstring(best_index, n))


def solve(g: GraphInstance, limit: int = EXHAUSTION_LIMIT) -> GraphInstance:
    """Return ``g`` annotated with its exact Max-Cut (or left unknown past ``limit``)."""
    res = exact_max_cut(g, limit)
    return g.with_solution(res.size, res.partition)


# --- persistence -----------------------------------------------------------

def instance_to_dict(g: GraphInstance) -> dict:
    return {
        "nodes": g.num_nodes,
        "edges": [list(e) for e in g.edges],
        "seed": g.seed,
        "optimal_cut_size": "unknown" if g.optimal_cut_size is None else g.optimal_cut_size,
        "optimal_partition": g.optimal_partition,
        "regular": g.regular,
    }


def instance_from_dict(data: dict) -> GraphInstance:
    if not isinstance(data, dict):
        raise InstanceFormatError("<root>", "expected a JSON object")
    n = data.get("nodes")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InstanceFormatError("nodes", f"expected a positive integer, got {n!r}")
    raw_edges = data.get("edges")
    if not isinstance(raw_edges, list):
        raise InstanceFormatError("edges", "expected a list of node pairs")
    for e in raw_edges:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise InstanceFormatError("edges", f"malformed edge {e!r}")
    try:
        edges = _normalize_edges(raw_edges, n)
    except GraphError as exc:
        raise InstanceFormatError("edges", str(exc)) from None
    seed = data.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise InstanceFormatError("seed", f"expected an integer, got {seed!r}")
    size = data.get("optimal_cut_size", "unknown")
    if size == "unknown" or size is None:
        size = None
    elif not isinstance(size, int) or size < 0:
        raise InstanceFormatError("optimal_cut_size", f"expected a nonnegative integer, got {size!r}")
    part = data.get("optimal_partition")
    if part is not None:
        if not isinstance(part, str) or len(part) != n or set(part) - {"0", "1"}:
            raise InstanceFormatError("optimal_partition", f"expected a {n}-bit string, got {part!r}")
        if size is not None:
            got = int(cut_values(np.asarray(edges).reshape(-1, 2), np.array([int(part, 2)]))[0])
            if got != size:
                raise InstanceFormatError(
                    "optimal_partition", f"cuts {got} edges but optimal_cut_size is {size}"
                )
    return GraphInstance(
        num_nodes=n,
        edges=tuple(edges),
        seed=seed,
        optimal_cut_size=size,
        optimal_partition=part,
        regular=bool(data.get("regular", False)),
    )


def store_instance(g: GraphInstance, path: os.PathLike | str) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(g), indent=1) + "\n")


def load_instance(path: os.PathLike | str) -> GraphInstance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError("<root>", f"invalid JSON in {path}: {exc}") from None
    return instance_from_dict(data)


def instance_filename(n: int) -> str:
    return f"maxcut_n{n:03d}.json"


def generate_instances(sizes: Iterable[int], seed: int, out_dir, limit: int = EXHAUSTION_LIMIT) -> list:
    """Generate, solve and store one instance per size; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for n in sizes:
        g = solve(generate_3_regular(n, instance_seed(seed, n)), limit)
        p = out / instance_filename(n)
        store_instance(g, p)
        paths.append(p)
    return paths


def instance_seed(master_seed: int, n: int) -> int:
    """Seed for the size-``n`` instance derived from a master seed."""
    return int(np.random.SeedSequence([int(master_seed), int(n)]).generate_state(1)[0])
