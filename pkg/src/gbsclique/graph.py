"""Weighted undirected graphs: representation, random instances, file I/O.

A graph is a symmetric non-negative adjacency matrix with zero diagonal
plus one non-negative weight per node.  Node subsets stand in for the
subgraphs that photon detection patterns select.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError

NodeSubset = tuple[int, ...]


@dataclass(frozen=True)
class Graph:
    """Immutable weighted graph.

    Attributes:
        adjacency: M x M symmetric float matrix, zero diagonal, entries >= 0.
        node_weights: length-M float vector, entries >= 0.
    """

    adjacency: np.ndarray
    node_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        adj = np.array(self.adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValidationError(f"adjacency must be square, got shape {adj.shape}")
        if adj.shape[0] == 0:
            raise ValidationError("graph needs at least one node")
        if not np.all(np.isfinite(adj)):
            raise ValidationError("adjacency contains non-finite entries")
        if np.any(adj < 0):
            i, j = np.argwhere(adj < 0)[0]
            raise ValidationError(f"negative adjacency entry at ({i}, {j})")
        if not np.array_equal(adj, adj.T):
            i, j = np.argwhere(adj != adj.T)[0]
            raise ValidationError(f"adjacency not symmetric at ({i}, {j})")
        if np.any(np.diag(adj) != 0):
            i = int(np.argwhere(np.diag(adj) != 0)[0][0])
            raise ValidationError(f"nonzero diagonal entry at node {i}")
        weights = self.node_weights
        if weights is None:
            weights = np.ones(adj.shape[0])
        weights = np.array(weights, dtype=float)
        if weights.shape != (adj.shape[0],):
            raise ValidationError(
                f"need {adj.shape[0]} node weights, got shape {weights.shape}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValidationError("node weights must be finite and >= 0")
        adj.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "node_weights", weights)

    @property
    def node_count(self) -> int:
        return self.adjacency.shape[0]

    def degrees(self) -> np.ndarray:
        """Unweighted degree of every node (count of positive entries)."""
        return np.count_nonzero(self.adjacency > 0, axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency) and np.array_equal(
            self.node_weights, other.node_weights
        )

    def __hash__(self) -> int:
        return hash((self.adjacency.tobytes(), self.node_weights.tobytes()))


def node_subset(indices: Iterable[int], node_count: int) -> NodeSubset:
    """Validate and canonicalize a node subset: sorted, duplicate-free, in range."""
    members = tuple(sorted(int(i) for i in indices))
    for i in members:
        if not 0 <= i < node_count:
            raise ValidationError(f"node index {i} out of range [0, {node_count})")
    if len(set(members)) != len(members):
        raise ValidationError(f"duplicate node indices in subset {members}")
    return members


def _as_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def erdos_renyi(
    node_count: int,
    p: float,
    seed: int | np.random.Generator | None = None,
) -> Graph:
    """Random graph: each unordered pair is an edge independently with probability p.

    Edge and node weights are 1.  Deterministic for a fixed integer seed.
    """
    if node_count <= 0:
        raise ValidationError("node_count must be positive")
    if not 0 <= p <= 1:
        raise ValidationError(f"edge probability {p} outside [0, 1]")
    rng = _as_rng(seed)
    adj = np.zeros((node_count, node_count))
    # Draw the upper triangle row by row so edge order is layout-independent.
    for i in range(node_count):
        draws = rng.random(node_count - i - 1) < p
        adj[i, i + 1 :] = draws
    adj = adj + adj.T
    return Graph(adj)


def plant_clique(
    g: Graph,
    size: int,
    seed: int | np.random.Generator | None = None,
) -> tuple[Graph, NodeSubset]:
    """Complete a uniformly random node subset of the given size.

    Missing edges inside the subset are added with weight 1; existing edge
    weights are kept.  Returns the new graph and the planted subset.
    """
    if not 1 <= size <= g.node_count:
        raise ValidationError(
            f"clique size {size} outside [1, {g.node_count}]"
        )
    rng = _as_rng(seed)
    members = node_subset(rng.choice(g.node_count, size=size, replace=False), g.node_count)
    adj = np.array(g.adjacency)
    for a in members:
        for b in members:
            if a != b and adj[a, b] == 0:
                adj[a, b] = 1.0
    return Graph(adj, g.node_weights), members


def is_clique(g: Graph, s: Sequence[int]) -> bool:
    """True iff every pair of subset nodes is joined by a positive-weight edge."""
    members = node_subset(s, g.node_count)
    for idx, a in enumerate(members):
        for b in members[idx + 1 :]:
            if g.adjacency[a, b] <= 0:
                return False
    return True


def clique_weight(g: Graph, s: Sequence[int]) -> float:
    """Total node weight of the subset (0 for the empty subset)."""
    members = node_subset(s, g.node_count)
    return float(sum(g.node_weights[i] for i in members))


def save_graph(g: Graph, path: str | Path) -> None:
    """Write a graph as JSON ({nodes, edges}) or CSV, chosen by file suffix.

    Both formats round-trip exactly: floats are serialized with full
    precision (shortest representation that parses back bit-identical).
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {
            "nodes": [
                {"id": i, "weight": float(w)} for i, w in enumerate(g.node_weights)
            ],
            "edges": [
                {"u": int(u), "v": int(v), "weight": float(g.adjacency[u, v])}
                for u, v in zip(*np.nonzero(np.triu(g.adjacency)))
            ],
        }
        path.write_text(json.dumps(doc, indent=1) + "\n")
    elif path.suffix.lower() == ".csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["weights"] + [repr(float(w)) for w in g.node_weights])
            for row in g.adjacency:
                writer.writerow([repr(float(x)) for x in row])
    else:
        raise ValidationError(f"unsupported graph file suffix: {path.suffix!r}")


def load_graph(path: str | Path) -> Graph:
    """Read a graph written by save_graph (or any file matching the schemas).

    Asymmetric or negative entries are rejected with their location.
    """
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"graph file not found: {path}")
    if path.suffix.lower() == ".json":
        return _load_json(path)
    if path.suffix.lower() == ".csv":
        return _load_csv(path)
    raise ValidationError(f"unsupported graph file suffix: {path.suffix!r}")


def _load_json(path: Path) -> Graph:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "nodes" not in doc or "edges" not in doc:
        raise ValidationError(f"{path}: expected an object with 'nodes' and 'edges'")
    nodes = doc["nodes"]
    ids = [n.get("id") for n in nodes]
    if sorted(ids) != list(range(len(nodes))):
        raise ValidationError(f"{path}: node ids must be exactly 0..{len(nodes) - 1}")
    weights = np.zeros(len(nodes))
    for n in nodes:
        weights[n["id"]] = n.get("weight", 1.0)
    adj = np.zeros((len(nodes), len(nodes)))
    for e in doc["edges"]:
        u, v, w = e["u"], e["v"], e.get("weight", 1.0)
        if not (0 <= u < len(nodes) and 0 <= v < len(nodes)) or u == v:
            raise ValidationError(f"{path}: bad edge ({u}, {v})")
        if w < 0:
            raise ValidationError(f"{path}: negative weight on edge ({u}, {v})")
        adj[u, v] = w
        adj[v, u] = w
    return Graph(adj, weights)


def _load_csv(path: Path) -> Graph:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    weights = None
    if rows[0] and rows[0][0].strip().lower() == "weights":
        weights = np.array([float(x) for x in rows[0][1:]])
        rows = rows[1:]
    m = len(rows)
    if any(len(row) != m for row in rows):
        bad = next(i for i, row in enumerate(rows) if len(row) != m)
        raise ValidationError(f"{path}: row {bad} has {len(rows[bad])} columns, expected {m}")
    adj = np.zeros((m, m))
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            try:
                adj[i, j] = float(cell)
            except ValueError as exc:
                raise ValidationError(f"{path}: bad number at row {i}, column {j}") from exc
    for i in range(m):
        for j in range(i + 1, m):
            if adj[i, j] != adj[j, i]:
                raise ValidationError(f"{path}: asymmetric at ({i}, {j})")
        if adj[i, i] != 0:
            raise ValidationError(f"{path}: nonzero diagonal at ({i}, {i})")
    if np.any(adj < 0):
        i, j = np.argwhere(adj < 0)[0]
        raise ValidationError(f"{path}: negative entry at ({i}, {j})")
    return Graph(adj, weights)
