"""Clique post-processing: greedy shrinking, grow/swap local search, success rate.

A sampled subgraph is shrunk to a clique by repeatedly deleting a vertex of
minimum induced degree (ties broken by minimum node weight, then uniformly
at random), then refined by a fixed number of local-search iterations.  Each
iteration either grows the clique by one common neighbor or, when none
exists, swaps one member for an alternative; a swap with no alternative is
a no-op, which keeps every iteration well defined.  Success against a
target clique is weight equality, so co-maximal cliques all count.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from math import isclose
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ResourceGuardError, ValidationError
from .graph import Graph, NodeSubset, _as_rng, clique_weight, is_clique, node_subset
from .samplers import SampleBatch

EXACT_NODE_LIMIT = 24


@dataclass(frozen=True)
class SearchConfig:
    """Local-search settings: iteration count, seed, and candidate weighting.

    weight_priority picks grow and swap candidates with probability
    proportional to node weight; when off both picks are uniform.
    """

    n_iter: int = 7
    seed: int | np.random.Generator | None = None
    weight_priority: bool = True

    def __post_init__(self):
        if not isinstance(self.n_iter, (int, np.integer)) or isinstance(self.n_iter, bool):
            raise ValidationError(f"n_iter must be an integer, got {self.n_iter!r}")
        if self.n_iter < 0:
            raise ValidationError(f"n_iter must be >= 0, got {self.n_iter}")


class SampleResult(NamedTuple):
    sample_index: int
    initial_size: int
    final_size: int
    final_weight: float
    success: bool


def greedy_shrink(g: Graph, s, seed=None) -> NodeSubset:
    """Delete vertices until a clique remains.

    Each step removes, among vertices of minimum degree in the current
    induced subgraph, one of minimal node weight (uniformly at random on
    ties).  The result is always a clique and a subset of the input.
    """
    rng = _as_rng(seed)
    members = list(node_subset(s, g.node_count))
    while not is_clique(g, members):
        sub = g.adjacency[np.ix_(members, members)]
        degrees = (sub > 0).sum(axis=1)
        d_min = degrees.min()
        min_deg = [i for i, d in enumerate(degrees) if d == d_min]
        weights = np.array([g.node_weights[members[i]] for i in min_deg])
        lightest = [min_deg[i] for i in range(len(min_deg)) if weights[i] == weights.min()]
        drop = lightest[0] if len(lightest) == 1 else int(rng.choice(lightest))
        members.pop(drop)
    return tuple(members)


def grow(g: Graph, s) -> NodeSubset:
    """Vertices outside the clique adjacent to every member (all nodes for s = empty)."""
    members = node_subset(s, g.node_count)
    if not is_clique(g, members):
        raise ValidationError(f"grow requires a clique, got {members}")
    if not members:
        return tuple(range(g.node_count))
    # Members exclude themselves through the zero diagonal.
    common = np.all(g.adjacency[list(members)] > 0, axis=0)
    return tuple(int(v) for v in np.nonzero(common)[0])


def _pick(rng: np.random.Generator, candidates: Sequence[int], weights) -> int:
    if weights is None:
        return int(rng.choice(candidates))
    w = np.array([weights[v] for v in candidates], dtype=float)
    total = w.sum()
    if total <= 0:
        return int(rng.choice(candidates))
    return int(rng.choice(candidates, p=w / total))


def local_search(g: Graph, c, cfg: SearchConfig) -> NodeSubset:
    """Grow/swap refinement of a clique for cfg.n_iter iterations.

    Grow adds one common neighbor when any exists; otherwise one member is
    chosen at random and swapped for a random alternative reachable from the
    remaining clique, if there is one.  Output is always a clique; size never
    decreases (grow adds, swap preserves).
    """
    members = list(node_subset(c, g.node_count))
    if not is_clique(g, members):
        raise ValidationError(f"local search requires a clique, got {tuple(members)}")
    rng = _as_rng(cfg.seed)
    prio = g.node_weights if cfg.weight_priority else None
    for _ in range(cfg.n_iter):
        candidates = grow(g, tuple(members))
        if candidates:
            members.append(_pick(rng, candidates, prio))
            members.sort()
        elif members:
            v = int(rng.choice(members))
            reduced = tuple(x for x in members if x != v)
            swaps = tuple(x for x in grow(g, reduced) if x != v)
            if swaps:
                members = sorted(reduced + (_pick(rng, swaps, prio),))
    return tuple(members)


def success_rate(
    g: Graph,
    batch: SampleBatch,
    target,
    cfg: SearchConfig,
) -> tuple[float, list[SampleResult]]:
    """Shrink + local-search every sample; success is weight equality with target.

    Per-sample randomness is split from cfg.seed by sample index, so the
    rate is independent of evaluation order and reproducible.
    """
    if len(batch.samples) == 0:
        raise ValidationError("success rate needs a non-empty batch")
    tgt = node_subset(target, g.node_count)
    if not is_clique(g, tgt):
        raise ValidationError(f"target {tgt} is not a clique")
    target_weight = clique_weight(g, tgt)
    base = cfg.seed if isinstance(cfg.seed, (int, np.integer)) else 0
    rows: list[SampleResult] = []
    hits = 0
    for i, sample in enumerate(batch.samples):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=int(base), spawn_key=(i,)))
        )
        shrunk = greedy_shrink(g, sample, seed=rng)
        final = local_search(g, shrunk, dataclasses.replace(cfg, seed=rng))
        final_weight = clique_weight(g, final)
        ok = isclose(final_weight, target_weight, rel_tol=1e-9, abs_tol=1e-12)
        hits += ok
        rows.append(SampleResult(i, len(sample), len(final), final_weight, bool(ok)))
    return hits / len(rows), rows


def save_search_results(rows: Sequence[SampleResult], path: str | Path) -> None:
    """Write per-sample pipeline results as a semicolon CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("sample_index;initial_size;final_size;final_weight;success\n")
        for r in rows:
            fh.write(
                f"{r.sample_index};{r.initial_size};{r.final_size};"
                f"{format(r.final_weight, '.17g')};{int(r.success)}\n"
            )


def max_weight_clique_exact(g: Graph, node_limit: int = EXACT_NODE_LIMIT) -> tuple[NodeSubset, float]:
    """Certify a maximum-weight clique by bounded exhaustive branch and bound.

    Only intended for fixture certification; refuses graphs beyond
    node_limit nodes.  Deterministic: candidates are explored in index
    order, so ties resolve to the lexicographically first clique.
    """
    m = g.node_count
    if m > node_limit:
        raise ResourceGuardError(f"{m} nodes exceed the exact-solver limit ({node_limit})")
    w = g.node_weights
    neighbors = [frozenset(int(u) for u in np.nonzero(g.adjacency[v] > 0)[0]) for v in range(m)]
    best_weight = 0.0
    best: tuple[int, ...] = ()

    def expand(current: list[int], cand: list[int], cur_w: float):
        nonlocal best_weight, best
        if cur_w > best_weight:
            best_weight = cur_w
            best = tuple(current)
        if cur_w + sum(w[v] for v in cand) <= best_weight:
            return
        for idx, v in enumerate(cand):
            rest = [u for u in cand[idx + 1 :] if u in neighbors[v]]
            expand(current + [v], rest, cur_w + w[v])

    expand([], list(range(m)), 0.0)
    return node_subset(best, m), float(best_weight)
