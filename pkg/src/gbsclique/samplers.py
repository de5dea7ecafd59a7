"""Subgraph samplers: exact window enumeration, uniform baseline, pair sampler.

All samplers draw from NumPy's PCG64 generator seeded through
``SeedSequence(entropy=seed, spawn_key=(shard,))``, so identical
(parameters, seed) reproduce identical batches on any platform.  A batch
may be produced in several shards; shard s always owns the same slice of
the output regardless of how shards are scheduled.

The exact sampler enumerates every collision-free pattern inside a size
window, renormalizes over the window, and draws i.i.d. from that law.
The pair sampler draws unordered mode pairs with weight proportional to
the kernel entries and keeps only collision-free unions, reporting the
rejection rate so the collision-free regime stays observable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .encoding import EncodedExperiment
from .errors import ResourceGuardError, ValidationError
from .gaussian import GaussianState
from .graph import Graph, NodeSubset
from .probability import SUBSET_GUARD, subset_distribution

REJECTION_LIMIT = 100_000
WINDOW_CACHE_SIZE = 16

# Enumerated window tables keyed by (state bytes, window); repeated draws from
# one state (seed sweeps) then pay the enumeration cost once.
_window_cache: dict[tuple, tuple] = {}


@dataclass(frozen=True)
class SampleBatch:
    """A reproducible set of node subsets plus full provenance.

    source identifies the sampler and its parameters, conditioning records
    the size window / size law / renormalization in effect, and stats holds
    run counters such as the pair sampler's rejection rate.  All values are
    JSON-native so a batch round-trips through its line-oriented dump.
    """

    source: dict
    samples: tuple[NodeSubset, ...]
    seed: int
    conditioning: dict
    stats: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.samples)


def _check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError("seed must be an integer for reproducible batches")
    return int(seed)


def _shard_rngs(seed: int, shards: int) -> list[np.random.Generator]:
    if not isinstance(shards, (int, np.integer)) or shards < 1:
        raise ValidationError(f"shards must be a positive integer, got {shards}")
    return [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=seed, spawn_key=(s,))))
        for s in range(shards)
    ]


def _shard_counts(count: int, shards: int) -> list[int]:
    if not isinstance(count, (int, np.integer)) or count < 0:
        raise ValidationError(f"count must be a non-negative integer, got {count}")
    base, extra = divmod(int(count), shards)
    return [base + (1 if s < extra else 0) for s in range(shards)]


def _fingerprint(*arrays: np.ndarray) -> str:
    digest = hashlib.sha1()
    for a in arrays:
        digest.update(np.ascontiguousarray(a).tobytes())
    return digest.hexdigest()[:16]


def window_law(
    state: GaussianState,
    k_min: int,
    k_max: int,
) -> tuple[tuple[NodeSubset, ...], np.ndarray, float]:
    """All collision-free subsets with sizes in [k_min, k_max] and their raw masses.

    Returns (subsets, raw probabilities, total raw mass) in deterministic
    order (size ascending, lexicographic within a size).  Results are cached
    on the exact state bytes, so seed sweeps over one state enumerate once.
    """
    m = state.modes
    if not 0 <= k_min <= k_max <= m:
        raise ValidationError(f"size window [{k_min}, {k_max}] invalid for {m} modes")
    n_outcomes = sum(comb(m, k) for k in range(k_min, k_max + 1))
    if n_outcomes > SUBSET_GUARD:
        raise ResourceGuardError(
            f"{n_outcomes} window outcomes exceed the enumeration guard ({SUBSET_GUARD})"
        )
    key = (state.sigma.tobytes(), state.disp.tobytes(), int(k_min), int(k_max))
    hit = _window_cache.get(key)
    if hit is not None:
        return hit
    subsets: list[NodeSubset] = []
    masses: list[float] = []
    for k in range(k_min, k_max + 1):
        dist = subset_distribution(state, k, renormalize=False)
        for s, p in dist.entries.items():
            subsets.append(s)
            masses.append(p)
    entry = (tuple(subsets), np.array(masses), float(sum(masses)))
    entry[1].setflags(write=False)
    if len(_window_cache) >= WINDOW_CACHE_SIZE:
        _window_cache.pop(next(iter(_window_cache)))
    _window_cache[key] = entry
    return entry


def exact_sampler(
    state: GaussianState,
    k_min: int,
    k_max: int,
    count: int,
    seed,
    shards: int = 1,
) -> SampleBatch:
    """Draw i.i.d. subsets from the exact law restricted to sizes in [k_min, k_max].

    Every collision-free pattern in the window is enumerated and its exact
    probability computed; the window is renormalized and sampled directly,
    which is unbiased conditioned on the window.  The raw window mass is
    recorded so unconditioned quantities can be recovered.
    """
    m = state.modes
    subsets, masses, total = window_law(state, k_min, k_max)
    if total <= 0:
        raise ValidationError(f"zero probability mass in size window [{k_min}, {k_max}]")
    probs = masses / total
    probs = probs / probs.sum()

    seed = _check_seed(seed)
    samples: list[NodeSubset] = []
    for rng, c in zip(_shard_rngs(seed, shards), _shard_counts(count, shards)):
        for i in rng.choice(len(subsets), size=c, p=probs):
            samples.append(subsets[i])
    source = {
        "sampler": "exact",
        "modes": m,
        "k_min": int(k_min),
        "k_max": int(k_max),
        "count": int(count),
        "shards": int(shards),
        "state_fingerprint": _fingerprint(state.sigma, state.disp),
    }
    conditioning = {
        "k_min": int(k_min),
        "k_max": int(k_max),
        "collision_free": True,
        "renormalized_over_window": True,
        "window_mass": total,
    }
    return SampleBatch(source, tuple(samples), seed, conditioning)


def flat_size_law(k_min: int, k_max: int) -> dict[int, float]:
    """Uniform law over subset sizes in [k_min, k_max]."""
    if not 0 <= k_min <= k_max:
        raise ValidationError(f"size window [{k_min}, {k_max}] invalid")
    width = k_max - k_min + 1
    return {k: 1.0 / width for k in range(k_min, k_max + 1)}


def photon_number_law(
    state: GaussianState,
    k_min: int = 0,
    k_max: int | None = None,
    collision_free: bool = True,
) -> dict[int, float]:
    """Exact subset-size marginal of the state, renormalized over the window.

    Summing subset-distribution masses per size yields the law used to
    size-match the uniform baseline against the photonic samplers.
    """
    m = state.modes
    if k_max is None:
        k_max = m
    if not 0 <= k_min <= k_max:
        raise ValidationError(f"size window [{k_min}, {k_max}] invalid")
    if collision_free and k_max <= m:
        subsets, raw, _ = window_law(state, k_min, k_max)
        masses = {k: 0.0 for k in range(k_min, k_max + 1)}
        for s, p in zip(subsets, raw):
            masses[len(s)] += p
    else:
        masses = {
            k: subset_distribution(state, k, collision_free=collision_free, renormalize=False).total_raw_mass
            for k in range(k_min, k_max + 1)
        }
    total = sum(masses.values())
    if total <= 0:
        raise ValidationError(f"zero probability mass in size window [{k_min}, {k_max}]")
    return {k: p / total for k, p in masses.items()}


def _check_size_law(size_law, m: int) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(size_law, bool):
        raise ValidationError("size_law must be a size or a size->probability map")
    if isinstance(size_law, (int, np.integer)):
        size_law = {int(size_law): 1.0}
    try:
        items = sorted((int(k), float(p)) for k, p in dict(size_law).items())
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"size_law must be a size or a size->probability map: {exc}")
    if not items:
        raise ValidationError("size_law is empty")
    ks = np.array([k for k, _ in items])
    ps = np.array([p for _, p in items])
    if ks.min() < 0 or ks.max() > m:
        raise ValidationError(f"size_law support must lie in [0, {m}]")
    if (ps < 0).any():
        raise ValidationError("size_law probabilities must be non-negative")
    total = ps.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValidationError(f"size_law sums to {total}, not 1")
    return ks, ps / total


def uniform_sampler(g: Graph, size_law, count: int, seed, shards: int = 1) -> SampleBatch:
    """Draw a size k from size_law, then a uniformly random k-subset of nodes.

    size_law is either a single size (point mass) or a map from size to
    probability supported on [0, M]; pass photon_number_law(...) for a
    size-matched baseline or flat_size_law(...) for a flat window.
    """
    m = g.node_count
    ks, ps = _check_size_law(size_law, m)
    seed = _check_seed(seed)
    samples: list[NodeSubset] = []
    for rng, c in zip(_shard_rngs(seed, shards), _shard_counts(count, shards)):
        for k in rng.choice(ks, size=c, p=ps):
            picked = rng.choice(m, size=int(k), replace=False)
            samples.append(tuple(int(v) for v in np.sort(picked)))
    law_record = [[int(k), float(p)] for k, p in zip(ks, ps)]
    source = {
        "sampler": "uniform",
        "modes": m,
        "size_law": law_record,
        "count": int(count),
        "shards": int(shards),
    }
    conditioning = {"size_law": law_record, "collision_free": True}
    return SampleBatch(source, tuple(samples), seed, conditioning)


def pair_number_law(encoding: EncodedExperiment, j_max: int) -> dict[int, float]:
    """Photon-pair-count marginal of the encoded squeezed state, cut at j_max.

    Each squeezer with parameter tanh r = lam emits k pairs with probability
    sqrt(1 - lam^2) C(2k, k) (lam/2)^(2k); the mode laws convolve to the
    total pair count, renormalized over [0, j_max].
    """
    if j_max < 0:
        raise ValidationError(f"j_max must be non-negative, got {j_max}")
    law = np.zeros(j_max + 1)
    law[0] = 1.0
    for lam in np.asarray(encoding.tanh_r, dtype=float):
        ks = np.arange(j_max + 1)
        mode = np.sqrt(1.0 - lam**2) * np.array([comb(2 * k, k) for k in ks]) * (lam / 2.0) ** (2 * ks)
        law = np.convolve(law, mode)[: j_max + 1]
    total = law.sum()
    if total <= 0:
        raise ValidationError("pair-number law has zero mass")
    return {int(j): float(p / total) for j, p in enumerate(law)}


def oh_sampler(
    g: Graph,
    encoding: EncodedExperiment,
    n_pairs: int | None,
    count: int,
    seed,
    shards: int = 1,
) -> SampleBatch:
    """Quantum-inspired pair sampler over the non-negative kernel.

    Each sample draws unordered pairs i.i.d. with weight B_ij for i != j and
    2 B_ii for i = j, then keeps the union of the drawn indices; any repeated
    index is a collision, rejected and redrawn (the size draw included), and
    the rejection rate is reported in stats.  n_pairs=None draws the pair
    count per sample from the encoded state's pair-number marginal; an
    integer fixes it.  Conditioned on the pair count, collision-free outcome
    probabilities are proportional to the hafnian of the reduced kernel.
    """
    m = g.node_count
    B = np.asarray(encoding.B)
    if B.shape != (m, m):
        raise ValidationError(f"encoding kernel shape {B.shape} does not match {m} nodes")
    if np.abs(B.imag).max(initial=0.0) > 1e-12:
        raise ValidationError("pair sampler requires a real non-negative kernel")
    B = np.real(B)
    if B.min() < -1e-12:
        raise ValidationError("pair sampler requires non-negative kernel entries")

    pair_nodes = []
    weights = []
    for i in range(m):
        for j in range(i, m):
            w = 2.0 * B[i, i] if i == j else B[i, j]
            if w > 0:
                pair_nodes.append((i, j))
                weights.append(w)
    if not pair_nodes:
        raise ValidationError("all-zero kernel: no pairs to draw")
    pair_nodes = np.array(pair_nodes)
    cum = np.cumsum(np.array(weights))
    cum /= cum[-1]
    cum[-1] = 1.0

    if n_pairs is None:
        law = pair_number_law(encoding, m // 2)
        js = np.array(sorted(law))
        pj = np.array([law[j] for j in js])
        law_record = [[int(j), float(p)] for j, p in zip(js, pj)]
    else:
        if isinstance(n_pairs, bool) or not isinstance(n_pairs, (int, np.integer)) or n_pairs < 0:
            raise ValidationError(f"n_pairs must be a non-negative integer or None, got {n_pairs}")
        if 2 * n_pairs > m:
            raise ValidationError(f"{n_pairs} pairs cannot be collision-free on {m} nodes")
        law_record = int(n_pairs)

    seed = _check_seed(seed)
    samples: list[NodeSubset] = []
    attempts = 0
    rejected = 0
    for rng, c in zip(_shard_rngs(seed, shards), _shard_counts(count, shards)):
        for _ in range(c):
            fails = 0
            while True:
                attempts += 1
                j = int(rng.choice(js, p=pj)) if n_pairs is None else int(n_pairs)
                idx = np.searchsorted(cum, rng.random(j), side="right")
                nodes = pair_nodes[idx].ravel()
                if np.unique(nodes).size == 2 * j:
                    samples.append(tuple(int(v) for v in np.sort(nodes)))
                    break
                rejected += 1
                fails += 1
                if fails >= REJECTION_LIMIT:
                    raise ResourceGuardError(
                        f"{REJECTION_LIMIT} consecutive collisions: no collision-free "
                        f"outcome reachable at the requested pair count"
                    )
    source = {
        "sampler": "oh",
        "modes": m,
        "n_pairs": None if n_pairs is None else int(n_pairs),
        "count": int(count),
        "shards": int(shards),
        "kernel_fingerprint": _fingerprint(B),
    }
    conditioning = {
        "collision_free": True,
        "pair_law": "gbs-marginal" if n_pairs is None else "fixed",
        "n_pairs": law_record,
    }
    stats = {
        "attempts": attempts,
        "rejected": rejected,
        "rejection_rate": rejected / attempts if attempts else 0.0,
    }
    return SampleBatch(source, tuple(samples), seed, conditioning, stats)


def save_batch(batch: SampleBatch, path: str | Path) -> None:
    """Write a batch as JSON lines: one header record, then one sample per line."""
    header = {
        "source": batch.source,
        "seed": batch.seed,
        "conditioning": batch.conditioning,
        "stats": batch.stats,
        "sample_count": len(batch.samples),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for s in batch.samples:
            fh.write(json.dumps({"subset": list(s)}) + "\n")


def load_batch(path: str | Path) -> SampleBatch:
    """Read a batch written by save_batch, validating the header count."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ValidationError(f"{path}: empty batch file")
    try:
        header = json.loads(lines[0])
        subsets = [json.loads(line) for line in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})")
    for key in ("source", "seed", "conditioning", "sample_count"):
        if key not in header:
            raise ValidationError(f"{path}: header missing field {key!r}")
    samples = []
    for row, record in enumerate(subsets, start=2):
        if "subset" not in record:
            raise ValidationError(f"{path}: line {row} missing 'subset'")
        samples.append(tuple(int(v) for v in record["subset"]))
    if len(samples) != header["sample_count"]:
        raise ValidationError(
            f"{path}: header says {header['sample_count']} samples, found {len(samples)}"
        )
    return SampleBatch(
        source=header["source"],
        samples=tuple(samples),
        seed=int(header["seed"]),
        conditioning=header["conditioning"],
        stats=header.get("stats", {}),
    )
