"""Exact outcome probabilities, subset distributions, and Shannon entropy.

A zero-displacement pure state's pattern probability is |Haf(B_n)|^2 over
the square root of det Sigma_Q and the pattern factorial.  With
displacement the hafnian becomes a loop hafnian whose kernel diagonal
carries the loop vector, with prefactor exp(-(1/2) d^dag Sigma_Q^-1 d).
After loss the pure factorized form is invalid; the general path reduces
the full doubled kernel over the doubled pattern and takes one loop
hafnian (no modulus squared), which collapses to the pure form when the
state is pure.  All paths are validated against an independent Fock-space
oracle in the test suite.

det Sigma_Q is accumulated in log space to avoid underflow at large mode
counts.  Distributions are summed in lexicographic subset order so results
are independent of any evaluation parallelism.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb, exp, factorial, inf, log2
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import ResourceGuardError, ValidationError
from .gaussian import GaussianState, kernel_matrix, normalization_exponent
from .graph import NodeSubset
from .hafnian import haf_fast, lhaf_fast, reduce

SUBSET_GUARD = 5_000_000
PURITY_TOL = 1e-9


@dataclass(frozen=True)
class SubsetDistribution:
    """Probabilities over all k-subsets of modes (collision-free patterns).

    entries maps sorted index tuples to probabilities; total_raw_mass is the
    unconditioned probability of the whole k-click slice, kept even when
    entries are renormalized over it.
    """

    k: int
    entries: dict[NodeSubset, float]
    renormalized: bool
    total_raw_mass: float


class _StateContext(NamedTuple):
    modes: int
    kernel: np.ndarray  # 2M x 2M doubled sampling kernel
    gamma_vec: np.ndarray  # length 2M loop vector
    log_sqrt_det_q: float
    norm_exponent: float
    pure: bool


def _context(state: GaussianState) -> _StateContext:
    m = state.modes
    kernel, gamma_vec = kernel_matrix(state)
    eigs = np.linalg.eigvalsh(state.sigma_q)
    log_sqrt_det = 0.5 * float(np.sum(np.log(eigs)))
    norm_exp = normalization_exponent(state)
    purity_log = float(np.sum(np.log(2 * np.linalg.eigvalsh(state.sigma).real)))
    pure = abs(purity_log) < PURITY_TOL * 2 * m
    return _StateContext(m, kernel, gamma_vec, log_sqrt_det, norm_exp, pure)


def _pattern_array(pattern, modes: int) -> np.ndarray:
    n = np.asarray(pattern)
    if n.shape != (modes,):
        raise ValidationError(f"pattern must have {modes} entries, got shape {n.shape}")
    if np.any(n < 0) or np.any(n != np.floor(n)):
        raise ValidationError("pattern entries must be non-negative integers")
    return n.astype(np.int64)


def _prob_from_context(ctx: _StateContext, n: np.ndarray) -> float:
    m = ctx.modes
    log_prefactor = -ctx.norm_exponent - ctx.log_sqrt_det_q
    n_fact = 1.0
    for k in n:
        n_fact *= factorial(int(k))
    if ctx.pure:
        # Factorized form: one M-indexed kernel, modulus squared.
        B = ctx.kernel[:m, :m]
        filled = reduce(B, n).astype(complex)
        if filled.size:
            np.fill_diagonal(filled, np.repeat(ctx.gamma_vec[:m], n))
        val = abs(lhaf_fast(filled)) ** 2
    else:
        doubled = np.concatenate([n, n])
        filled = reduce(ctx.kernel, doubled).astype(complex)
        if filled.size:
            np.fill_diagonal(filled, np.repeat(ctx.gamma_vec, doubled))
        raw = lhaf_fast(filled)
        if abs(raw.imag) > 1e-9 * max(1.0, abs(raw.real)):
            raise RuntimeError(f"loop hafnian of a physical kernel not real: {raw}")
        val = raw.real
    p = val * exp(log_prefactor) / n_fact
    if p < -1e-12:
        raise RuntimeError(f"negative probability {p} for pattern {n}")
    return max(p, 0.0)


def pattern_prob_gbs(state: GaussianState, pattern) -> float:
    """Probability of a photon pattern for a pure, undisplaced state.

    Evaluates |Haf(B_n)|^2 / (sqrt(det Sigma_Q) n!).  Rejects states that
    are displaced or mixed; those belong to pattern_prob_dgbs.
    """
    ctx = _context(state)
    if np.any(np.abs(state.disp) > 1e-12):
        raise ValidationError("state is displaced; use pattern_prob_dgbs")
    if not ctx.pure:
        raise ValidationError("state is mixed; use pattern_prob_dgbs")
    n = _pattern_array(pattern, ctx.modes)
    B = ctx.kernel[: ctx.modes, : ctx.modes]
    n_fact = 1.0
    for k in n:
        n_fact *= factorial(int(k))
    val = abs(haf_fast(reduce(B, n))) ** 2
    return val * exp(-ctx.log_sqrt_det_q) / n_fact


def pattern_prob_dgbs(state: GaussianState, pattern) -> float:
    """Probability of a photon pattern for any valid state.

    Pure states use the factorized loop-hafnian form; mixed states reduce
    the doubled kernel over the doubled pattern.  Coincides with
    pattern_prob_gbs at zero displacement and no loss.
    """
    ctx = _context(state)
    n = _pattern_array(pattern, ctx.modes)
    return _prob_from_context(ctx, n)


def pattern_probs(state: GaussianState, patterns: Iterable) -> np.ndarray:
    """Batch evaluation sharing one state analysis across many patterns."""
    ctx = _context(state)
    return np.array([_prob_from_context(ctx, _pattern_array(p, ctx.modes)) for p in patterns])


def subset_distribution(
    state: GaussianState,
    k: int,
    collision_free: bool = True,
    renormalize: bool = True,
) -> SubsetDistribution:
    """Distribution over exactly-k-click patterns (0/1 per mode).

    With renormalize the entries are conditioned on the k-click slice (its
    raw mass is still reported); otherwise entries are raw probabilities.
    collision_free=False admits collision patterns of total k and keys them
    by their sorted index multiset's support; it exists for completeness
    checks and is guarded the same way.
    """
    m = state.modes
    if (collision_free and not 0 <= k <= m) or k < 0:
        raise ValidationError(f"subset size {k} invalid for {m} modes")
    n_outcomes = comb(m, k) if collision_free else comb(m + k - 1, k)
    if n_outcomes > SUBSET_GUARD:
        raise ResourceGuardError(
            f"{n_outcomes} outcomes exceed the enumeration guard ({SUBSET_GUARD})"
        )
    ctx = _context(state)
    entries: dict[NodeSubset, float] = {}
    if collision_free:
        for subset in combinations(range(m), k):
            pattern = np.zeros(m, dtype=np.int64)
            pattern[list(subset)] = 1
            entries[subset] = _prob_from_context(ctx, pattern)
    else:
        for pattern in _compositions(m, k):
            subset = tuple(int(i) for i in np.nonzero(pattern)[0])
            entries.setdefault(subset, 0.0)
            entries[subset] += _prob_from_context(ctx, pattern)
    total = float(sum(entries[s] for s in sorted(entries)))
    if renormalize:
        if total <= 0:
            raise ValidationError(f"zero probability mass on the {k}-click slice")
        entries = {s: p / total for s, p in entries.items()}
    return SubsetDistribution(k, entries, renormalize, total)


def _compositions(m: int, total: int):
    """All count patterns of given total over m modes (lexicographic)."""
    pattern = np.zeros(m, dtype=np.int64)

    def rec(pos: int, remaining: int):
        if pos == m - 1:
            pattern[pos] = remaining
            yield pattern.copy()
            pattern[pos] = 0
            return
        for take in range(remaining + 1):
            pattern[pos] = take
            yield from rec(pos + 1, remaining - take)
            pattern[pos] = 0

    yield from rec(0, total)


def max_clique_prob(state: GaussianState, clique: Sequence[int]) -> float:
    """Raw (unconditioned) probability of the clique's indicator pattern."""
    m = state.modes
    pattern = np.zeros(m, dtype=np.int64)
    for i in clique:
        if not 0 <= int(i) < m:
            raise ValidationError(f"node index {i} out of range [0, {m})")
        if pattern[int(i)]:
            raise ValidationError(f"duplicate node index {i}")
        pattern[int(i)] = 1
    return pattern_prob_dgbs(state, pattern)


def shannon_entropy(dist: SubsetDistribution) -> float:
    """Entropy -sum p log2 p of a renormalized distribution (0 log 0 = 0)."""
    if not dist.renormalized:
        raise ValidationError("entropy requires a renormalized distribution")
    total = sum(dist.entries.values())
    if abs(total - 1) > 1e-10:
        raise ValidationError(f"distribution sums to {total}, not 1")
    return -sum(p * log2(p) for p in dist.entries.values() if p > 0)
