"""Exact hafnian and loop-hafnian evaluation.

Two independent routes are kept deliberately: a matching-enumeration
oracle (ground truth, guarded to small dimensions) and a fast
inclusion-exclusion kernel over index pairs with power-trace polynomial
assembly, O(poly(n) * 2^(n/2)).  The fast route is validated against the
oracle wherever both run; nothing in the package collapses the two.

Also provides the repeated-index reduction of a mode matrix to a photon
pattern's kernel, the loop-hafnian expansion into a sum of hafnians over
looped index subsets (used as a cross-check identity), and its low-order
truncation.

Numerical policy: all arithmetic in complex double precision.  Above
dimension ~20 the fast kernel's 2^(n/2) alternating sum approaches the
double-precision frontier; values there should be treated as carrying
relative error on the order of 1e-12 * 2^(n/2).
"""

from __future__ import annotations

from itertools import combinations

import numba as nb
import numpy as np

from .errors import ResourceGuardError, ValidationError

ENUM_DIM_LIMIT = 14
EXPANSION_DIM_LIMIT = 10

SymmetricKernel = np.ndarray


def symmetric_kernel(entries: np.ndarray) -> SymmetricKernel:
    """Validate a square complex symmetric matrix (1e-12 symmetry tolerance)."""
    K = np.asarray(entries, dtype=complex)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError(f"kernel must be square, got shape {K.shape}")
    if K.size:
        if not np.all(np.isfinite(K.real)) or not np.all(np.isfinite(K.imag)):
            raise ValidationError("kernel contains non-finite entries")
        if np.max(np.abs(K - K.T)) > 1e-12:
            raise ValidationError("kernel not symmetric within 1e-12")
    return K


def reduce(B: np.ndarray, pattern) -> SymmetricKernel:
    """Repeat row/column i of B pattern[i] times (ascending mode order).

    The result is the kernel whose (loop) hafnian enters the probability of
    detecting that photon pattern.
    """
    B = symmetric_kernel(B)
    n = np.asarray(pattern)
    if n.shape != (B.shape[0],):
        raise ValidationError(
            f"pattern length {n.shape} does not match matrix dimension {B.shape[0]}"
        )
    if n.size and (np.any(n < 0) or np.any(n != np.floor(n))):
        raise ValidationError("pattern entries must be non-negative integers")
    reps = n.astype(np.int64)
    return np.repeat(np.repeat(B, reps, axis=0), reps, axis=1)


def haf_enum(K: np.ndarray) -> complex:
    """Hafnian by perfect-matching enumeration: the ground-truth oracle.

    Pairs the lowest unmatched index first, giving each of the (n-1)!!
    matchings exactly once.  Diagonal entries are ignored by construction.
    Empty matrix -> 1; odd dimension -> 0.
    """
    K = symmetric_kernel(K)
    n = K.shape[0]
    if n > ENUM_DIM_LIMIT:
        raise ResourceGuardError(
            f"haf_enum limited to dimension {ENUM_DIM_LIMIT}, got {n}"
        )
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        return 0.0 + 0.0j

    def match(avail: tuple[int, ...]) -> complex:
        if not avail:
            return 1.0 + 0.0j
        i, rest = avail[0], avail[1:]
        total = 0.0 + 0.0j
        for pos, j in enumerate(rest):
            total += K[i, j] * match(rest[:pos] + rest[pos + 1 :])
        return total

    return complex(match(tuple(range(n))))


def lhaf_enum(K: np.ndarray) -> complex:
    """Loop hafnian by single-pair-matching enumeration (oracle).

    The lowest unmatched index either loops (diagonal factor) or pairs with
    a later index; recursion enumerates every single-pair matching once.
    """
    K = symmetric_kernel(K)
    n = K.shape[0]
    if n > ENUM_DIM_LIMIT:
        raise ResourceGuardError(
            f"lhaf_enum limited to dimension {ENUM_DIM_LIMIT}, got {n}"
        )
    if n == 0:
        return 1.0 + 0.0j

    def match(avail: tuple[int, ...]) -> complex:
        if not avail:
            return 1.0 + 0.0j
        i, rest = avail[0], avail[1:]
        total = K[i, i] * match(rest)
        for pos, j in enumerate(rest):
            total += K[i, j] * match(rest[:pos] + rest[pos + 1 :])
        return total

    return complex(match(tuple(range(n))))


@nb.njit(cache=True, nogil=True)
def _powertrace_sum(A: np.ndarray, v: np.ndarray, m: int) -> complex:
    """Inclusion-exclusion over index-pair subsets with power-trace assembly.

    A is 2m x 2m with index pairs (2t, 2t+1).  For each pair subset S the
    coefficient of x^m in exp(sum_j g_j x^j) is accumulated with alternating
    sign, where g_j collects tr((XA_S)^j)/(2j) plus the loop contribution
    v_S^T (XA_S)^(j-1) X v_S / 2 and X swaps indices within each pair.
    """
    total = 0.0 + 0.0j
    for mask in range(1, 1 << m):
        s = 0
        for t in range(m):
            if mask & (1 << t):
                s += 1
        ns = 2 * s
        idx = np.empty(ns, np.int64)
        k = 0
        for t in range(m):
            if mask & (1 << t):
                idx[k] = 2 * t
                idx[k + 1] = 2 * t + 1
                k += 2
        # Local pairs stay adjacent, so the pair-swap X flips the low bit.
        XA = np.empty((ns, ns), np.complex128)
        xv = np.empty(ns, np.complex128)
        vs = np.empty(ns, np.complex128)
        for a in range(ns):
            ia = idx[a ^ 1]
            for b in range(ns):
                XA[a, b] = A[ia, idx[b]]
            xv[a] = v[ia]
            vs[a] = v[idx[a]]
        g = np.zeros(m + 1, np.complex128)
        prev = np.eye(ns).astype(np.complex128)  # (XA)^(j-1)
        for j in range(1, m + 1):
            pxv = prev @ xv
            loop = 0.0 + 0.0j
            for a in range(ns):
                loop += vs[a] * pxv[a]
            cur = prev @ XA
            tr = 0.0 + 0.0j
            for a in range(ns):
                tr += cur[a, a]
            g[j] = tr / (2 * j) + 0.5 * loop
            prev = cur
        # Coefficient of x^m in exp(sum g_j x^j) by the derivative recurrence.
        e = np.zeros(m + 1, np.complex128)
        e[0] = 1.0
        for k2 in range(1, m + 1):
            acc = 0.0 + 0.0j
            for j in range(1, k2 + 1):
                acc += j * g[j] * e[k2 - j]
            e[k2] = acc / k2
        if (m - s) % 2 == 0:
            total += e[m]
        else:
            total -= e[m]
    return total


def haf_fast(K: np.ndarray) -> complex:
    """Fast hafnian; agrees with haf_enum wherever both run (1e-10 relative)."""
    K = symmetric_kernel(K)
    n = K.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        return 0.0 + 0.0j
    K0 = K.copy()
    np.fill_diagonal(K0, 0.0)  # the hafnian never reads the diagonal
    v = np.zeros(n, dtype=complex)
    return complex(_powertrace_sum(np.ascontiguousarray(K0), v, n // 2))


def lhaf_fast(K: np.ndarray) -> complex:
    """Fast loop hafnian; the diagonal of K carries the loop weights."""
    K = symmetric_kernel(K)
    n = K.shape[0]
    if n == 0:
        return 1.0 + 0.0j
    if n % 2:
        # Pad with an index that must loop with weight 1; the value is unchanged.
        padded = np.zeros((n + 1, n + 1), dtype=complex)
        padded[:n, :n] = K
        padded[n, n] = 1.0
        K = padded
        n += 1
    v = np.diag(K).copy()
    return complex(_powertrace_sum(np.ascontiguousarray(K), v, n // 2))


def _looped_subset_terms(B: np.ndarray, gamma: np.ndarray, sizes) -> complex:
    """Sum of gamma-products times hafnians of complements over looped subsets."""
    n = B.shape[0]
    all_idx = np.arange(n)
    total = 0.0 + 0.0j
    for r in sizes:
        for looped in combinations(range(n), r):
            rest = np.setdiff1d(all_idx, looped, assume_unique=True)
            term = complex(np.prod(gamma[list(looped)])) if looped else 1.0 + 0.0j
            total += term * haf_fast(B[np.ix_(rest, rest)])
    return total


def lhaf_expansion_check(B: np.ndarray, gamma) -> float:
    """Residual of the loop-hafnian expansion into hafnians of subkernels.

    Left side: loop hafnian of B with its diagonal replaced by gamma.
    Right side: sum over looped index subsets (complement of even size) of
    the gamma product times the hafnian of the complementary subkernel.
    Returns |lhs - rhs| / (1 + |lhs|).
    """
    B = symmetric_kernel(B)
    n = B.shape[0]
    if n > EXPANSION_DIM_LIMIT:
        raise ResourceGuardError(
            f"expansion check limited to dimension {EXPANSION_DIM_LIMIT}, got {n}"
        )
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (n,):
        raise ValidationError(f"gamma length {gamma.shape} does not match dimension {n}")
    filled = B.copy()
    np.fill_diagonal(filled, gamma)
    lhs = lhaf_fast(filled)
    rhs = _looped_subset_terms(B, gamma, sizes=range(n % 2, n + 1, 2))
    return float(abs(lhs - rhs) / (1 + abs(lhs)))


def lhaf_truncated(B: np.ndarray, gamma, order: int) -> complex:
    """Partial sum of the loop-hafnian expansion up to the given loop tier.

    Order 0 keeps only the minimum number of loops (none for even
    dimension), i.e. the plain hafnian; order 1 adds the next tier, whose
    terms carry two extra loop factors.
    """
    if order not in (0, 1):
        raise ValidationError(f"order must be 0 or 1, got {order}")
    B = symmetric_kernel(B)
    n = B.shape[0]
    gamma = np.asarray(gamma, dtype=complex)
    if gamma.shape != (n,):
        raise ValidationError(f"gamma length {gamma.shape} does not match dimension {n}")
    base = n % 2
    sizes = range(base, min(base + 2 * order, n) + 1, 2)
    return complex(_looped_subset_terms(B, gamma, sizes))
