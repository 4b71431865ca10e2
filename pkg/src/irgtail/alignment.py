"""Rank statistics, the alignment index K(n), and the S/C/M event checkers.

Everything here is a pure function of weights and degrees. The alignment
index uses the value-equality definition K = inf{m: D_(m) != D_m}, with
sentinel n+1 when the infimum runs over an empty set (full alignment).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .weights import WeightVector


def ranks(degrees) -> np.ndarray:
    """R_i = #{j: D_j >= D_i}, ties sharing the count the defining sum gives."""
    d = np.asarray(degrees)
    if d.size == 0:
        raise ValueError("degree array must be non-empty")
    asc = np.sort(d)
    return (d.size - np.searchsorted(asc, d, side="left")).astype(np.int64)


def alignment_index(degrees) -> int:
    """Smallest m with D_(m) != D_m (1-based); n+1 sentinel if none."""
    d = np.asarray(degrees)
    if d.size == 0:
        raise ValueError("degree array must be non-empty")
    descending = np.sort(d)[::-1]
    mismatch = np.flatnonzero(descending != d)
    if mismatch.size == 0:
        return int(d.size) + 1
    return int(mismatch[0]) + 1


def is_fully_aligned(degrees) -> bool:
    d = np.asarray(degrees)
    return alignment_index(d) == d.size + 1


def top_m_tie_free(degrees, m: int) -> bool:
    """True when the m largest values are distinct and, for m < n, beat the rest.

    Rank alignment (R_1..R_m) = (1..m) needs this on top of K > m: a tie
    anywhere in or at the boundary of the top m inflates a rank even
    though the sorted values still match positionally.
    """
    d = np.asarray(degrees)
    if not 1 <= m <= d.size:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={d.size}")
    descending = np.sort(d)[::-1]
    return bool(np.all(np.diff(descending[:m + 1]) < 0))


def check_event_s(wv: WeightVector, k: int, n: int | None = None) -> bool:
    """S: W_(i) - W_(i+1) > 2 sqrt(5 log(n) W_(i)) for all i <= k."""
    n = wv.n if n is None else int(n)
    if not 0 <= k < n:
        raise ValueError(f"event S needs 0 <= k < n, got k={k}, n={n}")
    if k == 0:
        return True
    if k + 1 > wv.n:
        raise ValueError(f"event S at k={k} needs at least k+1 weights, have {wv.n}")
    w = wv.values
    gaps = w[:k] - w[1:k + 1]
    return bool(np.all(gaps > 2.0 * np.sqrt(5.0 * math.log(n) * w[:k])))


def check_event_c(wv: WeightVector, degrees, k: int, n: int | None = None) -> bool:
    """C: |D_i - W_(i)| < sqrt(5 log(n) W_(i)) for all i <= k."""
    d = np.asarray(degrees)
    n = d.size if n is None else int(n)
    if not 0 <= k <= n:
        raise ValueError(f"event C needs 0 <= k <= n, got k={k}, n={n}")
    if k == 0:
        return True
    if k > wv.n or k > d.size:
        raise ValueError(f"event C at k={k} needs k weights and degrees")
    w = wv.values[:k]
    return bool(np.all(np.abs(d[:k] - w) < np.sqrt(5.0 * math.log(n) * w)))


def check_event_m(degrees, k: int) -> bool:
    """M: D_k > max_{i > k} D_i; vacuously true at k = n (empty maximum)."""
    d = np.asarray(degrees)
    if not 1 <= k <= d.size:
        raise ValueError(f"event M needs 1 <= k <= n, got k={k}, n={d.size}")
    if k == d.size:
        return True
    return bool(d[k - 1] > d[k:].max())


def admissible_k(n: int, alpha: float, c: float = 1.0) -> int:
    """max(1, floor(c n^{1/(4a+1)} / log^a n)): a k honoring the Theorem rate.

    The rate condition is asymptotic and constant-free; c is the user's
    knob, default 1.
    """
    if n < 3:
        raise ValueError("admissible_k needs n >= 3")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not c > 0:
        raise ValueError("c must be positive")
    value = c * n ** (1.0 / (4.0 * alpha + 1.0)) / math.log(n) ** alpha
    return max(1, math.floor(value))


@dataclass(frozen=True)
class AlignmentRecord:
    """One replicate's alignment summary at a common k_used."""

    n: int
    k_used: int
    K: int
    event_s: bool
    event_c: bool
    event_m: bool
    seed: int | None = None
    ranks_prefix: np.ndarray | None = None

    @property
    def full_alignment(self) -> bool:
        return self.K == self.n + 1

    @property
    def aligned_at_k(self) -> bool:
        """(R_1..R_k) = (1..k) in the sense of Theorem 1 at k = k_used."""
        return self.K > self.k_used


def evaluate_alignment(wv: WeightVector, degrees, k_used: int, *,
                       seed: int | None = None,
                       keep_ranks_prefix: bool = False) -> AlignmentRecord:
    """Assemble K and the three event flags for one generated sample."""
    d = np.asarray(degrees)
    record = AlignmentRecord(
        n=int(d.size),
        k_used=int(k_used),
        K=alignment_index(d),
        event_s=check_event_s(wv, k_used, d.size),
        event_c=check_event_c(wv, d, k_used),
        event_m=check_event_m(d, k_used) if k_used >= 1 else True,
        seed=seed,
        ranks_prefix=ranks(d)[:k_used].copy() if keep_ranks_prefix else None,
    )
    return record
