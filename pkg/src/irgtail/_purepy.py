"""Pure-numpy sampling kernels, stream-compatible with irgtail._kernels.

Both backends consume the caller's Generator through the exact same draw
protocol, so equal seeds give bitwise-equal samples no matter which backend
is active:

  NR: one Poisson draw for the non-loop instance count N; a block of 2N
      uniforms consumed pairwise (inverse-CDF index pairs); redraw rounds
      for colliding pairs, two uniforms per still-colliding pair in draw
      order; finally n Poisson draws for the loop multiplicities.
  CL: rows u = 0..n-1; within a row, one uniform for the geometric skip
      whenever the current probability bound is < 1, then one acceptance
      uniform per visited candidate.

tests/test_backend.py freezes this protocol; change both backends together
or not at all. Rates and cumulative sums are computed once by the caller
(graphs module) and passed in, so both backends see identical inputs.
"""

from __future__ import annotations

import math

import numpy as np


def nr_sample(rng: np.random.Generator, w: np.ndarray, cumw: np.ndarray,
              L: float, nonloop_rate: float, loop_rates: np.ndarray,
              want_edges: bool, retry_cap: int):
    """Non-loop pairs by Poisson thinning + per-node loop Poissons.

    Returns (degrees, ei, ej, loop_counts); ei/ej are per-instance endpoint
    arrays with ei <= ej, or None when want_edges is false. Uniforms are
    scaled by cumw[-1] (not L) so inverted indices stay in range.
    """
    n = w.shape[0]
    w_cum_total = cumw[-1]
    count = int(rng.poisson(nonloop_rate))
    u = rng.random(2 * count)
    x = u * w_cum_total
    ei = np.searchsorted(cumw, x[0::2], side="right")
    ej = np.searchsorted(cumw, x[1::2], side="right")
    bad = np.flatnonzero(ei == ej)
    rounds = 0
    while bad.size:
        rounds += 1
        if rounds > retry_cap:
            raise RuntimeError(f"pair collision redraws exceeded cap {retry_cap}")
        x2 = rng.random(2 * bad.size) * w_cum_total
        ei[bad] = np.searchsorted(cumw, x2[0::2], side="right")
        ej[bad] = np.searchsorted(cumw, x2[1::2], side="right")
        bad = bad[ei[bad] == ej[bad]]
    loop_counts = rng.poisson(loop_rates).astype(np.int64)
    degrees = (np.bincount(ei, minlength=n) + np.bincount(ej, minlength=n)
               + loop_counts).astype(np.int64)
    if not want_edges:
        return degrees, None, None, loop_counts
    lo = np.minimum(ei, ej).astype(np.int64)
    hi = np.maximum(ei, ej).astype(np.int64)
    return degrees, lo, hi, loop_counts


def cl_sample(rng: np.random.Generator, w: np.ndarray, L: float, want_edges: bool):
    """Skip-sampling over rows of the upper triangle, diagonal included.

    Weights must be descending so the running bound p dominates every later
    probability in the row. Returns (degrees, ei, ej) with ei <= ej and at
    most one instance per pair.
    """
    n = w.shape[0]
    wl = w.tolist()
    total = float(L)
    deg = [0] * n
    ei: list[int] = []
    ej: list[int] = []
    next_u = rng.random
    log, log1p, floor = math.log, math.log1p, math.floor
    for u_idx in range(n):
        wu = wl[u_idx]
        v = u_idx
        p = wu * wl[v] / total
        if p > 1.0:
            p = 1.0
        while v < n:
            if p <= 0.0:
                break
            if p < 1.0:
                r = next_u()
                if r <= 0.0:
                    break  # log(0) gives an infinite skip: off the row
                ratio = log(r) / log1p(-p)
                if ratio >= n - v:
                    break
                v += int(floor(ratio))
            q = wu * wl[v] / total
            if q > 1.0:
                q = 1.0
            r2 = next_u()
            if r2 < q / p:
                deg[u_idx] += 1
                if v != u_idx:
                    deg[v] += 1
                if want_edges:
                    ei.append(u_idx)
                    ej.append(v)
            p = q
            v += 1
    degrees = np.asarray(deg, dtype=np.int64)
    if not want_edges:
        return degrees, None, None
    return (degrees, np.asarray(ei, dtype=np.int64), np.asarray(ej, dtype=np.int64))
