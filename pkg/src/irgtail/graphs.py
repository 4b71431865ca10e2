"""Norros-Reittu multigraphs and Chung-Lu graphs from sorted weights.

Both models take the paper's index range 1 <= i <= j <= n literally: the
diagonal is included and a loop contributes once to its endpoint's degree
(D_i = sum_j A_ij). Naive O(n^2) generators serve as distributional oracles;
the fast generators reproduce the same laws in O(n + m) expected time via
Poisson thinning (NR) and descending-weight skip sampling (CL).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._dispatch import BACKEND, get_backend
from ._io import open_text
from .weights import WeightVector

MODEL_NR = "norros-reittu"
MODEL_CL = "chung-lu"

NAIVE_CAP = 4096
RETRY_CAP = 10**6


class NaiveCapError(ValueError):
    """n too large for the O(n^2) oracle generators."""


@dataclass(frozen=True, eq=False)
class EdgeList:
    """Unordered pair multiset: parallel arrays with i <= j, multiplicity >= 1."""

    i: np.ndarray
    j: np.ndarray
    multiplicity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "i", np.asarray(self.i, dtype=np.int64))
        object.__setattr__(self, "j", np.asarray(self.j, dtype=np.int64))
        object.__setattr__(self, "multiplicity", np.asarray(self.multiplicity, dtype=np.int64))
        if not (self.i.shape == self.j.shape == self.multiplicity.shape):
            raise ValueError("edge arrays must have equal length")
        if np.any(self.i > self.j):
            raise ValueError("edges must satisfy i <= j")
        if np.any(self.multiplicity < 1):
            raise ValueError("multiplicities must be >= 1")

    @property
    def pair_count(self) -> int:
        return int(self.i.size)

    @property
    def instance_count(self) -> int:
        return int(self.multiplicity.sum())

    def loop_mask(self) -> np.ndarray:
        return self.i == self.j


@dataclass(frozen=True, eq=False)
class GraphSample:
    model: str
    n: int
    degrees: np.ndarray
    edges: EdgeList | None
    weight_total: float
    loops_counted_once: bool = True


def degrees(g: GraphSample) -> np.ndarray:
    """Degree vector D_i = sum_j A_ij, loops counted once."""
    if g.degrees is not None:
        return g.degrees
    if g.edges is None:
        raise ValueError("sample has neither degrees nor edges")
    return degrees_from_edges(g.n, g.edges)


def degrees_from_edges(n: int, edges: EdgeList) -> np.ndarray:
    deg = (np.bincount(edges.i, weights=edges.multiplicity, minlength=n)
           + np.bincount(edges.j, weights=edges.multiplicity, minlength=n))
    loops = edges.loop_mask()
    if loops.any():
        # the two bincounts double-count loops; the convention counts once
        deg -= np.bincount(edges.i[loops], weights=edges.multiplicity[loops], minlength=n)
    return deg.astype(np.int64)


def _check_naive(n: int, naive_cap: int, fast_name: str):
    if n > naive_cap:
        raise NaiveCapError(
            f"naive generator is an O(n^2) oracle capped at {naive_cap} nodes "
            f"(got n={n}); use {fast_name} instead")


def _concat_edge_parts(parts) -> EdgeList:
    if not parts:
        empty = np.empty(0, dtype=np.int64)
        return EdgeList(empty, empty.copy(), np.empty(0, dtype=np.int64))
    i = np.concatenate([p[0] for p in parts])
    j = np.concatenate([p[1] for p in parts])
    m = np.concatenate([p[2] for p in parts])
    return EdgeList(i, j, m)


def generate_nr_naive(wv: WeightVector, rng: np.random.Generator, *,
                      materialize_edges: bool = True,
                      naive_cap: int = NAIVE_CAP) -> GraphSample:
    """A_ij ~ Poisson(W_(i) W_(j) / L) independently for every i <= j."""
    _check_naive(wv.n, naive_cap, "generate_nr_fast")
    n, w, total = wv.n, wv.values, wv.total
    deg = np.zeros(n, dtype=np.int64)
    parts = []
    for i in range(n):
        lam = w[i] * w[i:] / total
        row = rng.poisson(lam)
        deg[i] += row.sum()
        deg[i + 1:] += row[1:]
        if materialize_edges:
            nz = np.flatnonzero(row)
            if nz.size:
                parts.append((np.full(nz.size, i, dtype=np.int64),
                              (nz + i).astype(np.int64),
                              row[nz].astype(np.int64)))
    edges = _concat_edge_parts(parts) if materialize_edges else None
    return GraphSample(MODEL_NR, n, deg, edges, total)


def generate_cl_naive(wv: WeightVector, rng: np.random.Generator, *,
                      materialize_edges: bool = True,
                      naive_cap: int = NAIVE_CAP) -> GraphSample:
    """A_ij ~ Bernoulli(min(W_(i) W_(j) / L, 1)) for every i <= j, diagonal included."""
    _check_naive(wv.n, naive_cap, "generate_cl_fast")
    n, w, total = wv.n, wv.values, wv.total
    deg = np.zeros(n, dtype=np.int64)
    parts = []
    for i in range(n):
        p = np.minimum(w[i] * w[i:] / total, 1.0)
        row = (rng.random(n - i) < p).astype(np.int64)
        deg[i] += row.sum()
        deg[i + 1:] += row[1:]
        if materialize_edges:
            nz = np.flatnonzero(row)
            if nz.size:
                parts.append((np.full(nz.size, i, dtype=np.int64),
                              (nz + i).astype(np.int64),
                              np.ones(nz.size, dtype=np.int64)))
    edges = _concat_edge_parts(parts) if materialize_edges else None
    return GraphSample(MODEL_CL, n, deg, edges, total)


def _consolidate_nr_edges(lo, hi, loop_counts) -> EdgeList:
    parts = []
    if lo is not None and lo.size:
        order = np.lexsort((hi, lo))
        sl, sh = lo[order], hi[order]
        new = np.empty(sl.size, dtype=bool)
        new[0] = True
        new[1:] = (sl[1:] != sl[:-1]) | (sh[1:] != sh[:-1])
        starts = np.flatnonzero(new)
        counts = np.diff(np.append(starts, sl.size)).astype(np.int64)
        parts.append((sl[starts], sh[starts], counts))
    idx = np.flatnonzero(loop_counts)
    if idx.size:
        parts.append((idx.astype(np.int64), idx.astype(np.int64),
                      loop_counts[idx].astype(np.int64)))
    edges = _concat_edge_parts(parts)
    order = np.lexsort((edges.j, edges.i))
    return EdgeList(edges.i[order], edges.j[order], edges.multiplicity[order])


def generate_nr_fast(wv: WeightVector, rng: np.random.Generator, *,
                     materialize_edges: bool = False,
                     retry_cap: int = RETRY_CAP,
                     backend: str | None = None) -> GraphSample:
    """Exact NR law in O(n + m): Poisson-thinned pairs plus direct loops.

    Non-loop instances: N ~ Poisson((L - S2/L)/2) index pairs drawn by
    inverse CDF with collision redraws; loops: A_ii ~ Poisson(W_i^2/L).
    """
    impl = get_backend(backend)
    w = np.ascontiguousarray(wv.values)
    total = wv.total
    cumw = np.cumsum(w)
    s2 = float(w @ w)
    nonloop_rate = max(0.0, 0.5 * (total - s2 / total))
    loop_rates = w * w / total
    deg, lo, hi, loop_counts = impl.nr_sample(
        rng, w, cumw, total, nonloop_rate, loop_rates,
        bool(materialize_edges), int(retry_cap))
    edges = _consolidate_nr_edges(lo, hi, loop_counts) if materialize_edges else None
    return GraphSample(MODEL_NR, wv.n, deg, edges, total)


def generate_cl_fast(wv: WeightVector, rng: np.random.Generator, *,
                     materialize_edges: bool = False,
                     backend: str | None = None) -> GraphSample:
    """Exact CL law in O(n + m) by Miller-Hagberg geometric skip sampling."""
    impl = get_backend(backend)
    w = np.ascontiguousarray(wv.values)
    deg, ei, ej = impl.cl_sample(rng, w, wv.total, bool(materialize_edges))
    edges = None
    if materialize_edges:
        # row-major emission is already sorted with i <= j, one per pair
        edges = EdgeList(ei, ej, np.ones(ei.size, dtype=np.int64))
    return GraphSample(MODEL_CL, wv.n, deg, edges, wv.total)


def permute_labels(g: GraphSample, rng: np.random.Generator) -> GraphSample:
    """Relabel by a uniform permutation: the unordered-model view of g."""
    if g.edges is None:
        raise ValueError("permute_labels needs materialized edges")
    perm = np.asarray(rng.permutation(g.n))
    new_deg = np.empty_like(g.degrees)
    new_deg[perm] = g.degrees
    pi, pj = perm[g.edges.i], perm[g.edges.j]
    lo, hi = np.minimum(pi, pj), np.maximum(pi, pj)
    order = np.lexsort((hi, lo))
    edges = EdgeList(lo[order], hi[order], g.edges.multiplicity[order])
    return GraphSample(g.model, g.n, new_deg, edges, g.weight_total, g.loops_counted_once)


def write_degrees_csv(g: GraphSample, path) -> None:
    """node,degree rows; node is the 1-based weight-rank label."""
    with open_text(path, "w") as fh:
        fh.write("node,degree\n")
        for node, d in enumerate(g.degrees, start=1):
            fh.write(f"{node},{d}\n")


def write_edges_csv(g: GraphSample, path) -> None:
    """i,j,multiplicity rows, 1-based labels, i <= j, lexicographic order."""
    if g.edges is None:
        raise ValueError("sample has no materialized edges")
    with open_text(path, "w") as fh:
        fh.write("i,j,multiplicity\n")
        for i, j, m in zip(g.edges.i, g.edges.j, g.edges.multiplicity):
            fh.write(f"{i + 1},{j + 1},{m}\n")


def read_degrees_csv(path) -> np.ndarray:
    """Degree vector in node-label order from 'node,degree' or bare 'degree' CSV."""
    with open_text(path, "r") as fh:
        header = fh.readline().strip()
        rows = [line.strip() for line in fh if line.strip()]
    if header == "node,degree":
        pairs = []
        for row in rows:
            node_s, _, deg_s = row.partition(",")
            pairs.append((int(node_s), int(deg_s)))
        nodes = np.array([p[0] for p in pairs], dtype=np.int64)
        if sorted(nodes) != list(range(1, len(pairs) + 1)):
            raise ValueError("node column must be a permutation of 1..n")
        deg = np.empty(len(pairs), dtype=np.int64)
        deg[nodes - 1] = [p[1] for p in pairs]
        return deg
    if header == "degree":
        return np.array([int(r) for r in rows], dtype=np.int64)
    raise ValueError(f"expected 'node,degree' or 'degree' header, found {header!r}")
