"""Reproducible Monte Carlo engine for the alignment and normality studies.

Replicate (n, i) always runs on its own RNG stream seeded by
derive_seed(master_seed, n, i), and output rows are ordered by
(n, replicate index), so results are byte-identical no matter how many
workers participate or in which order they finish.
"""

from __future__ import annotations

import configparser
import hashlib
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from ._io import open_text
from .alignment import AlignmentRecord, admissible_k, alignment_index, evaluate_alignment
from .estimators import DegenerateSampleError, hill, pickands, pwm
from .graphs import MODEL_CL, MODEL_NR, generate_cl_fast, generate_nr_fast
from .weights import WeightDistribution, parse_distribution, sample_weights

MASK64 = (1 << 64) - 1
ESTIMATOR_NAMES = ("hill", "pickands", "pwm")
_ESTIMATOR_FN = {"hill": hill, "pickands": pickands, "pwm": pwm}


# ------------------------------------------------------------------ seeding


def _mix64(x: int) -> int:
    """One SplitMix64 step: golden-gamma increment, then the finalizer."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, n: int, replicate_index: int) -> int:
    """Bit-exact chain: h = mix(master); h = mix(h ^ n); h = mix(h ^ rep).

    Each argument is reduced mod 2^64 first; the result seeds PCG64.
    """
    h = _mix64(master_seed & MASK64)
    h = _mix64(h ^ (n & MASK64))
    return _mix64(h ^ (replicate_index & MASK64))


def replicate_rng(master_seed: int, n: int, replicate_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, n, replicate_index)))


# ---------------------------------------------------------------- small math


@dataclass(frozen=True)
class PowerLawFit:
    coefficient: float
    exponent: float
    r_squared: float
    points_used: int
    points_filtered: int


def fit_power_law(pairs) -> PowerLawFit:
    """OLS of log2(K) on log2(n); coefficient is 2^intercept.

    Points with K < 1 or K = n + 1 (the full-alignment sentinel) are
    dropped and counted; refuses to fit fewer than two distinct n.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError("fit_power_law expects a non-empty list of (n, K) pairs")
    n, kval = arr[:, 0], arr[:, 1]
    keep = (kval >= 1.0) & (kval != n + 1.0)
    filtered = int((~keep).sum())
    if not keep.any():
        raise ValueError("all (n, K) points were filtered; nothing to fit")
    x = np.log2(n[keep])
    y = np.log2(kval[keep])
    if np.unique(x).size < 2:
        raise ValueError("power-law fit needs at least 2 distinct n values")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot > 0.0:
        r2 = 1.0 - ss_res / ss_tot
    else:
        r2 = 1.0 if ss_res <= 1e-12 else 0.0
    return PowerLawFit(float(2.0 ** intercept), float(slope), r2,
                       int(keep.sum()), filtered)


def ks_statistic(samples, reference_cdf) -> float:
    """sup-norm distance between the empirical CDF and reference_cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    m = x.size
    if m == 0:
        raise ValueError("ks_statistic needs a non-empty sample")
    f = np.asarray(reference_cdf(x), dtype=float)
    grid = np.arange(1, m + 1) / m
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / m)))
    return max(d_plus, d_minus, 0.0)


@dataclass(frozen=True)
class HistogramResult:
    edges: np.ndarray
    counts: np.ndarray
    below: int
    above: int

    @property
    def in_range(self) -> int:
        return int(self.counts.sum())


def histogram(samples, bin_count: int, value_range) -> HistogramResult:
    """Uniform half-open bins [edge_i, edge_{i+1}) over value_range.

    A sample equal to the upper range endpoint lands in the `above`
    tally, keeping every bin the same half-open shape.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be at least 1")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not hi > lo:
        raise ValueError("histogram range must satisfy lo < hi")
    x = np.asarray(samples, dtype=float)
    edges = np.linspace(lo, hi, bin_count + 1)
    idx = np.searchsorted(edges, x, side="right") - 1
    below = int((idx < 0).sum())
    above = int((idx >= bin_count).sum())
    inside = idx[(idx >= 0) & (idx < bin_count)]
    counts = np.bincount(inside, minlength=bin_count).astype(np.int64)
    return HistogramResult(edges, counts, below, above)


# ------------------------------------------------------------- configuration


@dataclass(frozen=True)
class ExperimentConfig:
    dist: WeightDistribution
    model: str = MODEL_NR
    n_list: tuple[int, ...] = ()
    replicates: int = 1
    master_seed: int = 0
    estimators: tuple[str, ...] = ("hill",)
    k_hill: tuple[int, ...] = (32, 64, 128, 256)
    k_pickands: tuple[int, ...] = (8, 16, 32, 64)
    k_pwm: tuple[int, ...] = (32, 64, 128, 256, 512, 1024, 2048)
    gamma_true: float | None = None
    admissible_c: float = 1.0
    workers: int = 1
    hist_bins: int = 40
    hist_range: tuple[float, float] = (-4.0, 4.0)
    output_dir: str | None = None

    def __post_init__(self):
        if self.model not in (MODEL_NR, MODEL_CL):
            raise ValueError(f"unknown model {self.model!r}")
        if not self.n_list:
            raise ValueError("n_list must be non-empty")
        object.__setattr__(self, "n_list", tuple(sorted({int(n) for n in self.n_list})))
        if self.n_list[0] < 3:
            raise ValueError("every n must be at least 3")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        bad = [e for e in self.estimators if e not in ESTIMATOR_NAMES]
        if bad:
            raise ValueError(f"unknown estimators: {bad}")
        object.__setattr__(self, "estimators",
                           tuple(e for e in ESTIMATOR_NAMES if e in self.estimators))
        for name, floor in (("k_hill", 2), ("k_pickands", 1), ("k_pwm", 2)):
            grid = tuple(sorted({int(k) for k in getattr(self, name)}))
            if grid and grid[0] < floor:
                raise ValueError(f"{name} entries must be >= {floor}")
            object.__setattr__(self, name, grid)
        if not self.admissible_c > 0:
            raise ValueError("admissible_c must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.hist_bins < 1:
            raise ValueError("hist_bins must be at least 1")
        lo, hi = self.hist_range
        if not float(hi) > float(lo):
            raise ValueError("hist_range must satisfy lo < hi")
        object.__setattr__(self, "hist_range", (float(lo), float(hi)))
        object.__setattr__(self, "master_seed", int(self.master_seed) & MASK64)
        alpha = self.dist.params.alpha
        if self.model == MODEL_CL and not alpha > 2:
            warnings.warn("Chung-Lu alignment theory assumes alpha > 2; "
                          f"got alpha={alpha}", stacklevel=2)
        if "pwm" in self.estimators and not alpha > 2:
            warnings.warn("the PWM variance formula needs gamma < 1/2 "
                          f"(alpha > 2); got alpha={alpha}", stacklevel=2)

    def k_grid(self, estimator: str) -> tuple[int, ...]:
        return {"hill": self.k_hill, "pickands": self.k_pickands,
                "pwm": self.k_pwm}[estimator]


_CONFIG_KEYS = frozenset({
    "experiment", "model", "dist", "n", "replicates", "master_seed",
    "estimators", "k_hill", "k_pickands", "k_pwm", "gamma_true",
    "admissible_c", "workers", "hist_bins", "hist_range", "output",
})


def _split_tokens(text: str) -> list[str]:
    return [tok for tok in text.replace(",", " ").split() if tok]


def config_from_mapping(section) -> tuple[str, ExperimentConfig]:
    """Build (experiment_kind, config) from one section of key=value text."""
    unknown = set(section) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "experiment" not in section:
        raise ValueError("config section needs experiment=alignment|normality")
    kind = section["experiment"].strip().lower()
    if kind not in ("alignment", "normality"):
        raise ValueError(f"unknown experiment kind {kind!r}")
    if "dist" not in section:
        raise ValueError("config section needs a dist= weight distribution")
    if "n" not in section:
        raise ValueError("config section needs n= (list of node counts)")
    kwargs: dict = {
        "dist": parse_distribution(section["dist"]),
        "n_list": tuple(int(tok) for tok in _split_tokens(section["n"])),
    }
    if "model" in section:
        model = section["model"].strip().lower()
        kwargs["model"] = {"nr": MODEL_NR, "cl": MODEL_CL}.get(model, model)
    for key in ("replicates", "master_seed", "workers", "hist_bins"):
        if key in section:
            kwargs[key] = int(section[key])
    for key, target in (("k_hill", "k_hill"), ("k_pickands", "k_pickands"),
                        ("k_pwm", "k_pwm")):
        if key in section:
            kwargs[target] = tuple(int(tok) for tok in _split_tokens(section[key]))
    if "estimators" in section:
        kwargs["estimators"] = tuple(tok.lower() for tok in _split_tokens(section["estimators"]))
    if "gamma_true" in section:
        kwargs["gamma_true"] = float(section["gamma_true"])
    if "admissible_c" in section:
        kwargs["admissible_c"] = float(section["admissible_c"])
    if "hist_range" in section:
        lo, hi = _split_tokens(section["hist_range"])
        kwargs["hist_range"] = (float(lo), float(hi))
    if "output" in section:
        kwargs["output_dir"] = section["output"].strip()
    return kind, ExperimentConfig(**kwargs)


def read_config_sections(path) -> list[tuple[str, dict[str, str]]]:
    """Raw (section_name, key=value mapping) pairs from an INI-style file."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open_text(path, "r") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    sections = [(name, dict(parser[name])) for name in parser.sections()]
    if not sections:
        raise ValueError(f"config {path} defines no experiment sections")
    return sections


def read_config_file(path) -> list[tuple[str, str, ExperimentConfig]]:
    """Parse an INI-style experiment file: one section per experiment.

    Returns (section_name, kind, config) triples in file order.
    """
    out = []
    for name, mapping in read_config_sections(path):
        try:
            kind, cfg = config_from_mapping(mapping)
        except ValueError as exc:
            raise ValueError(f"config section [{name}]: {exc}") from exc
        out.append((name, kind, cfg))
    return out


# ------------------------------------------------------------ experiment runs


def _generate_degrees(model: str, wv, rng):
    if model == MODEL_NR:
        return generate_nr_fast(wv, rng)
    return generate_cl_fast(wv, rng)


def _alignment_task(args):
    cfg, n, k_used, rep = args
    seed = derive_seed(cfg.master_seed, n, rep)
    rng = np.random.Generator(np.random.PCG64(seed))
    wv = sample_weights(cfg.dist, n, rng)
    g = _generate_degrees(cfg.model, wv, rng)
    return n, rep, evaluate_alignment(wv, g.degrees, k_used, seed=seed)


@dataclass(frozen=True)
class AlignmentExperimentResult:
    records: tuple[tuple[int, int, AlignmentRecord], ...]  # (n, rep, record)
    k_used: tuple[tuple[int, int], ...]  # (n, k) pairs
    fit: PowerLawFit | None


def _run_tasks(task_fn, tasks, workers: int):
    if workers == 1:
        return [task_fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so completion order is irrelevant
        return list(pool.map(task_fn, tasks, chunksize=chunk))


def run_alignment_experiment(cfg: ExperimentConfig) -> AlignmentExperimentResult:
    """K(n) study: per replicate K and S/C/M flags, pooled power-law fit."""
    k_used = {n: admissible_k(n, cfg.dist.params.alpha, cfg.admissible_c)
              for n in cfg.n_list}
    tasks = [(cfg, n, k_used[n], rep)
             for n in cfg.n_list for rep in range(cfg.replicates)]
    records = tuple(_run_tasks(_alignment_task, tasks, cfg.workers))
    fit = None
    try:
        fit = fit_power_law([(n, rec.K) for n, _, rec in records])
    except ValueError as exc:
        warnings.warn(f"power-law fit skipped: {exc}", stacklevel=2)
    return AlignmentExperimentResult(records, tuple(sorted(k_used.items())), fit)


def _normality_task(args):
    cfg, n, rep = args
    seed = derive_seed(cfg.master_seed, n, rep)
    rng = np.random.Generator(np.random.PCG64(seed))
    wv = sample_weights(cfg.dist, n, rng)
    g = _generate_degrees(cfg.model, wv, rng)
    sorted_deg = np.sort(g.degrees)[::-1].astype(float)
    big_k = alignment_index(g.degrees)
    gamma = cfg.gamma_true
    leaves = []
    for est in cfg.estimators:
        fn = _ESTIMATOR_FN[est]
        for k in cfg.k_grid(est):
            try:
                out = fn(sorted_deg, k, gamma_true=gamma)
                leaves.append((est, k, out.gamma_hat, out.tau, out.centered_scaled))
            except DegenerateSampleError:
                leaves.append((est, k, None, None, None))
    return n, rep, seed, big_k, leaves


@dataclass(frozen=True)
class NormalitySummary:
    n: int
    estimator: str
    k: int
    replicates: int
    failures: int
    mean_z: float | None
    var_z: float | None
    ks_normal: float | None


@dataclass(frozen=True)
class NormalityExperimentResult:
    # (n, rep, seed, K, leaves); leaf = (estimator, k, gamma_hat, tau, z)
    records: tuple
    summaries: tuple[NormalitySummary, ...]


def validate_normality_config(cfg: ExperimentConfig) -> None:
    """Raise ValueError if cfg cannot drive a normality experiment."""
    if not cfg.estimators:
        raise ValueError("normality experiment needs at least one estimator")
    if cfg.gamma_true is None:
        raise ValueError("normality experiment needs gamma_true (the centering "
                         "value for z = sqrt(k)(gamma_hat - gamma)/sqrt(tau))")
    gamma = cfg.gamma_true
    if not gamma > 0:
        raise ValueError("normality experiment needs gamma_true > 0")
    if "pwm" in cfg.estimators and gamma >= 0.5:
        raise ValueError("PWM centering needs gamma < 1/2; deselect pwm or "
                         "pick a lighter tail")
    smallest = cfg.n_list[0]
    for est in cfg.estimators:
        need = 4 * max(cfg.k_grid(est)) if est == "pickands" else max(cfg.k_grid(est))
        if need > smallest:
            raise ValueError(f"{est} k-grid needs {need} order statistics "
                             f"but the smallest n is {smallest}")


def run_normality_experiment(cfg: ExperimentConfig) -> NormalityExperimentResult:
    """Centered-scaled estimator study on NR/CL degree sequences."""
    validate_normality_config(cfg)
    tasks = [(cfg, n, rep) for n in cfg.n_list for rep in range(cfg.replicates)]
    records = tuple(_run_tasks(_normality_task, tasks, cfg.workers))

    summaries = []
    for n in cfg.n_list:
        for est in cfg.estimators:
            for k in cfg.k_grid(est):
                zs = [z for rn, _, _, _, leaves in records if rn == n
                      for (e, kk, _, _, z) in leaves if e == est and kk == k
                      and z is not None]
                failures = cfg.replicates - len(zs)
                if zs:
                    arr = np.asarray(zs)
                    mean = float(arr.mean())
                    var = float(arr.var(ddof=1)) if arr.size > 1 else None
                    ks = ks_statistic(arr, ndtr)
                else:
                    mean = var = ks = None
                summaries.append(NormalitySummary(n, est, k, cfg.replicates,
                                                  failures, mean, var, ks))
    return NormalityExperimentResult(records, tuple(summaries))


# ------------------------------------------------------------------- outputs


def _fmt(value) -> str:
    if value is None:
        return ""
    return format(float(value), ".17g")


def _open_write(path: str):
    try:
        return open_text(path, "w")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_manifest(out_dir: str, names: list[str],
                   header_lines: tuple[str, ...] = ()) -> str:
    """manifest.txt: `name,bytes,sha256` per produced file, sorted by name.

    header_lines (the caller's resolved-configuration echo) are written
    first, each prefixed with '# '. No timestamps, ever: a rerun with the
    same inputs must produce the same bytes.
    """
    path = os.path.join(out_dir, "manifest.txt")
    with _open_write(path) as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for name in sorted(names):
            full = os.path.join(out_dir, name)
            with open(full, "rb") as raw:
                blob = raw.read()
            fh.write(f"{name},{len(blob)},{hashlib.sha256(blob).hexdigest()}\n")
    return path


def write_alignment_outputs(result: AlignmentExperimentResult,
                            out_dir: str,
                            manifest_header: tuple[str, ...] = ()) -> list[str]:
    """replicates.csv, summary.csv, fit.csv, manifest.txt under out_dir."""
    os.makedirs(out_dir, exist_ok=True)
    names = ["replicates.csv", "summary.csv", "fit.csv"]
    with _open_write(os.path.join(out_dir, "replicates.csv")) as fh:
        fh.write("n,seed,K,aligned_k,eventS,eventC,eventM\n")
        for n, _, rec in result.records:
            fh.write(f"{n},{rec.seed},{rec.K},{int(rec.aligned_at_k)},"
                     f"{int(rec.event_s)},{int(rec.event_c)},{int(rec.event_m)}\n")
    k_used = dict(result.k_used)
    with _open_write(os.path.join(out_dir, "summary.csv")) as fh:
        fh.write("n,k_used,replicates,mean_K,median_K,full_alignment_count,"
                 "aligned_k_frac,eventS_frac,eventC_frac,eventM_frac\n")
        for n in sorted(k_used):
            recs = [rec for rn, _, rec in result.records if rn == n]
            kvals = np.array([rec.K for rec in recs], dtype=float)
            fh.write(",".join([
                str(n), str(k_used[n]), str(len(recs)),
                _fmt(kvals.mean()), _fmt(np.median(kvals)),
                str(sum(rec.full_alignment for rec in recs)),
                _fmt(np.mean([rec.aligned_at_k for rec in recs])),
                _fmt(np.mean([rec.event_s for rec in recs])),
                _fmt(np.mean([rec.event_c for rec in recs])),
                _fmt(np.mean([rec.event_m for rec in recs])),
            ]) + "\n")
    with _open_write(os.path.join(out_dir, "fit.csv")) as fh:
        fh.write("coefficient,exponent,r2,points_used,points_filtered\n")
        if result.fit is not None:
            f = result.fit
            fh.write(f"{_fmt(f.coefficient)},{_fmt(f.exponent)},{_fmt(f.r_squared)},"
                     f"{f.points_used},{f.points_filtered}\n")
    write_manifest(out_dir, names, manifest_header)
    return [os.path.join(out_dir, name) for name in names + ["manifest.txt"]]


def write_normality_outputs(result: NormalityExperimentResult,
                            cfg: ExperimentConfig, out_dir: str,
                            manifest_header: tuple[str, ...] = ()) -> list[str]:
    """replicates.csv, summary.csv, per-cell histogram CSVs, manifest.txt."""
    os.makedirs(out_dir, exist_ok=True)
    names = ["replicates.csv", "summary.csv"]
    with _open_write(os.path.join(out_dir, "replicates.csv")) as fh:
        fh.write("n,replicate,seed,K,estimator,k,gamma_hat,tau,z\n")
        for n, rep, seed, big_k, leaves in result.records:
            for est, k, gamma_hat, tau, z in leaves:
                fh.write(f"{n},{rep},{seed},{big_k},{est},{k},"
                         f"{_fmt(gamma_hat)},{_fmt(tau)},{_fmt(z)}\n")
    with _open_write(os.path.join(out_dir, "summary.csv")) as fh:
        fh.write("n,estimator,k,replicates,failures,mean_z,var_z,ks_normal\n")
        for s in result.summaries:
            fh.write(f"{s.n},{s.estimator},{s.k},{s.replicates},{s.failures},"
                     f"{_fmt(s.mean_z)},{_fmt(s.var_z)},{_fmt(s.ks_normal)}\n")
    for s in result.summaries:
        if s.failures >= s.replicates:
            continue  # all-degenerate cell: flagged in summary, no histogram
        zs = [z for n, _, _, _, leaves in result.records if n == s.n
              for (e, k, _, _, z) in leaves
              if e == s.estimator and k == s.k and z is not None]
        hist = histogram(zs, cfg.hist_bins, cfg.hist_range)
        name = f"histogram_{s.estimator}_n{s.n}_k{s.k}.csv"
        write_histogram_csv(hist, os.path.join(out_dir, name))
        names.append(name)
    write_manifest(out_dir, names, manifest_header)
    return [os.path.join(out_dir, name) for name in names + ["manifest.txt"]]


def write_histogram_csv(hist: HistogramResult, path) -> None:
    """Bins plus two sentinel rows holding the out-of-range tallies."""
    with _open_write(path) as fh:
        fh.write("bin_lo,bin_hi,count\n")
        fh.write(f"-inf,{_fmt(hist.edges[0])},{hist.below}\n")
        for i, count in enumerate(hist.counts):
            fh.write(f"{_fmt(hist.edges[i])},{_fmt(hist.edges[i + 1])},{count}\n")
        fh.write(f"{_fmt(hist.edges[-1])},inf,{hist.above}\n")
