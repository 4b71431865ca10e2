"""Regularly-varying weight distributions and their diagnostics.

Every distribution here is specified through its tail quantile function
U(t) = F^{<-}(1 - 1/t); inverse-CDF sampling keeps U the single source of
tail truth for generators, estimators, and condition checks alike.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np
from scipy import integrate, special


class SecondOrderUnavailable(ValueError):
    """Raised when A(t) is requested for a family with unknown rho."""


class QuadratureError(ArithmeticError):
    """Raised when the mixed-Poisson quadrature cannot reach tolerance."""


@dataclass(frozen=True)
class TailParams:
    """First- and second-order tail parameters of a regularly varying law.

    gamma and alpha are stored redundantly; one must be the exact IEEE
    reciprocal of the other. rho <= 0 when known (-inf marks an exact power
    law with no second-order correction, None marks unknown). eta and t0
    parameterize the lower envelope U(tx)/U(t) >= (1-eta) x^gamma + eta.
    """

    gamma: float
    alpha: float
    rho: float | None = None
    eta: float = 0.0
    t0: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.alpha > 0):
            raise ValueError("gamma and alpha must be positive")
        if self.gamma != 1.0 / self.alpha and self.alpha != 1.0 / self.gamma:
            raise ValueError("gamma must be the reciprocal of alpha")
        if self.rho is not None and not self.rho <= 0:
            raise ValueError("rho must be <= 0 when known")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if not self.t0 >= 1.0:
            raise ValueError("t0 must be >= 1")


class WeightDistribution:
    """Base class: survival/quantile/pdf plus tail metadata.

    Subclasses fill in closed forms; all array-capable, all defined through
    numpy ufuncs so scalars come back as floats.
    """

    name: str = "abstract"
    support_min: float = 0.0
    params: TailParams

    # family-specific hooks -------------------------------------------------
    def _survival(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _quantile_u(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _analytic_a(self, t: np.ndarray) -> np.ndarray | None:
        return None

    # public surface ---------------------------------------------------------
    def survival(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.support_min, 1.0, self._survival(np.maximum(x, self.support_min)))
        return float(out) if out.ndim == 0 else out

    def quantile_u(self, t):
        """U(t) = F^{<-}(1 - 1/t) for t >= 1."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 1.0):
            raise ValueError("quantile_u requires t >= 1")
        with np.errstate(divide="ignore"):
            out = np.asarray(self._quantile_u(t), dtype=float)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < self.support_min, 0.0, self._pdf(np.maximum(x, self.support_min)))
        return float(out) if out.ndim == 0 else out

    @property
    def has_analytic_second_order(self) -> bool:
        return self._analytic_a(np.asarray(2.0)) is not None

    def second_order_scale(self, t):
        """Analytic A(t) where a closed form is stored, else None."""
        t = np.asarray(t, dtype=float)
        out = self._analytic_a(t)
        if out is None:
            return None
        out = np.asarray(out, dtype=float)
        return float(out) if out.ndim == 0 else out

    def spec_string(self) -> str:
        parts = []
        for key, value, default in self._spec_fields():
            if value != default:
                parts.append(f"{key}={value:g}")
        return self.name + (":" + ",".join(parts) if parts else "")

    def _spec_fields(self) -> list[tuple[str, float, float | None]]:
        # (key, value, default-to-elide); subclasses prepend their own
        return [("eta", self.params.eta, self._default_eta),
                ("t0", self.params.t0, self._default_t0)]

    _default_eta: float = 0.0
    _default_t0: float = 1.0

    def __repr__(self):
        return f"{type(self).__name__}({self.spec_string()!r})"

    def __eq__(self, other):
        return isinstance(other, WeightDistribution) and self.spec_string() == other.spec_string()

    def __hash__(self):
        return hash(self.spec_string())


class Pareto(WeightDistribution):
    """1 - F(x) = (scale/x)^alpha on [scale, inf); exact power law."""

    name = "pareto"

    def __init__(self, scale: float = 2.0, alpha: float = 1.0, *, eta: float = 0.0, t0: float = 1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        self.params = TailParams(gamma=1.0 / alpha, alpha=float(alpha),
                                 rho=-math.inf, eta=eta, t0=t0)
        self.support_min = self.scale

    def _survival(self, x):
        return (self.scale / x) ** self.params.alpha

    def _quantile_u(self, t):
        return self.scale * t ** self.params.gamma

    def _pdf(self, x):
        a = self.params.alpha
        return a * self.scale ** a * x ** (-a - 1.0)

    def _analytic_a(self, t):
        return np.zeros_like(t)

    def _spec_fields(self):
        return [("scale", self.scale, None), ("alpha", self.params.alpha, None)] + super()._spec_fields()


class Burr(WeightDistribution):
    """1 - F(x) = (1 + x^alpha)^{-1} on [0, inf); rho = -1, A(t) = gamma/t."""

    name = "burr"
    _default_t0 = 2.0

    def __init__(self, alpha: float = 2.0, *, eta: float = 0.0, t0: float = 2.0):
        self.params = TailParams(gamma=1.0 / alpha, alpha=float(alpha),
                                 rho=-1.0, eta=eta, t0=t0)
        self.support_min = 0.0

    def _survival(self, x):
        return 1.0 / (1.0 + x ** self.params.alpha)

    def _quantile_u(self, t):
        return (t - 1.0) ** self.params.gamma

    def _pdf(self, x):
        a = self.params.alpha
        return a * x ** (a - 1.0) / (1.0 + x ** a) ** 2

    def _analytic_a(self, t):
        return self.params.gamma / t

    def _spec_fields(self):
        return [("alpha", self.params.alpha, None)] + super()._spec_fields()


class MixedPolyTail(WeightDistribution):
    """1 - F(x) = (2 + x)/x^2 on [2, inf); alpha = 1, rho = -1, A(t) = -2/t."""

    name = "mixedpoly"
    support_min = 2.0
    _default_eta = 0.25
    _default_t0 = 10.0

    def __init__(self, *, eta: float = 0.25, t0: float = 10.0):
        self.params = TailParams(gamma=1.0, alpha=1.0, rho=-1.0, eta=eta, t0=t0)

    def _survival(self, x):
        return (2.0 + x) / x ** 2

    def _quantile_u(self, t):
        # root of x^2 - t x - 2t = 0
        return 0.5 * (t + np.sqrt(t * t + 8.0 * t))

    def _pdf(self, x):
        return (x + 4.0) / x ** 3

    def _analytic_a(self, t):
        return -2.0 / t


class Frechet(WeightDistribution):
    """F(x) = exp(-x^{-alpha}) on (0, inf); rho = -1, A(t) = gamma/(2t)."""

    name = "frechet"
    _default_t0 = 2.0

    def __init__(self, alpha: float = 1.0, *, eta: float = 0.0, t0: float = 2.0):
        self.params = TailParams(gamma=1.0 / alpha, alpha=float(alpha),
                                 rho=-1.0, eta=eta, t0=t0)
        self.support_min = 0.0

    def _survival(self, x):
        return -np.expm1(-x ** (-self.params.alpha))

    def _quantile_u(self, t):
        # -log(1 - 1/t) via log1p for accuracy at large t; neglog == 0 only
        # at t = inf, where U must be +inf
        neglog = -np.log1p(-1.0 / t)
        out = np.where(neglog > 0, neglog, 1.0) ** (-self.params.gamma)
        return np.where(neglog > 0, out, np.inf)

    def _pdf(self, x):
        a = self.params.alpha
        return a * x ** (-a - 1.0) * np.exp(-x ** (-a))

    def _analytic_a(self, t):
        return self.params.gamma / (2.0 * t)

    def _spec_fields(self):
        return [("alpha", self.params.alpha, None)] + super()._spec_fields()


class HalfCauchy(WeightDistribution):
    """F(x) = (2/pi) arctan(x) on [0, inf); rho = -2, A(t) = pi^2/(6 t^2)."""

    name = "halfcauchy"
    _default_t0 = 2.0

    def __init__(self, *, eta: float = 0.0, t0: float = 2.0):
        self.params = TailParams(gamma=1.0, alpha=1.0, rho=-2.0, eta=eta, t0=t0)
        self.support_min = 0.0

    def _survival(self, x):
        # 1 - (2/pi) arctan(x) rewritten to avoid cancellation at large x
        with np.errstate(divide="ignore"):
            return (2.0 / math.pi) * np.arctan(1.0 / x)

    def _quantile_u(self, t):
        # tan(pi/2 (1 - 1/t)) == cot(pi/(2t)), stable form for large t
        return 1.0 / np.tan(0.5 * math.pi / t)

    def _pdf(self, x):
        return (2.0 / math.pi) / (1.0 + x * x)

    def _analytic_a(self, t):
        return math.pi ** 2 / (6.0 * t * t)


_FAMILIES = {
    "pareto": (Pareto, {"scale", "alpha", "eta", "t0"}),
    "burr": (Burr, {"alpha", "eta", "t0"}),
    "mixedpoly": (MixedPolyTail, {"eta", "t0"}),
    "frechet": (Frechet, {"alpha", "eta", "t0"}),
    "halfcauchy": (HalfCauchy, {"eta", "t0"}),
}


def parse_distribution(spec: str) -> WeightDistribution:
    """Parse 'family:key=value,...' (e.g. 'pareto:scale=2,alpha=1')."""
    spec = spec.strip()
    family, _, rest = spec.partition(":")
    family = family.strip().lower()
    if family not in _FAMILIES:
        raise ValueError(f"unknown distribution family {family!r} "
                         f"(expected one of {sorted(_FAMILIES)})")
    cls, allowed = _FAMILIES[family]
    kwargs = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in allowed:
                raise ValueError(f"bad parameter {item!r} for family {family!r}")
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ValueError(f"non-numeric value in {item!r}") from None
    return cls(**kwargs)


@dataclass
class WeightVector:
    """Descending weights W_(1) >= ... >= W_(n) with compensated total L(n)."""

    values: np.ndarray
    total: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("weights must form a non-empty 1-d array")
        if not np.all(self.values > 0):
            raise ValueError("weights must be strictly positive")
        if np.any(np.diff(self.values) > 0):
            raise ValueError("weights must be sorted in descending order")

    @classmethod
    def from_sorted(cls, values) -> "WeightVector":
        values = np.asarray(values, dtype=float)
        return cls(values, math.fsum(values))

    @classmethod
    def from_unsorted(cls, values) -> "WeightVector":
        values = np.sort(np.asarray(values, dtype=float))[::-1].copy()
        return cls(values, math.fsum(values))

    @property
    def n(self) -> int:
        return int(self.values.size)


def sample_weights(dist: WeightDistribution, n: int, rng: np.random.Generator) -> WeightVector:
    """n iid draws W = U(1/Uniform(0,1)), sorted descending.

    Zero uniforms (probability 2^-53 each) are redrawn so 1/u stays finite.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    u = rng.random(n)
    zero = np.flatnonzero(u == 0.0)
    while zero.size:
        u[zero] = rng.random(zero.size)
        zero = zero[u[zero] == 0.0]
    w = dist.quantile_u(1.0 / u)
    return WeightVector.from_unsorted(w)


def sample_order_statistics_renyi(dist: WeightDistribution, n: int,
                                  rng: np.random.Generator) -> WeightVector:
    """Order statistics directly from exponential spacings, no sort.

    W_(i) = U(exp(sum_{j=i}^n E_j/j)); one backward cumulative sum gives all
    n partial sums.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    e = rng.standard_exponential(n)
    e /= np.arange(1.0, n + 1.0)
    s = np.cumsum(e[::-1])[::-1]
    w = np.atleast_1d(np.asarray(dist.quantile_u(np.exp(s)), dtype=float))
    return WeightVector(w, math.fsum(w))


def mixed_poisson_pmf(dist: WeightDistribution, k: int, *,
                      abs_tol: float = 1e-10, limit: int = 200) -> float:
    """P(D = k) for D | W ~ Poisson(W), W ~ dist, by adaptive quadrature.

    Integrates on [support_min, T] with T = max(U(1e8), 2k + 50) and bounds
    the discarded tail by pmf_k(T) * survival(T); the Poisson pmf decreases
    in w beyond its mode so the bound is valid for T > k. Breakpoints at the
    Poisson peak (width ~ sqrt(k)) and on a geometric ladder force the
    adaptive rule to resolve a peak that is narrow relative to the interval.
    """
    if k < 0 or k != int(k):
        raise ValueError("k must be a non-negative integer")
    k = int(k)
    lo = max(dist.support_min, 0.0)
    hi = max(float(dist.quantile_u(1e8)), 2.0 * k + 50.0)

    def integrand(w):
        if w <= 0.0:
            return 0.0 if k else math.exp(-w) * dist.pdf(w)
        logp = k * math.log(w) - w - special.gammaln(k + 1)
        return math.exp(logp) * dist.pdf(w)

    width = math.sqrt(k + 1.0)
    breaks = {k - 8 * width, k - 3 * width, float(k), k + 3 * width, k + 8 * width}
    ladder = 10.0
    while ladder < hi:
        breaks.add(ladder)
        ladder *= 10.0
    points = sorted(p for p in breaks if lo < p < hi)
    with warnings.catch_warnings():
        # tolerance failures surface as QuadratureError below, with numbers
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(integrand, lo, hi, epsabs=abs_tol / 2,
                                    epsrel=0.0, limit=limit, points=points or None)
    tail_logp = k * math.log(hi) - hi - special.gammaln(k + 1)
    tail_bound = math.exp(tail_logp) * dist.survival(hi)
    if err + tail_bound > abs_tol:
        raise QuadratureError(
            f"mixed-Poisson quadrature for k={k} did not converge: "
            f"quad error {err:.3e}, tail bound {tail_bound:.3e}, "
            f"requested abs_tol {abs_tol:.3e}")
    return min(max(value, 0.0), 1.0)


class UlowerViolation(NamedTuple):
    t: float
    x: float
    ratio: float
    bound: float


def check_u_lower_condition(dist: WeightDistribution, eta: float | None = None,
                            t0: float | None = None,
                            grid: Iterable[tuple[float, float]] | None = None,
                            ) -> list[UlowerViolation]:
    """Evaluate U(tx)/U(t) >= (1-eta) x^gamma + eta on a (t, x) grid.

    Returns the violating pairs; an empty list means the condition held
    everywhere on the grid. eta/t0 default to the distribution's declared
    values. A 1e-12 relative slack keeps 1-ulp arithmetic noise from
    flagging exact identities (Pareto has U(tx)/U(t) == x^gamma exactly).
    """
    eta = dist.params.eta if eta is None else float(eta)
    t0 = dist.params.t0 if t0 is None else float(t0)
    if grid is None:
        t_grid = np.geomspace(t0, t0 * 1e6, 40)
        x_grid = np.array([1.0, 1.5, 2.0, 4.0, 16.0, 256.0])
        grid = [(t, x) for t in t_grid for x in x_grid]
    gamma = dist.params.gamma
    out = []
    for t, x in grid:
        if t < t0 or x < 1.0:
            raise ValueError(f"grid point (t={t}, x={x}) outside t >= t0, x >= 1")
        ratio = dist.quantile_u(t * x) / dist.quantile_u(t)
        bound = (1.0 - eta) * x ** gamma + eta
        if not ratio >= bound * (1.0 - 1e-12):
            out.append(UlowerViolation(float(t), float(x), float(ratio), float(bound)))
    return out


def estimate_second_order_scale(dist: WeightDistribution, t: float, x: float = 2.0) -> float:
    """Finite-t estimate of A(t) from the defining quotient at fixed x.

    (U(tx)/U(t) - x^gamma) / (x^gamma (x^rho - 1)/rho); requires known rho.
    For rho = -inf (exact power law) the numerator vanishes and A is 0.
    """
    rho = dist.params.rho
    if rho is None:
        raise SecondOrderUnavailable(f"{dist.name}: rho unknown, cannot form the quotient")
    gamma = dist.params.gamma
    if math.isinf(rho):
        return 0.0
    if x <= 1.0:
        raise ValueError("x must exceed 1")
    num = dist.quantile_u(t * x) / dist.quantile_u(t) - x ** gamma
    den = x ** gamma * (x ** rho - 1.0) / rho
    return num / den


def second_order_scale(dist: WeightDistribution, t: float, *,
                       allow_numeric: bool = True) -> float:
    """A(t): analytic when the family stores one, else the numeric estimate."""
    analytic = dist.second_order_scale(t)
    if analytic is not None:
        return analytic
    if not allow_numeric:
        raise SecondOrderUnavailable(f"{dist.name}: no analytic A(t) stored")
    return estimate_second_order_scale(dist, t)


def write_weights_csv(wv: WeightVector, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("weight\n")
        for value in wv.values:
            fh.write(format(value, ".17g") + "\n")


def read_weights_csv(path) -> WeightVector:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "weight":
            raise ValueError(f"expected header 'weight', found {header!r}")
        values = [float(line) for line in fh if line.strip()]
    return WeightVector.from_sorted(np.asarray(values))
