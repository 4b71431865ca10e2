"""Hill, Pickands, and PWM tail-index estimators on descending samples.

Inputs are 1-based descending order statistics X_(1) >= X_(2) >= ...;
each estimator validates only the prefix it actually reads, so degree
arrays with zeros in the tail are fine. Data-dependent breakdowns (tied
denominators, degenerate moments, nonpositive X_(k)) raise
DegenerateSampleError so the harness can count them as failures;
configuration mistakes raise plain ValueError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG2 = math.log(2.0)


class DegenerateSampleError(ValueError):
    """The sample itself (not the configuration) breaks the estimator."""


@dataclass(frozen=True)
class EstimatorOutput:
    name: str  # hill | pickands | pwm
    k: int
    gamma_hat: float
    tau: float | None
    centered_scaled: float | None = None

    def csv_row(self) -> str:
        """`estimator,k,gamma_hat,tau,z` with empty cells for None."""
        tau = "" if self.tau is None else format(self.tau, ".17g")
        z = "" if self.centered_scaled is None else format(self.centered_scaled, ".17g")
        return f"{self.name},{self.k},{format(self.gamma_hat, '.17g')},{tau},{z}"


def _check_prefix(x: np.ndarray, upto: int, caller: str) -> None:
    if x.ndim != 1:
        raise ValueError(f"{caller} expects a 1-d array")
    if x.size < upto:
        raise ValueError(f"{caller} needs at least {upto} order statistics, have {x.size}")
    if upto > 1 and np.any(np.diff(x[:upto]) > 0):
        raise ValueError(f"{caller} expects descending order statistics")


# ---------------------------------------------------------------- variances


def tau_hill(gamma: float) -> float:
    if not gamma > 0:
        raise ValueError("tau_hill needs gamma > 0")
    return gamma * gamma


def _tau_pickands_at(gamma: float) -> float:
    # removable singularity at 0; elsewhere the closed form is fine
    if gamma == 0.0:
        return 3.0 / (4.0 * LOG2**4)
    num = gamma * gamma * (2.0 ** (2.0 * gamma + 1.0) + 1.0)
    den = 4.0 * LOG2**2 * (2.0**gamma - 1.0) ** 2
    return num / den


def tau_pickands(gamma: float) -> float:
    if not gamma > 0:
        raise ValueError("tau_pickands needs gamma > 0")
    return _tau_pickands_at(gamma)


def _tau_pwm_at(gamma: float) -> float | None:
    if gamma >= 0.5:
        return None
    num = (1.0 - gamma) * (2.0 - gamma) ** 2 * (1.0 - gamma + 2.0 * gamma * gamma)
    den = (1.0 - 2.0 * gamma) * (3.0 - 2.0 * gamma)
    return num / den


def tau_pwm(gamma: float) -> float:
    # gamma = 0 is a legitimate boundary value: tau = 4/3
    if not gamma >= 0:
        raise ValueError("tau_pwm needs gamma >= 0")
    if gamma >= 0.5:
        raise ValueError("tau_pwm is defined for gamma < 1/2 only")
    value = _tau_pwm_at(gamma)
    assert value is not None
    return value


def pwm_covariance(gamma: float) -> np.ndarray:
    """2x2 asymptotic covariance of the scaled PWM moment pair."""
    if gamma >= 0.5:
        raise ValueError("pwm_covariance needs gamma < 1/2")

    def sigma(q: int, r: int) -> float:
        return (q * r / (q + r - 1.0 - 2.0 * gamma) + gamma * gamma) / (
            q * (q - gamma) * r * (r - gamma)
        )

    s11 = sigma(1, 1)
    s12 = sigma(1, 2)
    s22 = sigma(2, 2)
    return np.array([[s11, s12], [s12, s22]])


def variance_crossover(tol: float = 1e-6) -> float:
    """Root of tau_pwm - tau_pickands on (0, 1/2) by bisection."""
    lo, hi = 1e-4, 0.5 - 1e-9

    def f(g: float) -> float:
        value = _tau_pwm_at(g)
        assert value is not None
        return value - _tau_pickands_at(g)

    flo, fhi = f(lo), f(hi)
    if not flo * fhi < 0:
        raise ArithmeticError("no sign change for the variance crossover")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
            flo = f(lo)
    return 0.5 * (lo + hi)


def scaling_a(dist, t) -> np.ndarray:
    """PWM normalization a(t) = gamma U(t); positive for t > 1."""
    return dist.params.gamma * dist.quantile_u(t)


# ---------------------------------------------------------------- estimators


def _finish(name: str, k: int, gamma_hat: float, tau_at_hat: float | None,
            gamma_true: float | None, tau_of_gamma) -> EstimatorOutput:
    if gamma_true is None:
        return EstimatorOutput(name, k, gamma_hat, tau_at_hat)
    tau = tau_of_gamma(gamma_true)
    z = math.sqrt(k) * (gamma_hat - gamma_true) / math.sqrt(tau)
    return EstimatorOutput(name, k, gamma_hat, tau, z)


def hill(sorted_desc, k: int, *, gamma_true: float | None = None) -> EstimatorOutput:
    """gamma_hat = mean of log(X_(i)/X_(k)) over i < k; tau = gamma^2."""
    x = np.asarray(sorted_desc, dtype=float)
    if k < 2:
        raise ValueError("hill needs k >= 2")
    _check_prefix(x, k, "hill")
    xk = x[k - 1]
    if xk <= 0:
        raise DegenerateSampleError(f"hill needs X_(k) > 0, got {xk}")
    gamma_hat = float(np.log(x[: k - 1] / xk).sum() / (k - 1))
    return _finish("hill", k, gamma_hat, gamma_hat * gamma_hat, gamma_true, tau_hill)


def pickands(sorted_desc, k: int, *, gamma_true: float | None = None) -> EstimatorOutput:
    """gamma_hat = log((X_(k)-X_(2k))/(X_(2k)-X_(4k))) / log 2."""
    x = np.asarray(sorted_desc, dtype=float)
    if k < 1:
        raise ValueError("pickands needs k >= 1")
    _check_prefix(x, 4 * k, "pickands")
    xk, x2k, x4k = x[k - 1], x[2 * k - 1], x[4 * k - 1]
    if x2k == x4k:
        raise DegenerateSampleError("pickands denominator X_(2k) - X_(4k) is zero")
    if xk == x2k:
        raise DegenerateSampleError("pickands numerator X_(k) - X_(2k) is zero")
    gamma_hat = math.log((xk - x2k) / (x2k - x4k)) / LOG2
    return _finish("pickands", k, gamma_hat, _tau_pickands_at(gamma_hat),
                   gamma_true, tau_pickands)


def pwm_moments(sorted_desc, k: int) -> tuple[float, float]:
    """I^(q) = (1/(k-1)) sum_i (i/(k-1))^(q-1) (X_(i) - X_(k)), q in {1, 2}."""
    x = np.asarray(sorted_desc, dtype=float)
    if k < 2:
        raise ValueError("pwm needs k >= 2")
    _check_prefix(x, k, "pwm")
    diff = x[: k - 1] - x[k - 1]
    weights = np.arange(1, k) / (k - 1)
    i1 = float(diff.sum() / (k - 1))
    i2 = float((weights * diff).sum() / (k - 1))
    return i1, i2


def pwm(sorted_desc, k: int, *, gamma_true: float | None = None) -> EstimatorOutput:
    """gamma_hat = (I1 - 4 I2)/(I1 - 2 I2); tau only defined below 1/2."""
    i1, i2 = pwm_moments(sorted_desc, k)
    den = i1 - 2.0 * i2
    if den == 0.0:
        raise DegenerateSampleError("pwm moments satisfy I1 = 2 I2; estimator undefined")
    gamma_hat = (i1 - 4.0 * i2) / den
    return _finish("pwm", k, gamma_hat, _tau_pwm_at(gamma_hat), gamma_true, tau_pwm)
