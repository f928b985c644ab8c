"""Noise scales, release thresholds and cutoffs for (epsilon, delta)-DP set union."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

from dpsu.core import Mechanism, Norm, PrivacyParams

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Rational approximation to the lower half of the normal quantile
# (relative error about 1.15e-9); refined below with Newton steps.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425

SIGMA_BRACKET = (2.0 ** -40, 2.0 ** 40)


class NoiseKind(str, enum.Enum):
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"
    NONE = "none"


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def normal_cdf(x):
    """Standard normal CDF via erfc; absolute error well below 1e-12."""
    return _scalar_or_array(0.5 * special.erfc(-np.asarray(x, dtype=float) / _SQRT2))


def normal_sf(x):
    """Upper tail 1 - Phi(x) without cancellation."""
    return _scalar_or_array(0.5 * special.erfc(np.asarray(x, dtype=float) / _SQRT2))


def _poly(coeffs, x):
    acc = np.zeros_like(x)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _lower_quantile(q):
    """Phi^{-1}(q) for 0 < q <= 0.5, elementwise."""
    q = np.asarray(q, dtype=float)
    x = np.empty_like(q)
    tail = q < _P_LOW
    if np.any(tail):
        r = np.sqrt(-2.0 * np.log(q[tail]))
        x[tail] = _poly(_C, r) / (_poly(_D, r) * r + 1.0)
    mid = ~tail
    if np.any(mid):
        s = q[mid] - 0.5
        r = s * s
        x[mid] = _poly(_A, r) * s / (_poly(_B, r) * r + 1.0)
    for _ in range(2):
        pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
        x = x - (0.5 * special.erfc(-x / _SQRT2) - q) / pdf
    return x


def normal_quantile(p):
    """Inverse standard normal CDF, relative error below 1e-9.

    Raises:
      ValueError: if any ``p`` lies outside the open interval (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise ValueError("normal_quantile needs 0 < p < 1")
    upper = arr > 0.5
    # 1 - p is exact for p >= 0.5, so the upper half reuses the lower-tail path.
    q = np.where(upper, 1.0 - arr, arr)
    x = _lower_quantile(q)
    return _scalar_or_array(np.where(upper, -x, x))


def normal_isf(q):
    """Phi^{-1}(1 - q), accurate for tiny upper-tail masses ``q``."""
    arr = np.asarray(q, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise ValueError("normal_isf needs 0 < q < 1")
    return _scalar_or_array(-np.asarray(normal_quantile(arr)))


def _escape_mass(delta, t):
    """1 - (1 - delta)^(1/t), evaluated without cancellation."""
    return -np.expm1(np.log1p(-delta) / t)


def laplace_threshold(params: PrivacyParams, delta0: int, tightened: bool = True) -> float:
    """Release threshold for Laplace noise of scale 1/epsilon.

    Maximum over t = 1..delta0 of ``lead(t) + log(1 / (2 m_t)) / epsilon``
    with ``m_t = 1 - (1 - delta)^(1/t)`` and ``lead(t) = 1/t`` when tightened,
    else 1.
    """
    if delta0 < 1:
        raise ValueError("delta0 must be at least 1")
    t = np.arange(1, delta0 + 1, dtype=float)
    m = _escape_mass(params.delta, t)
    if np.any(m <= 0) or not np.all(np.isfinite(np.log(m))):
        raise ValueError(
            f"delta={params.delta} is too small for delta0={delta0}: "
            f"1-(1-delta)^(1/t) underflows (needs delta/delta0 above ~1e-308)")
    lead = 1.0 / t if tightened else np.ones_like(t)
    terms = lead - np.log(2.0 * m) / params.epsilon
    return float(np.max(terms))


def privacy_loss_gap(sigma: float, epsilon: float) -> float:
    """Phi(1/(2s) - eps*s) - e^eps * Phi(-1/(2s) - eps*s); decreasing in s."""
    a = 0.5 / sigma - epsilon * sigma
    b = -0.5 / sigma - epsilon * sigma
    return normal_cdf(a) - math.exp(epsilon) * normal_cdf(b)


def gaussian_sigma(params: PrivacyParams, rel_tol: float = 1e-13) -> float:
    """Smallest sigma whose unit-sensitivity Gaussian mechanism is (eps, delta/2)-DP.

    Brackets the root by doubling/halving from 1, then bisects in log space.
    The returned value is the upper end of the final bracket, so it always
    satisfies the constraint.
    """
    eps = params.epsilon
    # Aim slightly inside delta/2: F carries ~1e-12 relative rounding error.
    target = params.delta / 2 * (1.0 - 1e-10)
    lo_bound, hi_bound = SIGMA_BRACKET
    hi = 1.0
    while privacy_loss_gap(hi, eps) > target:
        hi *= 2.0
        if hi > hi_bound:
            raise ValueError(f"no sigma <= 2^40 satisfies eps={eps}, delta={params.delta}")
    lo = hi / 2.0
    while privacy_loss_gap(lo, eps) <= target:
        hi = lo
        lo /= 2.0
        if lo < lo_bound:
            raise ValueError(f"sigma below 2^-40 for eps={eps}, delta={params.delta}")
    while hi / lo - 1.0 > rel_tol:
        mid = math.sqrt(lo * hi)
        if privacy_loss_gap(mid, eps) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def gaussian_threshold(sigma: float, params: PrivacyParams, delta0: int,
                       tightened: bool = True) -> float:
    """Max over t = 1..delta0 of ``lead(t) + sigma * Phi^{-1}((1 - delta/2)^(1/t))``.

    ``lead(t)`` is 1/sqrt(t) when tightened, else 1.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if delta0 < 1:
        raise ValueError("delta0 must be at least 1")
    t = np.arange(1, delta0 + 1, dtype=float)
    q = _escape_mass(params.delta / 2, t)
    if np.any(q <= 0):
        raise ValueError(f"delta={params.delta} too small for delta0={delta0}")
    lead = 1.0 / np.sqrt(t) if tightened else np.ones_like(t)
    terms = lead + sigma * np.asarray(normal_isf(q))
    return float(np.max(terms))


@dataclass(frozen=True)
class CalibrationResult:
    mechanism: Mechanism
    epsilon: float
    delta: float
    delta0: int
    alpha: float
    noise_kind: NoiseKind
    scale: float
    rho: float
    gamma: float
    tightened: bool = True

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mechanism"] = self.mechanism.value
        d["noise_kind"] = self.noise_kind.value
        return d


def calibrate(mechanism, params: PrivacyParams, delta0: int, alpha: float,
              tightened: bool = True) -> CalibrationResult:
    """Noise scale, threshold and cutoff for ``mechanism``.

    Calibration depends only on the noise family and ``delta0``: every
    supported mechanism obeys the per-new-item bound 1/t (l1) or 1/sqrt(t)
    (l2), so the tightened thresholds apply to all of them. The cutoff
    ``rho + alpha * scale`` is reported for every mechanism but only the
    policy mechanisms consume it.
    """
    mechanism = Mechanism(mechanism)
    if mechanism is Mechanism.GREEDY_DEMO:
        raise ValueError("greedy-demo has unbounded sensitivity and cannot be calibrated")
    if mechanism.norm is Norm.L1:
        kind = NoiseKind.LAPLACE
        scale = 1.0 / params.epsilon
        rho = laplace_threshold(params, delta0, tightened)
    else:
        kind = NoiseKind.GAUSSIAN
        scale = gaussian_sigma(params)
        rho = gaussian_threshold(scale, params, delta0, tightened)
    return CalibrationResult(mechanism, params.epsilon, params.delta, delta0, alpha,
                             kind, scale, rho, rho + alpha * scale, tightened)
