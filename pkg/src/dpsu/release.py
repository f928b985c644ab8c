"""Noisy thresholding and the end-to-end set-union pipelines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from dpsu._hashing import keyed_hash128, unit_uniform
from dpsu.calibration import CalibrationResult, NoiseKind, calibrate, normal_quantile
from dpsu.core import Database, Mechanism, MechanismConfig, PrivacyParams
from dpsu.histogram import build_histogram
from dpsu.policies import policy_for


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    scale: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if self.scale < 0 or not math.isfinite(self.scale):
            raise ValueError(f"noise scale must be finite and >= 0, got {self.scale}")
        if self.kind is not NoiseKind.NONE and self.scale == 0:
            raise ValueError(f"{self.kind.value} noise needs a positive scale")

    @classmethod
    def from_calibration(cls, cal: CalibrationResult) -> "NoiseSpec":
        return cls(cal.noise_kind, cal.scale)


def _uniforms(items, seed):
    return np.array([unit_uniform(keyed_hash128(seed, "noise", u) >> 64) for u in items])


def _transform(spec: NoiseSpec, u):
    if spec.kind is NoiseKind.LAPLACE:
        # Inverse CDF, split at the median so both tails keep full precision.
        lower = u < 0.5
        out = np.empty_like(u)
        out[lower] = spec.scale * np.log(2.0 * u[lower])
        out[~lower] = -spec.scale * np.log(2.0 * (1.0 - u[~lower]))
        return out
    return spec.scale * np.asarray(normal_quantile(u), dtype=float)


def noise_vector(spec: NoiseSpec, items, seed: int) -> np.ndarray:
    """One noise draw per item, each a deterministic function of (seed, item)."""
    items = list(items)
    if spec.kind is NoiseKind.NONE or not items:
        return np.zeros(len(items))
    return _transform(spec, _uniforms(items, seed))


def sample_noise(spec: NoiseSpec, item: str, seed: int) -> float:
    return float(noise_vector(spec, [item], seed)[0])


def release_set(h, spec: NoiseSpec, rho: float, seed: int) -> set:
    """Items of ``h`` whose noisy weight exceeds ``rho``."""
    items = list(h)
    if not items:
        return set()
    weights = np.fromiter((h[u] for u in items), dtype=float, count=len(items))
    noisy = weights + noise_vector(spec, items, seed)
    return {u for u, keep in zip(items, noisy > rho) if keep}


@dataclass
class ReleaseReport:
    released: set
    mechanism: Mechanism
    epsilon: float
    delta: float
    delta0: int
    alpha: float
    seed: int
    passes: int
    calibration: CalibrationResult
    histogram_support_size: int
    private: bool
    notes: list = field(default_factory=list)

    @property
    def released_size(self) -> int:
        return len(self.released)

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism.value,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "delta0": self.delta0,
            "alpha": self.alpha,
            "seed": self.seed,
            "passes": self.passes,
            "private": self.private,
            "notes": list(self.notes),
            "calibration": self.calibration.to_dict(),
            "histogram_support_size": self.histogram_support_size,
            "released_size": self.released_size,
            "released": sorted(self.released),
        }


def run_dpsu(db: Database, config: MechanismConfig, params: PrivacyParams,
             calibration: CalibrationResult | None = None) -> ReleaseReport:
    """Calibrate, build the histogram, add noise and threshold.

    ``calibration`` may be passed in to skip recomputing it across many
    seeds; it must match ``config`` and ``params``.

    Raises:
      ValueError: for the greedy demo policy, ``delta0 < 1``, or multiple
        passes without ``config.experimental``.
    """
    mech = config.mechanism
    if mech is Mechanism.GREEDY_DEMO:
        raise ValueError("greedy-demo is demonstration-only and has no privacy guarantee")
    if config.delta0 < 1:
        raise ValueError(f"delta0 must be at least 1, got {config.delta0}")
    if config.passes > 1 and not config.experimental:
        raise ValueError("passes > 1 is experimental; set experimental=True to run it")
    cal = calibration or calibrate(mech, params, config.delta0, config.alpha)
    if (cal.mechanism.norm is not mech.norm or cal.delta0 != config.delta0
            or cal.epsilon != params.epsilon or cal.delta != params.delta
            or cal.alpha != config.alpha):
        raise ValueError("calibration does not match config/params")
    policy = policy_for(mech, gamma=cal.gamma, delta0=config.delta0)
    h = build_histogram(db, config, policy)
    released = release_set(h, NoiseSpec.from_calibration(cal), cal.rho, config.seed)
    notes = []
    if config.passes > 1:
        notes.append("multi-pass mode is experimental: no privacy proof covers it")
    return ReleaseReport(
        released=released, mechanism=mech, epsilon=params.epsilon, delta=params.delta,
        delta0=config.delta0, alpha=config.alpha, seed=config.seed, passes=config.passes,
        calibration=cal, histogram_support_size=len(h), private=config.passes == 1,
        notes=notes)
