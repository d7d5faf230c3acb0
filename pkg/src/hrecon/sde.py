"""Variance-exploding SDE schedule, predictor/corrector steps, analytic scores.

All steps are pure: noise tensors are passed in by the caller (who owns the
seeded generator), so identical inputs give bit-identical outputs.  A score
provider is any callable ``(x, sigma) -> score`` returning an array of the
same shape; :class:`GaussianScore` is the analytic reference used for
verification, and an external-process provider lives in :mod:`hrecon.bridge`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "ScoreFn",
    "SigmaSchedule",
    "SamplerParams",
    "geometric_schedule",
    "predictor_step",
    "corrector_step",
    "gaussian_score",
    "GaussianScore",
    "noise_like",
    "pc_sample",
]

ScoreFn = Callable[[np.ndarray, float], np.ndarray]


@dataclass
class SigmaSchedule:
    """Discretized noise levels sigma_1 < ... < sigma_N; sigma_0 = 0 implicitly."""

    sigmas: np.ndarray

    def __post_init__(self):
        self.sigmas = np.asarray(self.sigmas, dtype=np.float64)
        if self.sigmas.ndim != 1 or self.sigmas.size < 2:
            raise ValueError("schedule needs at least two noise levels")
        if self.sigmas[0] <= 0:
            raise ValueError("noise levels must be positive")
        if np.any(np.diff(self.sigmas) <= 0):
            raise ValueError("noise levels must be strictly increasing")

    @property
    def n_steps(self) -> int:
        return self.sigmas.size

    @property
    def sigma_min(self) -> float:
        return float(self.sigmas[0])

    @property
    def sigma_max(self) -> float:
        return float(self.sigmas[-1])

    def sigma(self, i: int) -> float:
        """sigma_i for i in [0, N], with sigma_0 = 0."""
        if not 0 <= i <= self.n_steps:
            raise IndexError(f"sigma index {i} out of range [0, {self.n_steps}]")
        return 0.0 if i == 0 else float(self.sigmas[i - 1])


def geometric_schedule(n: int, sigma_min: float, sigma_max: float) -> SigmaSchedule:
    """Geometric progression sigma_i = sigma_min (sigma_max/sigma_min)^((i-1)/(n-1))."""
    if n < 2:
        raise ValueError(f"need at least 2 steps, got {n}")
    if not 0 < sigma_min < sigma_max:
        raise ValueError(f"need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    i = np.arange(1, n + 1, dtype=np.float64)
    sigmas = sigma_min * (sigma_max / sigma_min) ** ((i - 1) / (n - 1))
    return SigmaSchedule(sigmas)


@dataclass
class SamplerParams:
    """Predictor-corrector sampling knobs."""

    snr_r: float = 0.075
    n_outer: int = 1000
    n_inner: int = 1
    rng_seed: int = 0
    sigma_min: float = 0.01
    sigma_max: float = 1.0

    def __post_init__(self):
        if self.snr_r <= 0:
            raise ValueError("snr_r must be positive")
        if self.n_outer < 0 or self.n_inner < 0:
            raise ValueError("iteration counts must be nonnegative")
        if not 0 < self.sigma_min < self.sigma_max:
            raise ValueError("need 0 < sigma_min < sigma_max")

    def schedule(self) -> SigmaSchedule:
        return geometric_schedule(max(self.n_outer, 2), self.sigma_min, self.sigma_max)


def _check_score(g: np.ndarray, x: np.ndarray, sigma: float) -> np.ndarray:
    g = np.asarray(g)
    if g.shape != x.shape:
        raise ValueError(f"score shape {g.shape} != input shape {x.shape}")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError(f"score produced non-finite values at sigma={sigma}")
    return g


def predictor_step(x, score: ScoreFn, sched: SigmaSchedule, i: int, noise) -> np.ndarray:
    """Reverse-diffusion predictor from level i+1 down to level i.

    x <- x + (sigma_{i+1}^2 - sigma_i^2) score(x, sigma_{i+1})
           + sqrt(sigma_{i+1}^2 - sigma_i^2) z
    """
    x = np.asarray(x)
    noise = np.asarray(noise)
    if not 0 <= i < sched.n_steps:
        raise IndexError(f"step index {i} out of range [0, {sched.n_steps})")
    if noise.shape != x.shape:
        raise ValueError(f"noise shape {noise.shape} != input shape {x.shape}")
    s_hi = sched.sigma(i + 1)
    s_lo = sched.sigma(i)
    diff = s_hi**2 - s_lo**2
    g = _check_score(score(x, s_hi), x, s_hi)
    return x + diff * g + np.sqrt(diff) * noise


def corrector_step(x, score: ScoreFn, sigma: float, snr_r: float, noise) -> np.ndarray:
    """One Langevin correction at the given noise level.

    Step size follows the signal-to-noise rule
    eps = 2 (snr_r ||z|| / ||g||)^2; when the score vanishes everywhere the
    step is skipped (x returned unchanged) with a warning.
    """
    x = np.asarray(x)
    noise = np.asarray(noise)
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if snr_r <= 0:
        raise ValueError(f"snr_r must be positive, got {snr_r}")
    if noise.shape != x.shape:
        raise ValueError(f"noise shape {noise.shape} != input shape {x.shape}")
    g = _check_score(score(x, sigma), x, sigma)
    g_norm = np.linalg.norm(g.ravel())
    if g_norm == 0.0:
        warnings.warn("corrector skipped: score is identically zero", RuntimeWarning)
        return x.copy()
    eps = 2.0 * (snr_r * np.linalg.norm(noise.ravel()) / g_norm) ** 2
    return x + eps * g + np.sqrt(2.0 * eps) * noise


def gaussian_score(x, mu, sigma_data: float, sigma_t: float) -> np.ndarray:
    """Exact score of N(mu, (sigma_data^2 + sigma_t^2) I) at x: (mu - x) / var."""
    x = np.asarray(x)
    mu = np.asarray(mu)
    return (mu - x) / (sigma_data**2 + sigma_t**2)


@dataclass
class GaussianScore:
    """Score provider for an isotropic Gaussian centered at mu."""

    mu: np.ndarray
    sigma_data: float = 1.0

    def __call__(self, x, sigma: float) -> np.ndarray:
        return gaussian_score(x, self.mu, self.sigma_data, sigma)


def noise_like(rng: np.random.Generator, x: np.ndarray) -> np.ndarray:
    """Standard normal noise matching x; complex arrays get independent
    N(0,1) real and imaginary parts (unit variance per real coordinate)."""
    if np.iscomplexobj(x):
        return rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return rng.standard_normal(x.shape)


def pc_sample(
    shape,
    score: ScoreFn,
    params: SamplerParams,
    rng: np.random.Generator,
    complex_data: bool = False,
) -> np.ndarray:
    """Unconditional predictor-corrector sampling from sigma_max noise.

    Runs the full reverse sweep i = N-1 .. 0 with n_inner Langevin
    corrections per level, both evaluating the score at sigma_{i+1}.  The
    whole array is treated as one tensor, so when it batches independent
    chains the corrector's step size follows the batch-norm SNR rule.
    """
    sched = params.schedule()
    proto = np.zeros(shape, dtype=np.complex128 if complex_data else np.float64)
    x = params.sigma_max * noise_like(rng, proto)
    for i in reversed(range(sched.n_steps)):
        x = predictor_step(x, score, sched, i, noise_like(rng, x))
        for _ in range(params.n_inner):
            x = corrector_step(x, score, sched.sigma(i + 1), params.snr_r, noise_like(rng, x))
    return x
