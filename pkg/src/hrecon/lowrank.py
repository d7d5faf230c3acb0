"""Mode-n unfolding/folding and sequential mode-wise low-rank truncation.

The rotation pass expands a third-order tensor along each mode in turn,
replaces the unfolding by its best rank-tau approximation (truncated SVD),
and folds back, cycling through all three expansion directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LowRankConfig",
    "unfold",
    "fold",
    "svd_truncate",
    "lowrank_rotate",
]


@dataclass
class LowRankConfig:
    """Per-mode truncation settings for the rotation pass.

    tau is the number of singular values kept per mode.  weights are the
    per-mode importance factors of the underlying nuclear-norm objective;
    they are validated and stored but the default pass applies the same
    tau to every mode.  Setting soft_threshold switches the pass from hard
    rank truncation to singular-value shrinkage by that amount.
    """

    tau: int
    mode_order: tuple[int, int, int] = (0, 1, 2)
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    soft_threshold: float | None = None

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if sorted(self.mode_order) != [0, 1, 2]:
            raise ValueError(f"mode_order must be a permutation of (0,1,2), got {self.mode_order}")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if not math.isclose(sum(self.weights), 1.0, rel_tol=1e-9):
            raise ValueError(f"weights must sum to 1, got {sum(self.weights)}")
        if self.soft_threshold is not None and self.soft_threshold < 0:
            raise ValueError("soft_threshold must be nonnegative")


def _check_mode(n: int, order: int) -> int:
    n = int(n)
    if not 0 <= n < order:
        raise ValueError(f"mode {n} out of range for order-{order} tensor")
    return n


def unfold(t: np.ndarray, n: int) -> np.ndarray:
    """Mode-n unfolding: fibers along mode n become columns.

    The remaining indices run in ascending-mode C order (the last remaining
    mode varies fastest), i.e. row i of unfold(t, 0) is t[i].ravel().
    """
    t = np.asarray(t)
    n = _check_mode(n, t.ndim)
    return np.moveaxis(t, n, 0).reshape(t.shape[n], -1)


def fold(m: np.ndarray, n: int, shape: tuple[int, ...]) -> np.ndarray:
    """Exact inverse of :func:`unfold` for the same mode and tensor shape."""
    m = np.asarray(m)
    n = _check_mode(n, len(shape))
    rest = tuple(s for i, s in enumerate(shape) if i != n)
    expected = (shape[n], int(np.prod(rest)))
    if m.shape != expected:
        raise ValueError(
            f"matrix shape {m.shape} does not match mode-{n} unfolding "
            f"{expected} of tensor shape {tuple(shape)}"
        )
    return np.moveaxis(m.reshape((shape[n],) + rest), 0, n)


def svd_truncate(m: np.ndarray, tau: int) -> np.ndarray:
    """Best Frobenius rank-tau approximation (keep the tau largest singular values)."""
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    m = np.asarray(m)
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise np.linalg.LinAlgError(
            f"SVD failed to converge on a {m.shape[0]}x{m.shape[1]} matrix: {e}"
        ) from e
    tau = min(tau, s.size)
    return (u[:, :tau] * s[:tau]) @ vh[:tau]


def _svd_shrink(m: np.ndarray, threshold: float) -> np.ndarray:
    """Soft variant: subtract threshold from each singular value, clipping at 0."""
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise np.linalg.LinAlgError(
            f"SVD failed to converge on a {m.shape[0]}x{m.shape[1]} matrix: {e}"
        ) from e
    s = np.maximum(s - threshold, 0.0)
    return (u * s) @ vh


def lowrank_rotate(t: np.ndarray, cfg: LowRankConfig) -> np.ndarray:
    """Sequentially truncate each mode's unfolding per cfg.mode_order.

    The passes are sequential, not a joint projection: only the last
    processed mode's unfolding is guaranteed to have rank <= tau on return.
    """
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a third-order tensor, got {t.ndim} modes")
    shape = t.shape
    for n in cfg.mode_order:
        m = unfold(t, n)
        if cfg.soft_threshold is not None:
            m = _svd_shrink(m, cfg.soft_threshold)
        else:
            m = svd_truncate(m, cfg.tau)
        t = fold(m, n, shape)
    return t
