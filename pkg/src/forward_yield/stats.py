"""Monte Carlo drift statistics shared by the martingale/supermartingale tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def mean_stderr(x: np.ndarray, axis: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and standard error along an axis."""
    n = x.shape[axis]
    m = np.mean(x, axis=axis)
    se = np.std(x, axis=axis, ddof=1) / np.sqrt(n)
    return m, se


@dataclass(frozen=True)
class DriftReport:
    """Per-interval and total sample drift of a process that should be a
    (super)martingale, with standard errors and t statistics."""

    times: np.ndarray             # (K+1,)
    interval_drift: np.ndarray    # (K,) mean increment per interval
    interval_stderr: np.ndarray   # (K,)
    total_drift: float            # mean of terminal minus initial value
    total_stderr: float
    threshold: float              # number of standard errors used for flagging

    @property
    def interval_t(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(self.interval_stderr > 0, self.interval_drift / self.interval_stderr, 0.0)
        return t

    @property
    def total_t(self) -> float:
        if self.total_stderr == 0.0:
            return 0.0
        return self.total_drift / self.total_stderr

    @property
    def flagged(self) -> np.ndarray:
        """Intervals whose drift is inconsistent with zero at the threshold."""
        return np.abs(self.interval_t) > self.threshold

    @property
    def max_abs_t(self) -> float:
        return float(np.max(np.abs(self.interval_t), initial=0.0))

    def is_martingale_like(self) -> bool:
        return not bool(np.any(self.flagged))


def interval_drift_report(values: np.ndarray, times: np.ndarray, threshold: float = 4.0) -> DriftReport:
    """Drift statistics of a per-path process sampled at grid times.

    values has shape (n_paths, K+1); increments are averaged across paths
    in path-index order (deterministic reduction).
    """
    values = np.asarray(values, dtype=float)
    increments = np.diff(values, axis=1)
    drift, stderr = mean_stderr(increments, axis=0)
    total, total_se = mean_stderr(values[:, -1] - values[:, 0], axis=0)
    return DriftReport(
        times=np.asarray(times, dtype=float),
        interval_drift=drift,
        interval_stderr=stderr,
        total_drift=float(total),
        total_stderr=float(total_se),
        threshold=float(threshold),
    )
