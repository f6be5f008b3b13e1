"""Non-learned baseline detectors producing anomaly scores.

Both detectors emit one score per time step (higher = more anomalous) and a
standard-deviation floor of 1e-8 keeps constant stretches from dividing by
zero.  Multivariate input is scored per channel and aggregated by the
max across channels.
"""

from __future__ import annotations

import numpy as np

from .errors import EmptyInput, InputTooShort

STD_FLOOR = 1e-8
DEFAULT_WINDOW = 100


def _rolling_mean_std(x: np.ndarray, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean/std over the trailing window [max(0, t-W), t) for every t."""
    n = len(x)
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csq = np.concatenate([[0.0], np.cumsum(x * x)])
    t = np.arange(n)
    lo = np.maximum(t - window, 0)
    count = np.maximum(t - lo, 1)  # t=0 guarded by caller
    s = csum[t] - csum[lo]
    sq = csq[t] - csq[lo]
    mean = s / count
    var = np.maximum(sq / count - mean * mean, 0.0)
    return mean, np.sqrt(var)


def zscore_detector(x: np.ndarray, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """|x[t] - mean| / (std + eps) over the trailing window [max(0, t-W), t).

    Positions whose trailing window holds fewer than two points score 0: an
    empty window has no mean and a single point has no spread, so the ratio
    would be pure startup artifact there.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        per_channel = [zscore_detector(x[:, k], window) for k in range(x.shape[1])]
        return np.max(np.stack(per_channel, axis=1), axis=1)
    if len(x) == 0:
        raise EmptyInput("zscore detector needs a non-empty series")
    if len(x) == 1:
        return np.zeros(1)
    mean, std = _rolling_mean_std(x, window)
    scores = np.abs(x - mean) / (std + STD_FLOOR)
    scores[:2] = 0.0
    return scores


def context_discrepancy_detector(x: np.ndarray, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """Discrepancy between adjacent windows around each step.

    score[t] = |mean(x[t, t+W)) - mean(x[t-W, t))| / (pooled std + eps);
    positions without both full windows score 0.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        per_channel = [context_discrepancy_detector(x[:, k], window) for k in range(x.shape[1])]
        return np.max(np.stack(per_channel, axis=1), axis=1)
    n = len(x)
    if n == 0:
        raise EmptyInput("context discrepancy detector needs a non-empty series")
    if n < 2 * window:
        raise InputTooShort(f"series of length {n} is shorter than two windows of {window}")
    csum = np.concatenate([[0.0], np.cumsum(x)])
    csq = np.concatenate([[0.0], np.cumsum(x * x)])

    scores = np.zeros(n)
    t = np.arange(window, n - window + 1)
    left_sum = csum[t] - csum[t - window]
    right_sum = csum[t + window] - csum[t]
    left_sq = csq[t] - csq[t - window]
    right_sq = csq[t + window] - csq[t]
    left_mean = left_sum / window
    right_mean = right_sum / window
    left_var = np.maximum(left_sq / window - left_mean**2, 0.0)
    right_var = np.maximum(right_sq / window - right_mean**2, 0.0)
    pooled = np.sqrt(0.5 * (left_var + right_var))
    scores[t] = np.abs(right_mean - left_mean) / (pooled + STD_FLOOR)
    return scores
