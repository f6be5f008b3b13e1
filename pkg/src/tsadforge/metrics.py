"""Evaluation protocol: Standard-F1, temporal F1, affiliation F1, VUS-PR.

All binary metrics accept 0/1 series; VUS-PR and the threshold sweep accept
real-valued scores (higher = more anomalous).  Predictions derived from
scores always use ``score >= threshold``.  Point-adjusted F1 is deliberately
not provided.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, NoGroundTruth


def mask_to_segments(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of ones as sorted, non-overlapping [start, end) pairs."""
    mask = np.asarray(mask).astype(bool)
    if mask.ndim != 1:
        raise ValueError("expected a 1-d mask")
    diff = np.diff(mask.astype(np.int8))
    starts = list(np.where(diff == 1)[0] + 1)
    ends = list(np.where(diff == -1)[0] + 1)
    if mask[0]:
        starts.insert(0, 0)
    if mask[-1]:
        ends.append(len(mask))
    return list(zip(starts, ends))


def segments_to_mask(segments: list[tuple[int, int]], n: int) -> np.ndarray:
    mask = np.zeros(n, dtype=np.uint8)
    for s, e in segments:
        mask[s:e] = 1
    return mask


@dataclass
class MetricReport:
    standard_f1: float
    f1_t: float
    affiliation_f: float
    vus_pr: float | None
    threshold: float | None
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        out = {
            "standard_f1": self.standard_f1,
            "f1_t": self.f1_t,
            "affiliation_f": self.affiliation_f,
            "counts": {"tp": self.tp, "fp": self.fp, "fn": self.fn},
        }
        if self.vus_pr is not None:
            out["vus_pr"] = self.vus_pr
        if self.threshold is not None:
            out["threshold"] = self.threshold
        return out


def _check_lengths(a: np.ndarray, b: np.ndarray) -> None:
    if len(a) != len(b):
        raise LengthMismatch(f"series lengths differ: {len(a)} vs {len(b)}")


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def standard_f1(pred: np.ndarray, labels: np.ndarray) -> tuple[float, float, float]:
    """Point-wise precision/recall/F1 (no point adjustment)."""
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    _check_lengths(pred, labels)
    tp = int(np.sum(pred & labels))
    fp = int(np.sum(pred & ~labels))
    fn = int(np.sum(~pred & labels))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    return precision, recall, _f1(precision, recall)


def f1_t(pred: np.ndarray, labels: np.ndarray) -> tuple[float, float, float]:
    """Temporal F1: point-wise precision with event-wise recall.

    A ground-truth segment counts as recalled iff at least one predicted
    point overlaps it; precision stays point-wise so scattering predictions
    everywhere is still penalized.
    """
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    _check_lengths(pred, labels)
    n_pred = int(np.sum(pred))
    tp_points = int(np.sum(pred & labels))
    precision = tp_points / n_pred if n_pred > 0 else 0.0
    segments = mask_to_segments(labels)
    if segments:
        recalled = sum(1 for s, e in segments if np.any(pred[s:e]))
        recall = recalled / len(segments)
    else:
        recall = 0.0
    return precision, recall, _f1(precision, recall)


# ---------------------------------------------------------------------------
# Affiliation
# ---------------------------------------------------------------------------


def _affiliation_zones(segments: list[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    """Partition [0, n) into one zone per ground-truth segment; boundaries sit
    at midpoints between adjacent segments and extend to the series ends."""
    zones = []
    for k, (s, e) in enumerate(segments):
        lo = 0 if k == 0 else (segments[k - 1][1] + s + 1) // 2
        hi = n if k == len(segments) - 1 else (e + segments[k + 1][0] + 1) // 2
        zones.append((lo, hi))
    return zones


def _dist_to_segment(points: np.ndarray, seg: tuple[int, int]) -> np.ndarray:
    s, e = seg
    return np.maximum(np.maximum(s - points, points - (e - 1)), 0)


def _survival(zone_dists: np.ndarray, d: float) -> float:
    """P(dist(U, target) >= d) for U uniform over the zone's points."""
    return float(np.mean(zone_dists >= d))


def affiliation_f(pred: np.ndarray, labels: np.ndarray) -> tuple[float, float, float]:
    """Distance-based affiliation precision/recall/F1.

    Each ground-truth segment owns a zone.  A predicted point's individual
    precision is the probability that a uniformly random point of the zone
    lies at least as far from the segment; a ground-truth point's individual
    recall is the probability that a uniformly random zone point lies at
    least as far from it as the nearest prediction does.  Zone scores are the
    means of the individual probabilities; precision averages over zones
    holding at least one prediction, recall over all zones (a zone without
    predictions recalls nothing).
    """
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    _check_lengths(pred, labels)
    segments = mask_to_segments(labels)
    if not segments:
        raise NoGroundTruth("affiliation metric needs at least one ground-truth segment")
    n = len(labels)
    zones = _affiliation_zones(segments, n)

    zone_precisions = []
    zone_recalls = []
    for seg, (lo, hi) in zip(segments, zones):
        zone_points = np.arange(lo, hi)
        pred_points = zone_points[pred[lo:hi]]
        seg_points = np.arange(seg[0], seg[1])
        dists_to_seg = _dist_to_segment(zone_points, seg)
        if len(pred_points) > 0:
            precisions = [
                _survival(dists_to_seg, d) for d in _dist_to_segment(pred_points, seg)
            ]
            zone_precisions.append(float(np.mean(precisions)))
            recalls = []
            for y in seg_points:
                d_near = np.min(np.abs(pred_points - y))
                recalls.append(_survival(np.abs(zone_points - y), d_near))
            zone_recalls.append(float(np.mean(recalls)))
        else:
            zone_recalls.append(0.0)

    precision = float(np.mean(zone_precisions)) if zone_precisions else 0.0
    recall = float(np.mean(zone_recalls))
    return precision, recall, _f1(precision, recall)


# ---------------------------------------------------------------------------
# VUS-PR
# ---------------------------------------------------------------------------


def buffered_labels(labels: np.ndarray, buffer: int) -> np.ndarray:
    """Continuous labels: each segment keeps weight 1 inside and decays
    linearly over ``buffer`` steps on both sides; overlaps take the max."""
    labels = np.asarray(labels).astype(bool)
    n = len(labels)
    out = np.zeros(n)
    t = np.arange(n)
    for seg in mask_to_segments(labels):
        dist = _dist_to_segment(t, seg)
        out = np.maximum(out, np.clip(1.0 - dist / (buffer + 1.0), 0.0, 1.0))
    return out


def pr_auc_weighted(scores: np.ndarray, weights: np.ndarray) -> float:
    """Area under the precision-recall curve against continuous labels.

    Thresholds sweep the sorted unique score values (prediction rule
    ``score >= threshold``); the curve is anchored at (recall 0, precision 1)
    and integrated by the step method.
    """
    scores = np.asarray(scores, dtype=float)
    weights = np.asarray(weights, dtype=float)
    _check_lengths(scores, weights)
    total_weight = float(np.sum(weights))
    if total_weight == 0.0:
        return 0.0
    order = np.argsort(-scores, kind="stable")
    w_sorted = weights[order]
    s_sorted = scores[order]
    cum_w = np.cumsum(w_sorted)
    counts = np.arange(1, len(scores) + 1)
    # Threshold boundaries: positions where the next score is strictly smaller.
    boundary = np.nonzero(np.diff(s_sorted) != 0.0)[0]
    idx = np.concatenate([boundary, [len(scores) - 1]])
    precision = cum_w[idx] / counts[idx]
    recall = cum_w[idx] / total_weight
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(np.sum((recall - prev_recall) * precision))


def vus_pr(scores: np.ndarray, labels: np.ndarray, buffer_max: int) -> float:
    """Mean PR-AUC over buffer widths 0..buffer_max (threshold-free score)."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    _check_lengths(scores, labels)
    if buffer_max < 0:
        raise ValueError("buffer_max must be >= 0")
    areas = [
        pr_auc_weighted(scores, buffered_labels(labels, ell)) for ell in range(buffer_max + 1)
    ]
    return float(np.mean(areas))


def default_buffer(n: int) -> int:
    return min(100, n // 10)


# ---------------------------------------------------------------------------
# Threshold sweep
# ---------------------------------------------------------------------------


def best_f1_over_thresholds(
    scores: np.ndarray, labels: np.ndarray, grid: int = 128
) -> tuple[float, MetricReport]:
    """Sweep thresholds placed at score quantiles; return the Standard-F1
    maximizer (ties resolve to the lowest threshold) and its full report.

    With ``grid`` at least the number of unique scores the sweep is
    exhaustive over all distinct values.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels).astype(bool)
    _check_lengths(scores, labels)
    s_sorted = np.sort(scores)
    qs = np.linspace(0.0, 1.0, grid)
    idx = np.floor(qs * (len(scores) - 1)).astype(int)
    thresholds = np.unique(s_sorted[idx])

    best_thr = float(thresholds[0])
    best = (-1.0, None)
    for thr in thresholds:
        pred = scores >= thr
        _, _, f1 = standard_f1(pred, labels)
        if f1 > best[0]:
            best = (f1, pred)
            best_thr = float(thr)
    pred = best[1]
    return best_thr, evaluate_predictions(pred, labels, threshold=best_thr)


def evaluate_predictions(
    pred: np.ndarray,
    labels: np.ndarray,
    *,
    threshold: float | None = None,
    scores: np.ndarray | None = None,
    buffer_max: int | None = None,
) -> MetricReport:
    """Full binary-metric report; VUS-PR included when scores are given."""
    pred = np.asarray(pred).astype(bool)
    labels = np.asarray(labels).astype(bool)
    _check_lengths(pred, labels)
    p, r, f1 = standard_f1(pred, labels)
    _, _, f1t = f1_t(pred, labels)
    if labels.any():
        _, _, aff = affiliation_f(pred, labels)
    else:
        aff = 0.0
    vus = None
    if scores is not None:
        b = default_buffer(len(labels)) if buffer_max is None else buffer_max
        vus = vus_pr(scores, labels, b)
    tp = int(np.sum(pred & labels))
    fp = int(np.sum(pred & ~labels))
    fn = int(np.sum(~pred & labels))
    return MetricReport(
        standard_f1=f1,
        f1_t=f1t,
        affiliation_f=aff,
        vus_pr=vus,
        threshold=threshold,
        tp=tp,
        fp=fp,
        fn=fn,
    )
