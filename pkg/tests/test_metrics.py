import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsadforge.errors import LengthMismatch, NoGroundTruth
from tsadforge.metrics import (
    affiliation_f,
    best_f1_over_thresholds,
    buffered_labels,
    f1_t,
    mask_to_segments,
    segments_to_mask,
    standard_f1,
    vus_pr,
)

# ----------------------------------------------------------------------------
# Oracles (independent implementations used to freeze expected values)
# ----------------------------------------------------------------------------


def naive_confusion_f1(pred, labels):
    tp = fp = fn = 0
    for p, y in zip(pred, labels):
        if p and y:
            tp += 1
        elif p and not y:
            fp += 1
        elif not p and y:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def brute_force_vus(scores, labels, buffer_max):
    """Materialize every buffered label sequence and every threshold."""
    n = len(scores)
    segments = mask_to_segments(np.asarray(labels))
    areas = []
    for ell in range(buffer_max + 1):
        w = np.zeros(n)
        for t in range(n):
            best = 0.0
            for s, e in segments:
                if s <= t < e:
                    dist = 0
                elif t < s:
                    dist = s - t
                else:
                    dist = t - (e - 1)
                best = max(best, max(0.0, 1.0 - dist / (ell + 1.0)))
            w[t] = best
        total = w.sum()
        pts = []
        for thr in sorted(set(float(v) for v in scores), reverse=True):
            pred = np.asarray(scores) >= thr
            tp = float(w[pred].sum())
            precision = tp / pred.sum()
            recall = tp / total
            pts.append((recall, precision))
        area = 0.0
        prev_r = 0.0
        for r, p in pts:
            area += (r - prev_r) * p
            prev_r = r
        areas.append(area)
    return float(np.mean(areas))


def brute_force_affiliation_single_zone(labels, pred):
    """Survival-probability affiliation for a single ground-truth segment."""
    n = len(labels)
    (seg_s, seg_e), = mask_to_segments(np.asarray(labels))
    zone = list(range(n))
    pred_points = [t for t in zone if pred[t]]
    seg_points = list(range(seg_s, seg_e))

    def dist_to_seg(t):
        if seg_s <= t < seg_e:
            return 0
        return seg_s - t if t < seg_s else t - (seg_e - 1)

    precisions = []
    for x in pred_points:
        d = dist_to_seg(x)
        precisions.append(sum(1 for t in zone if dist_to_seg(t) >= d) / n)
    recalls = []
    for y in seg_points:
        d = min(abs(y - x) for x in pred_points)
        recalls.append(sum(1 for t in zone if abs(t - y) >= d) / n)
    precision = float(np.mean(precisions))
    recall = float(np.mean(recalls))
    f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


# ----------------------------------------------------------------------------
# Segment extraction
# ----------------------------------------------------------------------------


def test_segments_roundtrip():
    mask = np.array([1, 1, 0, 0, 1, 0, 1, 1, 1], dtype=np.uint8)
    segs = mask_to_segments(mask)
    assert segs == [(0, 2), (4, 5), (6, 9)]
    assert np.array_equal(segments_to_mask(segs, 9), mask)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=60))
def test_segments_roundtrip_property(bits):
    mask = np.array(bits, dtype=np.uint8)
    assert np.array_equal(segments_to_mask(mask_to_segments(mask), len(mask)), mask)


# ----------------------------------------------------------------------------
# Standard F1
# ----------------------------------------------------------------------------


def test_standard_perfect():
    labels = np.array([0, 1, 1, 0])
    assert standard_f1(labels, labels) == (1.0, 1.0, 1.0)


def test_standard_all_zero_pred():
    assert standard_f1(np.zeros(4), np.array([0, 1, 1, 0]))[2] == 0.0


def test_standard_hand_counted():
    labels = np.array([0, 1, 1, 0])
    pred = np.array([0, 1, 0, 1])
    p, r, f1 = standard_f1(pred, labels)
    assert (p, r, f1) == (0.5, 0.5, 0.5)


def test_standard_matches_naive_oracle_on_random_instances():
    gen = np.random.default_rng(0)
    for _ in range(1000):
        n = int(gen.integers(1, 50))
        pred = gen.integers(0, 2, n)
        labels = gen.integers(0, 2, n)
        assert standard_f1(pred, labels) == naive_confusion_f1(pred, labels)


def test_standard_length_mismatch():
    with pytest.raises(LengthMismatch):
        standard_f1(np.zeros(3), np.zeros(4))


# ----------------------------------------------------------------------------
# F1-T
# ----------------------------------------------------------------------------


def test_f1t_perfect():
    labels = segments_to_mask([(10, 20)], 60)
    assert f1_t(labels, labels)[2] == 1.0


def test_f1t_single_point_recalls_segment():
    labels = segments_to_mask([(10, 20)], 60)
    pred = segments_to_mask([(15, 16)], 60)
    p, r, f1 = f1_t(pred, labels)
    assert (p, r, f1) == (1.0, 1.0, 1.0)


def test_f1t_extra_point_costs_precision():
    labels = segments_to_mask([(10, 20)], 60)
    pred = segments_to_mask([(15, 16), (50, 51)], 60)
    p, r, f1 = f1_t(pred, labels)
    assert p == 0.5 and r == 1.0
    assert f1 == pytest.approx(2 / 3)


def test_f1t_event_recall_monotone_under_added_inside_points():
    labels = segments_to_mask([(10, 20), (40, 45)], 60)
    pred = segments_to_mask([(12, 13)], 60)
    _, r1, _ = f1_t(pred, labels)
    pred2 = segments_to_mask([(12, 15)], 60)
    _, r2, _ = f1_t(pred2, labels)
    assert r2 >= r1


# ----------------------------------------------------------------------------
# Affiliation
# ----------------------------------------------------------------------------


def test_affiliation_perfect():
    labels = segments_to_mask([(40, 50)], 100)
    p, r, f1 = affiliation_f(labels, labels)
    assert (p, r, f1) == (1.0, 1.0, 1.0)


def test_affiliation_empty_pred_is_zero():
    labels = segments_to_mask([(40, 50)], 100)
    p, r, f1 = affiliation_f(np.zeros(100), labels)
    assert f1 == 0.0 and r == 0.0


def test_affiliation_no_ground_truth_raises():
    with pytest.raises(NoGroundTruth):
        affiliation_f(np.ones(10), np.zeros(10))


def test_affiliation_single_inside_point_matches_bruteforce():
    labels = segments_to_mask([(40, 50)], 100)
    pred = segments_to_mask([(45, 46)], 100)
    expected = brute_force_affiliation_single_zone(labels, pred)
    got = affiliation_f(pred, labels)
    assert got == pytest.approx(expected, abs=1e-12)
    assert got[0] == 1.0  # prediction inside the segment: precision 1


def test_affiliation_near_miss_beats_far_miss():
    labels = segments_to_mask([(40, 50)], 100)
    near = segments_to_mask([(52, 53)], 100)
    far = segments_to_mask([(90, 91)], 100)
    assert affiliation_f(near, labels)[2] > affiliation_f(far, labels)[2]


def test_affiliation_multiple_zones():
    labels = segments_to_mask([(10, 15), (60, 70)], 100)
    pred = segments_to_mask([(12, 13)], 100)  # hits first zone only
    p, r, f1 = affiliation_f(pred, labels)
    assert p == 1.0
    assert 0.0 < r < 1.0  # second zone recalls nothing


# ----------------------------------------------------------------------------
# VUS-PR
# ----------------------------------------------------------------------------


def test_vus_perfect_binary_scores():
    labels = segments_to_mask([(5, 9)], 20)
    assert vus_pr(labels.astype(float), labels, 0) == pytest.approx(1.0)


def test_vus_constant_scores_equals_buffered_positive_rate():
    labels = segments_to_mask([(5, 9)], 20)
    scores = np.full(20, 0.7)
    for ell in (0, 3):
        expected = buffered_labels(labels, ell).mean()
        assert vus_pr(scores, labels, 0 if ell == 0 else ell) >= 0  # smoke
        # single-buffer area equals the weighted positive rate
        from tsadforge.metrics import pr_auc_weighted

        assert pr_auc_weighted(scores, buffered_labels(labels, ell)) == pytest.approx(expected)


def test_buffered_labels_ramp():
    labels = segments_to_mask([(10, 12)], 24)
    w = buffered_labels(labels, 3)
    assert w[10] == 1.0 and w[11] == 1.0
    assert w[9] == pytest.approx(0.75)   # distance 1, buffer 3 -> 1 - 1/4
    assert w[7] == pytest.approx(0.25)
    assert w[6] == 0.0
    assert w[12] == pytest.approx(0.75)


def test_vus_matches_bruteforce_on_200_point_instance():
    gen = np.random.default_rng(7)
    labels = segments_to_mask([(30, 45), (120, 140)], 200)
    scores = gen.normal(size=200) + 2.0 * labels
    expected = brute_force_vus(scores, labels, 5)
    assert vus_pr(scores, labels, 5) == pytest.approx(expected, abs=1e-9)


def test_vus_invariant_under_monotone_transform():
    gen = np.random.default_rng(8)
    labels = segments_to_mask([(10, 20)], 100)
    scores = gen.normal(size=100)
    a = vus_pr(scores, labels, 4)
    b = vus_pr(np.exp(scores * 0.5) + 3.0, labels, 4)
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_vus_in_unit_interval(seed):
    gen = np.random.default_rng(seed)
    n = 50
    labels = np.zeros(n, dtype=np.uint8)
    s = int(gen.integers(0, n - 5))
    labels[s : s + 4] = 1
    scores = gen.normal(size=n)
    v = vus_pr(scores, labels, 5)
    assert 0.0 <= v <= 1.0


# ----------------------------------------------------------------------------
# Threshold sweep
# ----------------------------------------------------------------------------


def test_best_f1_perfect_scores():
    labels = segments_to_mask([(5, 9)], 30)
    thr, report = best_f1_over_thresholds(labels.astype(float), labels)
    assert report.standard_f1 == 1.0


def test_best_f1_monotone_transform_invariance():
    gen = np.random.default_rng(9)
    labels = segments_to_mask([(10, 25)], 120)
    scores = gen.normal(size=120) + labels * 1.5
    _, r1 = best_f1_over_thresholds(scores, labels, grid=64)
    _, r2 = best_f1_over_thresholds(np.tanh(scores) * 10, labels, grid=64)
    assert r1.standard_f1 == pytest.approx(r2.standard_f1, abs=1e-12)


def test_best_f1_grid_covers_exhaustive_sweep():
    gen = np.random.default_rng(10)
    labels = (gen.uniform(size=300) < 0.1).astype(np.uint8)
    labels[5:15] = 1
    scores = gen.normal(size=300) + labels
    exhaustive = max(
        standard_f1(scores >= thr, labels)[2] for thr in np.unique(scores)
    )
    _, report = best_f1_over_thresholds(scores, labels, grid=1000)
    assert report.standard_f1 == pytest.approx(exhaustive, abs=1e-12)


def test_best_f1_tie_returns_lowest_threshold():
    labels = np.array([0, 0, 1, 1])
    scores = np.array([0.0, 0.0, 1.0, 2.0])
    thr, report = best_f1_over_thresholds(scores, labels, grid=16)
    assert thr == 1.0  # thresholds 1.0 and anything in (0, 1] tie at F1=1
    assert report.standard_f1 == 1.0


def test_standard_f1_zero_for_disjoint():
    labels = segments_to_mask([(10, 20)], 50)
    pred = segments_to_mask([(30, 40)], 50)
    assert standard_f1(pred, labels)[2] == 0.0


def test_best_f1_reversed_scores_capped_by_positive_rate_baseline():
    # Anomalies scored lowest: no threshold beats predicting everything,
    # whose F1 is the positive-rate-driven baseline 2p/(1+p).
    labels = segments_to_mask([(10, 30)], 200)
    scores = 1.0 - labels.astype(float)
    _, report = best_f1_over_thresholds(scores, labels, grid=64)
    p = labels.mean()
    baseline = 2 * p / (1 + p)
    assert report.standard_f1 == pytest.approx(baseline, abs=1e-12)


def test_report_f1_consistency():
    gen = np.random.default_rng(11)
    labels = segments_to_mask([(20, 40)], 200)
    scores = gen.normal(size=200) + 2 * labels
    _, report = best_f1_over_thresholds(scores, labels)
    p = report.tp / (report.tp + report.fp)
    r = report.tp / (report.tp + report.fn)
    assert report.standard_f1 == pytest.approx(2 * p * r / (p + r), abs=1e-12)
