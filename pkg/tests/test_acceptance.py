"""Acceptance suite: one test per release criterion, at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  The distributional checks use fixed seeds, so the whole suite is
deterministic.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from tsadforge.causal import sample_arx, sample_dag, simulate_system
from tsadforge.detect import context_discrepancy_detector, zscore_detector
from tsadforge.metrics import (
    affiliation_f,
    best_f1_over_thresholds,
    f1_t,
    mask_to_segments,
    segments_to_mask,
    standard_f1,
    vus_pr,
)
from tsadforge.pipeline import generate_dataset, generate_sample
from tsadforge.priors import (
    AnomalyPriors,
    AttributePriors,
    CausalPriors,
    GeneratorConfig,
    contextual_anomaly_preset,
    point_anomaly_preset,
    sample_blueprint,
)
from tsadforge.rng import derive_stream
from tsadforge.signal import compose_baseline

Z99 = 2.5758293035489004  # two-sided 99% normal quantile


def _report(name: str) -> None:
    print(f"\nACCEPTANCE PASS: {name}")


# ---------------------------------------------------------------------------
# Determinism and throughput
# ---------------------------------------------------------------------------


@pytest.mark.slow
def test_determinism_and_runtime(tmp_path):
    config = GeneratorConfig(
        num_samples=1000,
        length_range=(100, 10000),  # mean length ~5050
        anomalous_ratio=0.8,
        multivariate=True,
        channel_range=(2, 5),
        master_seed=2024,
    )
    t0 = time.time()
    m1 = generate_dataset(config, 2024, tmp_path / "w1", workers=1)
    t_serial = time.time() - t0
    t0 = time.time()
    m8 = generate_dataset(config, 2024, tmp_path / "w8", workers=8)
    t_parallel = time.time() - t0
    d1 = [e["digest"] for e in m1.samples]
    d8 = [e["digest"] for e in m8.samples]
    assert d1 == d8, "per-sample digests differ between workers=1 and workers=8"
    assert t_serial < 300.0, f"workers=1 took {t_serial:.0f}s (>5min)"
    assert t_parallel < 300.0, f"workers=8 took {t_parallel:.0f}s (>5min)"
    _report(
        f"determinism: 1000 samples, workers 1 vs 8 digests identical "
        f"({t_serial:.0f}s / {t_parallel:.0f}s)"
    )


# ---------------------------------------------------------------------------
# Priors
# ---------------------------------------------------------------------------


def _binomial_ci_ok(count: int, n: int, p: float) -> bool:
    half = Z99 * math.sqrt(p * (1.0 - p) / n)
    return abs(count / n - p) <= half


def test_prior_fidelity_table_weights():
    config = GeneratorConfig(length_range=(100, 300), master_seed=77)
    n = 10_000
    season = {k: 0 for k in ("none", "sine", "square", "triangle", "wavelet")}
    trend = {k: 0 for k in ("decrease", "increase", "steady", "multiple", "arima")}
    freq = {"high": 0, "low": 0}
    noise = {k: 0 for k in ("almost_none", "low", "moderate", "high")}
    for i in range(n):
        ch = sample_blueprint(config, i).channels[0]
        season[ch.season_category] += 1
        trend[ch.trend_category] += 1
        freq[ch.freq_regime] += 1
        noise[ch.noise_category] += 1
    expected = {
        "season": ({"none": 0.3, "sine": 0.3, "square": 0.05, "triangle": 0.05, "wavelet": 0.3}, season),
        "trend": ({"decrease": 0.2, "increase": 0.2, "steady": 0.2, "multiple": 0.3, "arima": 0.1}, trend),
        "freq": ({"high": 0.5, "low": 0.5}, freq),
        "noise": ({"almost_none": 0.25, "low": 0.25, "moderate": 0.25, "high": 0.25}, noise),
    }
    for family, (probs, counts) in expected.items():
        for category, p in probs.items():
            assert _binomial_ci_ok(counts[category], n, p), (
                f"{family}:{category} freq {counts[category] / n:.4f} outside 99% CI of {p}"
            )
    _report("prior fidelity: all 16 attribute frequencies inside 99% binomial CIs (n=10000)")


def test_length_prior_mean():
    config = GeneratorConfig(length_range=(100, 10_000), master_seed=78)
    lengths = [sample_blueprint(config, i).n for i in range(10_000)]
    mean = float(np.mean(lengths))
    assert abs(mean - 5050.0) <= 0.01 * 5050.0, f"mean length {mean:.1f} off by >1%"
    _report(f"length prior: mean {mean:.1f} within 1% of 5050 (n=10000)")


# ---------------------------------------------------------------------------
# Causal layer
# ---------------------------------------------------------------------------


def test_dag_validity_and_density():
    priors = CausalPriors()
    d = 10
    p_edge = priors.edge_probability(d)
    counts = []
    for i in range(1000):
        dag = sample_dag(d, p_edge, derive_stream(79, i, "dag"))
        dag.validate()  # raises on any cycle / duplicate / self-loop
        counts.append(len(dag.edges))
    target = min(priors.edge_density_target * d, d * (d - 1) / 2)
    mean = float(np.mean(counts))
    assert abs(mean - target) <= 0.10 * target, f"mean edges {mean:.2f} vs target {target}"
    _report(f"DAG validity: 1000/1000 acyclic, mean edges {mean:.2f} within 10% of {target}")


def test_arx_stability():
    priors = CausalPriors()
    from tsadforge.causal import Dag

    dag = Dag(n_nodes=4, edges=(), topo_order=(0, 1, 2, 3))
    zeros = [
        compose_baseline(np.zeros(500), np.zeros(500), np.zeros(500)) for _ in range(4)
    ]
    for i in range(200):
        arx = sample_arx(dag, priors, 500, derive_stream(80, i, "arx"))
        assert all(abs(a) <= 0.8 for a in arx.a)
        system = simulate_system(zeros, dag, arx, (1.0,) * 4)
        for k in range(4):
            bound = abs(arx.c[k]) / (1.0 - abs(arx.a[k])) + 1e-9
            assert np.max(np.abs(system.z[:, k])) <= bound
    _report("ARX stability: |a| <= 0.8 and zero-input trajectories within |c|/(1-|a|)+1e-9")


# ---------------------------------------------------------------------------
# Injection
# ---------------------------------------------------------------------------


def _local_only_config(seed: int) -> GeneratorConfig:
    from tsadforge.anomaly import LOCAL_KINDS

    return GeneratorConfig(
        num_samples=500,
        length_range=(200, 600),
        anomalous_ratio=1.0,
        multivariate=True,
        channel_range=(2, 4),
        master_seed=seed,
        anomaly_priors=AnomalyPriors(
            kinds=LOCAL_KINDS,
            count_choices=(1,),
            count_weights=(1.0,),
            endogenous_prob=0.0,
        ),
    )


def test_injection_exactness():
    from tsadforge.anomaly import local_stats, render_delta

    config = _local_only_config(81)
    checked = 0
    for i in range(500):
        sample = generate_sample(config, 81, i)
        plan = sample.blueprint.anomaly_plan
        if not plan:
            continue
        (spec,) = plan
        assert spec.mode == "exogenous"
        t_s, t_e = spec.window
        ch = spec.channel
        diff = sample.values - sample.clean
        # exact zero outside the window and on all other channels
        outside = diff.copy()
        outside[t_s:t_e, ch] = 0.0
        assert np.all(outside == 0.0), f"sample {i}: leakage outside the window"
        # inside: exactly one addition of the rendered template
        stats = local_stats(sample.clean[:, ch], spec.window)
        delta = render_delta(spec, stats)
        assert np.array_equal(
            sample.values[t_s:t_e, ch], sample.clean[t_s:t_e, ch] + delta
        ), f"sample {i}: injected values disagree with rendered delta"
        checked += 1
    assert checked == 500
    _report(f"injection exactness: {checked} exogenous local injections bit-exact")


def test_propagation_soundness():
    config = GeneratorConfig(
        num_samples=2000,
        length_range=(200, 500),
        anomalous_ratio=1.0,
        multivariate=True,
        channel_range=(2, 6),
        master_seed=82,
        anomaly_priors=AnomalyPriors(
            count_choices=(1,),
            count_weights=(1.0,),
            endogenous_prob=1.0,
            label_alpha_min=0.0,  # mask every observable descendant
        ),
    )
    checked = 0
    i = 0
    while checked < 500 and i < config.num_samples:
        sample = generate_sample(config, 82, i)
        i += 1
        plan = sample.blueprint.anomaly_plan
        if not plan or plan[0].mode != "endogenous":
            continue
        (spec,) = plan
        bp = sample.blueprint
        n, d = bp.n, bp.d
        diff = np.abs(sample.values - sample.clean)
        scale = max(1.0, float(np.max(np.abs(sample.clean))))
        deviating = diff > 1e-9 * scale
        # decay tail bound: strictest horizon per node, compounded over the
        # longest possible path, reported as the allowance
        a_max = max((abs(a) for a in bp.arx.a), default=0.0)
        if a_max > 0.0:
            tail = d * math.ceil(math.log(1e-13) / math.log(max(a_max, 1e-6)))
        else:
            tail = 0
        allowed = np.zeros((n, d), dtype=bool)
        for k in range(d):
            for s, e in mask_to_segments(sample.masks.union[:, k]):
                allowed[s : min(n, e + tail), k] = True
        bad = deviating & ~allowed
        assert not bad.any(), (
            f"sample {i - 1}: {int(bad.sum())} deviating cells outside union+tail "
            f"(tail={tail})"
        )
        checked += 1
    assert checked >= 500
    _report(
        f"propagation soundness: {checked} endogenous injections contained in "
        "union masks + decay tail"
    )


def test_null_propagation_with_zero_gains():
    config = GeneratorConfig(
        num_samples=50,
        length_range=(200, 400),
        anomalous_ratio=1.0,
        multivariate=True,
        channel_range=(3, 5),
        master_seed=83,
        anomaly_priors=AnomalyPriors(count_choices=(1,), count_weights=(1.0,), endogenous_prob=1.0),
    )
    checked = 0
    for i in range(50):
        bp = sample_blueprint(config, i)
        if not bp.anomaly_plan or bp.anomaly_plan[0].mode != "endogenous":
            continue
        (spec,) = bp.anomaly_plan
        from tsadforge.pipeline import realize_sample

        zero_arx = dataclasses.replace(bp.arx, gains=tuple(0.0 for _ in bp.arx.gains))
        bp_zero = dataclasses.replace(bp, arx=zero_arx)
        sample = realize_sample(bp_zero, 83)
        diff = sample.values - sample.clean
        others = np.delete(diff, spec.channel, axis=1)
        assert np.all(others == 0.0), f"sample {i}: downstream deviation with all gains zero"
        checked += 1
    assert checked >= 10
    _report(f"null propagation: zero gains produce zero downstream deviation ({checked} cases)")


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


def test_metric_oracles():
    # standard_f1 vs a naive confusion-count oracle, exact
    gen = np.random.default_rng(84)
    for _ in range(1000):
        n = int(gen.integers(1, 60))
        pred = gen.integers(0, 2, n).astype(bool)
        labels = gen.integers(0, 2, n).astype(bool)
        tp = int(np.sum(pred & labels))
        fp = int(np.sum(pred & ~labels))
        fn = int(np.sum(~pred & labels))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        assert standard_f1(pred, labels) == (p, r, f1)

    # vus_pr vs exhaustive brute force on a 200-point instance, 1e-9
    from tests.test_metrics import brute_force_vus

    labels = segments_to_mask([(30, 45), (120, 140)], 200)
    scores = gen.normal(size=200) + 2.0 * labels
    assert vus_pr(scores, labels, 5) == pytest.approx(brute_force_vus(scores, labels, 5), abs=1e-9)

    # all four metrics at 1.0 on perfect predictions; VUS-PR's exact-match
    # mode is buffer 0 (wider buffers deliberately reward near-misses, so no
    # binary predictor can reach 1.0 there)
    labels = segments_to_mask([(50, 70)], 300)
    assert standard_f1(labels, labels)[2] == 1.0
    assert f1_t(labels, labels)[2] == 1.0
    assert affiliation_f(labels, labels)[2] == 1.0
    assert vus_pr(labels.astype(float), labels, 0) == pytest.approx(1.0)
    _report("metric oracles: standard_f1 exact vs naive, vus_pr vs brute force (1e-9), perfect=1.0")


# ---------------------------------------------------------------------------
# End-to-end detector sanity
# ---------------------------------------------------------------------------


def _upspike_sanity_config(num_samples: int) -> GeneratorConfig:
    return GeneratorConfig(
        num_samples=num_samples,
        length_range=(800, 2000),
        anomalous_ratio=1.0,
        multivariate=False,
        master_seed=85,
        attribute_priors=AttributePriors(
            season_weights={"none": 1.0, "sine": 0.0, "square": 0.0, "triangle": 0.0, "wavelet": 0.0},
            trend_weights={"decrease": 0.0, "increase": 0.0, "steady": 1.0, "multiple": 0.0, "arima": 0.0},
            noise_weights={"almost_none": 0.5, "low": 0.5, "moderate": 0.0, "high": 0.0},
        ),
        anomaly_priors=AnomalyPriors(
            kinds=("up_spike",),
            count_choices=(1,),
            count_weights=(1.0,),
            kappa_amp_range=(12.0, 24.0),  # >= 5 sigma by a wide margin
            window_len_range=(4, 8),
            spike_width_scale=4.0,  # whole window stays elevated
        ),
    )


def _sudden_increase_config(num_samples: int) -> GeneratorConfig:
    return GeneratorConfig(
        num_samples=num_samples,
        length_range=(800, 2000),
        anomalous_ratio=1.0,
        multivariate=False,
        master_seed=86,
        attribute_priors=AttributePriors(
            season_weights={"none": 1.0, "sine": 0.0, "square": 0.0, "triangle": 0.0, "wavelet": 0.0},
            trend_weights={"decrease": 0.0, "increase": 0.0, "steady": 1.0, "multiple": 0.0, "arima": 0.0},
            noise_weights={"almost_none": 0.5, "low": 0.5, "moderate": 0.0, "high": 0.0},
        ),
        anomaly_priors=AnomalyPriors(
            kinds=("sudden_increase",),
            count_choices=(1,),
            count_weights=(1.0,),
            kappa_amp_range=(5.0, 10.0),
            window_len_range=(60, 120),
        ),
    )


def _best_f1_over_dataset(config, seed, detector, window) -> float:
    scores, labels = [], []
    for i in range(config.num_samples):
        sample = generate_sample(config, seed, i)
        scores.append(detector(sample.values, window))
        labels.append(sample.masks.union.max(axis=1) > 0)
    _, report = best_f1_over_thresholds(np.concatenate(scores), np.concatenate(labels), grid=256)
    return report.standard_f1


@pytest.mark.slow
def test_end_to_end_detector_sanity():
    upspike = _upspike_sanity_config(200)
    z_f1 = _best_f1_over_dataset(upspike, 85, zscore_detector, 500)
    assert z_f1 >= 0.8, f"zscore best-threshold F1 {z_f1:.3f} < 0.8 on the up_spike set"

    shift = _sudden_increase_config(100)
    z_shift = _best_f1_over_dataset(shift, 86, zscore_detector, 50)
    r_shift = _best_f1_over_dataset(shift, 86, context_discrepancy_detector, 50)
    assert r_shift > z_shift, (
        f"context-discrepancy ({r_shift:.3f}) does not beat zscore ({z_shift:.3f}) "
        "on the sudden_increase set"
    )
    _report(
        f"end-to-end sanity: up_spike zscore F1={z_f1:.3f} (>=0.8); "
        f"sudden_increase rcd {r_shift:.3f} > zscore {z_shift:.3f}"
    )


@pytest.mark.slow
def test_contextual_vs_point_capability_echo():
    point = point_anomaly_preset(num_samples=80, master_seed=87)
    contextual = contextual_anomaly_preset(num_samples=80, master_seed=87)
    # both presets must generate
    p_sample = generate_sample(point, 87, 0)
    c_sample = generate_sample(contextual, 87, 0)
    assert p_sample.masks.union.any() and c_sample.masks.union.any()

    z_ctx = _best_f1_over_dataset(contextual, 87, zscore_detector, 100)
    r_ctx = _best_f1_over_dataset(contextual, 87, context_discrepancy_detector, 100)
    assert r_ctx > z_ctx, (
        f"context-discrepancy ({r_ctx:.3f}) not strictly above zscore ({z_ctx:.3f}) "
        "on the contextual set"
    )
    _report(
        f"contextual echo: rcd {r_ctx:.3f} > zscore {z_ctx:.3f} on the contextual preset; "
        "point preset generates"
    )
