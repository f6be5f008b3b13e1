"""Configurable priors and fully-drawn per-sample blueprints.

A blueprint records every drawn parameter of one sample, so realizing a
sample from its blueprint is a deterministic function.  Blueprint sampling
consumes lineage-keyed streams (see :mod:`tsadforge.rng`), which makes the
blueprint sequence a pure function of ``(config, master_seed)`` regardless of
call order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import anomaly as anomaly_mod
from . import causal as causal_mod
from .errors import InvalidConfig
from .rng import RngStream, derive_stream, sample_sub_seed
from .signal import (
    AffineTrend,
    ArimaTrend,
    NoSeason,
    PiecewiseTrend,
    SeasonSpec,
    SineAtom,
    SineSeason,
    SquareSeason,
    TrendSpec,
    TriangleSeason,
    VolatilityBurst,
    WaveletAtom,
    WaveletSeason,
    ar_is_stationary,
    eval_season,
    _eval_det_trend,
)

SCHEMA_VERSION = "1"

SEASON_CATEGORIES = ("none", "sine", "square", "triangle", "wavelet")
TREND_CATEGORIES = ("decrease", "increase", "steady", "multiple", "arima")
FREQ_CATEGORIES = ("high", "low")
NOISE_CATEGORIES = ("almost_none", "low", "moderate", "high")

# Noise level -> sigma0 as a fraction of the composite trend+season
# peak-to-peak range.
NOISE_FRAC_RANGES = {
    "almost_none": (0.001, 0.01),
    "low": (0.01, 0.05),
    "moderate": (0.05, 0.15),
    "high": (0.15, 0.4),
}

WAVELET_FAMILY_CHOICES = ("haar", "db", "sym", "coif", "bior", "dmey")


@dataclass(frozen=True)
class AttributePriors:
    """Per-channel categorical attribute weights."""

    season_weights: Mapping[str, float] = field(
        default_factory=lambda: {
            "none": 0.3,
            "sine": 0.3,
            "square": 0.05,
            "triangle": 0.05,
            "wavelet": 0.3,
        }
    )
    trend_weights: Mapping[str, float] = field(
        default_factory=lambda: {
            "decrease": 0.2,
            "increase": 0.2,
            "steady": 0.2,
            "multiple": 0.3,
            "arima": 0.1,
        }
    )
    freq_weights: Mapping[str, float] = field(
        default_factory=lambda: {"high": 0.5, "low": 0.5}
    )
    noise_weights: Mapping[str, float] = field(
        default_factory=lambda: {"almost_none": 0.25, "low": 0.25, "moderate": 0.25, "high": 0.25}
    )


@dataclass(frozen=True)
class CausalPriors:
    """Graph and ARX dynamics priors."""

    edge_density_target: float = 1.5  # expected edges per node
    lag_cap: int = 20
    lag_length_divisor: int = 50
    arx_a_range: tuple[float, float] = (-0.8, 0.8)
    arx_gain_scale: float = 1.0
    bias_range: tuple[float, float] = (-1.0, 1.0)
    mix_alpha_range: tuple[float, float] = (0.0, 1.0)

    def max_lag(self, n: int) -> int:
        return min(self.lag_cap, n // self.lag_length_divisor)

    def edge_probability(self, d: int) -> float:
        if d < 2:
            return 0.0
        pairs = d * (d - 1) / 2
        expected = min(self.edge_density_target * d, pairs)
        return expected / pairs


@dataclass(frozen=True)
class AnomalyPriors:
    """Anomaly plan priors plus the label-extension constants."""

    kinds: tuple[str, ...] | None = None  # None = full taxonomy
    count_choices: tuple[int, ...] = (1, 2, 3)
    count_weights: tuple[float, ...] = (1 / 3, 1 / 3, 1 / 3)
    endogenous_prob: float = 0.5
    kappa_amp_range: tuple[float, float] = (2.0, 6.0)
    kappa_step_range: tuple[float, float] = (2.0, 6.0)
    shake_freq_range: tuple[float, float] = (0.2, 0.5)
    window_len_range: tuple[int, int] | None = None  # None = length-scaled rule
    # Single-spike half-width as a multiple of the window length; 0.5 peaks at
    # the window center and tapers to zero at its edges, larger values clip
    # the triangle so the whole window stays elevated.
    spike_width_scale: float = 0.5
    label_alpha_min: float = 0.05
    label_decay_eps: float = 0.01


@dataclass(frozen=True)
class GeneratorConfig:
    num_samples: int = 100
    length_range: tuple[int, int] = (100, 10000)
    anomalous_ratio: float = 0.5
    multivariate: bool = False
    channel_range: tuple[int, int] = (2, 5)
    master_seed: int = 0
    attribute_priors: AttributePriors = field(default_factory=AttributePriors)
    causal_priors: CausalPriors = field(default_factory=CausalPriors)
    anomaly_priors: AnomalyPriors = field(default_factory=AnomalyPriors)
    normalize: bool = False


def _check_weights(name: str, weights: Mapping[str, float], categories: tuple[str, ...]) -> list[str]:
    problems = []
    if set(weights) != set(categories):
        problems.append(f"{name}: keys {sorted(weights)} != expected {sorted(categories)}")
        return problems
    if any(w < 0 for w in weights.values()):
        problems.append(f"{name}: weights must be nonnegative")
    total = sum(weights.values())
    if abs(total - 1.0) > 1e-9:
        problems.append(f"{name}: weights must sum to 1 (got {total!r})")
    return problems


def validate_config(config: GeneratorConfig) -> list[str]:
    """Return all invariant violations; an empty list means the config is ok."""
    problems: list[str] = []
    if config.num_samples < 0:
        problems.append("num_samples: must be >= 0")
    lo, hi = config.length_range
    if lo < 2:
        problems.append("length_range: min must be >= 2")
    if lo > hi:
        problems.append(f"length_range: min exceeds max ({lo} > {hi})")
    if not 0.0 <= config.anomalous_ratio <= 1.0:
        problems.append("anomalous_ratio: must lie in [0, 1]")
    c_lo, c_hi = config.channel_range
    if c_lo < 1:
        problems.append("channel_range: min must be >= 1")
    if c_lo > c_hi:
        problems.append(f"channel_range: min exceeds max ({c_lo} > {c_hi})")
    ap = config.attribute_priors
    problems += _check_weights("season_weights", ap.season_weights, SEASON_CATEGORIES)
    problems += _check_weights("trend_weights", ap.trend_weights, TREND_CATEGORIES)
    problems += _check_weights("freq_weights", ap.freq_weights, FREQ_CATEGORIES)
    problems += _check_weights("noise_weights", ap.noise_weights, NOISE_CATEGORIES)
    cp = config.causal_priors
    if cp.arx_a_range[0] < -0.8 or cp.arx_a_range[1] > 0.8:
        problems.append("arx_a_range: must be contained in [-0.8, 0.8]")
    if cp.arx_a_range[0] > cp.arx_a_range[1]:
        problems.append("arx_a_range: min exceeds max")
    if cp.edge_density_target < 0:
        problems.append("edge_density_target: must be >= 0")
    anp = config.anomaly_priors
    if anp.kinds is not None:
        unknown = [k for k in anp.kinds if k not in anomaly_mod.ALL_KINDS]
        if unknown:
            problems.append(f"anomaly kinds: unknown {unknown}")
    if len(anp.count_choices) != len(anp.count_weights):
        problems.append("anomaly count_choices/count_weights length mismatch")
    if not 0.0 <= anp.endogenous_prob <= 1.0:
        problems.append("endogenous_prob: must lie in [0, 1]")
    return problems


def require_valid(config: GeneratorConfig) -> None:
    problems = validate_config(config)
    if problems:
        raise InvalidConfig(problems)


# ---------------------------------------------------------------------------
# Blueprint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoisePlan:
    """Noise regime before resolution: sigma0 becomes ``sigma_frac`` times the
    realized composite trend+season peak-to-peak range."""

    level: str
    sigma_frac: float
    bursts: tuple[VolatilityBurst, ...]


@dataclass(frozen=True)
class ChannelPlan:
    trend: TrendSpec
    season: SeasonSpec
    noise: NoisePlan
    freq_regime: str
    season_category: str
    trend_category: str
    noise_category: str


@dataclass(frozen=True)
class SampleBlueprint:
    index: int
    n: int
    d: int
    channels: tuple[ChannelPlan, ...]
    dag: causal_mod.Dag
    arx: causal_mod.ArxParams
    alphas: tuple[float, ...]
    anomaly_plan: tuple[anomaly_mod.AnomalySpec, ...]
    sub_seed: int
    anomaly_priors: AnomalyPriors


def _draw_category(weights: Mapping[str, float], categories: tuple[str, ...], stream: RngStream) -> str:
    probs = np.array([weights[c] for c in categories])
    idx = int(stream.gen.choice(len(categories), p=probs / probs.sum()))
    return categories[idx]


def _draw_period(freq_regime: str, n: int, stream: RngStream) -> float:
    # Low frequency: P ~ U[n/20, n/4]; high: P ~ U[8, n/20]; both clamped so
    # the ranges stay non-degenerate for short series.
    if freq_regime == "low":
        lo = max(8.0, n / 20.0)
        hi = max(16.0, n / 4.0)
    else:
        lo = 8.0
        hi = max(8.0, n / 20.0)
    if hi <= lo:
        return lo
    return float(stream.gen.uniform(lo, hi))


def _sample_season(category: str, freq_regime: str, n: int, stream: RngStream) -> SeasonSpec:
    gen = stream.gen
    if category == "none":
        return NoSeason()
    if category == "sine":
        period = _draw_period(freq_regime, n, stream)
        f0 = 1.0 / period
        count = int(gen.integers(1, 4))
        atoms = []
        for k in range(1, count + 1):
            freq = k * f0
            if gen.uniform() > 0.7:  # incommensurate atom
                freq *= float(gen.uniform(0.85, 1.15))
            amp = float(gen.uniform(0.5, 2.0)) / k
            phase = float(gen.uniform(0.0, 2.0 * math.pi))
            if gen.uniform() < 0.3:
                atoms.append(
                    SineAtom(
                        amp=amp,
                        freq=freq,
                        phase=phase,
                        mod_depth=float(gen.uniform(0.2, 0.8)),
                        mod_freq=2.0 * math.pi * f0 * float(gen.uniform(0.05, 0.25)),
                        mod_phase=float(gen.uniform(0.0, 2.0 * math.pi)),
                    )
                )
            else:
                atoms.append(SineAtom(amp=amp, freq=freq, phase=phase))
        return SineSeason(tuple(atoms))
    if category == "square":
        return SquareSeason(
            amp=float(gen.uniform(0.5, 2.0)),
            period=_draw_period(freq_regime, n, stream),
            duty=float(gen.uniform(0.2, 0.8)),
            cycle_start=float(gen.uniform(0.0, 1.0)),
        )
    if category == "triangle":
        return TriangleSeason(
            amp=float(gen.uniform(0.5, 2.0)),
            period=_draw_period(freq_regime, n, stream),
            phase=float(gen.uniform(0.0, 2.0 * math.pi)),
        )
    if category == "wavelet":
        period = _draw_period(freq_regime, n, stream)
        family = str(gen.choice(WAVELET_FAMILY_CHOICES))
        amp = float(gen.uniform(0.5, 2.0))
        if family == "haar":
            scale = float(gen.uniform(period / 4.0, period / 2.0))
        else:
            scale = float(gen.uniform(period / 10.0, period / 5.0))
        offset = float(gen.uniform(0.0, period))
        atoms = []
        center = offset
        while center < n + period:
            atoms.append(WaveletAtom(amp=amp, family=family, scale=scale, shift=center))
            center += period
        return WaveletSeason(tuple(atoms))
    raise ValueError(f"unknown season category {category!r}")


def _sample_arima(n: int, scale_ref: float, stream: RngStream) -> ArimaTrend:
    gen = stream.gen
    p = int(gen.integers(0, 3))
    q = int(gen.integers(0, 3))
    d = int(gen.integers(0, 2))
    for _ in range(100):
        ar = tuple(float(v) for v in gen.uniform(-0.5, 0.5, size=p))
        if ar_is_stationary(ar):
            break
    else:
        ar = tuple(0.0 for _ in range(p))
    ma = tuple(float(v) for v in gen.uniform(-0.5, 0.5, size=q))
    sigma = float(gen.uniform(0.05, 0.3)) * scale_ref
    return ArimaTrend(p=p, d=d, q=q, ar=ar, ma=ma, sigma=sigma)


def _sample_trend(category: str, n: int, season: SeasonSpec, stream: RngStream) -> TrendSpec:
    gen = stream.gen
    intercept = float(gen.uniform(-5.0, 5.0))
    drift = float(gen.uniform(1.0, 10.0))
    if category == "steady":
        return TrendSpec(det=AffineTrend(intercept=intercept, slope=0.0))
    if category in ("increase", "decrease"):
        sign = 1.0 if category == "increase" else -1.0
        return TrendSpec(det=AffineTrend(intercept=intercept, slope=sign * drift / n))
    if category == "multiple":
        base_slope = float(gen.uniform(-1.0, 1.0)) * drift / n
        n_knots = int(gen.integers(1, 5))
        lo, hi = max(1, n // 10), max(2, (9 * n) // 10)
        knots = sorted(set(int(v) for v in gen.integers(lo, hi, size=n_knots)))
        deltas = tuple(float(gen.uniform(-10.0, 10.0)) / n for _ in knots)
        det = PiecewiseTrend(
            intercept=intercept, slope=base_slope, knots=tuple(knots), slope_deltas=deltas
        )
        rho = float(gen.uniform(0.0, 1.0))
        scale_ref = _det_scale_ref(det, season, n)
        return TrendSpec(det=det, stoc=_sample_arima(n, scale_ref, stream), rho=rho)
    if category == "arima":
        det = AffineTrend(intercept=intercept, slope=0.0)
        rho = float(gen.uniform(0.0, 1.0))
        scale_ref = _det_scale_ref(det, season, n)
        return TrendSpec(det=det, stoc=_sample_arima(n, scale_ref, stream), rho=rho)
    raise ValueError(f"unknown trend category {category!r}")


def _det_scale_ref(det, season: SeasonSpec, n: int) -> float:
    base = _eval_det_trend(det, n) + eval_season(season, n)
    ptp = float(np.ptp(base))
    return ptp if ptp > 1e-9 else 1.0


def _sample_noise_plan(category: str, n: int, stream: RngStream) -> NoisePlan:
    gen = stream.gen
    lo, hi = NOISE_FRAC_RANGES[category]
    sigma_frac = float(gen.uniform(lo, hi))
    r = int(gen.choice(3, p=[0.7, 0.2, 0.1]))
    bursts = []
    for _ in range(r):
        length = int(gen.integers(max(2, n // 50), max(3, n // 10) + 1))
        length = min(length, n)
        start = int(gen.integers(0, n - length + 1))
        bursts.append(
            VolatilityBurst(start=start, end=start + length, boost=float(gen.uniform(0.5, 3.0)))
        )
    return NoisePlan(level=category, sigma_frac=sigma_frac, bursts=tuple(bursts))


def sample_blueprint(config: GeneratorConfig, index: int) -> SampleBlueprint:
    """Draw the complete parameterization of sample ``index``."""
    require_valid(config)
    seed = config.master_seed
    bp_stream = derive_stream(seed, index, "blueprint")
    season_stream = derive_stream(seed, index, "season")
    vol_stream = derive_stream(seed, index, "volatility")
    dag_stream = derive_stream(seed, index, "dag")
    arx_stream = derive_stream(seed, index, "arx")
    anomaly_stream = derive_stream(seed, index, "anomaly")
    gen = bp_stream.gen

    lo, hi = config.length_range
    n = int(gen.integers(lo, hi + 1))
    if config.multivariate:
        c_lo, c_hi = config.channel_range
        d = int(gen.integers(c_lo, c_hi + 1))
    else:
        d = 1

    ap = config.attribute_priors
    channels = []
    for _ in range(d):
        season_cat = _draw_category(ap.season_weights, SEASON_CATEGORIES, bp_stream)
        trend_cat = _draw_category(ap.trend_weights, TREND_CATEGORIES, bp_stream)
        freq_cat = _draw_category(ap.freq_weights, FREQ_CATEGORIES, bp_stream)
        noise_cat = _draw_category(ap.noise_weights, NOISE_CATEGORIES, bp_stream)
        season = _sample_season(season_cat, freq_cat, n, season_stream)
        trend = _sample_trend(trend_cat, n, season, bp_stream)
        noise = _sample_noise_plan(noise_cat, n, vol_stream)
        channels.append(
            ChannelPlan(
                trend=trend,
                season=season,
                noise=noise,
                freq_regime=freq_cat,
                season_category=season_cat,
                trend_category=trend_cat,
                noise_category=noise_cat,
            )
        )

    dag = causal_mod.sample_dag(d, config.causal_priors.edge_probability(d), dag_stream)
    arx = causal_mod.sample_arx(dag, config.causal_priors, n, arx_stream)
    if d == 1:
        alphas = (0.0,)  # univariate samples are pure baseline
    else:
        a_lo, a_hi = config.causal_priors.mix_alpha_range
        alphas = tuple(float(v) for v in arx_stream.gen.uniform(a_lo, a_hi, size=d))

    blueprint = SampleBlueprint(
        index=index,
        n=n,
        d=d,
        channels=tuple(channels),
        dag=dag,
        arx=arx,
        alphas=alphas,
        anomaly_plan=(),
        sub_seed=sample_sub_seed(seed, index),
        anomaly_priors=config.anomaly_priors,
    )

    if anomaly_stream.gen.uniform() < config.anomalous_ratio:
        anp = config.anomaly_priors
        weights = np.array(anp.count_weights, dtype=float)
        count = int(
            anp.count_choices[int(anomaly_stream.gen.choice(len(anp.count_choices), p=weights / weights.sum()))]
        )
        for _ in range(count):
            spec = anomaly_mod.sample_anomaly_spec(blueprint, anomaly_stream)
            if spec is None:
                continue
            blueprint = replace(blueprint, anomaly_plan=blueprint.anomaly_plan + (spec,))
    return blueprint


# ---------------------------------------------------------------------------
# Config presets
# ---------------------------------------------------------------------------


def point_anomaly_preset(num_samples: int = 100, master_seed: int = 0) -> GeneratorConfig:
    """Short localized deviations identifiable from immediate neighbors."""
    return GeneratorConfig(
        num_samples=num_samples,
        length_range=(800, 2000),
        anomalous_ratio=1.0,
        multivariate=False,
        master_seed=master_seed,
        attribute_priors=AttributePriors(
            season_weights={"none": 0.4, "sine": 0.6, "square": 0.0, "triangle": 0.0, "wavelet": 0.0},
            trend_weights={"decrease": 0.25, "increase": 0.25, "steady": 0.5, "multiple": 0.0, "arima": 0.0},
            noise_weights={"almost_none": 0.7, "low": 0.3, "moderate": 0.0, "high": 0.0},
        ),
        anomaly_priors=AnomalyPriors(
            kinds=("up_spike", "down_spike", "outlier"),
            count_choices=(1, 2),
            count_weights=(0.5, 0.5),
            kappa_amp_range=(8.0, 16.0),
            window_len_range=(5, 15),
        ),
    )


def contextual_anomaly_preset(num_samples: int = 100, master_seed: int = 0) -> GeneratorConfig:
    """Violations of the established periodic structure.

    Asymmetric square waves with duty-cycle edits and polarity flips: the
    value range inside the window matches the normal regime point-for-point,
    so the violation is only visible against the established pattern.
    """
    return GeneratorConfig(
        num_samples=num_samples,
        length_range=(1000, 2000),
        anomalous_ratio=1.0,
        multivariate=False,
        master_seed=master_seed,
        attribute_priors=AttributePriors(
            season_weights={"none": 0.0, "sine": 0.0, "square": 1.0, "triangle": 0.0, "wavelet": 0.0},
            trend_weights={"decrease": 0.0, "increase": 0.0, "steady": 1.0, "multiple": 0.0, "arima": 0.0},
            freq_weights={"high": 1.0, "low": 0.0},
            noise_weights={"almost_none": 1.0, "low": 0.0, "moderate": 0.0, "high": 0.0},
        ),
        anomaly_priors=AnomalyPriors(
            kinds=("pulse_width_mod", "inversion"),
            count_choices=(1,),
            count_weights=(1.0,),
            window_len_range=(150, 300),
        ),
    )
