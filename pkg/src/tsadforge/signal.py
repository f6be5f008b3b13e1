"""Univariate context templates: trend T(t), seasonality S(t), noise eps(t).

A channel baseline is the additive composite ``x_base(t) = T(t) + S(t) + eps(t)``
evaluated on the integer grid ``t = 0 .. n-1``.  All three components are
retained so that seasonal anomalies can later re-compose the series with an
edited S'(t) inside a window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import LengthMismatch, NonStationaryAR
from .rng import RngStream, stream_from_seed

# ---------------------------------------------------------------------------
# Trend
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineTrend:
    intercept: float
    slope: float


@dataclass(frozen=True)
class PiecewiseTrend:
    """Hinge trend: k0 + k1*t + sum_p delta_p * (t - tau_p)_+ with sorted knots."""

    intercept: float
    slope: float
    knots: tuple[int, ...]
    slope_deltas: tuple[float, ...]


@dataclass(frozen=True)
class ArimaTrend:
    """Differenced ARMA trend with small orders (p, q <= 2, d in {0, 1})."""

    p: int
    d: int
    q: int
    ar: tuple[float, ...]
    ma: tuple[float, ...]
    sigma: float


@dataclass(frozen=True)
class TrendSpec:
    """Deterministic part, optional stochastic part, and their mix weight.

    The output is ``(1 - rho) * T_det + rho * T_stoc`` when a stochastic part
    is present; pure deterministic trends carry ``rho = 0``.
    """

    det: AffineTrend | PiecewiseTrend
    stoc: ArimaTrend | None = None
    rho: float = 0.0


def ar_is_stationary(ar: tuple[float, ...]) -> bool:
    """True iff all roots of 1 - phi_1 B - ... - phi_p B^p lie outside the unit circle."""
    if not ar:
        return True
    coeffs = np.array([1.0] + [-phi for phi in ar])
    roots = np.polynomial.polynomial.polyroots(coeffs)
    return bool(np.all(np.abs(roots) > 1.0))


def _eval_det_trend(det: AffineTrend | PiecewiseTrend, n: int) -> np.ndarray:
    t = np.arange(n, dtype=np.float64)
    if isinstance(det, AffineTrend):
        return det.intercept + det.slope * t
    out = det.intercept + det.slope * t
    if len(det.knots) != len(det.slope_deltas):
        raise ValueError("knots and slope_deltas must have equal length")
    prev = 0
    for tau, delta in zip(det.knots, det.slope_deltas):
        if not prev < tau < n:
            raise ValueError(f"knot {tau} outside (0, {n}) or unsorted")
        prev = tau
        out += delta * np.maximum(t - tau, 0.0)
    return out


def _eval_arima(spec: ArimaTrend, n: int, stream: RngStream) -> np.ndarray:
    if len(spec.ar) != spec.p or len(spec.ma) != spec.q:
        raise ValueError("AR/MA coefficient counts disagree with declared orders")
    if not ar_is_stationary(spec.ar):
        raise NonStationaryAR(f"AR coefficients {spec.ar} are not stationary")
    eps = spec.sigma * stream.gen.standard_normal(n)
    y = np.zeros(n)
    for t in range(n):
        acc = eps[t]
        for i, phi in enumerate(spec.ar, start=1):
            if t - i >= 0:
                acc += phi * y[t - i]
        for j, theta in enumerate(spec.ma, start=1):
            if t - j >= 0:
                acc += theta * eps[t - j]
        y[t] = acc
    for _ in range(spec.d):
        y = np.cumsum(y)
    return y


def eval_trend(spec: TrendSpec, n: int, stream: RngStream | None = None) -> np.ndarray:
    """Evaluate the trend on t = 0..n-1.

    The stochastic part consumes ``stream``; purely deterministic specs leave
    it untouched (and may omit it).
    """
    det = _eval_det_trend(spec.det, n)
    if spec.stoc is None or spec.rho == 0.0:
        return det
    if stream is None:
        raise ValueError("stochastic trend requires an RngStream")
    stoc = _eval_arima(spec.stoc, n, stream)
    return (1.0 - spec.rho) * det + spec.rho * stoc


# ---------------------------------------------------------------------------
# Seasonality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SineAtom:
    """One sinusoid ``amp * sin(2 pi freq t + phase)`` with optional amplitude
    modulation ``amp(t) = amp * (1 + mod_depth * sin(mod_freq * t + mod_phase))``."""

    amp: float
    freq: float
    phase: float
    mod_depth: float = 0.0
    mod_freq: float = 0.0
    mod_phase: float = 0.0


@dataclass(frozen=True)
class NoSeason:
    pass


@dataclass(frozen=True)
class SineSeason:
    atoms: tuple[SineAtom, ...]


@dataclass(frozen=True)
class SquareSeason:
    """Rectangular wave: +amp on the first ``duty`` fraction of each period
    (period start shifted by ``cycle_start`` cycles), -amp on the rest."""

    amp: float
    period: float
    duty: float
    cycle_start: float = 0.0


@dataclass(frozen=True)
class TriangleSeason:
    """Piecewise-linear ramp, sine-phased: 0 at phase 0, peak +amp at a quarter
    period, trough -amp at three quarters.  ``rise_frac`` skews the up/down
    split (0.5 is the symmetric wave)."""

    amp: float
    period: float
    phase: float = 0.0
    rise_frac: float = 0.5


@dataclass(frozen=True)
class WaveletAtom:
    amp: float
    family: str
    scale: float
    shift: float


@dataclass(frozen=True)
class WaveletSeason:
    atoms: tuple[WaveletAtom, ...]


@dataclass(frozen=True)
class NoisySeason:
    """A season with an additive zero-mean Gaussian overlay (seeded, so the
    overlay is reproducible).  Produced by the seasonal noise-injection edit."""

    base: "SeasonSpec"
    sigma: float
    seed: int


SeasonSpec = Union[NoSeason, SineSeason, SquareSeason, TriangleSeason, WaveletSeason, NoisySeason]

# Closed-form mother wavelets; the usual filter-bank family names are mapped
# onto these three so evaluation stays dependency-free and deterministic.
WAVELET_BASES = ("haar", "ricker", "morlet")
WAVELET_FAMILY_MAP = {
    "haar": "haar",
    "db": "morlet",
    "sym": "morlet",
    "dmey": "morlet",
    "coif": "ricker",
    "bior": "ricker",
    "ricker": "ricker",
    "morlet": "morlet",
}


def _mother_wavelet(family: str, u: np.ndarray) -> np.ndarray:
    base = WAVELET_FAMILY_MAP.get(family)
    if base is None:
        raise ValueError(f"unknown wavelet family {family!r}")
    if base == "haar":
        return np.where((u >= 0.0) & (u < 0.5), 1.0, np.where((u >= 0.5) & (u < 1.0), -1.0, 0.0))
    if base == "ricker":
        return (1.0 - u * u) * np.exp(-0.5 * u * u)
    return np.cos(5.0 * u) * np.exp(-0.5 * u * u)


def _triangle_wave(phase_cycles: np.ndarray, rise_frac: float) -> np.ndarray:
    """Unit triangle over phase in cycles: 0 -> +1 -> -1 -> 0, peak at rise_frac/2."""
    u = np.mod(phase_cycles, 1.0)
    r = min(max(rise_frac, 1e-6), 1.0 - 1e-6)
    half_r = 0.5 * r
    fall_len = 1.0 - r
    up = u < half_r
    down = (u >= half_r) & (u < half_r + fall_len)
    out = np.empty_like(u)
    out[up] = u[up] / half_r
    out[down] = 1.0 - 2.0 * (u[down] - half_r) / fall_len
    tail = ~(up | down)
    out[tail] = -1.0 + (u[tail] - half_r - fall_len) / half_r
    return out


def eval_season(spec: SeasonSpec, n: int) -> np.ndarray:
    """Evaluate the seasonal component on t = 0..n-1 (deterministic)."""
    t = np.arange(n, dtype=np.float64)
    if isinstance(spec, NoSeason):
        return np.zeros(n)
    if isinstance(spec, SineSeason):
        out = np.zeros(n)
        for atom in spec.atoms:
            amp = atom.amp
            if atom.mod_depth != 0.0:
                amp = atom.amp * (1.0 + atom.mod_depth * np.sin(atom.mod_freq * t + atom.mod_phase))
            out += amp * np.sin(2.0 * math.pi * atom.freq * t + atom.phase)
        return out
    if isinstance(spec, SquareSeason):
        phase = np.mod(t / spec.period - spec.cycle_start, 1.0)
        return np.where(phase < spec.duty, spec.amp, -spec.amp)
    if isinstance(spec, TriangleSeason):
        cycles = t / spec.period + spec.phase / (2.0 * math.pi)
        return spec.amp * _triangle_wave(cycles, spec.rise_frac)
    if isinstance(spec, WaveletSeason):
        out = np.zeros(n)
        for atom in spec.atoms:
            u = (t - atom.shift) / atom.scale
            out += atom.amp * _mother_wavelet(atom.family, u)
        return out
    if isinstance(spec, NoisySeason):
        base = eval_season(spec.base, n)
        gen = stream_from_seed(spec.seed)
        return base + spec.sigma * gen.standard_normal(n)
    raise TypeError(f"unknown season spec {type(spec).__name__}")


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolatilityBurst:
    start: int
    end: int
    boost: float


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean Gaussian noise with sigma(t) = sigma0 * prod(1 + boost_r)
    over bursts whose windows contain t."""

    sigma0: float
    bursts: tuple[VolatilityBurst, ...] = ()


def sigma_profile(spec: NoiseSpec, n: int) -> np.ndarray:
    sigma = np.full(n, spec.sigma0)
    for burst in spec.bursts:
        if not (0 <= burst.start < burst.end <= n):
            raise ValueError(f"burst [{burst.start}, {burst.end}) outside [0, {n}]")
        if burst.boost < 0:
            raise ValueError("volatility boost must be >= 0")
        sigma[burst.start : burst.end] *= 1.0 + burst.boost
    return sigma


def eval_noise(spec: NoiseSpec, n: int, stream: RngStream) -> np.ndarray:
    return sigma_profile(spec, n) * stream.gen.standard_normal(n)


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaselineSeries:
    """Component-wise baseline; ``composite`` is the single-pass pointwise sum."""

    trend: np.ndarray
    season: np.ndarray
    noise: np.ndarray
    composite: np.ndarray

    @property
    def n(self) -> int:
        return len(self.composite)


def compose_baseline(trend: np.ndarray, season: np.ndarray, noise: np.ndarray) -> BaselineSeries:
    if not (len(trend) == len(season) == len(noise)):
        raise LengthMismatch(
            f"component lengths differ: trend={len(trend)} season={len(season)} noise={len(noise)}"
        )
    composite = trend + season + noise
    return BaselineSeries(trend=trend, season=season, noise=noise, composite=composite)
