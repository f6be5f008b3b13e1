"""Anomaly template library and injection (exogenous and endogenous).

Local kinds render an additive template ``delta(t)`` over a window
``[t_s, t_e)``; seasonal kinds replace the channel's seasonal component with
an edited version inside the window.  Exogenous injection edits the observed
series after simulation; endogenous injection edits a source channel's
baseline and re-runs the causal simulation so effects reach descendants
through the ARX dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np
from scipy.special import expit

from .causal import ArxParams, CausalSystem, Dag, simulate_system
from .errors import KindMismatch, WindowOutOfRange
from .rng import RngStream
from .signal import (
    BaselineSeries,
    NoisySeason,
    SeasonSpec,
    SineAtom,
    SineSeason,
    SquareSeason,
    TriangleSeason,
    WAVELET_BASES,
    WAVELET_FAMILY_MAP,
    WaveletAtom,
    WaveletSeason,
    eval_season,
)

if TYPE_CHECKING:
    from .priors import AnomalyPriors, SampleBlueprint

LOCAL_KINDS = (
    "up_spike",
    "down_spike",
    "cont_up_spikes",
    "cont_down_spikes",
    "wide_up_spike",
    "wide_down_spike",
    "outlier",
    "sudden_increase",
    "sudden_decrease",
    "plateau_convex",
    "plateau_concave",
    "rapid_rise_slow_decline",
    "slow_rise_rapid_decline",
    "rapid_decline_slow_rise",
    "slow_decline_rapid_rise",
    "decrease_after_up_spike",
    "increase_after_down_spike",
    "increase_after_up_spike",
    "decrease_after_down_spike",
    "shake",
)

SEASONAL_KINDS = (
    "inversion",
    "amplitude_scaling",
    "frequency_change",
    "noise_injection",
    "waveform_change",
    "phase_shift",
    "add_harmonic",
    "remove_harmonic",
    "modify_harmonic_phase",
    "modify_amp_mod_depth",
    "modify_mod_frequency",
    "modify_mod_phase",
    "pulse_shift",
    "pulse_width_mod",
    "wavelet_family_change",
    "wavelet_scale_change",
    "wavelet_shift_change",
    "wavelet_amplitude_change",
    "add_wavelet",
    "remove_wavelet",
)

ALL_KINDS = LOCAL_KINDS + SEASONAL_KINDS

_SPIKE_LEVEL_KINDS = (
    "decrease_after_up_spike",
    "increase_after_down_spike",
    "increase_after_up_spike",
    "decrease_after_down_spike",
)

_TRANSIENT_KINDS = (
    "rapid_rise_slow_decline",
    "slow_rise_rapid_decline",
    "rapid_decline_slow_rise",
    "slow_decline_rapid_rise",
)

_SEASONAL_BY_VARIANT = {
    SineSeason: (
        "inversion",
        "amplitude_scaling",
        "frequency_change",
        "noise_injection",
        "waveform_change",
        "phase_shift",
        "add_harmonic",
        "remove_harmonic",
        "modify_harmonic_phase",
        "modify_amp_mod_depth",
        "modify_mod_frequency",
        "modify_mod_phase",
    ),
    SquareSeason: (
        "inversion",
        "amplitude_scaling",
        "frequency_change",
        "noise_injection",
        "pulse_shift",
        "pulse_width_mod",
    ),
    TriangleSeason: (
        "inversion",
        "amplitude_scaling",
        "frequency_change",
        "noise_injection",
        "pulse_shift",
        "pulse_width_mod",
    ),
    WaveletSeason: (
        "inversion",
        "amplitude_scaling",
        "noise_injection",
        "wavelet_family_change",
        "wavelet_scale_change",
        "wavelet_shift_change",
        "wavelet_amplitude_change",
        "add_wavelet",
        "remove_wavelet",
    ),
}


def compatible_seasonal_kinds(season: SeasonSpec) -> tuple[str, ...]:
    """Seasonal kinds applicable to this channel's season spec.

    Edits needing structure beyond the bare waveform (a modulated atom, at
    least two atoms to remove one) are filtered accordingly; channels without
    seasonality admit no seasonal kind at all.
    """
    if isinstance(season, NoisySeason):
        season = season.base
    table = _SEASONAL_BY_VARIANT.get(type(season))
    if table is None:
        return ()
    kinds = list(table)
    if isinstance(season, SineSeason):
        if len(season.atoms) < 2:
            kinds.remove("remove_harmonic")
        if not any(a.mod_freq != 0.0 for a in season.atoms):
            kinds.remove("modify_amp_mod_depth")
            kinds.remove("modify_mod_frequency")
            kinds.remove("modify_mod_phase")
    if isinstance(season, WaveletSeason) and len(season.atoms) < 2:
        kinds.remove("remove_wavelet")
    return tuple(kinds)


@dataclass(frozen=True)
class AnomalySpec:
    """One planned injection.

    ``params`` carries the kind-specific record; amplitudes are stored as
    multiples of a local scale (``kappa_amp``, ``kappa_step``) and resolved
    against channel statistics at render time, unless an absolute ``amp`` /
    ``step`` is supplied.
    """

    kind: str
    mode: str  # "exogenous" | "endogenous"
    channel: int
    window: tuple[int, int]
    params: dict

    def is_local(self) -> bool:
        return self.kind in LOCAL_KINDS


@dataclass(frozen=True)
class ChannelStats:
    """Local context the renderer resolves relative amplitudes against."""

    sigma: float


def local_stats(values: np.ndarray, window: tuple[int, int]) -> ChannelStats:
    """Std over the stretch just before the window (five window-lengths),
    falling back to the whole series, then to 1.0 for degenerate data."""
    t_s, t_e = window
    span = 5 * max(1, t_e - t_s)
    lo = max(0, t_s - span)
    ref = values[lo:t_s]
    sigma = float(np.std(ref)) if len(ref) >= 2 else 0.0
    if sigma < 1e-12:
        sigma = float(np.std(values))
    if sigma < 1e-12:
        sigma = 1.0
    return ChannelStats(sigma=sigma)


def _triangle_spike(t: np.ndarray, center: int, width: int, amp: float) -> np.ndarray:
    return amp * np.maximum(1.0 - np.abs(t - center) / width, 0.0)


def _resolve(params: Mapping, stats: ChannelStats, rel_key: str, abs_key: str) -> float:
    if abs_key in params:
        return float(params[abs_key])
    return float(params[rel_key]) * stats.sigma


def render_delta(spec: AnomalySpec, stats: ChannelStats) -> np.ndarray:
    """Render a local kind's additive template over its window.

    Returns an array of length ``t_e - t_s``; entries outside the kind's own
    support are exactly zero.
    """
    if not spec.is_local():
        raise KindMismatch(f"{spec.kind} is a seasonal kind; render_delta handles local kinds")
    t_s, t_e = spec.window
    t = np.arange(t_s, t_e, dtype=np.float64)
    p = spec.params
    kind = spec.kind
    amp = _resolve(p, stats, "kappa_amp", "amp")

    if kind in ("up_spike", "down_spike"):
        sign = 1.0 if kind == "up_spike" else -1.0
        return sign * _triangle_spike(t, int(p["t0"]), int(p["width"]), amp)

    if kind in ("cont_up_spikes", "cont_down_spikes"):
        sign = 1.0 if kind == "cont_up_spikes" else -1.0
        out = np.zeros_like(t)
        stride = int(p["stride"])
        for m in range(int(p["count"])):
            a_m = amp * float(p["amp_jitter"][m])
            out += _triangle_spike(t, int(p["t0"]) + m * stride, int(p["widths"][m]), a_m)
        return sign * out

    if kind in ("wide_up_spike", "wide_down_spike"):
        sign = 1.0 if kind == "wide_up_spike" else -1.0
        rise, fall = int(p["rise"]), int(p["fall"])
        out = np.zeros_like(t)
        ramp_up = (t >= t_s) & (t < t_s + rise)
        hold = (t >= t_s + rise) & (t < t_e - fall)
        ramp_down = (t >= t_e - fall) & (t < t_e)
        out[ramp_up] = amp * (t[ramp_up] - t_s) / rise
        out[hold] = amp
        out[ramp_down] = amp * (1.0 - (t[ramp_down] - (t_e - fall)) / fall)
        return sign * out

    if kind == "outlier":
        out = np.zeros_like(t)
        out[t == int(p["t0"])] = amp
        return out

    if kind in ("sudden_increase", "sudden_decrease"):
        sign = 1.0 if kind == "sudden_increase" else -1.0
        kappa = float(p["steepness"])
        return sign * amp * expit(kappa * (t - int(p["t0"])))

    if kind in ("plateau_convex", "plateau_concave"):
        sign = 1.0 if kind == "plateau_convex" else -1.0
        return sign * amp * 0.5 * (1.0 - np.cos(math.pi * (t - t_s) / (t_e - t_s)))

    if kind in _TRANSIENT_KINDS:
        sign = 1.0 if kind.startswith(("rapid_rise", "slow_rise")) else -1.0
        tau_r, tau_f, t_p = float(p["tau_r"]), float(p["tau_f"]), int(p["t_peak"])
        out = np.zeros_like(t)
        grow = (t >= t_s) & (t < t_p)
        decay = (t >= t_p) & (t < t_e)
        out[grow] = amp * (1.0 - np.exp(-(t[grow] - t_s) / tau_r))
        out[decay] = amp * np.exp(-(t[decay] - t_p) / tau_f)
        return sign * out

    if kind in _SPIKE_LEVEL_KINDS:
        spike_sign = 1.0 if "up_spike" in kind else -1.0
        step_sign = 1.0 if kind.startswith("increase") else -1.0
        step = _resolve(p, stats, "kappa_step", "step")
        out = spike_sign * _triangle_spike(t, int(p["t0"]), int(p["width"]), amp)
        out[t >= int(p["t1"])] += step_sign * step
        return out

    if kind == "shake":
        return amp * np.sin(2.0 * math.pi * float(p["freq"]) * t + float(p["phase"]))

    raise KindMismatch(f"unhandled local kind {kind!r}")


# ---------------------------------------------------------------------------
# Seasonal edits
# ---------------------------------------------------------------------------


def _scale_amplitudes(season: SeasonSpec, factor: float) -> SeasonSpec:
    if isinstance(season, SineSeason):
        return SineSeason(tuple(replace(a, amp=a.amp * factor) for a in season.atoms))
    if isinstance(season, (SquareSeason, TriangleSeason)):
        return replace(season, amp=season.amp * factor)
    if isinstance(season, WaveletSeason):
        return WaveletSeason(tuple(replace(a, amp=a.amp * factor) for a in season.atoms))
    raise KindMismatch(f"cannot scale amplitudes of {type(season).__name__}")


def mutate_season(spec: AnomalySpec, season: SeasonSpec) -> SeasonSpec:
    """Apply a seasonal kind's edit, returning the modified season spec."""
    if spec.is_local():
        raise KindMismatch(f"{spec.kind} is a local kind; mutate_season handles seasonal kinds")
    if spec.kind not in compatible_seasonal_kinds(season):
        raise KindMismatch(f"{spec.kind} is not applicable to {type(season).__name__}")
    if isinstance(season, NoisySeason):
        return replace(season, base=mutate_season(spec, season.base))
    p = spec.params
    kind = spec.kind

    if kind == "inversion":
        return _scale_amplitudes(season, -1.0)

    if kind in ("amplitude_scaling", "wavelet_amplitude_change"):
        return _scale_amplitudes(season, float(p["ratio"]))

    if kind == "frequency_change":
        rho = float(p["period_ratio"])
        if isinstance(season, SineSeason):
            return SineSeason(tuple(replace(a, freq=a.freq / rho) for a in season.atoms))
        return replace(season, period=season.period * rho)

    if kind == "noise_injection":
        return NoisySeason(base=season, sigma=float(p["sigma"]), seed=int(p["seed"]))

    if kind == "waveform_change":
        lead = max(season.atoms, key=lambda a: abs(a.amp))
        period = 1.0 / lead.freq
        if p["target"] == "square":
            return SquareSeason(amp=abs(lead.amp), period=period, duty=0.5, cycle_start=0.0)
        return TriangleSeason(amp=abs(lead.amp), period=period, phase=0.0)

    if kind == "phase_shift":
        shift = float(p["shift"])
        return SineSeason(tuple(replace(a, phase=a.phase + shift) for a in season.atoms))

    if kind == "add_harmonic":
        base_freq = min(a.freq for a in season.atoms)
        atom = SineAtom(amp=float(p["amp"]), freq=base_freq * int(p["order"]), phase=float(p["phase"]))
        return SineSeason(season.atoms + (atom,))

    if kind == "remove_harmonic":
        idx = int(p["index"]) % len(season.atoms)
        return SineSeason(tuple(a for k, a in enumerate(season.atoms) if k != idx))

    if kind == "modify_harmonic_phase":
        idx = int(p["index"]) % len(season.atoms)
        atoms = list(season.atoms)
        atoms[idx] = replace(atoms[idx], phase=atoms[idx].phase + float(p["shift"]))
        return SineSeason(tuple(atoms))

    if kind in ("modify_amp_mod_depth", "modify_mod_frequency", "modify_mod_phase"):
        modded = [k for k, a in enumerate(season.atoms) if a.mod_freq != 0.0]
        idx = modded[int(p["index"]) % len(modded)]
        atoms = list(season.atoms)
        if kind == "modify_amp_mod_depth":
            atoms[idx] = replace(atoms[idx], mod_depth=float(p["depth"]))
        elif kind == "modify_mod_frequency":
            atoms[idx] = replace(atoms[idx], mod_freq=atoms[idx].mod_freq * float(p["ratio"]))
        else:
            atoms[idx] = replace(atoms[idx], mod_phase=atoms[idx].mod_phase + float(p["shift"]))
        return SineSeason(tuple(atoms))

    if kind == "pulse_shift":
        delta = float(p["shift_cycles"])
        if isinstance(season, SquareSeason):
            return replace(season, cycle_start=(season.cycle_start + delta) % 1.0)
        return replace(season, phase=season.phase + 2.0 * math.pi * delta)

    if kind == "pulse_width_mod":
        lam = float(p["ratio"])
        if isinstance(season, SquareSeason):
            return replace(season, duty=min(1.0, max(0.0, lam * season.duty)))
        return replace(season, rise_frac=min(0.95, max(0.05, lam * season.rise_frac)))

    if kind == "wavelet_family_change":
        cycle = {"haar": "ricker", "ricker": "morlet", "morlet": "haar"}
        return WaveletSeason(
            tuple(replace(a, family=cycle[WAVELET_FAMILY_MAP[a.family]]) for a in season.atoms)
        )

    if kind == "wavelet_scale_change":
        lam = float(p["ratio"])
        return WaveletSeason(tuple(replace(a, scale=a.scale * lam) for a in season.atoms))

    if kind == "wavelet_shift_change":
        delta = float(p["shift"])
        return WaveletSeason(tuple(replace(a, shift=a.shift + delta) for a in season.atoms))

    if kind == "add_wavelet":
        atom = WaveletAtom(
            amp=float(p["amp"]), family=str(p["family"]), scale=float(p["scale"]), shift=float(p["shift"])
        )
        return WaveletSeason(season.atoms + (atom,))

    if kind == "remove_wavelet":
        idx = int(p["index"]) % len(season.atoms)
        return WaveletSeason(tuple(a for k, a in enumerate(season.atoms) if k != idx))

    raise KindMismatch(f"unhandled seasonal kind {kind!r}")


# ---------------------------------------------------------------------------
# Injection
# ---------------------------------------------------------------------------


def _check_window(window: tuple[int, int], n: int) -> None:
    t_s, t_e = window
    if not (0 <= t_s < t_e <= n):
        raise WindowOutOfRange(f"window [{t_s}, {t_e}) does not fit in length {n}")


def inject_exogenous(
    x: np.ndarray,
    spec: AnomalySpec,
    components: Sequence[BaselineSeries],
    season_specs: Sequence[SeasonSpec] | None = None,
) -> np.ndarray:
    """Overwrite one channel of the observed matrix inside the window.

    Local kinds add the rendered template; seasonal kinds re-compose the
    channel using the retained components and the edited season (which needs
    ``season_specs``).  Every other cell of the returned matrix is the
    untouched original value.
    """
    n, d = x.shape
    _check_window(spec.window, n)
    if not 0 <= spec.channel < d:
        raise WindowOutOfRange(f"channel {spec.channel} out of range for d={d}")
    t_s, t_e = spec.window
    out = x.copy()
    ch = spec.channel
    if spec.is_local():
        stats = local_stats(x[:, ch], spec.window)
        out[t_s:t_e, ch] = x[t_s:t_e, ch] + render_delta(spec, stats)
    else:
        if season_specs is None:
            raise KindMismatch("seasonal injection requires the per-channel season specs")
        season_old = components[ch].season
        mutated = mutate_season(spec, season_specs[ch])
        season_new = eval_season(mutated, n)
        out[t_s:t_e, ch] = x[t_s:t_e, ch] - season_old[t_s:t_e] + season_new[t_s:t_e]
    return out


def edited_baseline(
    baseline: BaselineSeries,
    spec: AnomalySpec,
    season_spec: SeasonSpec,
) -> tuple[BaselineSeries, SeasonSpec | None]:
    """Apply an endogenous edit to one channel's baseline.

    Local kinds add the rendered template to the composite; seasonal kinds
    swap S -> S' inside the window.  Returns the edited baseline and the
    mutated season spec (None for local kinds).
    """
    n = baseline.n
    _check_window(spec.window, n)
    t_s, t_e = spec.window
    composite = baseline.composite.copy()
    if spec.is_local():
        stats = local_stats(baseline.composite, spec.window)
        composite[t_s:t_e] = baseline.composite[t_s:t_e] + render_delta(spec, stats)
        edited = BaselineSeries(
            trend=baseline.trend, season=baseline.season, noise=baseline.noise, composite=composite
        )
        return edited, None
    mutated = mutate_season(spec, season_spec)
    season_new = eval_season(mutated, n)
    composite[t_s:t_e] = (
        baseline.composite[t_s:t_e] - baseline.season[t_s:t_e] + season_new[t_s:t_e]
    )
    season = baseline.season.copy()
    season[t_s:t_e] = season_new[t_s:t_e]
    edited = BaselineSeries(
        trend=baseline.trend, season=season, noise=baseline.noise, composite=composite
    )
    return edited, mutated


def inject_endogenous(
    baselines: Sequence[BaselineSeries],
    spec: AnomalySpec,
    dag: Dag,
    arx: ArxParams,
    alphas: Sequence[float],
    season_specs: Sequence[SeasonSpec],
) -> CausalSystem:
    """Edit the source channel's baseline and re-simulate the whole system."""
    if spec.mode != "endogenous":
        raise KindMismatch("inject_endogenous requires an endogenous spec")
    edited, _ = edited_baseline(baselines[spec.channel], spec, season_specs[spec.channel])
    patched = list(baselines)
    patched[spec.channel] = edited
    return simulate_system(patched, dag, arx, alphas)


# ---------------------------------------------------------------------------
# Plan sampling
# ---------------------------------------------------------------------------


def _draw_window(
    n: int,
    length: int,
    taken: list[tuple[int, int]],
    stream: RngStream,
) -> tuple[int, int] | None:
    """Place a window of (up to) the requested length, avoiding overlaps.

    Rejection-samples the start; after 100 failures the window shrinks by
    half and placement is retried, down to single-step windows.
    """
    length = min(length, n)
    while length >= 1:
        for _ in range(100):
            t_s = int(stream.gen.integers(0, n - length + 1))
            t_e = t_s + length
            if all(t_e <= s or e <= t_s for s, e in taken):
                return (t_s, t_e)
        length = length // 2
    return None


def _local_params(kind: str, window: tuple[int, int], priors: "AnomalyPriors", stream: RngStream) -> dict:
    t_s, t_e = window
    length = t_e - t_s
    k_lo, k_hi = priors.kappa_amp_range
    params: dict = {"kappa_amp": float(stream.gen.uniform(k_lo, k_hi))}

    if kind in ("up_spike", "down_spike"):
        params["t0"] = t_s + length // 2
        params["width"] = max(1, round(priors.spike_width_scale * length))
    elif kind in ("cont_up_spikes", "cont_down_spikes"):
        count = int(stream.gen.integers(3, 9))
        stride = max(1, (length - 1) // count)
        params.update(
            count=count,
            t0=t_s + max(1, stride // 2),
            stride=stride,
            widths=[max(1, stride // 2) for _ in range(count)],
            amp_jitter=[float(v) for v in stream.gen.uniform(0.8, 1.2, size=count)],
        )
    elif kind in ("wide_up_spike", "wide_down_spike"):
        params["rise"] = max(1, length // 4)
        params["fall"] = max(1, length // 4)
    elif kind == "outlier":
        params["t0"] = t_s
    elif kind in ("sudden_increase", "sudden_decrease"):
        params["t0"] = t_s + length // 2
        params["steepness"] = 10.0 / max(1, length)
    elif kind in ("plateau_convex", "plateau_concave"):
        pass
    elif kind in ("rapid_rise_slow_decline", "rapid_decline_slow_rise"):
        fast = max(1, round(length / 20))
        params.update(
            tau_r=float(fast),
            tau_f=float(max(4 * fast, round(length / 3))),
            t_peak=t_s + max(1, length // 4),
        )
    elif kind in ("slow_rise_rapid_decline", "slow_decline_rapid_rise"):
        fast = max(1, round(length / 20))
        params.update(
            tau_r=float(max(4 * fast, round(length / 3))),
            tau_f=float(fast),
            t_peak=t_s + max(1, length * 3 // 4),
        )
    elif kind in _SPIKE_LEVEL_KINDS:
        width = max(1, length // 8)
        t0 = t_s + max(1, length // 4)
        s_lo, s_hi = priors.kappa_step_range
        params.update(
            t0=t0,
            width=width,
            t1=min(t_e - 1, max(t_s + length // 2, t0 + width + 1)),
            kappa_step=float(stream.gen.uniform(s_lo, s_hi)),
        )
    elif kind == "shake":
        f_lo, f_hi = priors.shake_freq_range
        params["freq"] = float(stream.gen.uniform(f_lo, f_hi))
        params["phase"] = float(stream.gen.uniform(0.0, 2.0 * math.pi))
    else:
        raise KindMismatch(f"unhandled local kind {kind!r}")
    return params


def _seasonal_params(
    kind: str, season: SeasonSpec, window: tuple[int, int], stream: RngStream
) -> dict:
    gen = stream.gen
    if isinstance(season, NoisySeason):
        season = season.base
    params: dict = {}
    if kind in ("amplitude_scaling", "wavelet_amplitude_change"):
        up = gen.uniform() < 0.5
        params["ratio"] = float(gen.uniform(2.0, 5.0)) if up else float(gen.uniform(0.1, 0.5))
    elif kind == "frequency_change":
        up = gen.uniform() < 0.5
        params["period_ratio"] = float(gen.uniform(1.5, 3.0)) if up else float(gen.uniform(0.3, 0.67))
    elif kind == "noise_injection":
        if isinstance(season, (SineSeason, WaveletSeason)):
            ref = max(abs(a.amp) for a in season.atoms)
        else:
            ref = abs(season.amp)
        params["sigma"] = float(gen.uniform(0.3, 1.0)) * max(ref, 1e-6)
        params["seed"] = stream.spawn_seed()
    elif kind == "waveform_change":
        params["target"] = "square" if gen.uniform() < 0.5 else "triangle"
    elif kind == "phase_shift":
        params["shift"] = float(gen.uniform(math.pi / 4, 7 * math.pi / 4))
    elif kind == "add_harmonic":
        lead = max(abs(a.amp) for a in season.atoms)
        params.update(
            order=int(gen.integers(2, 6)),
            amp=float(gen.uniform(0.5, 1.5)) * lead,
            phase=float(gen.uniform(0.0, 2.0 * math.pi)),
        )
    elif kind in ("remove_harmonic", "remove_wavelet"):
        params["index"] = int(gen.integers(0, 1 << 30))
    elif kind == "modify_harmonic_phase":
        params["index"] = int(gen.integers(0, 1 << 30))
        params["shift"] = float(gen.uniform(math.pi / 2, 3 * math.pi / 2))
    elif kind == "modify_amp_mod_depth":
        params["index"] = int(gen.integers(0, 1 << 30))
        params["depth"] = float(gen.uniform(0.2, 0.95))
    elif kind == "modify_mod_frequency":
        up = gen.uniform() < 0.5
        params["index"] = int(gen.integers(0, 1 << 30))
        params["ratio"] = float(gen.uniform(2.0, 4.0)) if up else float(gen.uniform(0.25, 0.5))
    elif kind == "modify_mod_phase":
        params["index"] = int(gen.integers(0, 1 << 30))
        params["shift"] = float(gen.uniform(math.pi / 2, 3 * math.pi / 2))
    elif kind == "pulse_shift":
        sign = 1.0 if gen.uniform() < 0.5 else -1.0
        params["shift_cycles"] = sign * float(gen.uniform(0.2, 0.5))
    elif kind == "pulse_width_mod":
        up = gen.uniform() < 0.5
        params["ratio"] = float(gen.uniform(1.5, 3.0)) if up else float(gen.uniform(0.2, 0.6))
    elif kind in ("wavelet_family_change", "inversion"):
        pass
    elif kind == "wavelet_scale_change":
        up = gen.uniform() < 0.5
        params["ratio"] = float(gen.uniform(1.5, 3.0)) if up else float(gen.uniform(0.3, 0.67))
    elif kind == "wavelet_shift_change":
        scales = [a.scale for a in season.atoms]
        sign = 1.0 if gen.uniform() < 0.5 else -1.0
        params["shift"] = sign * float(gen.uniform(2.0, 6.0)) * float(np.mean(scales))
    elif kind == "add_wavelet":
        amps = [abs(a.amp) for a in season.atoms]
        scales = [a.scale for a in season.atoms]
        t_s, t_e = window
        params.update(
            amp=float(gen.uniform(1.0, 2.0)) * float(np.mean(amps)),
            family=str(gen.choice(WAVELET_BASES)),
            scale=float(np.mean(scales)),
            shift=float((t_s + t_e) / 2.0),
        )
    else:
        raise KindMismatch(f"unhandled seasonal kind {kind!r}")
    return params


def sample_anomaly_spec(blueprint: "SampleBlueprint", stream: RngStream) -> AnomalySpec | None:
    """Draw one anomaly spec consistent with the blueprint's context.

    The kind is uniform over the kinds compatible with the target channel's
    season; the mode is endogenous with the configured probability when the
    channel has DAG descendants.  Windows never overlap previously planned
    ones (rejection with shrinking); returns None when no window fits.
    """
    n = blueprint.n
    priors = blueprint.anomaly_priors
    gen = stream.gen

    channel = int(gen.integers(0, blueprint.d))
    season = blueprint.channels[channel].season
    pool = list(LOCAL_KINDS) + list(compatible_seasonal_kinds(season))
    if priors.kinds is not None:
        pool = [k for k in pool if k in priors.kinds]
        if not pool:
            raise KindMismatch(f"no configured anomaly kind is applicable to channel {channel}")
    kind = str(pool[int(gen.integers(0, len(pool)))])

    if kind == "outlier":
        length = 1
    elif priors.window_len_range is not None:
        w_lo, w_hi = priors.window_len_range
        length = int(gen.integers(w_lo, w_hi + 1))
    else:
        lo = max(5, n // 100)
        hi = max(10, n // 10)
        length = int(gen.integers(lo, hi + 1))

    taken = [s.window for s in blueprint.anomaly_plan]
    window = _draw_window(n, length, taken, stream)
    if window is None:
        return None

    has_descendants = bool(blueprint.dag.descendants(channel))
    endo = has_descendants and gen.uniform() < priors.endogenous_prob
    mode = "endogenous" if endo else "exogenous"

    if kind in LOCAL_KINDS:
        params = _local_params(kind, window, priors, stream)
    else:
        params = _seasonal_params(kind, season, window, stream)
    return AnomalySpec(kind=kind, mode=mode, channel=channel, window=window, params=params)
