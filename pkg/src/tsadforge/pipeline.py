"""Orchestration: blueprint -> signals -> causal system -> injections -> labels,
plus the on-disk dataset format.

On-disk layout (byte-exact contract):

    out_dir/manifest.json
    out_dir/samples/sample_NNNNNN/values.csv
    out_dir/samples/sample_NNNNNN/labels.csv        (union mask)
    out_dir/samples/sample_NNNNNN/rootcause.csv
    out_dir/samples/sample_NNNNNN/propagated.csv
    out_dir/samples/sample_NNNNNN/meta.json
    out_dir/samples/sample_NNNNNN/clean.csv         (opt-in)

Value cells are the shortest decimal strings that round-trip IEEE-754
binary64 (Python float repr); mask cells are "0"/"1"; rows end with "\\n".
meta.json is UTF-8 with sorted keys and records the sample's complete drawn
parameterization, so regenerating from it reproduces values bit-exactly.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import anomaly as anomaly_mod
from . import causal as causal_mod
from . import labels as labels_mod
from .errors import SchemaError, TsadForgeError
from .priors import (
    AnomalyPriors,
    AttributePriors,
    CausalPriors,
    ChannelPlan,
    GeneratorConfig,
    NoisePlan,
    SCHEMA_VERSION,
    SampleBlueprint,
    require_valid,
    sample_blueprint,
)
from .rng import derive_stream
from .signal import (
    AffineTrend,
    ArimaTrend,
    BaselineSeries,
    NoSeason,
    NoisySeason,
    NoiseSpec,
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
    compose_baseline,
    eval_noise,
    eval_season,
    eval_trend,
)

SAMPLE_FILES = ("values.csv", "labels.csv", "rootcause.csv", "propagated.csv", "clean.csv", "meta.json")


@dataclass
class Sample:
    blueprint: SampleBlueprint
    values: np.ndarray
    clean: np.ndarray
    masks: labels_mod.LabelMasks
    meta: dict


@dataclass
class DatasetManifest:
    schema_version: str
    master_seed: int
    num_samples: int
    config: dict
    samples: list[dict]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        raw = json.loads(text)
        return cls(
            schema_version=raw["schema_version"],
            master_seed=raw["master_seed"],
            num_samples=raw["num_samples"],
            config=raw["config"],
            samples=raw["samples"],
        )


# ---------------------------------------------------------------------------
# Sample realization
# ---------------------------------------------------------------------------


def realize_sample(blueprint: SampleBlueprint, master_seed: int, *, normalize: bool = False) -> Sample:
    """Deterministically evaluate a blueprint into values, clean values, masks."""
    n, d = blueprint.n, blueprint.d
    trend_stream = derive_stream(master_seed, blueprint.index, "trend")
    noise_stream = derive_stream(master_seed, blueprint.index, "noise")

    baselines: list[BaselineSeries] = []
    for ch in blueprint.channels:
        trend = eval_trend(ch.trend, n, trend_stream)
        season = eval_season(ch.season, n)
        scale = float(np.ptp(trend + season))
        if scale <= 1e-9:
            scale = 1.0
        noise_spec = NoiseSpec(sigma0=ch.noise.sigma_frac * scale, bursts=ch.noise.bursts)
        noise = eval_noise(noise_spec, n, noise_stream)
        baselines.append(compose_baseline(trend, season, noise))

    clean_system = causal_mod.simulate_system(baselines, blueprint.dag, blueprint.arx, blueprint.alphas)

    endo_specs = [s for s in blueprint.anomaly_plan if s.mode == "endogenous"]
    exo_specs = [s for s in blueprint.anomaly_plan if s.mode == "exogenous"]
    season_specs = [ch.season for ch in blueprint.channels]

    if endo_specs:
        patched = list(baselines)
        for spec in endo_specs:
            edited, _ = anomaly_mod.edited_baseline(
                patched[spec.channel], spec, season_specs[spec.channel]
            )
            patched[spec.channel] = edited
        system = causal_mod.simulate_system(patched, blueprint.dag, blueprint.arx, blueprint.alphas)
        values = system.x
    else:
        values = clean_system.x

    for spec in exo_specs:
        values = anomaly_mod.inject_exogenous(values, spec, baselines, season_specs)

    masks = labels_mod.LabelMasks.zeros(n, d)
    priors = blueprint.anomaly_priors
    for spec in blueprint.anomaly_plan:
        if spec.mode == "exogenous":
            masks = masks.merge(labels_mod.label_exogenous(spec, n, d))
        else:
            masks = masks.merge(
                labels_mod.label_endogenous(
                    spec,
                    blueprint.dag,
                    blueprint.arx,
                    blueprint.alphas,
                    n,
                    d,
                    alpha_min=priors.label_alpha_min,
                    decay_eps=priors.label_decay_eps,
                )
            )

    clean = clean_system.x
    if normalize:
        mu = values.mean(axis=0)
        sd = values.std(axis=0)
        sd = np.where(sd < 1e-12, 1.0, sd)
        values = (values - mu) / sd
        clean = (clean - mu) / sd

    meta = build_meta(blueprint, master_seed, normalize=normalize)
    return Sample(blueprint=blueprint, values=values, clean=clean, masks=masks, meta=meta)


def generate_sample(config: GeneratorConfig, master_seed: int, index: int) -> Sample:
    """Run all four stages for one sample index."""
    try:
        blueprint = sample_blueprint(
            dataclasses.replace(config, master_seed=master_seed), index
        )
        return realize_sample(blueprint, master_seed, normalize=config.normalize)
    except TsadForgeError as exc:
        exc.args = (f"sample {index}: {exc}",)
        raise


# ---------------------------------------------------------------------------
# Spec (de)serialization for meta.json
# ---------------------------------------------------------------------------


def _trend_to_json(spec: TrendSpec) -> dict:
    det = spec.det
    if isinstance(det, AffineTrend):
        det_j = {"type": "affine", "intercept": det.intercept, "slope": det.slope}
    else:
        det_j = {
            "type": "piecewise",
            "intercept": det.intercept,
            "slope": det.slope,
            "knots": list(det.knots),
            "slope_deltas": list(det.slope_deltas),
        }
    stoc_j = None
    if spec.stoc is not None:
        stoc_j = {
            "p": spec.stoc.p,
            "d": spec.stoc.d,
            "q": spec.stoc.q,
            "ar": list(spec.stoc.ar),
            "ma": list(spec.stoc.ma),
            "sigma": spec.stoc.sigma,
        }
    return {"det": det_j, "stoc": stoc_j, "rho": spec.rho}


def _trend_from_json(raw: dict) -> TrendSpec:
    det_j = raw["det"]
    if det_j["type"] == "affine":
        det = AffineTrend(intercept=det_j["intercept"], slope=det_j["slope"])
    else:
        det = PiecewiseTrend(
            intercept=det_j["intercept"],
            slope=det_j["slope"],
            knots=tuple(det_j["knots"]),
            slope_deltas=tuple(det_j["slope_deltas"]),
        )
    stoc = None
    if raw["stoc"] is not None:
        s = raw["stoc"]
        stoc = ArimaTrend(p=s["p"], d=s["d"], q=s["q"], ar=tuple(s["ar"]), ma=tuple(s["ma"]), sigma=s["sigma"])
    return TrendSpec(det=det, stoc=stoc, rho=raw["rho"])


def _season_to_json(spec: SeasonSpec) -> dict:
    if isinstance(spec, NoSeason):
        return {"type": "none"}
    if isinstance(spec, SineSeason):
        return {
            "type": "sine",
            "atoms": [dataclasses.asdict(a) for a in spec.atoms],
        }
    if isinstance(spec, SquareSeason):
        return {
            "type": "square",
            "amp": spec.amp,
            "period": spec.period,
            "duty": spec.duty,
            "cycle_start": spec.cycle_start,
        }
    if isinstance(spec, TriangleSeason):
        return {
            "type": "triangle",
            "amp": spec.amp,
            "period": spec.period,
            "phase": spec.phase,
            "rise_frac": spec.rise_frac,
        }
    if isinstance(spec, WaveletSeason):
        return {"type": "wavelet", "atoms": [dataclasses.asdict(a) for a in spec.atoms]}
    if isinstance(spec, NoisySeason):
        return {
            "type": "noisy",
            "base": _season_to_json(spec.base),
            "sigma": spec.sigma,
            "seed": spec.seed,
        }
    raise TypeError(f"unknown season spec {type(spec).__name__}")


def _season_from_json(raw: dict) -> SeasonSpec:
    kind = raw["type"]
    if kind == "none":
        return NoSeason()
    if kind == "sine":
        return SineSeason(tuple(SineAtom(**a) for a in raw["atoms"]))
    if kind == "square":
        return SquareSeason(
            amp=raw["amp"], period=raw["period"], duty=raw["duty"], cycle_start=raw["cycle_start"]
        )
    if kind == "triangle":
        return TriangleSeason(
            amp=raw["amp"], period=raw["period"], phase=raw["phase"], rise_frac=raw["rise_frac"]
        )
    if kind == "wavelet":
        return WaveletSeason(tuple(WaveletAtom(**a) for a in raw["atoms"]))
    if kind == "noisy":
        return NoisySeason(base=_season_from_json(raw["base"]), sigma=raw["sigma"], seed=raw["seed"])
    raise SchemaError(f"unknown season type {kind!r} in meta")


def _noise_to_json(plan: NoisePlan) -> dict:
    return {
        "level": plan.level,
        "sigma_frac": plan.sigma_frac,
        "bursts": [dataclasses.asdict(b) for b in plan.bursts],
    }


def _noise_from_json(raw: dict) -> NoisePlan:
    return NoisePlan(
        level=raw["level"],
        sigma_frac=raw["sigma_frac"],
        bursts=tuple(VolatilityBurst(**b) for b in raw["bursts"]),
    )


def _anomaly_to_json(spec: anomaly_mod.AnomalySpec) -> dict:
    return {
        "kind": spec.kind,
        "mode": spec.mode,
        "channel": spec.channel,
        "window": list(spec.window),
        "params": spec.params,
    }


def _anomaly_from_json(raw: dict) -> anomaly_mod.AnomalySpec:
    return anomaly_mod.AnomalySpec(
        kind=raw["kind"],
        mode=raw["mode"],
        channel=raw["channel"],
        window=(raw["window"][0], raw["window"][1]),
        params=dict(raw["params"]),
    )


def build_meta(blueprint: SampleBlueprint, master_seed: int, *, normalize: bool) -> dict:
    edges = [
        [parent, child, blueprint.arx.gains[k], blueprint.arx.lags[k]]
        for k, (parent, child) in enumerate(blueprint.dag.edges)
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "index": blueprint.index,
        "master_seed": master_seed,
        "sub_seed": blueprint.sub_seed,
        "n": blueprint.n,
        "d": blueprint.d,
        "channels": [
            {
                "trend": _trend_to_json(ch.trend),
                "season": _season_to_json(ch.season),
                "noise": _noise_to_json(ch.noise),
                "categories": {
                    "season": ch.season_category,
                    "trend": ch.trend_category,
                    "freq": ch.freq_regime,
                    "noise": ch.noise_category,
                },
            }
            for ch in blueprint.channels
        ],
        "causal": {
            "edges": edges,
            "topo_order": list(blueprint.dag.topo_order),
            "a": list(blueprint.arx.a),
            "c": list(blueprint.arx.c),
            "alpha": list(blueprint.alphas),
            # zero initial state and zero-padded out-of-range reads, no
            # burn-in: early-time transients are part of the data
            "init": {"z0": 0.0, "burn_in": 0},
        },
        "anomalies": [_anomaly_to_json(s) for s in blueprint.anomaly_plan],
        "labels": {
            "alpha_min": blueprint.anomaly_priors.label_alpha_min,
            "decay_eps": blueprint.anomaly_priors.label_decay_eps,
        },
        "normalize": normalize,
    }


def blueprint_from_meta(meta: dict) -> SampleBlueprint:
    """Rebuild the blueprint recorded in a meta.json document."""
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(
            f"meta schema_version {meta.get('schema_version')!r} unsupported (want {SCHEMA_VERSION!r})"
        )
    channels = tuple(
        ChannelPlan(
            trend=_trend_from_json(ch["trend"]),
            season=_season_from_json(ch["season"]),
            noise=_noise_from_json(ch["noise"]),
            freq_regime=ch["categories"]["freq"],
            season_category=ch["categories"]["season"],
            trend_category=ch["categories"]["trend"],
            noise_category=ch["categories"]["noise"],
        )
        for ch in meta["channels"]
    )
    causal = meta["causal"]
    edges = tuple((e[0], e[1]) for e in causal["edges"])
    dag = causal_mod.Dag(
        n_nodes=meta["d"], edges=edges, topo_order=tuple(causal["topo_order"])
    )
    arx = causal_mod.ArxParams(
        a=tuple(causal["a"]),
        c=tuple(causal["c"]),
        gains=tuple(e[2] for e in causal["edges"]),
        lags=tuple(e[3] for e in causal["edges"]),
    )
    priors = AnomalyPriors(
        label_alpha_min=meta["labels"]["alpha_min"],
        label_decay_eps=meta["labels"]["decay_eps"],
    )
    return SampleBlueprint(
        index=meta["index"],
        n=meta["n"],
        d=meta["d"],
        channels=channels,
        dag=dag,
        arx=arx,
        alphas=tuple(causal["alpha"]),
        anomaly_plan=tuple(_anomaly_from_json(a) for a in meta["anomalies"]),
        sub_seed=meta["sub_seed"],
        anomaly_priors=priors,
    )


def regenerate_from_meta(meta: dict) -> Sample:
    """Re-evaluate the recorded blueprint; bit-identical to the stored sample."""
    blueprint = blueprint_from_meta(meta)
    return realize_sample(blueprint, meta["master_seed"], normalize=meta["normalize"])


# ---------------------------------------------------------------------------
# Serialization and digests
# ---------------------------------------------------------------------------


def values_to_csv(values: np.ndarray) -> str:
    n, d = values.shape
    header = "t," + ",".join(f"ch_{k}" for k in range(d))
    rows = [header]
    for t in range(n):
        rows.append(str(t) + "," + ",".join(repr(float(v)) for v in values[t]))
    return "\n".join(rows) + "\n"


def mask_to_csv(mask: np.ndarray) -> str:
    n, d = mask.shape
    header = "t," + ",".join(f"ch_{k}" for k in range(d))
    body = [header]
    for t in range(n):
        body.append(str(t) + "," + ",".join("1" if v else "0" for v in mask[t]))
    return "\n".join(body) + "\n"


def meta_to_json(meta: dict) -> str:
    return json.dumps(meta, sort_keys=True, indent=2) + "\n"


def content_digest(named_blobs: list[tuple[str, bytes]]) -> str:
    """64-bit content digest over named file bytes (order-sensitive)."""
    h = hashlib.blake2b(digest_size=8)
    for name, blob in named_blobs:
        h.update(name.encode("utf-8"))
        h.update(b"\0")
        h.update(blob)
        h.update(b"\0")
    return h.hexdigest()


def sample_blobs(sample: Sample, emit_clean: bool) -> list[tuple[str, bytes]]:
    blobs = [
        ("values.csv", values_to_csv(sample.values).encode("utf-8")),
        ("labels.csv", mask_to_csv(sample.masks.union).encode("utf-8")),
        ("rootcause.csv", mask_to_csv(sample.masks.rootcause).encode("utf-8")),
        ("propagated.csv", mask_to_csv(sample.masks.propagated).encode("utf-8")),
    ]
    if emit_clean:
        blobs.append(("clean.csv", values_to_csv(sample.clean).encode("utf-8")))
    blobs.append(("meta.json", meta_to_json(sample.meta).encode("utf-8")))
    return blobs


def write_sample(sample: Sample, sample_dir: Path, emit_clean: bool) -> str:
    """Write one sample directory; returns its content digest."""
    sample_dir.mkdir(parents=True, exist_ok=True)
    blobs = sample_blobs(sample, emit_clean)
    for name, blob in blobs:
        (sample_dir / name).write_bytes(blob)
    return content_digest(blobs)


def read_sample_digest(sample_dir: Path) -> str:
    """Recompute the digest from the files present on disk."""
    blobs = []
    for name in SAMPLE_FILES:
        path = sample_dir / name
        if path.exists():
            blobs.append((name, path.read_bytes()))
    return content_digest(blobs)


def config_to_dict(config: GeneratorConfig) -> dict:
    raw = dataclasses.asdict(config)
    raw["schema_version"] = SCHEMA_VERSION
    ap = raw["anomaly_priors"]
    if ap["kinds"] is not None:
        ap["kinds"] = list(ap["kinds"])
    return raw


def config_from_dict(raw: dict) -> GeneratorConfig:
    """Build a config from a JSON document, applying defaults for absent keys."""
    if "schema_version" not in raw:
        raise SchemaError("config document must carry a schema_version field")
    if str(raw["schema_version"]) != SCHEMA_VERSION:
        raise SchemaError(
            f"config schema_version {raw['schema_version']!r} unsupported (want {SCHEMA_VERSION!r})"
        )
    known = {f.name for f in dataclasses.fields(GeneratorConfig)}
    unknown = set(raw) - known - {"schema_version"}
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")

    kwargs: dict = {}
    for key in ("num_samples", "anomalous_ratio", "multivariate", "master_seed", "normalize"):
        if key in raw:
            kwargs[key] = raw[key]
    for key in ("length_range", "channel_range"):
        if key in raw:
            kwargs[key] = tuple(raw[key])
    if "attribute_priors" in raw:
        kwargs["attribute_priors"] = AttributePriors(**raw["attribute_priors"])
    if "causal_priors" in raw:
        cp = dict(raw["causal_priors"])
        for key in ("arx_a_range", "bias_range", "mix_alpha_range"):
            if key in cp:
                cp[key] = tuple(cp[key])
        kwargs["causal_priors"] = CausalPriors(**cp)
    if "anomaly_priors" in raw:
        ap = dict(raw["anomaly_priors"])
        for key in (
            "kinds",
            "count_choices",
            "count_weights",
            "kappa_amp_range",
            "kappa_step_range",
            "shake_freq_range",
            "window_len_range",
        ):
            if key in ap and ap[key] is not None:
                ap[key] = tuple(ap[key])
        kwargs["anomaly_priors"] = AnomalyPriors(**ap)
    return GeneratorConfig(**kwargs)


def load_config(path: Path | str) -> GeneratorConfig:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    config = config_from_dict(raw)
    require_valid(config)
    return config


# ---------------------------------------------------------------------------
# Dataset generation
# ---------------------------------------------------------------------------


def _sample_rel_path(index: int) -> str:
    return f"samples/sample_{index:06d}"


def _generate_and_write(args: tuple) -> dict:
    config, master_seed, index, root, emit_clean = args
    sample = generate_sample(config, master_seed, index)
    rel = _sample_rel_path(index)
    digest = write_sample(sample, Path(root) / rel, emit_clean)
    return {"index": index, "path": rel, "digest": digest}


def generate_dataset(
    config: GeneratorConfig,
    master_seed: int,
    out_dir: Path | str,
    workers: int = 1,
    emit_clean: bool = False,
) -> DatasetManifest:
    """Generate and persist the whole dataset; the manifest is written last.

    Samples are built in a temporary sibling directory which is atomically
    renamed into place, so a crashed run never leaves a half-written dataset
    at ``out_dir``.  Output bytes are independent of ``workers``.
    """
    require_valid(config)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    out_dir = Path(out_dir)
    tmp_dir = out_dir.parent / (out_dir.name + ".tmp")
    if tmp_dir.exists():
        shutil.rmtree(tmp_dir)
    tmp_dir.mkdir(parents=True)

    try:
        jobs = [
            (config, master_seed, index, str(tmp_dir), emit_clean)
            for index in range(config.num_samples)
        ]
        if workers == 1:
            entries = [_generate_and_write(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                entries = list(pool.map(_generate_and_write, jobs, chunksize=8))
        entries.sort(key=lambda e: e["index"])
        manifest = DatasetManifest(
            schema_version=SCHEMA_VERSION,
            master_seed=master_seed,
            num_samples=config.num_samples,
            config=config_to_dict(config),
            samples=entries,
        )
        (tmp_dir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    except BaseException:
        shutil.rmtree(tmp_dir, ignore_errors=True)
        raise

    if out_dir.exists():
        if (out_dir / "manifest.json").exists() or not any(out_dir.iterdir()):
            shutil.rmtree(out_dir)
        else:
            shutil.rmtree(tmp_dir, ignore_errors=True)
            raise FileExistsError(
                f"{out_dir} exists and does not look like a dataset; refusing to overwrite"
            )
    os.replace(tmp_dir, out_dir)
    return manifest
