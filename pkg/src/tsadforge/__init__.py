"""tsadforge: deterministic synthetic benchmarks for time-series anomaly
detection, plus the matching evaluation toolkit and baseline detectors."""

from .anomaly import (
    ALL_KINDS,
    LOCAL_KINDS,
    SEASONAL_KINDS,
    AnomalySpec,
    inject_endogenous,
    inject_exogenous,
    mutate_season,
    render_delta,
    sample_anomaly_spec,
)
from .causal import ArxParams, CausalSystem, Dag, sample_arx, sample_dag, simulate_system
from .detect import context_discrepancy_detector, zscore_detector
from .labels import LabelMasks, label_endogenous, label_exogenous, min_path_lag
from .metrics import (
    MetricReport,
    affiliation_f,
    best_f1_over_thresholds,
    f1_t,
    standard_f1,
    vus_pr,
)
from .pipeline import (
    DatasetManifest,
    Sample,
    generate_dataset,
    generate_sample,
    load_config,
    regenerate_from_meta,
)
from .priors import (
    AnomalyPriors,
    AttributePriors,
    CausalPriors,
    GeneratorConfig,
    SampleBlueprint,
    contextual_anomaly_preset,
    point_anomaly_preset,
    sample_blueprint,
    validate_config,
)
from .rng import RngStream, derive_stream
from .signal import BaselineSeries, NoiseSpec, SeasonSpec, TrendSpec, compose_baseline

__version__ = "0.1.0"
