"""Command-line surface: gen, detect, eval, inspect.

Exit codes: 0 success, 1 usage error (bad flags or config), 2 runtime error
(I/O failures, malformed inputs, digest mismatches).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import detect as detect_mod
from . import metrics as metrics_mod
from . import pipeline
from .errors import InvalidConfig, SchemaError, TsadForgeError

USAGE_ERROR = 1
RUNTIME_ERROR = 2

SEED_ENV_VAR = "TSADFORGE_SEED"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting with status 2."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tsadforge", description="Synthetic anomaly-detection benchmark toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a dataset")
    gen.add_argument("--config", required=True, help="JSON config file")
    gen.add_argument("--out", required=True, help="output dataset directory")
    gen.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
    gen.add_argument("--samples", type=int, default=None, help="sample count (overrides config)")
    gen.add_argument("--workers", type=int, default=1, help="parallel workers")
    gen.add_argument("--emit-clean", action="store_true", help="also write pre-injection clean.csv")

    det = sub.add_parser("detect", help="score a values.csv file")
    det.add_argument("--input", required=True, help="values.csv path")
    det.add_argument("--method", required=True, help="zscore | rcd")
    det.add_argument("--window", type=int, default=detect_mod.DEFAULT_WINDOW)
    det.add_argument("--out", required=True, help="scores.csv output path")

    ev = sub.add_parser("eval", help="evaluate scores or binary predictions against labels")
    ev.add_argument("--scores", default=None, help="scores.csv (threshold sweep + VUS-PR)")
    ev.add_argument("--pred", default=None, help="binary pred.csv")
    ev.add_argument("--labels", required=True, help="labels.csv")
    ev.add_argument("--metrics", default=None, help="comma list: standard,f1t,affiliation,vuspr")
    ev.add_argument("--buffer", type=int, default=None, help="VUS-PR max buffer width")
    ev.add_argument("--grid", type=int, default=128, help="threshold sweep grid size")
    ev.add_argument("--out", default=None, help="write metrics.json here (also printed)")

    ins = sub.add_parser("inspect", help="summarize one sample directory")
    ins.add_argument("--sample", required=True, help="sample directory")
    ins.add_argument("--plot-data", default=None, help="write tidy (t,channel,value,label) CSV")
    return parser


def _read_csv_matrix(path: Path) -> np.ndarray:
    """Parse a values.csv-shaped file into an (n, d) float array."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        width = len(header)
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != width:
                raise SchemaError(f"{path}: line {lineno}: expected {width} cells, got {len(parts)}")
            rows.append([float(v) for v in parts[1:]])
    return np.array(rows, dtype=float)


def _write_scores_csv(path: Path, scores: np.ndarray) -> None:
    lines = ["t,score"]
    for t, s in enumerate(scores):
        lines.append(f"{t},{float(s)!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_gen(args) -> int:
    try:
        config = pipeline.load_config(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return USAGE_ERROR
    except (InvalidConfig, SchemaError, json.JSONDecodeError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return USAGE_ERROR

    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return USAGE_ERROR
    seed = args.seed
    if seed is None:
        env = os.environ.get(SEED_ENV_VAR)
        seed = int(env) if env is not None else config.master_seed
    if args.samples is not None:
        import dataclasses

        config = dataclasses.replace(config, num_samples=args.samples)
    try:
        pipeline.generate_dataset(
            config, seed, args.out, workers=args.workers, emit_clean=args.emit_clean
        )
    except (OSError, TsadForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    print(str(Path(args.out) / "manifest.json"))
    return 0


def _run_detect(args) -> int:
    if args.method not in ("zscore", "rcd"):
        print(f"error: unknown method {args.method!r} (want zscore or rcd)", file=sys.stderr)
        return USAGE_ERROR
    if args.window < 2:
        print("error: --window must be >= 2", file=sys.stderr)
        return USAGE_ERROR
    try:
        values = _read_csv_matrix(Path(args.input))
        if args.method == "zscore":
            scores = detect_mod.zscore_detector(values, args.window)
        else:
            scores = detect_mod.context_discrepancy_detector(values, args.window)
        _write_scores_csv(Path(args.out), scores)
    except (OSError, ValueError, TsadForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


_METRIC_KEYS = ("standard", "f1t", "affiliation", "vuspr")


def _run_eval(args) -> int:
    if (args.scores is None) == (args.pred is None):
        print("error: provide exactly one of --scores / --pred", file=sys.stderr)
        return USAGE_ERROR
    wanted = list(_METRIC_KEYS) if args.scores else ["standard", "f1t", "affiliation"]
    if args.metrics:
        wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
        unknown = [m for m in wanted if m not in _METRIC_KEYS]
        if unknown:
            print(f"error: unknown metrics {unknown}", file=sys.stderr)
            return USAGE_ERROR
        if "vuspr" in wanted and args.pred is not None:
            print("error: VUS-PR requires scores, not binary predictions", file=sys.stderr)
            return USAGE_ERROR

    try:
        labels2d = _read_csv_matrix(Path(args.labels))
        labels = labels2d.max(axis=1) > 0.5  # any-channel positives
        if args.scores is not None:
            scores = _read_csv_matrix(Path(args.scores)).ravel()
            if len(scores) != len(labels):
                raise SchemaError(f"scores length {len(scores)} != labels length {len(labels)}")
            threshold, report = metrics_mod.best_f1_over_thresholds(scores, labels, grid=args.grid)
            buffer_max = args.buffer if args.buffer is not None else metrics_mod.default_buffer(len(labels))
            if "vuspr" in wanted:
                report.vus_pr = metrics_mod.vus_pr(scores, labels, buffer_max)
            else:
                report.vus_pr = None
        else:
            pred2d = _read_csv_matrix(Path(args.pred))
            pred = pred2d.max(axis=1) > 0.5
            if len(pred) != len(labels):
                raise SchemaError(f"pred length {len(pred)} != labels length {len(labels)}")
            report = metrics_mod.evaluate_predictions(pred, labels)
    except (OSError, ValueError, TsadForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR

    out = report.to_dict()
    key_map = {"standard": "standard_f1", "f1t": "f1_t", "affiliation": "affiliation_f", "vuspr": "vus_pr"}
    selected = {key_map[m]: out.get(key_map[m]) for m in wanted}
    selected["counts"] = out["counts"]
    if report.threshold is not None:
        selected["threshold"] = report.threshold
    text = json.dumps(selected, sort_keys=True, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def _run_inspect(args) -> int:
    sample_dir = Path(args.sample)
    try:
        meta_path = sample_dir / "meta.json"
        if not meta_path.exists():
            raise SchemaError(f"{sample_dir} does not look like a sample directory (no meta.json)")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        manifest_path = sample_dir.parent.parent / "manifest.json"
        if not manifest_path.exists():
            raise SchemaError(f"dataset manifest not found at {manifest_path}")
        manifest = pipeline.DatasetManifest.from_json(manifest_path.read_text(encoding="utf-8"))
        entry = next((e for e in manifest.samples if e["path"].endswith(sample_dir.name)), None)
        if entry is None:
            raise SchemaError(f"{sample_dir.name} not listed in the manifest")
        actual = pipeline.read_sample_digest(sample_dir)
        if actual != entry["digest"]:
            raise SchemaError(
                f"digest mismatch for {sample_dir.name}: manifest {entry['digest']}, recomputed {actual}"
            )
        values = _read_csv_matrix(sample_dir / "values.csv")
        labels = _read_csv_matrix(sample_dir / "labels.csv")
    except (OSError, ValueError, TsadForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR

    n, d = values.shape
    kinds = [a["kind"] for a in meta["anomalies"]]
    print(f"sample: {sample_dir.name}")
    print(f"n: {n}")
    print(f"d: {d}")
    print(f"anomalies: {len(kinds)}" + (f" ({', '.join(kinds)})" if kinds else ""))
    print(f"label positives: {int(labels.sum())}")
    for k in range(d):
        print(f"ch_{k}: mean={values[:, k].mean():.6g} std={values[:, k].std():.6g}")

    if args.plot_data:
        lines = ["t,channel,value,label"]
        for k in range(d):
            for t in range(n):
                lines.append(f"{t},{k},{float(values[t, k])!r},{int(labels[t, k])}")
        Path(args.plot_data).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    handlers = {
        "gen": _run_gen,
        "detect": _run_detect,
        "eval": _run_eval,
        "inspect": _run_inspect,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
