#!/usr/bin/env python3
"""Write ready-to-use generator config files (JSON) for the bundled presets.

Usage:
    python scripts/make_preset_configs.py [--out-dir configs] [--samples N] [--seed S]

The emitted files feed straight into the CLI:
    tsadforge gen --config configs/contextual.json --out data/contextual
"""

import argparse
import json
from pathlib import Path

from tsadforge.pipeline import config_to_dict
from tsadforge.priors import GeneratorConfig, contextual_anomaly_preset, point_anomaly_preset


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", default="configs")
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    presets = {
        "default": GeneratorConfig(num_samples=args.samples, master_seed=args.seed),
        "multivariate": GeneratorConfig(
            num_samples=args.samples,
            multivariate=True,
            channel_range=(2, 8),
            anomalous_ratio=0.8,
            master_seed=args.seed,
        ),
        "point": point_anomaly_preset(num_samples=args.samples, master_seed=args.seed),
        "contextual": contextual_anomaly_preset(num_samples=args.samples, master_seed=args.seed),
    }
    for name, config in presets.items():
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
