"""Reader for the tsadforge on-disk dataset format.

The format contract this package consumes:

* ``manifest.json`` at the dataset root lists per-sample relative paths and a
  64-bit blake2b content digest over the sample's files.
* Each sample directory holds ``values.csv``, ``labels.csv``,
  ``rootcause.csv``, ``propagated.csv``, ``meta.json`` and optionally
  ``clean.csv``; CSV cells are shortest round-trip decimal floats (values) or
  "0"/"1" (masks), with a ``t`` index column first.
* The digest is blake2b (8-byte) over ``name + NUL + bytes + NUL`` for the
  files present, in the fixed order above.

Only the manifest is read when a dataset is opened; sample bytes are read
lazily, one sample at a time.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

SUPPORTED_SCHEMA_VERSIONS = ("1",)
SAMPLE_FILE_ORDER = (
    "values.csv",
    "labels.csv",
    "rootcause.csv",
    "propagated.csv",
    "clean.csv",
    "meta.json",
)


class SchemaError(Exception):
    """Dataset layout or schema version not recognized."""


class DigestMismatch(Exception):
    """Recomputed content digest differs from the manifest entry."""


class IndexOutOfRange(IndexError):
    """Sample index beyond the manifest's sample list."""


@dataclass(frozen=True)
class LoadedSample:
    values: np.ndarray
    labels: np.ndarray
    rootcause: np.ndarray
    propagated: np.ndarray
    meta: dict
    clean: np.ndarray | None = None


@dataclass
class DatasetHandle:
    root: Path
    schema_version: str
    master_seed: int
    entries: list[dict]

    @property
    def num_samples(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LoadedSample]:
        for index in range(len(self.entries)):
            yield load_sample(self, index)


def open_dataset(path: str | Path) -> DatasetHandle:
    """Open a dataset lazily: parses the manifest, reads no sample bytes."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise SchemaError(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    version = str(manifest.get("schema_version"))
    if version not in SUPPORTED_SCHEMA_VERSIONS:
        raise SchemaError(
            f"schema_version {version!r} unsupported; this reader knows {SUPPORTED_SCHEMA_VERSIONS}"
        )
    return DatasetHandle(
        root=root,
        schema_version=version,
        master_seed=manifest["master_seed"],
        entries=list(manifest["samples"]),
    )


def _content_digest(sample_dir: Path) -> str:
    h = hashlib.blake2b(digest_size=8)
    for name in SAMPLE_FILE_ORDER:
        file_path = sample_dir / name
        if not file_path.exists():
            continue
        h.update(name.encode("utf-8"))
        h.update(b"\0")
        h.update(file_path.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def _read_matrix(path: Path) -> np.ndarray:
    """Exact float64 parse of a values.csv-shaped file (t column dropped)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        width = len(header)
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != width:
                raise SchemaError(f"{path}: line {lineno}: expected {width} cells, got {len(cells)}")
            rows.append([float(v) for v in cells[1:]])
    return np.array(rows, dtype=np.float64)


def _read_mask(path: Path) -> np.ndarray:
    mask = _read_matrix(path)
    out = mask.astype(np.uint8)
    if not np.array_equal(out, mask):
        raise SchemaError(f"{path}: mask cells must be 0 or 1")
    if not np.isin(out, (0, 1)).all():
        raise SchemaError(f"{path}: mask cells must be 0 or 1")
    return out


def load_sample(handle: DatasetHandle, index: int, verify: bool = False) -> LoadedSample:
    """Load one sample's arrays; ``verify`` recomputes the content digest."""
    if not 0 <= index < len(handle.entries):
        raise IndexOutOfRange(f"sample index {index} out of range [0, {len(handle.entries)})")
    entry = handle.entries[index]
    sample_dir = handle.root / entry["path"]
    if verify:
        actual = _content_digest(sample_dir)
        if actual != entry["digest"]:
            raise DigestMismatch(
                f"{entry['path']}: manifest digest {entry['digest']}, recomputed {actual}"
            )
    values = _read_matrix(sample_dir / "values.csv")
    labels = _read_mask(sample_dir / "labels.csv")
    rootcause = _read_mask(sample_dir / "rootcause.csv")
    propagated = _read_mask(sample_dir / "propagated.csv")
    meta = json.loads((sample_dir / "meta.json").read_text(encoding="utf-8"))
    clean_path = sample_dir / "clean.csv"
    clean = _read_matrix(clean_path) if clean_path.exists() else None
    if values.shape != labels.shape:
        raise SchemaError(
            f"{entry['path']}: values shape {values.shape} != labels shape {labels.shape}"
        )
    return LoadedSample(
        values=values,
        labels=labels,
        rootcause=rootcause,
        propagated=propagated,
        meta=meta,
        clean=clean,
    )
