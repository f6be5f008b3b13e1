"""Deterministic, lineage-keyed random streams.

Every random draw in the generator comes from a stream derived from
``(master_seed, sample_index, stage_tag)``.  Streams with distinct lineages
are statistically independent, and a stream's draw sequence depends on
nothing but its lineage, so samples can be produced in any order and on any
number of workers with identical results.

Stage tags partition the draws so that no two uses of randomness ever share
(or re-consume) the same underlying sequence:

==============  ====================================================
tag             consumed by
==============  ====================================================
``blueprint``   length, channel count, attribute categories, trend
                parameters, mix weights rho_T
``season``      seasonal spec parameters
``volatility``  noise level fraction and volatility bursts
``dag``         graph topology
``arx``         ARX coefficients and mixing weights alpha
``anomaly``     anomaly plan (kinds, windows, template parameters)
``trend``       ARIMA innovations at evaluation time
``noise``       Gaussian noise draws at evaluation time
==============  ====================================================
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

STAGE_TAGS = (
    "blueprint",
    "trend",
    "season",
    "noise",
    "dag",
    "arx",
    "anomaly",
    "volatility",
)

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """One application of the SplitMix64 finalizer (a 64-bit bijection)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK64
    return h


def mix_key(master_seed: int, sample_index: int, stage_tag: str) -> tuple[int, int]:
    """Fold the lineage tuple into a 128-bit key for a counter-based generator."""
    s = _splitmix64(master_seed & _MASK64)
    s = _splitmix64(s ^ (sample_index & _MASK64))
    s = _splitmix64(s ^ _fnv1a64(stage_tag.encode("utf-8")))
    lo = _splitmix64(s)
    hi = _splitmix64(lo)
    return lo, hi


def sample_sub_seed(master_seed: int, sample_index: int) -> int:
    """Per-sample 64-bit seed recorded in metadata (stage-tag independent)."""
    s = _splitmix64(master_seed & _MASK64)
    return _splitmix64(s ^ (sample_index & _MASK64))


@dataclass
class RngStream:
    """A deterministic generator plus the lineage that produced it.

    The same lineage always yields the same draw sequence; the sequence is
    unaffected by how any other stream is consumed.
    """

    lineage: tuple[int, int, str]
    gen: np.random.Generator = field(repr=False)

    def spawn_seed(self) -> int:
        """Draw a 64-bit seed, e.g. to key an embedded noise overlay."""
        return int(self.gen.integers(0, 1 << 64, dtype=np.uint64))


def derive_stream(master_seed: int, sample_index: int, stage_tag: str) -> RngStream:
    """Derive the stream for one (seed, sample, stage) lineage.

    The lineage is hashed through a SplitMix64 chain and keys a Philox
    counter-based bit generator, so no coordination between parallel
    workers is ever needed.
    """
    if stage_tag not in STAGE_TAGS:
        raise ValueError(f"unknown stage tag {stage_tag!r}; expected one of {STAGE_TAGS}")
    key = mix_key(master_seed, sample_index, stage_tag)
    bitgen = np.random.Philox(key=np.array(key, dtype=np.uint64))
    return RngStream(lineage=(master_seed, sample_index, stage_tag), gen=np.random.Generator(bitgen))


def stream_from_seed(seed: int) -> np.random.Generator:
    """Free-standing generator keyed by a bare 64-bit seed (noise overlays)."""
    lo = _splitmix64(seed & _MASK64)
    hi = _splitmix64(lo)
    bitgen = np.random.Philox(key=np.array([lo, hi], dtype=np.uint64))
    return np.random.Generator(bitgen)
