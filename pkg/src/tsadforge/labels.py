"""Causally-aware token-level label masks.

Exogenous injections mark exactly the intervention window on the edited
channel.  Endogenous injections mark the root-cause window on the source
channel plus lag-shifted windows on every descendant that can observably
receive the effect; those propagated windows are extended by a decay horizon
because the AR(1) recursion lets effects outlast the forcing window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .anomaly import AnomalySpec
from .causal import ArxParams, Dag, min_lag_to_descendants

DEFAULT_ALPHA_MIN = 0.05
DEFAULT_DECAY_EPS = 0.01


@dataclass(frozen=True)
class LabelMasks:
    rootcause: np.ndarray
    propagated: np.ndarray
    union: np.ndarray

    @classmethod
    def from_parts(cls, rootcause: np.ndarray, propagated: np.ndarray) -> "LabelMasks":
        return cls(rootcause=rootcause, propagated=propagated, union=rootcause | propagated)

    @classmethod
    def zeros(cls, n: int, d: int) -> "LabelMasks":
        z = np.zeros((n, d), dtype=np.uint8)
        return cls(rootcause=z, propagated=z.copy(), union=z.copy())

    def merge(self, other: "LabelMasks") -> "LabelMasks":
        return LabelMasks.from_parts(
            self.rootcause | other.rootcause, self.propagated | other.propagated
        )


def label_exogenous(spec: AnomalySpec, n: int, d: int) -> LabelMasks:
    """Positives are exactly the intervention window on the edited channel."""
    rootcause = np.zeros((n, d), dtype=np.uint8)
    t_s, t_e = spec.window
    rootcause[t_s:t_e, spec.channel] = 1
    return LabelMasks.from_parts(rootcause, np.zeros((n, d), dtype=np.uint8))


def min_path_lag(dag: Dag, arx: ArxParams, source: int) -> dict[int, int]:
    """Minimal total lag from the source to each descendant.

    A path contributes the sum of its edge lags (lag-0 edges transmit within
    the same simulation step); zero-gain edges carry no influence and are
    ignored.  Non-descendants are absent from the map.
    """
    return min_lag_to_descendants(dag, arx, source)


def decay_horizon(a: float, n: int, eps: float = DEFAULT_DECAY_EPS) -> int:
    """Steps until an AR(1) response with coefficient ``a`` falls below
    ``eps`` of its peak, capped at n/10.  Zero when a == 0."""
    mag = abs(a)
    if mag == 0.0:
        return 0
    h = math.ceil(math.log(eps) / math.log(mag))
    return min(h, n // 10)


def label_endogenous(
    spec: AnomalySpec,
    dag: Dag,
    arx: ArxParams,
    alphas: Sequence[float],
    n: int,
    d: int,
    *,
    alpha_min: float = DEFAULT_ALPHA_MIN,
    decay_eps: float = DEFAULT_DECAY_EPS,
) -> LabelMasks:
    """Root-cause window on the source, lag-shifted windows on descendants.

    A descendant k is marked over [t_s + L_k, min(n, t_e + L_k + H_k)) where
    L_k is its minimal path lag and H_k its decay horizon.  Descendants that
    cannot observably receive the effect are skipped: the path must have all
    nonzero gains, every intermediate node needs alpha > 0 (a pure-baseline
    node passes nothing on), and the target needs alpha > alpha_min.
    """
    rootcause = np.zeros((n, d), dtype=np.uint8)
    propagated = np.zeros((n, d), dtype=np.uint8)
    t_s, t_e = spec.window
    source = spec.channel
    rootcause[t_s:t_e, source] = 1

    # The source transmits only its baseline share (1 - alpha) of the edit.
    if alphas[source] < 1.0:
        def edge_ok(_idx: int, parent: int, _child: int) -> bool:
            return parent == source or alphas[parent] > 0.0

        lags = min_lag_to_descendants(dag, arx, source, edge_ok=edge_ok)
        for node, lag in lags.items():
            if alphas[node] <= alpha_min:
                continue
            horizon = decay_horizon(arx.a[node], n, decay_eps)
            start = min(n, t_s + lag)
            end = min(n, t_e + lag + horizon)
            propagated[start:end, node] = 1
    return LabelMasks.from_parts(rootcause, propagated)
