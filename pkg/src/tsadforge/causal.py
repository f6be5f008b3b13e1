"""Multivariate fusion: random DAG, Euler-discretized ARX dynamics, mixing.

Each node carries a latent causal trajectory

    z_i[t] = a_i * z_i[t-1] + sum_{j in parents(i)} b_ij * x_j[t - lag_ij] + c_i

with z_i[-1] = 0 and out-of-range parent reads treated as 0, and the observed
signal mixes baseline and causal channels:

    x_i[t] = (1 - alpha_i) * x_base_i[t] + alpha_i * z_i[t].

Nodes are processed in topological order, so a lag-0 edge reads the parent's
already-computed value at the same step.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import ShapeMismatch
from .rng import RngStream
from .signal import BaselineSeries

if TYPE_CHECKING:
    from .priors import CausalPriors


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph; every edge (parent, child) goes forward in
    ``topo_order``."""

    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    topo_order: tuple[int, ...]

    def parents(self, node: int) -> list[int]:
        return [j for j, i in self.edges if i == node]

    def children(self, node: int) -> list[int]:
        return [i for j, i in self.edges if j == node]

    def descendants(self, source: int) -> set[int]:
        seen: set[int] = set()
        frontier = [source]
        while frontier:
            node = frontier.pop()
            for child in self.children(node):
                if child not in seen:
                    seen.add(child)
                    frontier.append(child)
        seen.discard(source)
        return seen

    def validate(self) -> None:
        pos = {node: k for k, node in enumerate(self.topo_order)}
        if sorted(pos) != list(range(self.n_nodes)):
            raise ValueError("topo_order is not a permutation of the nodes")
        seen = set()
        for j, i in self.edges:
            if j == i:
                raise ValueError(f"self-loop at node {j}")
            if (j, i) in seen:
                raise ValueError(f"duplicate edge ({j}, {i})")
            seen.add((j, i))
            if pos[j] >= pos[i]:
                raise ValueError(f"edge ({j}, {i}) goes backward in topo_order")


def sample_dag(n_nodes: int, p_edge: float, stream: RngStream) -> Dag:
    """Erdos-Renyi over unordered pairs, oriented along a random permutation.

    Acyclicity holds by construction: an edge always points from the earlier
    node to the later node in the permutation.
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError("p_edge must lie in [0, 1]")
    perm = stream.gen.permutation(n_nodes)
    pos = {int(node): k for k, node in enumerate(perm)}
    edges = []
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            if stream.gen.uniform() < p_edge:
                parent, child = (u, v) if pos[u] < pos[v] else (v, u)
                edges.append((parent, child))
    edges.sort(key=lambda e: (pos[e[1]], pos[e[0]]))
    return Dag(n_nodes=n_nodes, edges=tuple(edges), topo_order=tuple(int(v) for v in perm))


@dataclass(frozen=True)
class ArxParams:
    """Per-node decay ``a`` and bias ``c``; per-edge gain ``b`` and lag,
    aligned index-for-index with ``dag.edges``."""

    a: tuple[float, ...]
    c: tuple[float, ...]
    gains: tuple[float, ...]
    lags: tuple[int, ...]


def sample_arx(dag: Dag, priors: "CausalPriors", n: int, stream: RngStream) -> ArxParams:
    """Draw ARX coefficients from the configured priors.

    Gains are zero-mean normal with std shrunk by the child's in-degree
    (``gain_scale / sqrt(1 + indeg)``), keeping the summed parent forcing at a
    comparable scale regardless of fan-in.
    """
    d = dag.n_nodes
    a_lo, a_hi = priors.arx_a_range
    a = tuple(float(v) for v in stream.gen.uniform(a_lo, a_hi, size=d))
    b_lo, b_hi = priors.bias_range
    c = tuple(float(v) for v in stream.gen.uniform(b_lo, b_hi, size=d))
    lag_max = priors.max_lag(n)
    indeg = np.zeros(d, dtype=np.int64)
    for _, child in dag.edges:
        indeg[child] += 1
    gains = []
    lags = []
    for _, child in dag.edges:
        sigma_b = priors.arx_gain_scale / np.sqrt(1.0 + indeg[child])
        gains.append(float(stream.gen.normal(0.0, sigma_b)))
        lags.append(int(stream.gen.integers(0, lag_max + 1)))
    return ArxParams(a=a, c=c, gains=tuple(gains), lags=tuple(lags))


@dataclass(frozen=True)
class CausalSystem:
    dag: Dag
    arx: ArxParams
    alphas: tuple[float, ...]
    z: np.ndarray
    x: np.ndarray


def _shift_zeropad(x: np.ndarray, lag: int) -> np.ndarray:
    if lag == 0:
        return x
    out = np.zeros_like(x)
    out[lag:] = x[:-lag]
    return out


def simulate_system(
    baselines: Sequence[BaselineSeries],
    dag: Dag,
    arx: ArxParams,
    alphas: Sequence[float],
) -> CausalSystem:
    """Run the ARX recurrence over all nodes and mix with the baselines.

    Because the graph is acyclic and nodes are processed in topological
    order, each node's full parent trajectories exist before it is computed,
    and the scalar AR(1) recursion over its drive term can be evaluated as a
    linear filter.  The result is identical to a single forward time loop.
    """
    d = dag.n_nodes
    if len(baselines) != d or len(alphas) != d:
        raise ShapeMismatch(f"expected {d} baselines/alphas, got {len(baselines)}/{len(alphas)}")
    n = baselines[0].n
    for k, base in enumerate(baselines):
        if base.n != n:
            raise ShapeMismatch(f"baseline {k} has length {base.n}, expected {n}")

    edges_by_child: dict[int, list[int]] = {i: [] for i in range(d)}
    for idx, (_, child) in enumerate(dag.edges):
        edges_by_child[child].append(idx)

    z = np.zeros((n, d))
    x = np.zeros((n, d))
    for node in dag.topo_order:
        drive = np.full(n, arx.c[node])
        for idx in edges_by_child[node]:
            parent = dag.edges[idx][0]
            drive = drive + arx.gains[idx] * _shift_zeropad(x[:, parent], arx.lags[idx])
        a = arx.a[node]
        if a == 0.0:
            z_node = drive
        else:
            z_node = lfilter([1.0], [1.0, -a], drive)
        z[:, node] = z_node
        alpha = alphas[node]
        if alpha == 0.0:
            x[:, node] = baselines[node].composite
        else:
            x[:, node] = (1.0 - alpha) * baselines[node].composite + alpha * z_node
    return CausalSystem(dag=dag, arx=arx, alphas=tuple(float(v) for v in alphas), z=z, x=x)


def min_lag_to_descendants(
    dag: Dag,
    arx: ArxParams,
    source: int,
    *,
    edge_ok=None,
) -> dict[int, int]:
    """Minimal total lag from ``source`` to each reachable descendant.

    A path's lag is the sum of its edge lags (a lag-0 edge transmits within
    the same step).  Edges with an exactly-zero gain carry no influence and
    are skipped; ``edge_ok`` can narrow the edge set further.
    """
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(dag.n_nodes)}
    for idx, (parent, child) in enumerate(dag.edges):
        if arx.gains[idx] == 0.0:
            continue
        if edge_ok is not None and not edge_ok(idx, parent, child):
            continue
        adj[parent].append((child, arx.lags[idx]))

    dist: dict[int, int] = {source: 0}
    heap: list[tuple[int, int]] = [(0, source)]
    while heap:
        cost, node = heapq.heappop(heap)
        if cost > dist.get(node, cost):
            continue
        for child, lag in adj[node]:
            new = cost + lag
            if new < dist.get(child, new + 1):
                dist[child] = new
                heapq.heappush(heap, (new, child))
    dist.pop(source, None)
    return dist
