"""Seeded subgraph samplers: random-edge, one-side-node, two-side-node.

All three are pure functions of (graph, parameters, seed): same inputs,
same subgraph, whatever process or thread runs them. Sample sizes use
ceiling rounding so tiny ratios still yield non-empty samples; chosen
index sets are sorted so local ids follow original node order.

Edge sampling keeps exactly ceil(ratio * |E|) edges and the nodes they
touch, which picks up high-degree nodes at a higher rate. Node sampling
on one side keeps every incident edge of the chosen nodes, preserving
the dense neighborhoods around sampled hubs; merchant-side sampling is
the default elsewhere in the package because transaction graphs tend to
concentrate degree on the merchant side. Two-side sampling keeps the
induced subgraph of two independent node draws, so it retains only about
ratio_u * ratio_v of the edges.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bigraph import BipartiteGraph, SampledSubgraph, Side
from .errors import ConfigError

_METHODS = ("res", "ons", "tns")


@dataclass(frozen=True)
class SamplerKind:
    """Sampler selection: method plus the knobs specific to it."""

    method: str = "res"
    side: Side = Side.MERCHANT  # ONS only
    ratio_v: float | None = None  # TNS only; defaults to the main ratio

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigError(f"unknown sampler {self.method!r}, want one of {_METHODS}")
        if self.ratio_v is not None:
            _check_ratio(self.ratio_v, "ratio_v")


def _check_ratio(ratio: float, name: str = "ratio") -> None:
    if not 0.0 < ratio <= 1.0:
        raise ConfigError(f"{name} must be in (0, 1], got {ratio}")


def _sample_size(ratio: float, n: int) -> int:
    # ceil with a hair of slack so ratio * n that is mathematically an
    # integer does not round up on float error
    return max(1, min(n, math.ceil(ratio * n - 1e-9)))


def _choose(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    if k >= n:
        return np.arange(n, dtype=np.int64)
    return np.sort(rng.choice(n, size=k, replace=False).astype(np.int64))


def sample_res(graph: BipartiteGraph, ratio: float, seed: int) -> SampledSubgraph:
    """Uniform edge sample; nodes are exactly the sampled edges' endpoints."""
    _check_ratio(ratio)
    if graph.edge_count == 0:
        raise ValueError("cannot edge-sample a graph with no edges")
    rng = np.random.default_rng(seed)
    take = _choose(rng, graph.edge_count, _sample_size(ratio, graph.edge_count))
    eu, ev = graph.edge_u[take], graph.edge_v[take]
    user_map = np.unique(eu)
    merchant_map = np.unique(ev)
    sub = BipartiteGraph(
        user_map.size,
        merchant_map.size,
        np.searchsorted(user_map, eu),
        np.searchsorted(merchant_map, ev),
    )
    return SampledSubgraph(graph=sub, user_map=user_map, merchant_map=merchant_map, seed=seed)


def sample_ons(graph: BipartiteGraph, side: Side, ratio: float, seed: int) -> SampledSubgraph:
    """Uniform node sample on one side, keeping all incident edges.

    Sampled-side nodes are kept even when isolated; the opposite side
    contributes only the endpoints of surviving edges.
    """
    _check_ratio(ratio)
    n_side = graph.n_users if side == Side.USER else graph.n_merchants
    if n_side == 0:
        raise ValueError("cannot node-sample an empty side")
    rng = np.random.default_rng(seed)
    chosen = _choose(rng, n_side, _sample_size(ratio, n_side))
    picked = np.zeros(n_side, dtype=bool)
    picked[chosen] = True
    if side == Side.USER:
        mask = picked[graph.edge_u]
        user_map = chosen
        merchant_map = np.unique(graph.edge_v[mask])
    else:
        mask = picked[graph.edge_v]
        merchant_map = chosen
        user_map = np.unique(graph.edge_u[mask])
    sub = BipartiteGraph(
        user_map.size,
        merchant_map.size,
        np.searchsorted(user_map, graph.edge_u[mask]),
        np.searchsorted(merchant_map, graph.edge_v[mask]),
    )
    return SampledSubgraph(graph=sub, user_map=user_map, merchant_map=merchant_map, seed=seed)


def sample_tns(
    graph: BipartiteGraph, ratio_u: float, ratio_v: float, seed: int
) -> SampledSubgraph:
    """Independent node samples on both sides; induced subgraph of the cross.

    The user draw comes first in the seed's stream, then the merchant
    draw; a full-side ratio of 1.0 consumes no randomness, so fixing one
    ratio at 1.0 reproduces the other side's one-side draw.
    """
    _check_ratio(ratio_u, "ratio_u")
    _check_ratio(ratio_v, "ratio_v")
    if graph.n_users == 0 or graph.n_merchants == 0:
        raise ValueError("cannot node-sample an empty side")
    rng = np.random.default_rng(seed)
    users = _choose(rng, graph.n_users, _sample_size(ratio_u, graph.n_users))
    merchants = _choose(rng, graph.n_merchants, _sample_size(ratio_v, graph.n_merchants))
    sub = graph.induced_subgraph(users, merchants)
    return SampledSubgraph(
        graph=sub.graph, user_map=sub.user_map, merchant_map=sub.merchant_map, seed=seed
    )


def draw_sample(
    graph: BipartiteGraph, kind: SamplerKind, ratio: float, seed: int
) -> SampledSubgraph:
    """Dispatch one sample according to `kind`."""
    if kind.method == "res":
        return sample_res(graph, ratio, seed)
    if kind.method == "ons":
        return sample_ons(graph, kind.side, ratio, seed)
    ratio_v = kind.ratio_v if kind.ratio_v is not None else ratio
    return sample_tns(graph, ratio, ratio_v, seed)
