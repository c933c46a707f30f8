"""Density scoring and greedy peeling of the single densest block.

The suspiciousness metric over a vertex subset S is

    phi(S) = f(S) / |S|,   f(S) = sum over edges (u, v) inside S of w_v,

where w_v = 1 / ln(degree_v + c) penalizes popular merchants so that
camouflage edges toward big legitimate stores contribute little mass.
Merchant weights are frozen from the graph handed to the peeler and stay
fixed for the whole peel, which is what makes O(log n) heap updates sound.

Peeling repeatedly deletes the node of minimum marginal contribution
(user: summed weight of its surviving edges; merchant: surviving degree
times its own weight) and returns the best-scoring prefix subgraph seen.
All ties break toward users first, then the lowest index.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .bigraph import BipartiteGraph, NodeRef, Side
from .errors import ConfigError

# Relative slack when comparing tracked scores: exact float ties are
# meaningful (equal-density prefixes must resolve to the earliest one), so
# incremental round-off must not be allowed to break them arbitrarily.
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class DensityParams:
    """Log-shift constant for merchant weights; natural log is fixed.

    c must exceed 1 so ln(degree + c) stays positive even for isolated
    merchants. Any other log base rescales every weight by the same factor
    and changes no argmax, so none is exposed.
    """

    c: float = 5.0

    def __post_init__(self):
        if not self.c > 1.0:
            raise ConfigError(f"density constant c must be > 1, got {self.c}")


@dataclass(frozen=True)
class MerchantWeights:
    """Per-merchant edge weights 1/ln(d_j + c), frozen at peeling start."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.size and (not np.all(np.isfinite(v)) or v.min() <= 0.0):
            raise ConfigError("merchant weights must be finite and positive")


@dataclass(frozen=True)
class ScoredBlock:
    """A vertex subset together with its density score."""

    members: frozenset[NodeRef]
    score: float

    @property
    def users(self) -> frozenset[int]:
        return frozenset(r.index for r in self.members if r.side == Side.USER)

    @property
    def merchants(self) -> frozenset[int]:
        return frozenset(r.index for r in self.members if r.side == Side.MERCHANT)

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class PeelStats:
    """Operation counts from one peel, for cost-model verification."""

    node_visits: int = 0
    contribution_updates: int = 0
    heap_pushes: int = 0
    heap_pops: int = 0
    stale_pops: int = 0


def merchant_edge_weights(graph: BipartiteGraph, params: DensityParams) -> MerchantWeights:
    """Weights 1/ln(d_j + c) from merchant degrees in `graph`."""
    degrees = graph.degrees(Side.MERCHANT).astype(np.float64)
    return MerchantWeights(1.0 / np.log(degrees + params.c))


def density_score(
    graph: BipartiteGraph, members: Iterable[NodeRef], weights: MerchantWeights
) -> float:
    """phi of a vertex subset, computed from scratch. Empty subset scores 0."""
    member_set = members if isinstance(members, (set, frozenset)) else set(members)
    if not member_set:
        return 0.0
    in_u = np.zeros(graph.n_users, dtype=bool)
    in_v = np.zeros(graph.n_merchants, dtype=bool)
    for ref in member_set:
        if ref.side == Side.USER:
            in_u[ref.index] = True
        else:
            in_v[ref.index] = True
    if graph.edge_count:
        inside = in_u[graph.edge_u] & in_v[graph.edge_v]
        mass = float(weights.values[graph.edge_v[inside]].sum())
    else:
        mass = 0.0
    return mass / len(member_set)


def peel_densest(
    graph: BipartiteGraph, weights: MerchantWeights, by_degree: bool = False
) -> ScoredBlock:
    """Greedy peel of `graph`, returning the best prefix subgraph.

    by_degree switches the removal priority to the raw current degree
    (coarser, kept as a compatibility mode); the returned block is still
    the phi-argmax over the peel sequence either way.
    """
    block, _ = peel_densest_with_stats(graph, weights, by_degree=by_degree)
    return block


def peel_densest_with_stats(
    graph: BipartiteGraph, weights: MerchantWeights, by_degree: bool = False
) -> tuple[ScoredBlock, PeelStats]:
    """peel_densest plus the operation counts of the run."""
    block, stats, _, _ = _peel(graph, weights, by_degree, record=False)
    return block, stats


def peel_sequence(
    graph: BipartiteGraph, weights: MerchantWeights, by_degree: bool = False
) -> tuple[list[NodeRef], list[float]]:
    """Removal order and the tracked score of every peel prefix.

    Diagnostic view of one peel: entry k of the score list is the
    incrementally tracked phi of the subgraph on order[k:], for prefix
    sizes n down to 2. Useful for checking the incremental bookkeeping
    against from-scratch evaluation.
    """
    _, _, order, phis = _peel(graph, weights, by_degree, record=True)
    n_users = graph.n_users
    refs = [
        NodeRef(Side.USER, x) if x < n_users else NodeRef(Side.MERCHANT, x - n_users)
        for x in order
    ]
    return refs, phis


def _peel(
    graph: BipartiteGraph, weights: MerchantWeights, by_degree: bool, record: bool
) -> tuple[ScoredBlock, PeelStats, list[int], list[float]]:
    if graph.edge_count == 0:
        raise ValueError("nothing to peel: graph has no edges")
    n_users = graph.n_users
    n = n_users + graph.n_merchants
    stats = PeelStats()

    # Unified node ids: users 0..n_users-1, merchants n_users..n-1. Plain
    # lists beat ndarray scalar access inside the hot loop.
    w_by_node = [0.0] * n_users + weights.values.tolist()
    nbrs = (graph.user_indices + n_users).tolist()
    nbrs_ptr_u = graph.user_indptr.tolist()
    nbrs_m = graph.merchant_indices.tolist()
    nbrs_ptr_m = graph.merchant_indptr.tolist()

    user_contrib = np.zeros(n_users, dtype=np.float64)
    np.add.at(user_contrib, graph.edge_u, weights.values[graph.edge_v])
    merchant_contrib = graph.degrees(Side.MERCHANT) * weights.values
    contrib = user_contrib.tolist() + merchant_contrib.tolist()

    if by_degree:
        prio = np.concatenate(
            (graph.degrees(Side.USER), graph.degrees(Side.MERCHANT))
        ).tolist()
    else:
        prio = contrib
    heap = list(zip(prio, range(n)))
    heapq.heapify(heap)
    stats.heap_pushes = n

    removed = bytearray(n)
    order: list[int] = []
    f = float(merchant_contrib.sum())
    count = n
    best_phi = f / count
    best_count = count
    phis: list[float] = [best_phi] if record else []

    heappush, heappop = heapq.heappush, heapq.heappop
    pops = updates = 0
    while count > 1:
        p, x = heappop(heap)
        pops += 1
        if removed[x] or p != prio[x]:
            continue
        removed[x] = 1
        order.append(x)
        f -= contrib[x]
        count -= 1
        if x < n_users:
            lo, hi = nbrs_ptr_u[x], nbrs_ptr_u[x + 1]
            adj = nbrs
            w_x = -1.0
        else:
            lo, hi = nbrs_ptr_m[x - n_users], nbrs_ptr_m[x - n_users + 1]
            adj = nbrs_m
            w_x = w_by_node[x]
        if by_degree:
            for y in adj[lo:hi]:
                if removed[y]:
                    continue
                updates += 1
                contrib[y] -= w_x if w_x > 0.0 else w_by_node[y]
                d = prio[y] - 1
                prio[y] = d
                heappush(heap, (d, y))
        elif w_x > 0.0:  # removing a merchant: all its edges weigh w_x
            for y in adj[lo:hi]:
                if removed[y]:
                    continue
                updates += 1
                c = contrib[y] - w_x
                contrib[y] = c
                heappush(heap, (c, y))
        else:  # removing a user: each edge weighs its merchant's w
            for y in adj[lo:hi]:
                if removed[y]:
                    continue
                updates += 1
                c = contrib[y] - w_by_node[y]
                contrib[y] = c
                heappush(heap, (c, y))
        if count >= 2:
            phi = f / count
            if record:
                phis.append(phi)
            if phi > best_phi * (1.0 + _TIE_RTOL):
                best_phi = phi
                best_count = count
    stats.heap_pops = pops
    stats.contribution_updates = updates
    stats.heap_pushes += updates
    stats.stale_pops = pops - len(order)

    # Survivors close out the removal order so prefixes are suffix slices.
    for x in range(n):
        if not removed[x]:
            order.append(x)
    stats.node_visits = len(order)
    members = frozenset(
        NodeRef(Side.USER, x) if x < n_users else NodeRef(Side.MERCHANT, x - n_users)
        for x in order[n - best_count :]
    )
    block = ScoredBlock(members, density_score(graph, members, weights))
    return block, stats, order, phis


def brute_force_densest(graph: BipartiteGraph, weights: MerchantWeights) -> ScoredBlock:
    """Exact phi-argmax by exhaustive subset enumeration. Test oracle only.

    Refuses graphs with more than 20 nodes. The first maximizer in mask
    order (users in low bits) wins ties, which favors small subsets over
    their supersets.
    """
    n_users, n_merchants = graph.n_users, graph.n_merchants
    n = n_users + n_merchants
    if n > 20:
        raise ValueError(f"brute force limited to 20 nodes, got {n}")
    if n == 0:
        raise ValueError("empty graph")
    masks = np.arange(1, 1 << n, dtype=np.int64)
    sizes = np.zeros(masks.size, dtype=np.int64)
    for b in range(n):
        sizes += (masks >> b) & 1
    mass = np.zeros(masks.size, dtype=np.float64)
    for u, v in graph.edge_pairs():
        both = ((masks >> u) & (masks >> (n_users + v))) & 1
        mass += both * weights.values[v]
    phi = mass / sizes
    best = int(np.argmax(phi))  # first maximizer on ties
    chosen = masks[best]
    members = frozenset(
        NodeRef(Side.USER, b) if b < n_users else NodeRef(Side.MERCHANT, b - n_users)
        for b in range(n)
        if (chosen >> b) & 1
    )
    return ScoredBlock(members, float(phi[best]))
