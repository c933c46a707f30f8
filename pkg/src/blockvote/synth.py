"""Synthetic transaction graphs with planted dense blocks and ground truth.

Background activity: every non-fraud user buys from roughly
Poisson(background_avg_degree) merchants chosen uniformly (draws landing
on the same pair collapse, so realized degrees sit a shade under the
target). Each planted block wires its users to its merchants
independently per pair with the block's edge probability, which makes
internal edge counts exactly binomial. Camouflage then gives every fraud
user a few extra edges toward popular non-block merchants, sampled in
proportion to background degree, imitating rings that launder their
footprint through big legitimate stores.

Block members are scattered over the index space with a seeded
permutation so fraud ids carry no positional signal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bigraph import BipartiteGraph
from .errors import ConfigError


@dataclass(frozen=True)
class BlockSpec:
    """One planted block: member counts per side and internal edge probability."""

    users: int
    merchants: int
    density: float

    def __post_init__(self):
        if self.users < 1 or self.merchants < 1:
            raise ConfigError("block sides must be >= 1")
        if not 0.0 < self.density <= 1.0:
            raise ConfigError(f"block density must be in (0, 1], got {self.density}")


@dataclass(frozen=True)
class SynthConfig:
    n_users: int = 2000
    n_merchants: int = 500
    background_avg_degree: float = 2.0
    blocks: tuple[BlockSpec, ...] = (
        BlockSpec(50, 20, 0.8),
        BlockSpec(50, 20, 0.8),
        BlockSpec(50, 20, 0.8),
    )
    camouflage: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1 or self.n_merchants < 1:
            raise ConfigError("graph sides must be >= 1")
        if self.background_avg_degree < 0:
            raise ConfigError("background_avg_degree must be >= 0")
        if not 0.0 <= self.camouflage <= 1.0:
            raise ConfigError(f"camouflage must be in [0, 1], got {self.camouflage}")
        if sum(b.users for b in self.blocks) > self.n_users:
            raise ConfigError("planted blocks need more users than the graph has")
        if sum(b.merchants for b in self.blocks) > self.n_merchants:
            raise ConfigError("planted blocks need more merchants than the graph has")


@dataclass(frozen=True)
class GroundTruth:
    fraud_users: frozenset[int]
    fraud_merchants: frozenset[int]
    user_block: dict[int, int]
    merchant_block: dict[int, int]


def generate(config: SynthConfig) -> tuple[BipartiteGraph, GroundTruth]:
    """Build one seeded instance; same config, same graph, always."""
    rng = np.random.default_rng(config.seed)
    n_u, n_v = config.n_users, config.n_merchants

    user_perm = rng.permutation(n_u)
    merchant_perm = rng.permutation(n_v)
    user_block: dict[int, int] = {}
    merchant_block: dict[int, int] = {}
    block_users: list[np.ndarray] = []
    block_merchants: list[np.ndarray] = []
    u_off = v_off = 0
    for b, spec in enumerate(config.blocks):
        bu = np.sort(user_perm[u_off : u_off + spec.users])
        bv = np.sort(merchant_perm[v_off : v_off + spec.merchants])
        u_off += spec.users
        v_off += spec.merchants
        block_users.append(bu)
        block_merchants.append(bv)
        user_block.update((int(u), b) for u in bu)
        merchant_block.update((int(v), b) for v in bv)

    eu_parts: list[np.ndarray] = []
    ev_parts: list[np.ndarray] = []

    # background: non-fraud users only, uniform merchant choice
    bg_users = np.setdiff1d(np.arange(n_u), np.fromiter(user_block, dtype=np.int64, count=len(user_block)))
    if config.background_avg_degree > 0 and bg_users.size:
        deg = rng.poisson(config.background_avg_degree, bg_users.size)
        deg = np.minimum(deg, n_v)
        eu_parts.append(np.repeat(bg_users, deg))
        ev_parts.append(rng.integers(0, n_v, int(deg.sum())))

    # planted blocks: independent per-pair coin flips
    for bu, bv, spec in zip(block_users, block_merchants, config.blocks):
        hits = np.flatnonzero(rng.random(bu.size * bv.size) < spec.density)
        eu_parts.append(bu[hits // bv.size])
        ev_parts.append(bv[hits % bv.size])

    # camouflage: per fraud user, extra edges to popular outside merchants
    if config.camouflage > 0 and user_block:
        bg_degree = np.zeros(n_v, dtype=np.float64)
        if ev_parts and bg_users.size:
            np.add.at(bg_degree, ev_parts[0], 1.0)
        fraud_v = np.fromiter(merchant_block, dtype=np.int64, count=len(merchant_block))
        pool = np.setdiff1d(np.arange(n_v), fraud_v)
        pool_w = bg_degree[pool]
        total = pool_w.sum()
        if pool.size and total > 0:
            probs = pool_w / total
            cam_u: list[int] = []
            cam_v: list[np.ndarray] = []
            offset = 1 if (config.background_avg_degree > 0 and bg_users.size) else 0
            for k, bu in enumerate(block_users):
                part_u = eu_parts[offset + k]  # this block's realized internal edges
                deg_in_block = np.zeros(n_u, dtype=np.int64)
                np.add.at(deg_in_block, part_u, 1)
                for u in bu.tolist():
                    want = math.ceil(config.camouflage * int(deg_in_block[u]))
                    want = min(want, pool.size)
                    if want <= 0:
                        continue
                    targets = rng.choice(pool, size=want, replace=False, p=probs)
                    cam_u.extend([u] * want)
                    cam_v.append(targets)
            if cam_u:
                eu_parts.append(np.asarray(cam_u, dtype=np.int64))
                ev_parts.append(np.concatenate(cam_v))

    eu = np.concatenate(eu_parts) if eu_parts else np.zeros(0, dtype=np.int64)
    ev = np.concatenate(ev_parts) if ev_parts else np.zeros(0, dtype=np.int64)
    graph = BipartiteGraph(
        n_u,
        n_v,
        eu,
        ev,
        user_labels=[f"u{i}" for i in range(n_u)],
        merchant_labels=[f"m{j}" for j in range(n_v)],
    )
    truth = GroundTruth(
        fraud_users=frozenset(user_block),
        fraud_merchants=frozenset(merchant_block),
        user_block=user_block,
        merchant_block=merchant_block,
    )
    return graph, truth
