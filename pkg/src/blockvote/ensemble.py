"""Parallel sample-detect-vote orchestration and majority-vote thresholding.

The run samples `n_samples` subgraphs with seeds derived from one master
seed, detects dense blocks in each, maps detected local nodes back to
original ids, and gives each node one vote per subgraph that flagged it
(several blocks inside one subgraph still count once). Every task is a
pure function of (graph, config, derived seed) and merging is plain
integer addition, so any worker count and any scheduling produce the
same tally.
"""
from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bigraph import BipartiteGraph
from .detect import FDetConfig, detect_blocks
from .errors import ConfigError
from .sampling import SamplerKind, draw_sample

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class EnsembleConfig:
    sampler: SamplerKind = field(default_factory=SamplerKind)
    n_samples: int = 80
    ratio: float = 0.1
    threshold: int = 8
    fdet: FDetConfig = field(default_factory=FDetConfig)
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be >= 1, got {self.n_samples}")
        if not 0.0 < self.ratio <= 1.0:
            raise ConfigError(f"ratio must be in (0, 1], got {self.ratio}")
        if not 1 <= self.threshold <= self.n_samples:
            raise ConfigError(
                f"threshold must be in [1, {self.n_samples}], got {self.threshold}"
            )
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def repetition_rate(self) -> float:
        """Expected coverage multiplicity of the ensemble (ratio * n_samples)."""
        return self.ratio * self.n_samples


@dataclass
class VoteTally:
    """Per-original-node counts of subgraphs that flagged the node."""

    user_votes: np.ndarray
    merchant_votes: np.ndarray
    n_samples: int

    def max_vote(self) -> int:
        mu = int(self.user_votes.max()) if self.user_votes.size else 0
        mv = int(self.merchant_votes.max()) if self.merchant_votes.size else 0
        return max(mu, mv)


@dataclass
class EnsembleStats:
    """Per-subgraph block counts, in sample order."""

    blocks_kept: tuple[int, ...]
    blocks_computed: tuple[int, ...]


class EnsembleTaskError(RuntimeError):
    """Failure inside one sample task, tagged with the sample index."""

    def __init__(self, index: int, cause: BaseException):
        super().__init__(f"sample {index}: {cause}")
        self.index = index


def splitmix64(x: int) -> int:
    """One splitmix64 output for state x; stateless 64-bit mixer."""
    z = (x + _SPLITMIX_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seeds(master_seed: int, n: int) -> list[int]:
    """n per-task seeds, each a pure function of (master_seed, index).

    Extending n keeps the existing prefix, and close master seeds give
    unrelated seed lists.
    """
    if n < 1:
        raise ConfigError(f"need at least one seed, got n={n}")
    base = master_seed & _MASK64
    return [splitmix64((base + (i + 1) * _SPLITMIX_GAMMA) & _MASK64) for i in range(n)]


def _detect_one(
    graph: BipartiteGraph, config: EnsembleConfig, index: int, seed: int
) -> tuple[np.ndarray, np.ndarray, int, int]:
    try:
        sample = draw_sample(graph, config.sampler, config.ratio, seed)
        trace, found = detect_blocks(sample.graph, config.fdet)
    except Exception as exc:  # tag with the sample that blew up
        raise EnsembleTaskError(index, exc) from exc
    users = sample.user_map[np.fromiter(found.users, dtype=np.int64, count=len(found.users))]
    merchants = sample.merchant_map[
        np.fromiter(found.merchants, dtype=np.int64, count=len(found.merchants))
    ]
    return users, merchants, found.k_hat, len(trace)


_WORKER_STATE: dict = {}


def _pool_init(graph: BipartiteGraph, config: EnsembleConfig) -> None:
    _WORKER_STATE["graph"] = graph
    _WORKER_STATE["config"] = config


def _pool_task(args: tuple[int, int]):
    index, seed = args
    return index, _detect_one(_WORKER_STATE["graph"], _WORKER_STATE["config"], index, seed)


def run_ensemble(graph: BipartiteGraph, config: EnsembleConfig) -> VoteTally:
    tally, _ = run_ensemble_detailed(graph, config)
    return tally


def run_ensemble_detailed(
    graph: BipartiteGraph, config: EnsembleConfig
) -> tuple[VoteTally, EnsembleStats]:
    """run_ensemble plus per-subgraph block counts."""
    seeds = derive_seeds(config.master_seed, config.n_samples)
    user_votes = np.zeros(graph.n_users, dtype=np.int64)
    merchant_votes = np.zeros(graph.n_merchants, dtype=np.int64)
    kept = [0] * config.n_samples
    computed = [0] * config.n_samples

    def absorb(index: int, result) -> None:
        users, merchants, k_hat, n_rounds = result
        user_votes[users] += 1
        merchant_votes[merchants] += 1
        kept[index] = k_hat
        computed[index] = n_rounds

    if config.workers == 1 or config.n_samples == 1:
        for i, seed in enumerate(seeds):
            absorb(i, _detect_one(graph, config, i, seed))
    else:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            ctx = multiprocessing.get_context()
        chunk = max(1, config.n_samples // (config.workers * 4))
        with ProcessPoolExecutor(
            max_workers=min(config.workers, config.n_samples),
            mp_context=ctx,
            initializer=_pool_init,
            initargs=(graph, config),
        ) as pool:
            for index, result in pool.map(_pool_task, enumerate(seeds), chunksize=chunk):
                absorb(index, result)

    tally = VoteTally(user_votes, merchant_votes, config.n_samples)
    return tally, EnsembleStats(tuple(kept), tuple(computed))


def apply_mva(tally: VoteTally, threshold: int) -> tuple[set[int], set[int]]:
    """Nodes with at least `threshold` votes, split by side."""
    if not 1 <= threshold <= tally.n_samples:
        raise ConfigError(
            f"threshold must be in [1, {tally.n_samples}], got {threshold}"
        )
    users = set(np.flatnonzero(tally.user_votes >= threshold).tolist())
    merchants = set(np.flatnonzero(tally.merchant_votes >= threshold).tolist())
    return users, merchants
