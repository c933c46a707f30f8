"""Iterated dense-block detection with automatic truncation.

One detection round freezes merchant weights on the current residual
graph, peels out the densest block, then deletes that block's internal
edges. Rounds repeat until the graph runs out of edges, the block cap is
hit, or (with truncation enabled) the second-difference minimum of the
score sequence has been stable for `patience` rounds, at which point the
trailing low-score blocks are dropped.

Successive rounds remove pairwise disjoint edge sets, but a node can sit
in several blocks; the detected node set is the union over kept blocks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .bigraph import BipartiteGraph
from .density import DensityParams, ScoredBlock, merchant_edge_weights, peel_densest
from .errors import ConfigError


@dataclass(frozen=True)
class FDetConfig:
    """Knobs for one detection run.

    truncate=False with k_max=k reproduces the fixed-block-count mode
    (detect exactly k blocks, keep them all). patience bounds how many
    rounds past the current best truncating point detection keeps looking
    before stopping; it only matters when truncate is on.
    """

    density: DensityParams = field(default_factory=DensityParams)
    k_max: int = 30
    truncate: bool = True
    patience: int = 3
    by_degree: bool = False

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")


@dataclass(frozen=True)
class DensityTrace:
    """Per-round block scores in detection order, plus the blocks."""

    scores: tuple[float, ...]
    blocks: tuple[ScoredBlock, ...]

    def __len__(self) -> int:
        return len(self.blocks)


@dataclass(frozen=True)
class BlockSet:
    """Blocks kept after truncation and the union of their node sets."""

    blocks: tuple[ScoredBlock, ...]
    users: frozenset[int]
    merchants: frozenset[int]
    k_hat: int
    objective: float  # sum of kept block scores


def second_difference(scores: Sequence[float]) -> list[float]:
    """Central second-order differences at the interior points.

    Entry k corresponds to position k+2 of `scores` in 1-based counting.
    Needs at least three values.
    """
    if len(scores) < 3:
        raise ValueError(f"second difference needs >= 3 scores, got {len(scores)}")
    return [
        scores[i + 1] - 2.0 * scores[i] + scores[i - 1] for i in range(1, len(scores) - 1)
    ]


def truncating_point(scores: Sequence[float]) -> int:
    """1-based index of the last block worth keeping.

    The cut lands where the score sequence bends down hardest (most
    negative second difference; earliest such point on ties). Sequences
    too short for a second difference keep everything.
    """
    m = len(scores)
    if m < 3:
        return m
    diffs = second_difference(scores)
    best = min(range(len(diffs)), key=lambda k: (diffs[k], k))
    return best + 2


def detect_blocks(graph: BipartiteGraph, config: FDetConfig) -> tuple[DensityTrace, BlockSet]:
    """Run detection rounds on `graph` and truncate the block sequence.

    Returns the full computed trace and the kept BlockSet. On an edgeless
    graph both are empty.
    """
    blocks: list[ScoredBlock] = []
    scores: list[float] = []
    residual = graph
    while residual.edge_count > 0 and len(blocks) < config.k_max:
        weights = merchant_edge_weights(residual, config.density)
        block = peel_densest(residual, weights, by_degree=config.by_degree)
        blocks.append(block)
        scores.append(block.score)
        residual = residual.remove_edges(block.members)
        if config.truncate and len(scores) >= 3:
            if len(scores) - truncating_point(scores) >= config.patience:
                break
    trace = DensityTrace(tuple(scores), tuple(blocks))
    k_hat = truncating_point(scores) if config.truncate else len(blocks)
    kept = tuple(blocks[:k_hat])
    users: set[int] = set()
    merchants: set[int] = set()
    for block in kept:
        users |= block.users
        merchants |= block.merchants
    return trace, BlockSet(
        blocks=kept,
        users=frozenset(users),
        merchants=frozenset(merchants),
        k_hat=len(kept),
        objective=float(sum(b.score for b in kept)),
    )
