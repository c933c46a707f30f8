"""Fraud-ring detection on bipartite transaction graphs.

Detects coordinated groups of suspicious accounts by peeling dense,
camouflage-resistant blocks out of many small sampled subgraphs in
parallel and majority-voting the per-subgraph findings.
"""

__version__ = "0.1.0"

from .bigraph import (
    BipartiteGraph,
    NodeRef,
    ParseSummary,
    SampledSubgraph,
    Side,
    merchant_ref,
    parse_edge_list,
    read_labels,
    user_ref,
    write_labels,
)
from .density import (
    DensityParams,
    MerchantWeights,
    PeelStats,
    ScoredBlock,
    brute_force_densest,
    density_score,
    merchant_edge_weights,
    peel_densest,
    peel_densest_with_stats,
    peel_sequence,
)
from .detect import (
    BlockSet,
    DensityTrace,
    FDetConfig,
    detect_blocks,
    second_difference,
    truncating_point,
)
from .ensemble import (
    EnsembleConfig,
    EnsembleStats,
    EnsembleTaskError,
    VoteTally,
    apply_mva,
    derive_seeds,
    run_ensemble,
    run_ensemble_detailed,
)
from .errors import ConfigError, EdgeListParseError
from .metrics import EvalReport, best_f1, evaluate, sweep_threshold, write_sweep_csv
from .sampling import SamplerKind, draw_sample, sample_ons, sample_res, sample_tns
from .synth import BlockSpec, GroundTruth, SynthConfig, generate

__all__ = [
    "BipartiteGraph",
    "BlockSet",
    "BlockSpec",
    "ConfigError",
    "DensityParams",
    "DensityTrace",
    "EdgeListParseError",
    "EnsembleConfig",
    "EnsembleStats",
    "EnsembleTaskError",
    "EvalReport",
    "FDetConfig",
    "GroundTruth",
    "MerchantWeights",
    "NodeRef",
    "ParseSummary",
    "PeelStats",
    "SampledSubgraph",
    "SamplerKind",
    "ScoredBlock",
    "Side",
    "SynthConfig",
    "VoteTally",
    "apply_mva",
    "best_f1",
    "brute_force_densest",
    "density_score",
    "derive_seeds",
    "detect_blocks",
    "draw_sample",
    "evaluate",
    "generate",
    "merchant_edge_weights",
    "merchant_ref",
    "parse_edge_list",
    "peel_densest",
    "peel_densest_with_stats",
    "read_labels",
    "run_ensemble",
    "run_ensemble_detailed",
    "sample_ons",
    "sample_res",
    "sample_tns",
    "second_difference",
    "sweep_threshold",
    "truncating_point",
    "user_ref",
    "write_labels",
]
