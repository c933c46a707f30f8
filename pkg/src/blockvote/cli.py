"""Command-line front end.

Subcommands:
  generate  write a synthetic edge list + user blacklist
  detect    run the sampling ensemble and emit detected nodes as JSON
  sweep     run once, score every vote threshold, emit CSV (and figures)
  bench     time full-graph detection against the sampled ensemble

Every run is reproducible from its manifest: all randomness flows from
--seed, and worker count changes scheduling only, never results. Exit
codes: 0 success, 1 internal error, 2 bad flags or configuration, 3
input parse error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .bigraph import BipartiteGraph, Side, parse_edge_list, read_labels, write_labels
from .density import DensityParams
from .detect import FDetConfig, detect_blocks
from .ensemble import EnsembleConfig, apply_mva, run_ensemble
from .errors import ConfigError, EdgeListParseError
from .metrics import best_f1, sweep_threshold, write_sweep_csv
from .sampling import SamplerKind
from .synth import BlockSpec, SynthConfig, generate

WORKERS_ENV = "BLOCKVOTE_WORKERS"


def _default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_ensemble_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sampler", choices=["res", "ons", "tns"], default="res")
    p.add_argument("--side", choices=["user", "merchant"], default="merchant",
                   help="side to sample for ONS")
    p.add_argument("--ratio", type=float, default=0.1, help="sample ratio S")
    p.add_argument("--ratio-v", type=float, default=None,
                   help="merchant-side ratio for TNS (defaults to --ratio)")
    p.add_argument("--num-samples", type=int, default=80, help="ensemble size N")
    p.add_argument("--threshold", type=int, default=None,
                   help="vote threshold T (default: round(S*N), at least 1)")
    p.add_argument("--c", type=float, default=5.0, help="log-shift constant of the density score")
    p.add_argument("--kmax", type=int, default=30, help="block detection cap per subgraph")
    p.add_argument("--no-truncate", action="store_true",
                   help="keep every detected block instead of truncating")
    p.add_argument("--fixed-k", type=int, default=None,
                   help="detect exactly K blocks (implies --no-truncate)")
    p.add_argument("--peel-by-degree", action="store_true",
                   help="peel by raw degree instead of weighted contribution")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=None,
                   help=f"parallel workers (default: ${WORKERS_ENV} or CPU count)")


def _ensemble_config(args: argparse.Namespace) -> EnsembleConfig:
    if args.fixed_k is not None:
        fdet = FDetConfig(
            density=DensityParams(c=args.c),
            k_max=args.fixed_k,
            truncate=False,
            by_degree=args.peel_by_degree,
        )
    else:
        fdet = FDetConfig(
            density=DensityParams(c=args.c),
            k_max=args.kmax,
            truncate=not args.no_truncate,
            by_degree=args.peel_by_degree,
        )
    threshold = args.threshold
    if threshold is None:
        threshold = max(1, round(args.ratio * args.num_samples))
    workers = args.workers if args.workers is not None else _default_workers()
    return EnsembleConfig(
        sampler=SamplerKind(
            method=args.sampler,
            side=Side.USER if args.side == "user" else Side.MERCHANT,
            ratio_v=args.ratio_v,
        ),
        n_samples=args.num_samples,
        ratio=args.ratio,
        threshold=threshold,
        fdet=fdet,
        master_seed=args.seed,
        workers=workers,
    )


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _manifest(command: str, params: dict, inputs: dict[str, str]) -> dict:
    return {
        "tool": "blockvote",
        "version": __version__,
        "command": command,
        "params": params,
        "inputs": {
            name: {"path": str(path), "sha256": _sha256(path)}
            for name, path in inputs.items()
        },
    }


def _ensemble_params(config: EnsembleConfig) -> dict:
    return {
        "sampler": config.sampler.method,
        "side": config.sampler.side.name.lower(),
        "ratio": config.ratio,
        "ratio_v": config.sampler.ratio_v,
        "num_samples": config.n_samples,
        "threshold": config.threshold,
        "repetition_rate": config.repetition_rate,
        "c": config.fdet.density.c,
        "kmax": config.fdet.k_max,
        "truncate": config.fdet.truncate,
        "peel_by_degree": config.fdet.by_degree,
        "seed": config.master_seed,
    }


def _write_output(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _load_graph(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return parse_edge_list(f)


def _histogram(votes) -> list[list[int]]:
    out = []
    if votes.size:
        import numpy as np

        counts = np.bincount(votes)
        out = [[int(v), int(c)] for v, c in enumerate(counts) if c > 0]
    return out


# -- subcommands ---------------------------------------------------------


def cmd_detect(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    graph, _ = _load_graph(args.edges)
    t_parse = time.perf_counter() - t0
    config = _ensemble_config(args)
    t1 = time.perf_counter()
    tally = run_ensemble(graph, config)
    users, merchants = apply_mva(tally, config.threshold)
    t_run = time.perf_counter() - t1
    manifest = _manifest("detect", _ensemble_params(config), {"edges": args.edges})
    manifest["runtime"] = {
        "workers": config.workers,
        "timings_sec": {"parse": round(t_parse, 6), "ensemble": round(t_run, 6),
                        "total": round(time.perf_counter() - t0, 6)},
    }
    payload = {
        "manifest": manifest,
        "detected_users": sorted(graph.user_label(u) for u in users),
        "detected_merchants": sorted(graph.merchant_label(v) for v in merchants),
        "vote_histogram": {
            "users": _histogram(tally.user_votes),
            "merchants": _histogram(tally.merchant_votes),
        },
    }
    _write_output(payload, args.output)
    return 0


def _parse_blocks(spec: str) -> tuple[BlockSpec, ...]:
    """Block syntax: 'NxUxMxP' (N copies of U users x M merchants at prob P)
    or 'UxMxP'; several groups joined with commas."""
    blocks: list[BlockSpec] = []
    for segment in spec.split(","):
        parts = segment.strip().split("x")
        try:
            if len(parts) == 4:
                count = int(parts[0])
                users, merchants, prob = int(parts[1]), int(parts[2]), float(parts[3])
            elif len(parts) == 3:
                count = 1
                users, merchants, prob = int(parts[0]), int(parts[1]), float(parts[2])
            else:
                raise ValueError("wrong field count")
            if count < 1:
                raise ValueError("block count must be >= 1")
            blocks.extend(BlockSpec(users, merchants, prob) for _ in range(count))
        except ValueError as exc:
            raise ConfigError(f"bad block spec {segment!r}: {exc}") from exc
    return tuple(blocks)


def cmd_generate(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    config = SynthConfig(
        n_users=args.users,
        n_merchants=args.merchants,
        background_avg_degree=args.avg_degree,
        blocks=_parse_blocks(args.blocks),
        camouflage=args.camouflage,
        seed=args.seed,
    )
    graph, truth = generate(config)
    with open(args.out_edges, "w", encoding="utf-8") as f:
        graph.write_edge_list(f)
    with open(args.out_labels, "w", encoding="utf-8") as f:
        write_labels(sorted(graph.user_label(u) for u in truth.fraud_users), f)
    manifest = _manifest(
        "generate",
        {
            "users": config.n_users,
            "merchants": config.n_merchants,
            "avg_degree": config.background_avg_degree,
            "blocks": [
                {"users": b.users, "merchants": b.merchants, "density": b.density}
                for b in config.blocks
            ],
            "camouflage": config.camouflage,
            "seed": config.seed,
        },
        {},
    )
    manifest["outputs"] = {
        "edges": args.out_edges,
        "labels": args.out_labels,
        "edge_count": graph.edge_count,
        "fraud_users": len(truth.fraud_users),
        "fraud_merchants": len(truth.fraud_merchants),
    }
    manifest["runtime"] = {
        "workers": 1,
        "timings_sec": {"total": round(time.perf_counter() - t0, 6)},
    }
    _write_output({"manifest": manifest}, args.output)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    graph, _ = _load_graph(args.edges)
    with open(args.labels, "r", encoding="utf-8") as f:
        labels = read_labels(f)
    label_to_idx = {graph.user_label(u): u for u in range(graph.n_users)}
    truth = {label_to_idx[lab] for lab in labels if lab in label_to_idx}
    t_parse = time.perf_counter() - t0

    ns = argparse.Namespace(**vars(args))
    if ns.threshold is None:
        ns.threshold = 1  # sweep covers every T; placeholder for validation
    config = _ensemble_config(ns)
    t1 = time.perf_counter()
    tally = run_ensemble(graph, config)
    reports = sweep_threshold(tally, truth)
    t_run = time.perf_counter() - t1

    if args.output is None or args.output == "-":
        write_sweep_csv(reports, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8") as f:
            write_sweep_csv(reports, f)
    best = best_f1(reports)
    print(
        f"best F1 {best.f1:.6f} at T={best.threshold} "
        f"(precision {best.precision:.6f}, recall {best.recall:.6f}, "
        f"detected {best.detected_count}); parse {t_parse:.2f}s run {t_run:.2f}s",
        file=sys.stderr,
    )
    if args.figures:
        from .figures import render_sweep_figures

        for path in render_sweep_figures(reports, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    graph, _ = _load_graph(args.edges)
    config = _ensemble_config(argparse.Namespace(**{**vars(args), "threshold": 1}))
    k_fixed = args.fixed_k if args.fixed_k is not None else args.kmax
    baseline_cfg = FDetConfig(
        density=DensityParams(c=args.c),
        k_max=k_fixed,
        truncate=False,
        by_degree=args.peel_by_degree,
    )

    t0 = time.perf_counter()
    _, baseline_found = detect_blocks(graph, baseline_cfg)
    baseline_sec = time.perf_counter() - t0

    t1 = time.perf_counter()
    tally = run_ensemble(graph, config)
    ensemble_sec = time.perf_counter() - t1

    manifest = _manifest("bench", _ensemble_params(config), {"edges": args.edges})
    manifest["runtime"] = {
        "workers": config.workers,
        "timings_sec": {"baseline": round(baseline_sec, 6),
                        "ensemble": round(ensemble_sec, 6)},
    }
    ratio = ensemble_sec / baseline_sec if baseline_sec > 0 else float("inf")
    payload = {
        "manifest": manifest,
        "baseline": {
            "mode": f"full graph, fixed k={k_fixed}, no truncation",
            "seconds": round(baseline_sec, 6),
            "blocks": baseline_found.k_hat,
            "detected_users": len(baseline_found.users),
        },
        "ensemble": {
            "seconds": round(ensemble_sec, 6),
            "max_vote": tally.max_vote(),
        },
        "ensemble_over_baseline": round(ratio, 6),
    }
    _write_output(payload, args.output)
    print(
        f"baseline {baseline_sec:.3f}s  ensemble {ensemble_sec:.3f}s  "
        f"ratio {ratio:.3f}",
        file=sys.stderr,
    )
    return 0


# -- parser / entry ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockvote",
        description="Detect coordinated fraud rings in bipartite transaction graphs.",
    )
    parser.add_argument("--version", action="version", version=f"blockvote {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the ensemble and report detected nodes")
    p.add_argument("--edges", required=True, help="edge-list file (user<TAB>merchant)")
    p.add_argument("--output", default=None, help="output path (default: stdout)")
    p.add_argument("--config", default=None, help="key=value defaults file")
    _add_ensemble_flags(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("generate", help="write a synthetic instance with ground truth")
    p.add_argument("--users", type=int, default=2000)
    p.add_argument("--merchants", type=int, default=500)
    p.add_argument("--avg-degree", type=float, default=2.0,
                   help="mean background purchases per user")
    p.add_argument("--blocks", default="3x50x20x0.8",
                   help="planted blocks, e.g. 3x50x20x0.8 or 40x10x0.9,60x30x0.7")
    p.add_argument("--camouflage", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-edges", default="graph.tsv")
    p.add_argument("--out-labels", default="labels.txt")
    p.add_argument("--output", default=None, help="manifest path (default: stdout)")
    p.add_argument("--config", default=None, help="key=value defaults file")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sweep", help="score every vote threshold against a blacklist")
    p.add_argument("--edges", required=True)
    p.add_argument("--labels", required=True, help="ground-truth user blacklist")
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    p.add_argument("--figures", default=None,
                   help="directory for rendered figures (optional)")
    p.add_argument("--config", default=None, help="key=value defaults file")
    _add_ensemble_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="compare full-graph detection vs the ensemble")
    p.add_argument("--edges", required=True)
    p.add_argument("--output", default=None, help="JSON path (default: stdout)")
    p.add_argument("--config", default=None, help="key=value defaults file")
    _add_ensemble_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _coerce(value: str):
    low = value.strip()
    if low.lower() in ("true", "yes", "on"):
        return True
    if low.lower() in ("false", "no", "off"):
        return False
    for cast in (int, float):
        try:
            return cast(low)
        except ValueError:
            continue
    return low


def _load_config_defaults(argv: list[str]) -> dict:
    """Pre-scan argv for --config and read key=value defaults from it."""
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return {}
    defaults = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = line.split("=", 1)
            defaults[key.strip().replace("-", "_")] = _coerce(value)
    return defaults


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        defaults = _load_config_defaults(argv)
        if defaults:
            for action in parser._subparsers._group_actions:  # noqa: SLF001
                for sp in action.choices.values():
                    sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except EdgeListParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
