"""Scoring detected users against a blacklist, and vote-threshold sweeps.

Only user nodes are scored: ground truth comes as a user blacklist, and
merchants carry no labels. Conventions for degenerate counts: precision
is 0 when nothing was detected, recall is 0 when the truth set is empty,
and F1 is 0 whenever both are 0. Accuracy is deliberately not reported;
with the heavy class imbalance of fraud data it says nothing.

Sweep CSV format: header ``T,detected,tp,fp,fn,precision,recall,f1``,
one row per threshold, reals printed as 6-decimal fixed point.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import IO, Iterable

from .ensemble import VoteTally, apply_mva

CSV_HEADER = "T,detected,tp,fp,fn,precision,recall,f1"


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    fn: int
    detected_count: int
    threshold: int | None = None
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "detected_count": self.detected_count,
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.params:
            out["params"] = self.params
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True)


def evaluate(
    detected: Iterable[int],
    truth: Iterable[int],
    n_users: int,
    threshold: int | None = None,
    params: dict | None = None,
) -> EvalReport:
    """Confusion counts of a detected user set against the blacklist."""
    det = set(detected)
    tru = set(truth)
    for name, s in (("detected", det), ("truth", tru)):
        if s and (min(s) < 0 or max(s) >= n_users):
            raise ValueError(f"{name} set contains indices outside 0..{n_users - 1}")
    tp = len(det & tru)
    fp = len(det - tru)
    fn = len(tru - det)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return EvalReport(
        precision=precision,
        recall=recall,
        f1=f1,
        tp=tp,
        fp=fp,
        fn=fn,
        detected_count=len(det),
        threshold=threshold,
        params=params or {},
    )


def sweep_threshold(tally: VoteTally, truth: Iterable[int]) -> list[EvalReport]:
    """One report per threshold T = 1..n_samples, in T order.

    Raising T can only shrink the accepted set, so detected_count and
    recall are non-increasing down the rows.
    """
    tru = set(truth)
    reports = []
    for t in range(1, tally.n_samples + 1):
        users, _ = apply_mva(tally, t)
        reports.append(evaluate(users, tru, len(tally.user_votes), threshold=t))
    return reports


def best_f1(reports: Iterable[EvalReport]) -> EvalReport:
    """First report attaining the maximum F1."""
    rows = list(reports)
    if not rows:
        raise ValueError("no reports to rank")
    best = rows[0]
    for r in rows[1:]:
        if r.f1 > best.f1:
            best = r
    return best


def write_sweep_csv(reports: Iterable[EvalReport], stream: IO[str]) -> None:
    stream.write(CSV_HEADER + "\n")
    for r in reports:
        stream.write(
            f"{r.threshold},{r.detected_count},{r.tp},{r.fp},{r.fn},"
            f"{r.precision:.6f},{r.recall:.6f},{r.f1:.6f}\n"
        )
