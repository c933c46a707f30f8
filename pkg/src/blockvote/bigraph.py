"""Bipartite transaction graph: construction, file I/O, degrees, subgraphs.

Graph structure:
  Left nodes:  users (buyer accounts), dense indices 0..n_users-1
  Right nodes: merchants (stores), dense indices 0..n_merchants-1
  Edges:       undirected purchase links, stored once per (user, merchant) pair

Edge-list file format: UTF-8 text, one edge per line as
``user_label<TAB>merchant_label``. Blank lines and lines starting with '#'
are ignored. Label file format: one user label per line, same comment rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import IO, Iterable, Iterator, NamedTuple

import numpy as np

from .errors import ConfigError, EdgeListParseError


class Side(IntEnum):
    USER = 0
    MERCHANT = 1


class NodeRef(NamedTuple):
    """Uniform handle for a node on either side of the graph.

    Tuple ordering (side, index) is the canonical node order used for
    deterministic tie-breaking: users sort before merchants.
    """

    side: Side
    index: int


def user_ref(index: int) -> NodeRef:
    return NodeRef(Side.USER, index)


def merchant_ref(index: int) -> NodeRef:
    return NodeRef(Side.MERCHANT, index)


class BipartiteGraph:
    """Immutable simple bipartite graph with adjacency queryable from both sides.

    Edges are kept as parallel arrays sorted lexicographically by
    (user, merchant), plus CSR adjacency in both directions. All mutating
    operations (edge removal) return a new graph; instances are safe to
    share across worker processes.
    """

    __slots__ = (
        "n_users",
        "n_merchants",
        "edge_u",
        "edge_v",
        "user_indptr",
        "user_indices",
        "merchant_indptr",
        "merchant_indices",
        "user_labels",
        "merchant_labels",
    )

    def __init__(
        self,
        n_users: int,
        n_merchants: int,
        edge_u: Iterable[int] | np.ndarray = (),
        edge_v: Iterable[int] | np.ndarray = (),
        user_labels: list[str] | None = None,
        merchant_labels: list[str] | None = None,
    ):
        if n_users < 0 or n_merchants < 0:
            raise ConfigError("node counts must be non-negative")
        eu = np.asarray(edge_u, dtype=np.int64).ravel()
        ev = np.asarray(edge_v, dtype=np.int64).ravel()
        if eu.shape != ev.shape:
            raise ValueError("edge endpoint arrays must have equal length")
        if eu.size:
            if eu.min() < 0 or eu.max() >= n_users:
                raise ValueError("edge references user index out of range")
            if ev.min() < 0 or ev.max() >= n_merchants:
                raise ValueError("edge references merchant index out of range")
            order = np.lexsort((ev, eu))
            eu, ev = eu[order], ev[order]
            if eu.size > 1:
                keep = np.empty(eu.size, dtype=bool)
                keep[0] = True
                np.not_equal(eu[1:], eu[:-1], out=keep[1:])
                keep[1:] |= ev[1:] != ev[:-1]
                eu, ev = eu[keep], ev[keep]
        self.n_users = int(n_users)
        self.n_merchants = int(n_merchants)
        self.edge_u = eu
        self.edge_v = ev
        self.user_indptr, self.user_indices = _build_csr(eu, ev, n_users)
        if ev.size:
            order_m = np.lexsort((eu, ev))
            self.merchant_indptr, self.merchant_indices = _build_csr(
                ev[order_m], eu[order_m], n_merchants
            )
        else:
            self.merchant_indptr, self.merchant_indices = _build_csr(ev, eu, n_merchants)
        self.user_labels = user_labels
        self.merchant_labels = merchant_labels

    # -- basic queries ---------------------------------------------------

    @property
    def edge_count(self) -> int:
        return int(self.edge_u.size)

    def degrees(self, side: Side) -> np.ndarray:
        """Neighbor counts for every node on `side`, as an int64 vector."""
        indptr = self.user_indptr if side == Side.USER else self.merchant_indptr
        return np.diff(indptr)

    def neighbors(self, side: Side, index: int) -> np.ndarray:
        """Sorted opposite-side neighbor indices of one node (array view)."""
        if side == Side.USER:
            if not 0 <= index < self.n_users:
                raise IndexError(f"user index {index} out of range")
            return self.user_indices[self.user_indptr[index] : self.user_indptr[index + 1]]
        if not 0 <= index < self.n_merchants:
            raise IndexError(f"merchant index {index} out of range")
        return self.merchant_indices[
            self.merchant_indptr[index] : self.merchant_indptr[index + 1]
        ]

    def has_edge(self, user: int, merchant: int) -> bool:
        nbrs = self.neighbors(Side.USER, user)
        pos = np.searchsorted(nbrs, merchant)
        return bool(pos < nbrs.size and nbrs[pos] == merchant)

    def edge_pairs(self) -> Iterator[tuple[int, int]]:
        """Edges as (user, merchant) index pairs in canonical order."""
        for u, v in zip(self.edge_u.tolist(), self.edge_v.tolist()):
            yield u, v

    def user_label(self, index: int) -> str:
        if self.user_labels is not None:
            return self.user_labels[index]
        return f"u{index}"

    def merchant_label(self, index: int) -> str:
        if self.merchant_labels is not None:
            return self.merchant_labels[index]
        return f"m{index}"

    def __repr__(self) -> str:
        return (
            f"BipartiteGraph(users={self.n_users}, merchants={self.n_merchants}, "
            f"edges={self.edge_count})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.n_users == other.n_users
            and self.n_merchants == other.n_merchants
            and np.array_equal(self.edge_u, other.edge_u)
            and np.array_equal(self.edge_v, other.edge_v)
        )

    # -- derived graphs --------------------------------------------------

    def induced_subgraph(
        self,
        user_subset: Iterable[int] | np.ndarray,
        merchant_subset: Iterable[int] | np.ndarray,
    ) -> "SampledSubgraph":
        """Subgraph on the given index subsets, with dense local ids.

        Keeps exactly the edges with both endpoints inside the subsets.
        The returned id maps are sorted, so local node order follows
        original node order.
        """
        user_map = _clean_subset(user_subset, self.n_users, "user")
        merchant_map = _clean_subset(merchant_subset, self.n_merchants, "merchant")
        in_u = np.zeros(self.n_users, dtype=bool)
        in_u[user_map] = True
        in_v = np.zeros(self.n_merchants, dtype=bool)
        in_v[merchant_map] = True
        mask = in_u[self.edge_u] & in_v[self.edge_v] if self.edge_count else np.zeros(0, bool)
        eu = np.searchsorted(user_map, self.edge_u[mask])
        ev = np.searchsorted(merchant_map, self.edge_v[mask])
        sub = BipartiteGraph(user_map.size, merchant_map.size, eu, ev)
        return SampledSubgraph(graph=sub, user_map=user_map, merchant_map=merchant_map)

    def remove_edges(self, members: Iterable[NodeRef]) -> "BipartiteGraph":
        """New graph with every edge internal to `members` deleted.

        Node sets and labels are unchanged; only edges whose BOTH endpoints
        lie inside the member set go away, so nodes can end up isolated.
        """
        in_u = np.zeros(self.n_users, dtype=bool)
        in_v = np.zeros(self.n_merchants, dtype=bool)
        for ref in members:
            if ref.side == Side.USER:
                in_u[ref.index] = True
            else:
                in_v[ref.index] = True
        if not self.edge_count:
            return self
        keep = ~(in_u[self.edge_u] & in_v[self.edge_v])
        if keep.all():
            return self
        return BipartiteGraph(
            self.n_users,
            self.n_merchants,
            self.edge_u[keep],
            self.edge_v[keep],
            self.user_labels,
            self.merchant_labels,
        )

    # -- serialization ---------------------------------------------------

    def write_edge_list(self, stream: IO[str]) -> None:
        for u, v in self.edge_pairs():
            stream.write(f"{self.user_label(u)}\t{self.merchant_label(v)}\n")


def _build_csr(keys: np.ndarray, values: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(keys, minlength=n) if keys.size else np.zeros(n, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, values.copy()


def _clean_subset(subset, limit: int, what: str) -> np.ndarray:
    arr = np.unique(np.asarray(list(subset) if not isinstance(subset, np.ndarray) else subset, dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= limit):
        raise ValueError(f"{what} subset index out of range (limit {limit})")
    return arr


@dataclass
class SampledSubgraph:
    """A subgraph plus the maps from its local dense ids back to original ids."""

    graph: BipartiteGraph
    user_map: np.ndarray
    merchant_map: np.ndarray
    seed: int = 0

    def to_original(self, ref: NodeRef) -> NodeRef:
        if ref.side == Side.USER:
            return NodeRef(Side.USER, int(self.user_map[ref.index]))
        return NodeRef(Side.MERCHANT, int(self.merchant_map[ref.index]))

    def original_users(self, local: Iterable[int] | np.ndarray) -> np.ndarray:
        return self.user_map[np.asarray(list(local), dtype=np.int64)]

    def original_merchants(self, local: Iterable[int] | np.ndarray) -> np.ndarray:
        return self.merchant_map[np.asarray(list(local), dtype=np.int64)]

    def canonical_bytes(self) -> bytes:
        """Stable byte serialization used for determinism checks."""
        g = self.graph
        head = f"{g.n_users},{g.n_merchants},{g.edge_count};".encode()
        return b"".join(
            (
                head,
                g.edge_u.tobytes(),
                g.edge_v.tobytes(),
                self.user_map.tobytes(),
                self.merchant_map.tobytes(),
            )
        )


@dataclass
class ParseSummary:
    n_lines: int = 0
    n_edges: int = 0
    n_duplicates: int = 0
    n_comments: int = 0


def parse_edge_list(stream: IO[str]) -> tuple[BipartiteGraph, ParseSummary]:
    """Read a tab-separated edge list into a graph.

    Distinct labels get dense indices in first-appearance order (users and
    merchants independently). Duplicate edge lines collapse to one edge and
    are counted in the summary. A malformed line (field count != 2) raises
    EdgeListParseError carrying the 1-based line number.
    """
    user_ids: dict[str, int] = {}
    merchant_ids: dict[str, int] = {}
    eu: list[int] = []
    ev: list[int] = []
    seen: set[tuple[int, int]] = set()
    summary = ParseSummary()
    for lineno, raw in enumerate(stream, start=1):
        summary.n_lines = lineno
        line = raw.rstrip("\n").rstrip("\r")
        if not line:
            continue
        if line.startswith("#"):
            summary.n_comments += 1
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise EdgeListParseError(
                f"line {lineno}: expected 2 tab-separated fields, got {len(fields)}",
                line_number=lineno,
            )
        u = user_ids.setdefault(fields[0], len(user_ids))
        v = merchant_ids.setdefault(fields[1], len(merchant_ids))
        if (u, v) in seen:
            summary.n_duplicates += 1
            continue
        seen.add((u, v))
        eu.append(u)
        ev.append(v)
    graph = BipartiteGraph(
        len(user_ids),
        len(merchant_ids),
        eu,
        ev,
        user_labels=list(user_ids),
        merchant_labels=list(merchant_ids),
    )
    summary.n_edges = graph.edge_count
    return graph, summary


def read_labels(stream: IO[str]) -> list[str]:
    """One label per line; blank lines and '#' comments are skipped."""
    out = []
    for raw in stream:
        line = raw.rstrip("\n").rstrip("\r")
        if line and not line.startswith("#"):
            out.append(line)
    return out


def write_labels(labels: Iterable[str], stream: IO[str]) -> None:
    for label in labels:
        stream.write(f"{label}\n")
