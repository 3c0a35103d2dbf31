"""Structural analysis of pattern hypergraphs: degeneracy and vertex orderings."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Sequence

from .hypergraph import Hypergraph, HypergraphError, is_linear, sequence_vertices


class NotLinearError(HypergraphError):
    """Raised when an operation defined only for linear hypergraphs gets a non-linear one."""


@dataclass(frozen=True)
class Ordering:
    """A vertex ordering of H together with its left degrees.

    ``left_degrees[i]`` is the number of edges inside ``sequence[:i+1]`` that
    contain ``sequence[i]``; ``bound`` is the degeneracy bound it certifies.
    """

    sequence: tuple[int, ...]
    left_degrees: tuple[int, ...]
    bound: int

    def validate(self, H: Hypergraph) -> None:
        fresh = left_degrees(H, self.sequence)
        if fresh != self.left_degrees:
            raise AssertionError(f"stored left degrees {self.left_degrees} != recomputed {fresh}")
        if max(fresh, default=0) > self.bound:
            raise AssertionError(f"left degree {max(fresh)} exceeds bound {self.bound}")


@dataclass(frozen=True)
class StructureProfile:
    d_H: int
    big_delta: int
    D_H: int
    linear: bool
    connector_free: bool | None
    connectors: list[tuple[int, ...]] | None = field(default=None)

    def to_dict(self) -> dict:
        return {
            "d_H": self.d_H,
            "big_delta": self.big_delta,
            "D_H": self.D_H,
            "linear": self.linear,
            "connector_free": self.connector_free,
            "connectors": None if self.connectors is None else [list(e) for e in self.connectors],
        }


def left_degrees(H: Hypergraph, sequence: Sequence[int]) -> tuple[int, ...]:
    """Per-position left degrees of ``sequence``, which must be a permutation of V(H)."""
    seq = tuple(sequence)
    if sorted(seq) != list(range(H.n)):
        raise HypergraphError(f"{seq} is not a permutation of 0..{H.n - 1}")
    pos = [0] * H.n
    for i, v in enumerate(seq):
        pos[v] = i
    out = [0] * H.n
    for e in H.edges:
        out[max(pos[v] for v in e)] += 1
    return tuple(out)


def degeneracy(H: Hypergraph) -> tuple[int, Ordering]:
    """Degeneracy ``d_H`` and a ``d_H``-degenerate ordering.

    Repeatedly removes a minimum-degree vertex (smallest id on ties) from the
    remaining induced subhypergraph; the reversed removal sequence is the
    ordering and the largest degree seen at removal time is ``d_H``.
    """
    deg = [len(x) for x in H.incidence]
    alive_edge = [True] * H.num_edges
    removed = [False] * H.n
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    removal: list[int] = []
    removal_deg: list[int] = []
    while heap:
        d, v = heapq.heappop(heap)
        if removed[v] or d != deg[v]:
            continue
        removed[v] = True
        removal.append(v)
        removal_deg.append(d)
        for idx in H.incidence[v]:
            if not alive_edge[idx]:
                continue
            alive_edge[idx] = False
            for u in H.edges[idx]:
                if u != v:
                    deg[u] -= 1
                    heapq.heappush(heap, (deg[u], u))
    d_H = max(removal_deg, default=0)
    seq = tuple(reversed(removal))
    return d_H, Ordering(seq, tuple(reversed(removal_deg)), d_H)


def connectors(H: Hypergraph) -> list[tuple[int, ...]]:
    """Edges e with an outside vertex v whose edges meet e in one vertex each, covering e.

    For linear H the edges through v meet e in pairwise distinct vertices,
    so e is a connector iff some v outside e has exactly k such edges.
    """
    if not is_linear(H):
        raise NotLinearError("connectors are defined for linear hypergraphs only")
    inc = H.incidence
    out = []
    for e in H.edges:
        es = set(e)
        hits: dict[int, int] = {}
        for x in e:
            for idx in inc[x]:
                f = H.edges[idx]
                if f == e:
                    continue
                for v in f:
                    if v not in es:
                        hits[v] = hits.get(v, 0) + 1
        if any(c >= H.k for c in hits.values()):
            out.append(e)
    return out


def profile(H: Hypergraph) -> StructureProfile:
    d_H, _ = degeneracy(H)
    big_delta = H.max_degree
    linear = is_linear(H)
    conn = connectors(H) if linear else None
    return StructureProfile(
        d_H=d_H,
        big_delta=big_delta,
        D_H=min(H.k * d_H, big_delta),
        linear=linear,
        connector_free=None if conn is None else not conn,
        connectors=conn,
    )


def max_prefix_length(H: Hypergraph) -> int:
    d_H, _ = degeneracy(H)
    return max(H.k, d_H)


def prefix_degenerate_ordering(H: Hypergraph, W: Sequence[int] = ()) -> Ordering:
    """A ``D_H``-degenerate ordering of V(H) whose first entries are ``W``.

    Parameters
    ----------
    H : Hypergraph
        A linear hypergraph.
    W : sequence of int
        Distinct vertices, at most ``max(k, d_H)`` of them.

    Notes
    -----
    Starts from the greedy ``d_H``-degenerate ordering ``L`` and moves ``W``
    to the front. That already suffices unless ``d_H == 1`` and
    ``D_H == k < Δ(H)``; then at most one vertex can exceed left degree
    ``k``, and it is promoted to directly follow ``W``.
    """
    if not is_linear(H):
        raise NotLinearError("prefix-constrained orderings need a linear hypergraph")
    W = sequence_vertices(H, W, "prefix")
    d_H, L = degeneracy(H)
    if len(W) > max(H.k, d_H):
        raise HypergraphError(f"prefix length {len(W)} exceeds max(k, d_H) = {max(H.k, d_H)}")
    D_H = min(H.k * d_H, H.max_degree)

    seq = _move_to_front(L.sequence, W)
    if W and D_H != H.max_degree and d_H == 1:
        degs = left_degrees(H, seq)
        over = [v for v, d in zip(seq, degs) if d > H.k]
        if len(over) > 1:
            raise AssertionError(f"more than one vertex exceeds left degree k: {over}")
        if over:
            seq = _move_to_front(L.sequence, W + (over[0],))
    ordering = Ordering(seq, left_degrees(H, seq), D_H)
    if max(ordering.left_degrees, default=0) > D_H:
        raise AssertionError(f"ordering {seq} is not {D_H}-degenerate")
    return ordering


def _move_to_front(seq: Sequence[int], front: Sequence[int]) -> tuple[int, ...]:
    fs = set(front)
    return tuple(front) + tuple(v for v in seq if v not in fs)
