"""Immutable k-uniform hypergraphs with incidence indexes.

Vertices are the integers ``0..n-1``. Edges are stored as sorted tuples and
the edge list is kept in canonical (lexicographic) order, so two hypergraphs
with the same edge set compare and serialize identically.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence


class HypergraphError(ValueError):
    """Raised on malformed hypergraphs or invalid vertex/subset arguments."""


class ParseError(HypergraphError):
    """Raised by :func:`read_hypergraph`; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Hypergraph:
    """A k-uniform hypergraph on vertices ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of vertices.
    k : int
        Uniformity, at least 2.
    edges : iterable of iterables of int
        Each edge is a collection of ``k`` distinct vertices. Order inside an
        edge does not matter; duplicate edges are rejected.

    Notes
    -----
    Instances are immutable. Derived indexes (incidence lists, link masks)
    are computed lazily and cached; all queries are read-only.
    """

    def __init__(self, n: int, k: int, edges: Iterable[Iterable[int]] = ()):
        if k < 2:
            raise HypergraphError(f"uniformity k must be >= 2, got {k}")
        if n < 0:
            raise HypergraphError(f"vertex count must be >= 0, got {n}")
        canon = []
        for e in edges:
            t = tuple(sorted(int(v) for v in e))
            if len(t) != k:
                raise HypergraphError(f"edge {t} does not have {k} vertices")
            if len(set(t)) != k:
                raise HypergraphError(f"edge {t} repeats a vertex")
            if t[0] < 0 or t[-1] >= n:
                raise HypergraphError(f"edge {t} has a vertex outside 0..{n - 1}")
            canon.append(t)
        edge_set = frozenset(canon)
        if len(edge_set) != len(canon):
            raise HypergraphError("duplicate edge")
        self._n = n
        self._k = k
        self._edges = tuple(sorted(canon))
        self._edge_set = edge_set

    @property
    def n(self) -> int:
        return self._n

    @property
    def k(self) -> int:
        return self._k

    @property
    def edges(self) -> tuple[tuple[int, ...], ...]:
        return self._edges

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edge_set(self) -> frozenset:
        return self._edge_set

    def __len__(self) -> int:
        return self._n

    def __contains__(self, edge) -> bool:
        return tuple(sorted(edge)) in self._edge_set

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self._n, self._k, self._edges) == (other._n, other._k, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._k, self._edges))

    def __repr__(self) -> str:
        return f"Hypergraph(n={self._n}, k={self._k}, edges={list(self._edges)!r})"

    def __getstate__(self):
        return (self._n, self._k, self._edges)

    def __setstate__(self, state):
        n, k, edges = state
        self._n, self._k, self._edges = n, k, edges
        self._edge_set = frozenset(edges)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex tuple of incident edge ids (indexes into ``edges``)."""
        inc: list[list[int]] = [[] for _ in range(self._n)]
        for idx, e in enumerate(self._edges):
            for v in e:
                inc[v].append(idx)
        return tuple(tuple(x) for x in inc)

    def degree(self, v: int) -> int:
        _check_vertex(self, v)
        return len(self.incidence[v])

    @cached_property
    def max_degree(self) -> int:
        return max((len(x) for x in self.incidence), default=0)

    @cached_property
    def link_masks(self) -> dict[tuple[int, ...], int]:
        """Map each (k-1)-subset S to the bitmask of vertices x with S+x an edge.

        Only subsets with a non-empty neighborhood are present.
        """
        masks: dict[tuple[int, ...], int] = {}
        for e in self._edges:
            for j, x in enumerate(e):
                s = e[:j] + e[j + 1:]
                masks[s] = masks.get(s, 0) | (1 << x)
        return masks

    def induced(self, vertices: Iterable[int]) -> tuple["Hypergraph", tuple[int, ...]]:
        """Induced subhypergraph, relabelled to ``0..len(vertices)-1``.

        Returns the subhypergraph and the tuple of original vertex ids.
        """
        keep = tuple(sorted(set(vertices)))
        for v in keep:
            _check_vertex(self, v)
        relabel = {v: i for i, v in enumerate(keep)}
        sub = [
            tuple(relabel[v] for v in e)
            for e in self._edges
            if all(v in relabel for v in e)
        ]
        return Hypergraph(len(keep), self._k, sub), keep


@dataclass(frozen=True)
class SubsetFamily:
    """An unordered family of ``r`` distinct ``i``-subsets of vertices."""

    i: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.i < 1:
            raise HypergraphError(f"subset size must be >= 1, got {self.i}")
        canon = []
        for s in self.sets:
            t = tuple(sorted(s))
            if len(t) != self.i or len(set(t)) != self.i:
                raise HypergraphError(f"{t} is not a set of {self.i} distinct vertices")
            canon.append(t)
        if not canon:
            raise HypergraphError("a family needs at least one set")
        if len(set(canon)) != len(canon):
            raise HypergraphError("family sets must be pairwise distinct")
        object.__setattr__(self, "sets", tuple(sorted(canon)))

    @classmethod
    def of(cls, sets: Iterable[Iterable[int]]) -> "SubsetFamily":
        sets = [tuple(s) for s in sets]
        if not sets:
            raise HypergraphError("a family needs at least one set")
        return cls(len(sets[0]), tuple(sets))

    @property
    def r(self) -> int:
        return len(self.sets)

    def union(self) -> frozenset:
        return frozenset(v for s in self.sets for v in s)


def _check_vertex(G: Hypergraph, v: int) -> None:
    if not 0 <= v < G.n:
        raise HypergraphError(f"vertex {v} outside 0..{G.n - 1}")


def _check_subset(G: Hypergraph, S: Iterable[int]) -> tuple[int, ...]:
    t = tuple(sorted(S))
    if not 1 <= len(t) <= G.k - 1:
        raise HypergraphError(f"subset size {len(t)} outside 1..{G.k - 1}")
    if len(set(t)) != len(t):
        raise HypergraphError(f"subset {t} repeats a vertex")
    for v in t:
        _check_vertex(G, v)
    return t


def neighborhood(G: Hypergraph, S: Iterable[int]) -> list[tuple[int, ...]]:
    """The (k-i)-sets T with ``S | T`` an edge of G, sorted.

    Only the incident edges of the lowest-degree vertex of S are scanned.
    """
    s = _check_subset(G, S)
    inc = G.incidence
    pivot = min(s, key=lambda v: len(inc[v]))
    sset = set(s)
    out = []
    for idx in inc[pivot]:
        e = G.edges[idx]
        if sset.issubset(e):
            out.append(tuple(v for v in e if v not in sset))
    out.sort()
    return out


def joint_neighborhood(G: Hypergraph, F: SubsetFamily | Iterable[Iterable[int]]) -> list[tuple[int, ...]]:
    """Intersection of :func:`neighborhood` over every set of the family."""
    if not isinstance(F, SubsetFamily):
        F = SubsetFamily.of(F)
    common = None
    for S in F.sets:
        nb = set(neighborhood(G, S))
        common = nb if common is None else common & nb
        if not common:
            return []
    return sorted(common)


def density(G: Hypergraph) -> Fraction:
    """Exact edge density ``|E| / C(n, k)``; use ``float()`` for the float value."""
    if G.n < G.k:
        raise HypergraphError(f"density undefined for n={G.n} < k={G.k}")
    return Fraction(G.num_edges, comb(G.n, G.k))


def is_stable(H: Hypergraph, vertices: Iterable[int]) -> bool:
    """True iff no edge of H lies inside ``vertices``."""
    vs = set(vertices)
    for v in vs:
        _check_vertex(H, v)
    if len(vs) < H.k:
        return True
    inc = H.incidence
    for v in vs:
        for idx in inc[v]:
            if vs.issuperset(H.edges[idx]):
                return False
    return True


def is_linear(H: Hypergraph) -> bool:
    """True iff every two distinct edges share at most one vertex."""
    seen: set[tuple[int, int]] = set()
    for e in H.edges:
        for pair in combinations(e, 2):
            if pair in seen:
                return False
            seen.add(pair)
    return True


def read_hypergraph(text: str) -> Hypergraph:
    """Parse the ``n k m`` header format (``#`` starts a comment line)."""
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line.split()))
    if not rows:
        raise ParseError("missing header 'n k m'", 1)
    lineno, header = rows[0]
    if len(header) != 3:
        raise ParseError("header must be 'n k m'", lineno)
    try:
        n, k, m = (int(x) for x in header)
    except ValueError:
        raise ParseError("header fields must be integers", lineno) from None
    if k < 2 or n < 0 or m < 0:
        raise ParseError(f"invalid header values n={n} k={k} m={m}", lineno)
    body = rows[1:]
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)}", lineno)
    edges = []
    seen = set()
    for lineno, fields in body:
        if len(fields) != k:
            raise ParseError(f"edge has {len(fields)} vertices, expected {k}", lineno)
        try:
            e = tuple(sorted(int(x) for x in fields))
        except ValueError:
            raise ParseError("vertex ids must be integers", lineno) from None
        if len(set(e)) != k:
            raise ParseError(f"edge {e} repeats a vertex", lineno)
        if e[0] < 0 or e[-1] >= n:
            raise ParseError(f"edge {e} has a vertex outside 0..{n - 1}", lineno)
        if e in seen:
            raise ParseError(f"duplicate edge {e}", lineno)
        seen.add(e)
        edges.append(e)
    return Hypergraph(n, k, edges)


def write_hypergraph(G: Hypergraph) -> str:
    lines = [f"{G.n} {G.k} {G.num_edges}"]
    lines.extend(" ".join(map(str, e)) for e in G.edges)
    return "\n".join(lines) + "\n"


def load_hypergraph(path) -> Hypergraph:
    with open(path, encoding="utf-8") as fh:
        return read_hypergraph(fh.read())


def save_hypergraph(G: Hypergraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(write_hypergraph(G))


def complete_hypergraph(n: int, k: int) -> Hypergraph:
    return Hypergraph(n, k, combinations(range(n), k))


def sequence_vertices(H: Hypergraph, seq: Sequence[int], what: str = "sequence") -> tuple[int, ...]:
    """Validate a sequence of distinct vertices of H and return it as a tuple."""
    t = tuple(int(v) for v in seq)
    if len(set(t)) != len(t):
        raise HypergraphError(f"{what} {t} repeats a vertex")
    for v in t:
        _check_vertex(H, v)
    return t
