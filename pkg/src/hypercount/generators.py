"""Seeded random hosts and structured pattern hypergraphs."""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np

from .hypergraph import Hypergraph, HypergraphError, complete_hypergraph
from .properties import exact
from .structure import StructureProfile, profile

KINDS = ("binomial", "fixed-edges", "complete", "loose-path", "loose-cycle", "matching", "planted-bad")

# below this many k-sets binomial sampling flips one coin per k-set
COIN_LIMIT = 2_000_000


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int | None = None
    k: int = 3
    p: float | None = None
    edges: int | None = None
    length: int | None = None
    seed: int | None = None
    plant: tuple[int, ...] | None = None
    boost: float = 2.0

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["plant"] is not None:
            d["plant"] = list(d["plant"])
        return d


def colex_unrank(rank: int, k: int, n: int | None = None) -> tuple[int, ...]:
    """The k-subset at position ``rank`` in colex order (``n`` bounds the search)."""
    if n is None:
        n = k
        while math.comb(n, k) <= rank:
            n *= 2
    return _Unranker(n, k)(rank)


class _Unranker:
    def __init__(self, n: int, k: int):
        self.k = k
        self.cols = {j: [math.comb(c, j) for c in range(n + 1)] for j in range(1, k + 1)}

    def __call__(self, rank: int) -> tuple[int, ...]:
        out = []
        for j in range(self.k, 0, -1):
            c = bisect_right(self.cols[j], rank) - 1
            out.append(c)
            rank -= self.cols[j][c]
        return tuple(reversed(out))


def colex_rank(S) -> int:
    return sum(math.comb(v, j + 1) for j, v in enumerate(sorted(S)))


def _rng(seed: int | None) -> np.random.Generator:
    if seed is None:
        raise HypergraphError("random generators need an explicit seed")
    return np.random.default_rng(seed)


def _binomial_ranks(total: int, p: float, rng: np.random.Generator) -> list[int]:
    if p <= 0:
        return []
    if p >= 1:
        return list(range(total))
    if total <= COIN_LIMIT:
        return np.flatnonzero(rng.random(total) < p).tolist()
    # geometric skipping: gaps between successes are Geometric(p) - 1
    ranks, pos = [], -1
    while True:
        gaps = rng.geometric(p, size=4096)
        for g in gaps.tolist():
            pos += g
            if pos >= total:
                return ranks
            ranks.append(pos)


def _sample_distinct(total: int, m: int, rng: np.random.Generator) -> list[int]:
    """Floyd's algorithm: m distinct integers from range(total)."""
    chosen: set[int] = set()
    for j in range(total - m, total):
        t = int(rng.integers(0, j + 1))
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def fixed_edge_count(n: int, k: int, p) -> int:
    """``p * C(n, k)`` rounded half-to-even."""
    return round(exact(p) * math.comb(n, k))


def loose_path(k: int, length: int) -> Hypergraph:
    if length < 1:
        raise HypergraphError("loose path needs length >= 1")
    n = length * (k - 1) + 1
    return Hypergraph(n, k, [range(j * (k - 1), j * (k - 1) + k) for j in range(length)])


def loose_cycle(k: int, length: int) -> Hypergraph:
    if length < 3:
        raise HypergraphError("loose cycle needs length >= 3")
    n = length * (k - 1)
    return Hypergraph(n, k, [[(j * (k - 1) + t) % n for t in range(k)] for j in range(length)])


def matching(k: int, size: int) -> Hypergraph:
    if size < 1:
        raise HypergraphError("matching needs size >= 1")
    return Hypergraph(size * k, k, [range(j * k, (j + 1) * k) for j in range(size)])


def _plant(G: Hypergraph, target: tuple[int, ...], boost: float, p: Fraction, rng) -> Hypergraph:
    """Grow the link of ``target`` to ``ceil(boost * n * p)`` vertices (capped at n-k+1)."""
    k, n = G.k, G.n
    if len(target) != k - 1 or len(set(target)) != k - 1 or not all(0 <= v < n for v in target):
        raise HypergraphError(f"plant target must be {k - 1} distinct vertices < {n}")
    want = min(n - (k - 1), math.ceil(exact(boost) * n * p))
    mask = G.link_masks.get(tuple(sorted(target)), 0)
    have = mask.bit_count()
    if have >= want:
        return G
    outside = [x for x in range(n) if x not in target and not mask >> x & 1]
    extra = rng.choice(len(outside), size=want - have, replace=False)
    new = [tuple(sorted(target + (outside[j],))) for j in sorted(extra.tolist())]
    return Hypergraph(n, k, list(G.edges) + new)


def generate(spec: GenSpec) -> Hypergraph:
    """Build the hypergraph described by ``spec``; random kinds are deterministic per seed."""
    kind, k = spec.kind, spec.k
    if kind not in KINDS:
        raise HypergraphError(f"unknown generator kind {kind!r}; choose from {', '.join(KINDS)}")
    if k < 2:
        raise HypergraphError("k must be >= 2")
    if kind == "loose-path":
        return loose_path(k, _need(spec.length, "length"))
    if kind == "loose-cycle":
        return loose_cycle(k, _need(spec.length, "length"))
    if kind == "matching":
        return matching(k, _need(spec.length, "length"))
    n = _need(spec.n, "n")
    if n < k:
        raise HypergraphError(f"need n >= k, got n={n}, k={k}")
    total = math.comb(n, k)
    if kind == "complete":
        return complete_hypergraph(n, k)
    if kind == "fixed-edges":
        m = spec.edges if spec.edges is not None else fixed_edge_count(n, k, _need(spec.p, "p"))
        if not 0 <= m <= total:
            raise HypergraphError(f"cannot place {m} edges among {total} k-sets")
        ranks = _sample_distinct(total, m, _rng(spec.seed))
        unrank = _Unranker(n, k)
        return Hypergraph(n, k, [unrank(r) for r in ranks])
    p = float(_need(spec.p, "p"))
    if not 0 <= p <= 1:
        raise HypergraphError(f"p={p} outside [0, 1]")
    rng = _rng(spec.seed)
    unrank = _Unranker(n, k)
    G = Hypergraph(n, k, [unrank(r) for r in _binomial_ranks(total, p, rng)])
    if kind == "binomial":
        return G
    target = tuple(spec.plant) if spec.plant is not None else tuple(range(k - 1))
    return _plant(G, target, spec.boost, exact(p), rng)


def _need(value, name: str):
    if value is None:
        raise HypergraphError(f"generator spec is missing {name!r}")
    return value


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    H: Hypergraph = field(repr=False)
    profile: StructureProfile


def _catalog_specs():
    for L in (3, 4, 5):
        yield f"path-k2-l{L}", loose_path(2, L)
    for L in (4, 5, 6, 7):
        yield f"cycle-k2-l{L}", loose_cycle(2, L)
    for s in (2, 3, 4):
        yield f"matching-k2-s{s}", matching(2, s)
    for L in (2, 3):
        yield f"path-k3-l{L}", loose_path(3, L)
    for L in (3, 4):
        yield f"cycle-k3-l{L}", loose_cycle(3, L)
    yield "matching-k3-s2", matching(3, 2)
    yield "path-k4-l2", loose_path(4, 2)


def pattern_catalog() -> list[CatalogEntry]:
    """Built-in linear, connector-free patterns on at least four vertices."""
    out = []
    for name, H in _catalog_specs():
        prof = profile(H)
        if not (prof.linear and prof.connector_free and H.n >= 4):
            raise AssertionError(f"catalog pattern {name} violates the counting hypotheses")
        out.append(CatalogEntry(name, H, prof))
    return out


def catalog_pattern(name: str) -> Hypergraph:
    for entry in pattern_catalog():
        if entry.name == name:
            return entry.H
    raise KeyError(f"no catalog pattern named {name!r}")
