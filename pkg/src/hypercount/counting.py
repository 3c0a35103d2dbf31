"""Exact embedding counts of a pattern H into a host G.

The search follows a degenerate ordering of H with the pinned vertices as
prefix. Candidate images for the next pattern vertex are the intersection of
the host links of its already-embedded back sets, minus used host vertices,
all kept as integer bitmasks. The last level is never expanded: its
candidates are counted by popcount.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations
from typing import Iterator, Mapping, Sequence

from ._parallel import pmap
from .hypergraph import Hypergraph, HypergraphError, density, is_linear, is_stable, sequence_vertices
from .properties import BddParams, Verdict, check_bdd, exact
from .structure import Ordering, degeneracy, prefix_degenerate_ordering, profile

DEFAULT_NODE_BUDGET = 10**9
INDUCED_MAX_M = 12


class BudgetExceeded(RuntimeError):
    """The search would visit (or visited) more nodes than the budget allows."""


class PreconditionError(RuntimeError):
    """A bound was requested but its hypotheses do not verify on the input."""


@dataclass(frozen=True)
class PinSpec:
    """Pin pattern vertex ``W[j]`` to host vertex ``X[j]``."""

    W: tuple[int, ...] = ()
    X: tuple[int, ...] = ()

    def __post_init__(self):
        W, X = tuple(self.W), tuple(self.X)
        if len(W) != len(X):
            raise HypergraphError(f"pin sequences differ in length: {len(W)} vs {len(X)}")
        if len(set(W)) != len(W) or len(set(X)) != len(X):
            raise HypergraphError("pinned vertices must be distinct")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "X", X)

    @property
    def ell(self) -> int:
        return len(self.W)

    @classmethod
    def parse(cls, text: str) -> "PinSpec":
        """Parse ``"w0:x0,w1:x1"``; an empty string gives no pins."""
        W, X = [], []
        for item in filter(None, (s.strip() for s in text.split(","))):
            try:
                w, x = item.split(":")
                W.append(int(w))
                X.append(int(x))
            except ValueError:
                raise HypergraphError(f"bad pin {item!r}, expected 'w:x'") from None
        return cls(tuple(W), tuple(X))


@dataclass
class CountReport:
    total: int
    induced: int | None
    non_induced: int | None
    expected: float
    relative_error: float | None
    ell: int = 0
    omega: int = 0
    ordering: tuple[int, ...] = ()
    nodes: int = 0

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "induced": self.induced,
            "non_induced": self.non_induced,
            "expected": self.expected,
            "relative_error": self.relative_error,
            "ell": self.ell,
            "omega": self.omega,
            "ordering": list(self.ordering),
            "nodes": self.nodes,
        }


@dataclass
class PartialEmbedding:
    """Injective map from the first ``h-1`` vertices of an ordering into V(G)."""

    assignment: dict[int, int]
    h: int
    clean: str = "not-applicable"
    delta: float | None = None


# --- host tries -----------------------------------------------------------

def _host_trie(G: Hypergraph) -> dict:
    """Nested dicts over ordered (k-1)-tuples of host vertices; leaves are link masks."""
    cache = G.__dict__.get("_ordered_trie")
    if cache is not None:
        return cache
    trie: dict = {}
    for S, mask in G.link_masks.items():
        for perm in permutations(S):
            node = trie
            for v in perm[:-1]:
                node = node.setdefault(v, {})
            node[perm[-1]] = mask
    G.__dict__["_ordered_trie"] = trie
    return trie


def _walk(trie, images) -> int | dict | None:
    node = trie
    for v in images:
        node = node.get(v)
        if node is None:
            return None
    return node


# --- search plan ----------------------------------------------------------

class _Search:
    """Backtracking plan for embedding the first ``depth`` vertices of ``order``."""

    def __init__(self, H: Hypergraph, G: Hypergraph, order: Sequence[int], depth: int | None = None,
                 induced: bool = False, node_budget: int | None = None):
        if H.k != G.k:
            raise HypergraphError(f"uniformity mismatch: pattern k={H.k}, host k={G.k}")
        self.order = tuple(order)
        self.depth = len(self.order) if depth is None else depth
        self.n = G.n
        self.k = G.k
        self.induced = induced
        self.node_budget = node_budget
        pos = {v: i for i, v in enumerate(self.order)}
        prefix = set(self.order[: self.depth])
        back: list[list[tuple[int, ...]]] = [[] for _ in range(self.depth)]
        for e in H.edges:
            if not prefix.issuperset(e):
                continue
            ps = sorted(pos[v] for v in e)
            back[ps[-1]].append(tuple(ps[:-1]))
        self.back = [tuple(sorted(b)) for b in back]
        self.nonback: list[tuple[tuple[int, ...], ...]] = [() for _ in range(self.depth)]
        if induced:
            nb: list[list[tuple[int, ...]]] = [[] for _ in range(self.depth)]
            edge_pos = {tuple(sorted(pos[v] for v in e)) for e in H.edges if prefix.issuperset(e)}
            for ps in combinations(range(self.depth), self.k):
                if ps not in edge_pos:
                    nb[ps[-1]].append(ps[:-1])
            self.nonback = [tuple(x) for x in nb]
        self.trie = _host_trie(G)
        self.full = (1 << G.n) - 1
        self.nodes = 0

    # candidate set for position h given images of earlier positions
    def candidates(self, h: int, img: list[int], used: int) -> int:
        cand = self.full & ~used
        for S in self.back[h]:
            node = _walk(self.trie, [img[q] for q in S])
            if node is None:
                return 0
            cand &= node
            if not cand:
                return 0
        for S in self.nonback[h]:
            node = _walk(self.trie, [img[q] for q in S])
            if node is not None:
                cand &= ~node
        return cand

    def pins_consistent(self, X: Sequence[int]) -> bool:
        img = list(X)
        used = 0
        for h, x in enumerate(X):
            if not self.candidates(h, img, used) >> x & 1:
                return False
            used |= 1 << x
        return True

    def _tick(self):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            raise BudgetExceeded(f"search exceeded node budget {self.node_budget}")

    def count_from(self, img: list[int], used: int, h: int) -> int:
        """Number of ways to extend ``img[:h]`` to all ``depth`` positions."""
        last = self.depth - 1
        if h > last:
            return 1
        self._tick()
        if h == last:
            return self.candidates(h, img, used).bit_count()
        cand = self.candidates(h, img, used)
        if h == last - 1 and not self.induced:
            return self._count_last_two(img, used, cand)
        total = 0
        while cand:
            low = cand & -cand
            img[h] = low.bit_length() - 1
            total += self.count_from(img, used | low, h + 1)
            cand ^= low
        return total

    def _count_last_two(self, img: list[int], used: int, cand: int) -> int:
        """Sum over x in ``cand`` (position h) of the last position's candidate count."""
        h = self.depth - 2
        L = h + 1
        static = self.full & ~used
        rows = []
        for S in self.back[L]:
            if S and S[-1] == h:
                node = _walk(self.trie, [img[q] for q in S[:-1]])
                if node is None:
                    return 0
                rows.append(node)
            else:
                node = _walk(self.trie, [img[q] for q in S])
                if node is None:
                    return 0
                static &= node
        if not static or not cand:
            return 0
        if not rows:
            # each x removes itself from the last level's candidates
            return cand.bit_count() * static.bit_count() - (cand & static).bit_count()
        total = 0
        if len(rows) == 1:
            row = rows[0]
            for x, mk in row.items():
                if cand >> x & 1:
                    total += (static & mk).bit_count()
            return total
        first, rest = rows[0], rows[1:]
        for x, mk in first.items():
            if not cand >> x & 1:
                continue
            m = static & mk
            for row in rest:
                if not m:
                    break
                m &= row.get(x, 0)
            total += m.bit_count()
        return total

    def iter_from(self, img: list[int], used: int, h: int) -> Iterator[tuple[int, ...]]:
        if h == self.depth:
            yield tuple(img[: self.depth])
            return
        self._tick()
        cand = self.candidates(h, img, used)
        while cand:
            low = cand & -cand
            img[h] = low.bit_length() - 1
            yield from self.iter_from(img, used | low, h + 1)
            cand ^= low

    def estimate(self, ell: int, p: float) -> float:
        """Rough node-count estimate: product of expected branching factors."""
        est, width = 1.0, 1.0
        for h in range(ell, self.depth - 1):
            width *= max(self.n - h, 0) * (p ** len(self.back[h]))
            est += width
        return est


def _subtree(task) -> tuple[int, int]:
    search, img, used, h, x = task
    img = list(img)
    img[h] = x
    total = search.count_from(img, used | (1 << x), h + 1)
    return total, search.nodes


def _search_order(H: Hypergraph, W: Sequence[int]) -> tuple[int, ...]:
    d_H, L = degeneracy(H)
    if is_linear(H) and len(W) <= max(H.k, d_H):
        return prefix_degenerate_ordering(H, W).sequence
    ws = set(W)
    return tuple(W) + tuple(v for v in L.sequence if v not in ws)


def _run_count(search: _Search, X: Sequence[int], workers: int) -> int:
    ell = len(X)
    if not search.pins_consistent(X):
        return 0
    img = list(X) + [0] * (search.depth - ell)
    used = 0
    for x in X:
        used |= 1 << x
    if workers <= 1 or ell >= search.depth - 1:
        return search.count_from(img, used, ell)
    cand = search.candidates(ell, img, used)
    firsts = [x for x in range(search.n) if cand >> x & 1]
    parts = pmap(_subtree, [(search, tuple(img), used, ell, x) for x in firsts], workers)
    search.nodes += 1 + sum(nodes for _, nodes in parts)
    return sum(total for total, _ in parts)


def omega(H: Hypergraph, W: Sequence[int]) -> int:
    """Number of edges of H not contained in the vertex set of W."""
    ws = set(sequence_vertices(H, W, "W"))
    return sum(1 for e in H.edges if not ws.issuperset(e))


def count_embeddings(H: Hypergraph, G: Hypergraph, pins: PinSpec | None = None, *,
                     induced_split: bool = False, node_budget: int | None = DEFAULT_NODE_BUDGET,
                     workers: int = 1) -> CountReport:
    """Count embeddings of H into G that extend ``pins``.

    Parameters
    ----------
    H, G : Hypergraph
        Pattern and host, of equal uniformity.
    pins : PinSpec, optional
        ``W`` pattern vertices forced onto ``X`` host vertices.
    induced_split : bool
        Also count induced embeddings (only for patterns with at most 12
        vertices; ``induced``/``non_induced`` stay ``None`` otherwise).
    node_budget : int or None
        Refuse searches estimated or observed to exceed this many nodes.
    workers : int
        Split the first free level across processes; counts are identical.

    Returns
    -------
    CountReport
        ``expected`` is ``n^(m-l) p^omega(H, W)``, which is ``n^m p^e(H)``
        when nothing is pinned.
    """
    pins = pins or PinSpec()
    W = sequence_vertices(H, pins.W, "W")
    X = sequence_vertices(G, pins.X, "X")
    if H.k != G.k:
        raise HypergraphError(f"uniformity mismatch: pattern k={H.k}, host k={G.k}")
    m, n, ell = H.n, G.n, len(W)
    om = omega(H, W)
    p = float(density(G)) if n >= G.k else 0.0
    expected = float(n) ** (m - ell) * p ** om
    order = _search_order(H, W)
    if m > n:
        total, induced, nodes = 0, (0 if induced_split and m <= INDUCED_MAX_M else None), 0
    else:
        search = _Search(H, G, order, node_budget=node_budget)
        if node_budget is not None and search.estimate(ell, p) > node_budget:
            raise BudgetExceeded(f"estimated search size {search.estimate(ell, p):.3g} exceeds budget {node_budget}")
        total = _run_count(search, X, workers)
        nodes = search.nodes
        induced = None
        if induced_split and m <= INDUCED_MAX_M:
            isearch = _Search(H, G, order, induced=True, node_budget=node_budget)
            induced = _run_count(isearch, X, workers)
            nodes += isearch.nodes
    rel = abs(total - expected) / expected if expected > 0 else None
    return CountReport(
        total=total,
        induced=induced,
        non_induced=None if induced is None else total - induced,
        expected=expected,
        relative_error=rel,
        ell=ell,
        omega=om,
        ordering=order,
        nodes=nodes,
    )


def iter_embeddings(H: Hypergraph, G: Hypergraph, order: Sequence[int] | None = None,
                    depth: int | None = None) -> Iterator[dict[int, int]]:
    """Yield every embedding of ``H[order[:depth]]`` into G as a dict."""
    order = tuple(order) if order is not None else _search_order(H, ())
    search = _Search(H, G, order, depth=depth)
    for imgs in search.iter_from([0] * search.depth, 0, 0):
        yield dict(zip(order, imgs))


def _as_map(f) -> dict[int, int]:
    if isinstance(f, PartialEmbedding):
        return dict(f.assignment)
    if isinstance(f, Mapping):
        return {int(a): int(b) for a, b in f.items()}
    return {i: int(x) for i, x in enumerate(f)}


def is_embedding(H: Hypergraph, G: Hypergraph, f) -> bool:
    f = _as_map(f)
    if sorted(f) != list(range(H.n)) or len(set(f.values())) != len(f):
        return False
    if any(not 0 <= x < G.n for x in f.values()):
        return False
    return all(tuple(sorted(f[v] for v in e)) in G.edge_set for e in H.edges)


def classify_induced(H: Hypergraph, G: Hypergraph, f) -> str:
    """``"induced"`` unless some non-edge k-set of H maps onto an edge of G."""
    f = _as_map(f)
    if not is_embedding(H, G, f):
        raise HypergraphError("f is not an embedding of H into G")
    for T in combinations(range(H.n), H.k):
        if T in H.edge_set:
            continue
        if tuple(sorted(f[v] for v in T)) in G.edge_set:
            return "non_induced"
    return "induced"


# --- extension bound and derived caps --------------------------------------

@dataclass
class ExtensionCheck:
    lhs: int
    rhs: float
    holds: bool
    ell: int
    omega: int
    precondition: Verdict | None = field(default=None, repr=False)


def bdd_precondition(H: Hypergraph, G: Hypergraph, C, *, workers: int = 1) -> Verdict:
    """Exact BDD(D_H, C, p) on G with p its density."""
    D_H = profile(H).D_H
    if D_H < 1:
        return Verdict("BDD", True, notes=["D_H = 0: boundedness condition is vacuous"],
                       params={"d": 0, "C": float(exact(C))})
    return check_bdd(G, BddParams(D_H, C), workers=workers)


def extension_rhs(H: Hypergraph, G: Hypergraph, W: Sequence[int], C) -> Fraction:
    m, ell = H.n, len(W)
    return exact(C) ** (m - ell) * Fraction(G.n) ** (m - ell) * density(G) ** omega(H, W)


def check_extension_bound(H: Hypergraph, G: Hypergraph, pins: PinSpec | None, C, *,
                          precondition: Verdict | None = None, workers: int = 1) -> ExtensionCheck:
    """Compare the pinned count with ``C^(m-l) n^(m-l) p^omega(H, W)``.

    The boundedness hypothesis BDD(D_H, C, p) is verified exactly unless a
    verdict for it is passed in; ``PreconditionError`` is raised when it fails.
    """
    pins = pins or PinSpec()
    if not is_linear(H):
        raise PreconditionError("pattern must be linear")
    d_H, _ = degeneracy(H)
    if pins.ell > max(H.k, d_H):
        raise PreconditionError(f"pin length {pins.ell} exceeds max(k, d_H) = {max(H.k, d_H)}")
    if precondition is None:
        precondition = bdd_precondition(H, G, C, workers=workers)
    if not precondition.holds:
        raise PreconditionError("host does not satisfy BDD(D_H, C, p)")
    report = count_embeddings(H, G, pins, node_budget=None, workers=workers)
    rhs = extension_rhs(H, G, pins.W, C)
    return ExtensionCheck(report.total, float(rhs), report.total <= rhs, pins.ell, report.omega, precondition)


def non_induced_bound(H: Hypergraph, G: Hypergraph, C) -> Fraction:
    """``k! C(m, k) C^(m-k+1) n^m p^(e(H)+1)``, the non-induced embedding cap."""
    k, m = H.k, H.n
    return (math.factorial(k) * math.comb(m, k) * exact(C) ** (m - k + 1)
            * Fraction(G.n) ** m * density(G) ** (H.num_edges + 1))


def _ordering_seq(ordering) -> tuple[int, ...]:
    return tuple(ordering.sequence if isinstance(ordering, Ordering) else ordering)


def frontier_family(H: Hypergraph, ordering, h: int) -> list[tuple[int, ...]]:
    """The (k-1)-sets ``e - {v_h}`` over edges e of ``H_h`` containing ``v_h`` (h is 1-based)."""
    seq = _ordering_seq(ordering)
    if not 1 <= h <= len(seq):
        raise HypergraphError(f"h={h} outside 1..{len(seq)}")
    prefix = set(seq[:h])
    v = seq[h - 1]
    return sorted(tuple(u for u in e if u != v) for e in H.edges if v in e and prefix.issuperset(e))


class _PollutionOracle:
    """Memoised membership test for the stable bad families of G."""

    def __init__(self, G: Hypergraph, delta):
        self.G = G
        self.delta = exact(delta)
        self.p = density(G)
        self.memo: dict[tuple, bool] = {}

    def polluted(self, fam: tuple[tuple[int, ...], ...]) -> bool:
        hit = self.memo.get(fam)
        if hit is not None:
            return hit
        G = self.G
        r = len(fam)
        union = {v for S in fam for v in S}
        bad = False
        if len(set(fam)) == r and is_stable(G, union):
            acc = -1
            for S in fam:
                acc &= G.link_masks.get(S, 0)
            target = G.n * self.p ** r
            bad = abs(acc.bit_count() - target) >= self.delta * target
        self.memo[fam] = bad
        return bad


def classify_clean(H: Hypergraph, ordering, h: int, G: Hypergraph, f, delta) -> str:
    """``"clean"`` or ``"polluted"`` for a partial embedding of ``H_(h-1)``.

    The frontier vertex ``v_h``'s back sets are mapped through f; the map is
    polluted when that image family is stable in G and its joint neighborhood
    deviates from ``n p^r`` by at least ``delta n p^r``. When ``v_h`` has no
    back sets the map is clean by convention.
    """
    seq = _ordering_seq(ordering)
    if not is_linear(H):
        raise HypergraphError("clean/polluted classification needs a linear pattern")
    if not 1 < h <= len(seq):
        raise HypergraphError(f"h={h} outside 2..{len(seq)}")
    f = _as_map(f)
    if set(f) != set(seq[: h - 1]) or len(set(f.values())) != len(f):
        raise HypergraphError("f must be an injective map on the first h-1 ordered vertices")
    prefix = set(seq[: h - 1])
    for e in H.edges:
        if prefix.issuperset(e) and tuple(sorted(f[v] for v in e)) not in G.edge_set:
            raise HypergraphError(f"f does not map edge {e} onto an edge of G")
    fam = frontier_family(H, seq, h)
    if not fam:
        return "clean"
    image = tuple(sorted(tuple(sorted(f[v] for v in S)) for S in fam))
    return "polluted" if _PollutionOracle(G, delta).polluted(image) else "clean"


def count_clean_polluted(H: Hypergraph, ordering, h: int, G: Hypergraph, delta) -> tuple[int, int, int]:
    """Tally embeddings of ``H_(h-1)`` into G as (clean, polluted, induced-and-clean)."""
    seq = _ordering_seq(ordering)
    if not is_linear(H):
        raise HypergraphError("clean/polluted classification needs a linear pattern")
    if not 1 < h <= len(seq):
        raise HypergraphError(f"h={h} outside 2..{len(seq)}")
    fam = frontier_family(H, seq, h)
    pos = {v: i for i, v in enumerate(seq)}
    fam_pos = [tuple(pos[v] for v in S) for S in fam]
    oracle = _PollutionOracle(G, delta)
    search = _Search(H, G, seq, depth=h - 1)
    prefix_set = set(seq[: h - 1])
    non_edges = [tuple(pos[v] for v in T) for T in combinations(sorted(prefix_set), H.k)
                 if T not in H.edge_set]
    clean = polluted = induced_clean = 0
    for img in search.iter_from([0] * (h - 1), 0, 0):
        if fam_pos:
            image = tuple(sorted(tuple(sorted(img[q] for q in S)) for S in fam_pos))
            bad = oracle.polluted(image)
        else:
            bad = False
        if bad:
            polluted += 1
            continue
        clean += 1
        if all(tuple(sorted(img[q] for q in T)) not in G.edge_set for T in non_edges):
            induced_clean += 1
    return clean, polluted, induced_clean


def polluted_bound(H: Hypergraph, ordering, h: int, G: Hypergraph, C, delta) -> Fraction:
    """``delta r! ((k-1)!)^r C^(h-1-r(k-1)) n^(h-1) p^e(H_(h-1))`` with r the frontier size."""
    seq = _ordering_seq(ordering)
    k = H.k
    r = len(frontier_family(H, seq, h))
    prefix = set(seq[: h - 1])
    e_prev = sum(1 for e in H.edges if prefix.issuperset(e))
    return (exact(delta) * math.factorial(r) * math.factorial(k - 1) ** r
            * exact(C) ** (h - 1 - r * (k - 1)) * Fraction(G.n) ** (h - 1) * density(G) ** e_prev)
