"""Boundedness and tuple property checkers, bad families, and two numeric facts.

All bounds are compared exactly: densities are rationals, user constants are
converted through their shortest decimal representation, and every per-family
test reduces to an integer range check on the joint-neighborhood size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from functools import partial
from itertools import combinations, islice
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from ._parallel import pmap
from .hypergraph import Hypergraph, HypergraphError, SubsetFamily, density, is_stable

EXACT_FAMILY_LIMIT = 2_000_000
MAX_WITNESSES = 16
CHUNK_FIRST = 64
SAMPLE_CHUNK = 1024
CONFIDENCE = 0.95


class ParameterError(ValueError):
    pass


class ExactCheckInfeasible(ParameterError):
    """Raised when exact enumeration would exceed the family limit."""


def exact(x) -> Fraction:
    """Convert a user-facing number to a Fraction via its shortest decimal repr."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class BddParams:
    d: int
    C: float
    i: int | None = None
    p: Fraction | float | None = None
    mode: str = "exact"
    sample_size: int = 10_000
    seed: int = 0


@dataclass(frozen=True)
class TupleParams:
    d: int
    delta: float
    i: int | None = None
    p: Fraction | float | None = None
    mode: str = "exact"
    sample_size: int = 10_000
    seed: int = 0


@dataclass(frozen=True)
class PseudoParams:
    d1: int
    C: float
    d2: int
    delta: float
    mode: str = "exact"
    sample_size: int = 10_000
    seed: int = 0


@dataclass
class Witness:
    family: SubsetFamily
    count: int

    def to_dict(self) -> dict:
        return {"r": self.family.r, "sets": [list(s) for s in self.family.sets], "count": self.count}


@dataclass
class RoundReport:
    """Outcome for a single family size r."""

    r: int
    checked: int
    bad: int
    holds: bool
    total_families: int
    bound: str
    min_count: int | None = None
    max_count: int | None = None
    max_relative_deviation: float | None = None
    confidence_interval: tuple[float, float] | None = None

    @property
    def bad_fraction(self) -> float:
        return self.bad / self.checked if self.checked else 0.0


@dataclass
class Verdict:
    """Result of a BDD / TUPLE / pseudorandomness check."""

    property: str
    holds: bool
    witnesses: list[Witness] = field(default_factory=list)
    checked: int = 0
    bad_fraction: float | None = None
    mode: str = "exact"
    rounds: list[RoundReport] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    parts: dict[str, "Verdict"] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        rounds = []
        for rr in self.rounds:
            d = asdict(rr)
            d["bad_fraction"] = rr.bad_fraction
            if rr.confidence_interval is not None:
                d["confidence_interval"] = list(rr.confidence_interval)
            rounds.append(d)
        return {
            "property": self.property,
            "holds": self.holds,
            "mode": self.mode,
            "checked": self.checked,
            "bad_fraction": self.bad_fraction,
            "params": self.params,
            "rounds": rounds,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "parts": {k: v.to_dict() for k, v in self.parts.items()},
            "notes": list(self.notes),
        }


# --- neighborhood indexes -------------------------------------------------

def neighborhood_masks(G: Hypergraph, i: int) -> dict[tuple[int, ...], int]:
    """Map i-sets with a non-empty neighborhood to a bitmask of their (k-i)-set neighbors.

    For ``i == k-1`` bit ``x`` stands for vertex ``x``; otherwise bits index
    the (k-i)-sets in order of first appearance.
    """
    cache = G.__dict__.setdefault("_nbr_masks", {})
    if i in cache:
        return cache[i]
    if not 1 <= i <= G.k - 1:
        raise ParameterError(f"subset size i={i} outside 1..{G.k - 1}")
    if i == G.k - 1:
        masks = G.link_masks
    else:
        index: dict[tuple[int, ...], int] = {}
        masks = {}
        for e in G.edges:
            for S in combinations(e, i):
                T = tuple(v for v in e if v not in S)
                bit = index.setdefault(T, len(index))
                masks[S] = masks.get(S, 0) | (1 << bit)
    cache[i] = masks
    return masks


# --- scanning machinery ---------------------------------------------------

@dataclass
class _Tally:
    checked: int = 0
    bad: int = 0
    min_count: int | None = None
    max_count: int | None = None
    witnesses: list = field(default_factory=list)

    def merge(self, other: "_Tally", cap: int | None) -> None:
        self.checked += other.checked
        self.bad += other.bad
        if other.min_count is not None:
            self.min_count = other.min_count if self.min_count is None else min(self.min_count, other.min_count)
            self.max_count = other.max_count if self.max_count is None else max(self.max_count, other.max_count)
        room = None if cap is None else cap - len(self.witnesses)
        if room is None:
            self.witnesses.extend(other.witnesses)
        elif room > 0:
            self.witnesses.extend(other.witnesses[:room])


def _scan_exact(task) -> _Tally:
    """Scan families whose smallest set index lies in ``[lo, hi)``.

    Families are index tuples over ``masks``; a zero running intersection
    settles a whole subtree at once since every completion has count 0.
    """
    masks, r, lo, hi, good_lo, good_hi, cap = task
    N = len(masks)
    t = _Tally()

    def record(count: int, fam: tuple[int, ...], multiplicity: int, rest_from: int):
        t.checked += multiplicity
        t.min_count = count if t.min_count is None else min(t.min_count, count)
        t.max_count = count if t.max_count is None else max(t.max_count, count)
        if good_lo <= count <= good_hi:
            return
        t.bad += multiplicity
        need = None if cap is None else cap - len(t.witnesses)
        if need is not None and need <= 0:
            return
        missing = r - len(fam)
        if missing == 0:
            t.witnesses.append((fam, count))
        else:
            for tail in islice(combinations(range(rest_from, N), missing), need):
                t.witnesses.append((fam + tail, count))

    def rec(start: int, stop: int, acc: int, fam: tuple[int, ...]):
        depth = len(fam) + 1
        for j in range(start, stop):
            m = acc & masks[j]
            if depth == r:
                record(m.bit_count(), fam + (j,), 1, 0)
            elif m == 0:
                record(0, fam + (j,), math.comb(N - j - 1, r - depth), j + 1)
            else:
                rec(j + 1, N - (r - depth) + 1, m, fam + (j,))

    rec(lo, min(hi, N - r + 1), -1, ())
    return t


def _sample_chunk(task) -> _Tally:
    masks_by_set, n, i, r, seed, chunk, size, good_lo, good_hi, cap = task
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, r, chunk])))
    t = _Tally()
    for _ in range(size):
        while True:
            fam = tuple(tuple(sorted(int(v) for v in rng.choice(n, size=i, replace=False))) for _ in range(r))
            if len(set(fam)) == r:
                break
        acc = -1
        for S in fam:
            acc &= masks_by_set.get(S, 0)
        count = acc.bit_count()
        t.checked += 1
        t.min_count = count if t.min_count is None else min(t.min_count, count)
        t.max_count = count if t.max_count is None else max(t.max_count, count)
        if not good_lo <= count <= good_hi:
            t.bad += 1
            if cap is None or len(t.witnesses) < cap:
                t.witnesses.append((tuple(sorted(fam)), count))
    return t


def _families(G: Hypergraph, i: int, r: int, good_lo: int, good_hi: int, *, mode: str,
              sample_size: int, seed: int, cap: int | None, workers: int) -> _Tally:
    """Tally families of r distinct i-sets whose joint count falls outside ``[good_lo, good_hi]``."""
    n_sets = math.comb(G.n, i)
    total = math.comb(n_sets, r)
    masks = neighborhood_masks(G, i)
    if mode == "exact":
        if total > EXACT_FAMILY_LIMIT:
            raise ExactCheckInfeasible(
                f"{total} families of {r} {i}-sets exceed the exact limit {EXACT_FAMILY_LIMIT}; use sampled mode")
        sets = list(combinations(range(G.n), i))
        mask_list = [masks.get(S, 0) for S in sets]
        tasks = [(mask_list, r, lo, lo + CHUNK_FIRST, good_lo, good_hi, cap)
                 for lo in range(0, max(n_sets - r + 1, 0), CHUNK_FIRST)]
        out = _Tally()
        for part in pmap(_scan_exact, tasks, workers):
            out.merge(part, cap)
        out.witnesses = [(tuple(sets[j] for j in fam), c) for fam, c in out.witnesses]
        return out
    if mode == "sampled":
        if sample_size < 1:
            raise ParameterError("sample_size must be >= 1")
        if total < r or n_sets < r:
            raise ParameterError(f"no families of {r} distinct {i}-sets on {G.n} vertices")
        tasks = []
        for chunk, start in enumerate(range(0, sample_size, SAMPLE_CHUNK)):
            size = min(SAMPLE_CHUNK, sample_size - start)
            tasks.append((masks, G.n, i, r, seed, chunk, size, good_lo, good_hi, cap))
        out = _Tally()
        for part in pmap(_sample_chunk, tasks, workers):
            out.merge(part, cap)
        return out
    raise ParameterError(f"unknown mode {mode!r}")


def _wilson(bad: int, n: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    ph = bad / n
    denom = 1 + z * z / n
    centre = (ph + z * z / (2 * n)) / denom
    half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, centre - half), min(1.0, centre + half))


def _resolve(G: Hypergraph, i: int | None, p) -> tuple[int, Fraction]:
    i = G.k - 1 if i is None else int(i)
    if not 1 <= i <= G.k - 1:
        raise ParameterError(f"subset size i={i} outside 1..{G.k - 1}")
    pp = density(G) if p is None else exact(p)
    if not 0 <= pp <= 1:
        raise ParameterError(f"density p={p} outside [0, 1]")
    return i, pp


def _to_witnesses(raw, i: int) -> list[Witness]:
    return [Witness(SubsetFamily(i, fam), c) for fam, c in raw]


def _rel_dev(count: int | None, target: Fraction) -> float | None:
    if count is None or target == 0:
        return None
    return float(abs(count - target) / target)


# --- public checkers ------------------------------------------------------

def check_bdd(G: Hypergraph, P: BddParams, *, workers: int = 1,
              max_witnesses: int = MAX_WITNESSES) -> Verdict:
    """Check the boundedness property BDD_i(d, C, p).

    Every family of ``r <= d`` distinct i-sets must have a joint neighborhood
    of at most ``C * n**(k-i) * p**r`` elements. A family exceeding it is a
    violation; equality is allowed.

    Parameters
    ----------
    G : Hypergraph
    P : BddParams
        ``i`` defaults to ``k-1`` and ``p`` to the density of G.
    workers : int
        Worker processes; the result does not depend on it.

    Returns
    -------
    Verdict
    """
    if P.d < 1:
        raise ParameterError("d must be >= 1")
    C = exact(P.C)
    if C <= 0:
        raise ParameterError("C must be positive")
    i, p = _resolve(G, P.i, P.p)
    verdict = Verdict("BDD", True, mode=P.mode,
                      params={"d": P.d, "C": float(C), "i": i, "p": float(p), "mode": P.mode,
                              "sample_size": P.sample_size if P.mode == "sampled" else None,
                              "seed": P.seed if P.mode == "sampled" else None})
    if C <= 1:
        verdict.notes.append("C <= 1 is outside the property's usual range C > 1")
    for r in range(1, P.d + 1):
        if math.comb(G.n, i) < r:
            break
        limit = C * Fraction(G.n) ** (G.k - i) * p ** r
        tally = _families(G, i, r, 0, math.floor(limit), mode=P.mode, sample_size=P.sample_size,
                          seed=P.seed, cap=max_witnesses, workers=workers)
        ok = tally.bad == 0
        verdict.rounds.append(RoundReport(
            r=r, checked=tally.checked, bad=tally.bad, holds=ok,
            total_families=math.comb(math.comb(G.n, i), r), bound=f"count <= {float(limit)!r}",
            min_count=tally.min_count, max_count=tally.max_count,
        ))
        verdict.checked += tally.checked
        room = max_witnesses - len(verdict.witnesses)
        verdict.witnesses.extend(_to_witnesses(tally.witnesses[:max(room, 0)], i))
        verdict.holds &= ok
    return verdict


def check_tuple(G: Hypergraph, P: TupleParams, *, workers: int = 1,
                max_witnesses: int = MAX_WITNESSES) -> Verdict:
    """Check the tuple property TUPLE_i(d, delta, p).

    For each ``r <= d`` a family is good when its joint-neighborhood size lies
    strictly within ``delta`` (relative) of ``C(n, k-i) * p**r``. The property
    holds when at most ``delta * C(C(n, i), r)`` families are bad for every r.
    In sampled mode the per-r bad fraction is estimated and a Wilson interval
    is attached to each round.
    """
    if P.d < 1:
        raise ParameterError("d must be >= 1")
    delta = exact(P.delta)
    if not 0 < delta < 1:
        raise ParameterError(f"delta={P.delta} outside (0, 1)")
    i, p = _resolve(G, P.i, P.p)
    verdict = Verdict("TUPLE", True, mode=P.mode, bad_fraction=0.0,
                      params={"d": P.d, "delta": float(delta), "i": i, "p": float(p), "mode": P.mode,
                              "sample_size": P.sample_size if P.mode == "sampled" else None,
                              "seed": P.seed if P.mode == "sampled" else None})
    if p == 0:
        verdict.notes.append("p = 0: the deviation band is empty, every family is bad")
    for r in range(1, P.d + 1):
        n_sets = math.comb(G.n, i)
        if n_sets < r:
            break
        target = math.comb(G.n, G.k - i) * p ** r
        lo, hi = target - delta * target, target + delta * target
        good_lo, good_hi = math.floor(lo) + 1, math.ceil(hi) - 1
        tally = _families(G, i, r, good_lo, good_hi, mode=P.mode, sample_size=P.sample_size,
                          seed=P.seed, cap=max_witnesses, workers=workers)
        total = math.comb(n_sets, r)
        if P.mode == "exact":
            ok = tally.bad <= delta * total
            ci = None
        else:
            ok = Fraction(tally.bad, tally.checked) <= delta
            ci = _wilson(tally.bad, tally.checked)
        dev = max((_rel_dev(c, target) or 0.0) for c in (tally.min_count, tally.max_count)) \
            if tally.min_count is not None and target else None
        rr = RoundReport(
            r=r, checked=tally.checked, bad=tally.bad, holds=ok, total_families=total,
            bound=f"|count - {float(target)!r}| < {float(delta * target)!r}",
            min_count=tally.min_count, max_count=tally.max_count,
            max_relative_deviation=dev, confidence_interval=ci,
        )
        verdict.rounds.append(rr)
        verdict.checked += tally.checked
        verdict.bad_fraction = max(verdict.bad_fraction, rr.bad_fraction)
        room = max_witnesses - len(verdict.witnesses)
        verdict.witnesses.extend(_to_witnesses(tally.witnesses[:max(room, 0)], i))
        verdict.holds &= ok
    if verdict.holds:
        verdict.witnesses = []
    return verdict


def check_pseudorandom(G: Hypergraph, P: PseudoParams, *, workers: int = 1,
                       max_witnesses: int = MAX_WITNESSES) -> Verdict:
    """(d1, C, d2, delta, p)-pseudorandomness with p the density of G."""
    p = density(G)
    bdd = check_bdd(G, BddParams(P.d1, P.C, None, p, P.mode, P.sample_size, P.seed),
                    workers=workers, max_witnesses=max_witnesses)
    tup = check_tuple(G, TupleParams(P.d2, P.delta, None, p, P.mode, P.sample_size, P.seed),
                      workers=workers, max_witnesses=max_witnesses)
    v = Verdict(
        "PSEUDO", bdd.holds and tup.holds,
        witnesses=(bdd.witnesses + tup.witnesses)[:max_witnesses],
        checked=bdd.checked + tup.checked,
        bad_fraction=tup.bad_fraction,
        mode=P.mode,
        params={"d1": P.d1, "C": float(exact(P.C)), "d2": P.d2, "delta": float(exact(P.delta)),
                "p": float(p), "mode": P.mode},
        parts={"bdd": bdd, "tuple": tup},
    )
    if v.holds:
        v.witnesses = []
    return v


def bad_families(G: Hypergraph, delta, r: int, stable_only: bool = False, *,
                 mode: str = "exact", sample_size: int = 10_000, seed: int = 0,
                 workers: int = 1) -> list[SubsetFamily]:
    """Families of r distinct (k-1)-sets deviating by at least ``delta * n * p**r``.

    With ``stable_only`` only families whose union spans no edge of G are
    kept. Sampled mode returns the distinct bad families seen in the sample.
    """
    if r < 1:
        raise ParameterError("r must be >= 1")
    d = exact(delta)
    if d <= 0:
        raise ParameterError("delta must be positive")
    i = G.k - 1
    p = density(G)
    target = G.n * p ** r
    good_lo, good_hi = math.floor(target - d * target) + 1, math.ceil(target + d * target) - 1
    if math.comb(G.n, i) < r:
        return []
    tally = _families(G, i, r, good_lo, good_hi, mode=mode, sample_size=sample_size,
                      seed=seed, cap=None, workers=workers)
    fams = sorted({fam for fam, _ in tally.witnesses})
    out = [SubsetFamily(i, fam) for fam in fams]
    if stable_only:
        out = [F for F in out if is_stable(G, F.union())]
    return out


# --- numeric facts --------------------------------------------------------

def concentration_check(a: Sequence[float], a_target: float, gamma: float, delta: float) -> tuple[bool, bool]:
    """Premises and conclusion of the first/second-moment concentration fact.

    Returns ``(premises_hold, conclusion_holds)`` where the premises are
    ``sum(a) >= (1-gamma) N a_target`` and ``sum(a^2) <= (1+gamma) N a_target^2``
    and the conclusion is that more than ``(1-delta) N`` entries satisfy
    ``|a_i - a_target| < delta a_target``.
    """
    arr = np.asarray(a, dtype=float)
    if arr.size == 0:
        raise ParameterError("sequence must be non-empty")
    if a_target <= 0:
        raise ParameterError("a_target must be positive")
    if np.any(arr < 0):
        raise ParameterError("entries must be non-negative")
    N = arr.size
    premises = bool(arr.sum() >= (1 - gamma) * N * a_target and
                    (arr * arr).sum() <= (1 + gamma) * N * a_target ** 2)
    inside = int(np.count_nonzero(np.abs(arr - a_target) < delta * a_target))
    return premises, bool(inside > (1 - delta) * N)


def _two_level_counterexample(N: int, gamma: float, delta: float) -> bool:
    """Whether some length-N sequence meets the premises but breaks the conclusion.

    Worst cases put ``b = N - floor((1-delta) N)`` entries exactly on the band
    edge (split between ``1-delta`` and ``1+delta``) and the rest at the
    common value minimising the second moment at the smallest allowed sum.
    Values are relative to ``a_target = 1``.
    """
    good_max = math.floor((1 - delta) * N + 1e-12)
    if good_max >= N:
        good_max = N - 1
    b = N - good_max
    smin = (1 - gamma) * N
    for low in range(b + 1):
        high = b - low
        fixed = low * (1 - delta) + high * (1 + delta)
        free = N - b
        if free == 0:
            s, sq = fixed, low * (1 - delta) ** 2 + high * (1 + delta) ** 2
            if s >= smin and sq <= (1 + gamma) * N:
                return True
            continue
        c = max((smin - fixed) / free, 0.0)
        sq = low * (1 - delta) ** 2 + high * (1 + delta) ** 2 + free * c * c
        if fixed + free * c >= smin - 1e-12 and sq <= (1 + gamma) * N:
            return True
    return False


def concentration_gamma(delta: float, n_max: int = 200, iters: int = 60) -> float:
    """Largest gamma (by bisection) for which no worst-case sequence of length <= n_max
    satisfies the premises yet fails the conclusion, halved for margin."""
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")

    def falsified(g: float) -> bool:
        return any(_two_level_counterexample(N, g, delta) for N in range(1, n_max + 1))

    lo, hi = 0.0, 1.0
    if not falsified(hi):
        return hi / 2
    for _ in range(iters):
        mid = (lo + hi) / 2
        if falsified(mid):
            hi = mid
        else:
            lo = mid
    return lo / 2


def concentration_table(deltas: Sequence[float], n_max: int = 200) -> dict[float, float]:
    return {float(d): concentration_gamma(d, n_max) for d in deltas}


def _falling(x: Fraction, r: int) -> Fraction:
    out = Fraction(1)
    for j in range(r):
        out *= x - j
    return out


def binomial_ratio_gap(n: int, a, r: int) -> float:
    """Relative gap ``|C(na, r) - a^r C(n, r)| / (a^r C(n, r))``.

    ``C(na, r)`` is the real-argument binomial (falling factorial over r!);
    when ``na < r`` it is taken as ``C(floor(na), r)``, i.e. zero.
    """
    if not (n >= r >= 1):
        raise ParameterError("need n >= r >= 1")
    a = exact(a)
    if not 0 < a <= 1:
        raise ParameterError("a must lie in (0, 1]")
    x = n * a
    top = Fraction(math.comb(math.floor(x), r)) if x < r else _falling(x, r) / math.factorial(r)
    ref = a ** r * math.comb(n, r)
    return float(abs(top - ref) / ref)
