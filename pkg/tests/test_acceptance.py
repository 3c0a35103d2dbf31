"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL summary that is printed at the end of
the pytest run (see ``conftest.pytest_terminal_summary``).
"""
import json
import os
import random
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from itertools import permutations

import numpy as np

from hypercount import (BddParams, GenSpec, PinSpec, PseudoParams, binomial_ratio_gap,
                        catalog_pattern, check_bdd, check_pseudorandom, concentration_check,
                        concentration_table, count_clean_polluted, count_embeddings, degeneracy, density, generate,
                        iter_embeddings, non_induced_bound, pattern_catalog, polluted_bound,
                        prefix_degenerate_ordering, profile)
from hypercount.counting import bdd_precondition, extension_rhs
from hypercount.harness import Experiment, median_relative_errors, run_experiment
from oracles import (brute_bdd, brute_count, brute_degeneracy, brute_left_degrees, random_hypergraph,
                     random_linear)

RESULTS: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[criterion] = (ok, line)
    print(line)
    assert ok, line


def small_corpus(seed: int = 2024):
    """Linear patterns with m <= 5 paired with random hosts on n <= 7 vertices."""
    rng = random.Random(seed)
    out = []
    for k in (2, 3):
        for _ in range(60):
            H = random_linear(rng, rng.randint(k, 5), k, tries=rng.randint(1, 8))
            G = random_hypergraph(rng, rng.randint(max(H.n, k), 7), k, rng.choice([0.3, 0.5, 0.7, 0.9]))
            out.append((H, G))
    for name in ("path-k3-l2", "path-k2-l3", "cycle-k2-l4", "cycle-k2-l5", "matching-k2-s2"):
        H = catalog_pattern(name)
        for j in range(4):
            out.append((H, random_hypergraph(rng, 7, H.k, 0.5 + 0.1 * j)))
    return out


def test_criterion_1_counting_oracle():
    rng = random.Random(1)
    t0 = time.perf_counter()
    pairs = mismatches = 0
    while pairs < 240:
        k = rng.choice((2, 3))
        H = random_hypergraph(rng, rng.randint(k, 5), k, rng.random())
        G = random_hypergraph(rng, rng.randint(k, 7), k, rng.random())
        pairs += 1
        mismatches += count_embeddings(H, G).total != brute_count(H, G)
    elapsed = time.perf_counter() - t0
    record(1, mismatches == 0 and elapsed < 60,
           f"{pairs} random pairs, {mismatches} mismatches vs brute force, {elapsed:.1f}s")


def test_criterion_2_extension_lemma():
    verified = checked = violations = 0
    for H, G in small_corpus():
        d_H, _ = degeneracy(H)
        for C in (Fraction(3, 2), Fraction(2), Fraction(3)):
            if not bdd_precondition(H, G, C).holds:
                continue
            verified += 1
            embs = list(iter_embeddings(H, G))
            for ell in range(0, min(max(H.k, d_H), H.n) + 1):
                for W in permutations(range(H.n), ell):
                    per_x = Counter(tuple(f[w] for w in W) for f in embs)
                    worst = max(per_x.values(), default=0)
                    checked += 1
                    violations += worst > extension_rhs(H, G, W, C)
    # spot-check the per-X tallies against the pinned counter itself
    H, G = small_corpus()[-1]
    for W, X in (((0, 1), (2, 3)), ((1, 2, 0), (4, 5, 6))):
        assert count_embeddings(H, G, PinSpec(W, X)).total == brute_count(H, G, W, X)

    H = catalog_pattern("path-k3-l2")
    host_verified = host_violations = 0
    worst_ratio = 0.0
    for seed in range(100):
        G = generate(GenSpec("binomial", n=25, k=3, p=0.4, seed=seed))
        lhs = count_embeddings(H, G).total
        rhs = extension_rhs(H, G, (), 2)
        worst_ratio = max(worst_ratio, float(lhs / rhs))
        if bdd_precondition(H, G, 2).holds:
            host_verified += 1
            host_violations += lhs > rhs
    record(2, violations == 0 and host_violations == 0,
           f"(a) {verified} verified (H,G,C), {checked} pin prefixes x all X, {violations} violations; "
           f"(b) BDD(2,2) verified on {host_verified}/100 hosts, {host_violations} violations "
           f"(unconditional max lhs/rhs = {worst_ratio:.4f})")


def linear_corpus(seed: int = 3):
    rng = random.Random(seed)
    Hs = [e.H for e in pattern_catalog()]
    for _ in range(100):
        k = rng.choice((2, 3, 4))
        Hs.append(random_linear(rng, rng.randint(k, 8), k, tries=rng.randint(1, 12)))
    return Hs


def test_criterion_3_prefix_orderings():
    bad = checked = 0
    for H in linear_corpus():
        p = profile(H)
        limit = min(max(H.k, p.d_H), H.n)
        for ell in range(limit + 1):
            for W in permutations(range(H.n), ell):
                o = prefix_degenerate_ordering(H, W)
                checked += 1
                degs = brute_left_degrees(H, o.sequence)
                bad += o.sequence[:ell] != W or max(degs, default=0) > p.D_H or list(o.left_degrees) != degs
    record(3, bad == 0, f"{checked} (H, W) pairs over {len(linear_corpus())} linear patterns, {bad} failures")


def test_criterion_4_degeneracy():
    rng = random.Random(4)
    Hs = linear_corpus()
    for _ in range(100):
        k = rng.choice((2, 3))
        Hs.append(random_hypergraph(rng, rng.randint(k, 8), k, rng.random() * 0.6))
    bad = sum(degeneracy(H)[0] != brute_degeneracy(H) for H in Hs)
    record(4, bad == 0, f"{len(Hs)} patterns with m <= 8, {bad} mismatches vs exhaustive induced minimum")


def test_criterion_5_lemma_2_4():
    rng = random.Random(5)
    premises = counterexamples = oracle_mismatch = 0
    for _ in range(500):
        G = random_hypergraph(rng, rng.randint(4, 9), 3, rng.uniform(0.05, 0.95))
        C = rng.choice([Fraction(3, 2), Fraction(2), Fraction(3)])
        top = check_bdd(G, BddParams(2, C, i=2))
        low = check_bdd(G, BddParams(2, C, i=1))
        oracle_mismatch += low.holds != brute_bdd(G, 2, C, 1, density(G))
        if top.holds:
            premises += 1
            counterexamples += not low.holds
    record(5, counterexamples == 0 and oracle_mismatch == 0 and premises > 0,
           f"500 hosts, premise verified on {premises}, {counterexamples} counterexamples, "
           f"{oracle_mismatch} checker/oracle mismatches at i=1")


def test_criterion_6_band_trend():
    cfg = Experiment.from_dict({
        "name": "band", "assertions": ["thm14-band"], "epsilon": 0.25,
        "pattern": {"catalog": "path-k3-l2"},
        "host": {"kind": "binomial", "k": 3, "n": [40, 60, 80, 100], "p_scale": 2.0, "p_exponent": 0.45,
                 "seed_count": 10},
    })
    t0 = time.perf_counter()
    recs = run_experiment(cfg, workers=os.cpu_count() or 1)
    med = median_relative_errors(recs)
    ns = sorted(med)
    monotone = all(med[a] >= med[b] for a, b in zip(ns, ns[1:]))
    ok = monotone and med[100] < 0.25 and len(recs) == 40
    shown = ", ".join(f"n={n}: {med[n]:.4f}" for n in ns)
    record(6, ok, f"median relative error {shown}; non-increasing={monotone}; "
                  f"{time.perf_counter() - t0:.0f}s")


def test_criterion_7_non_induced_bound():
    verified = violations = 0
    for H, G in small_corpus():
        if H.n < H.k:
            continue
        for C in (Fraction(3, 2), Fraction(2), Fraction(3)):
            if not bdd_precondition(H, G, C).holds:
                continue
            verified += 1
            rep = count_embeddings(H, G, induced_split=True)
            violations += rep.non_induced > non_induced_bound(H, G, C)
    record(7, violations == 0 and verified > 0, f"{verified} verified (H,G,C) instances, {violations} violations")


def test_criterion_8_polluted_bound():
    patterns = ["path-k3-l2", "path-k3-l3", "path-k2-l3", "cycle-k2-l4", "cycle-k2-l5", "matching-k2-s2"]
    instances = levels = violations = nonzero = 0
    worst = 0.0
    for name in patterns:
        H = catalog_pattern(name)
        prof = profile(H)
        d_H, L = degeneracy(H)
        for kind in ("binomial", "planted-bad"):
            for n in ((10, 12) if H.k == 3 else (10, 14)):
                for seed in range(3):
                    G = generate(GenSpec(kind, n=n, k=H.k, p=0.5, seed=seed, boost=1.8))
                    for C, delta in ((3, 0.5), (3, 0.9)):
                        if not check_pseudorandom(G, PseudoParams(max(prof.D_H, 1), C, max(d_H, 1), delta)).holds:
                            continue
                        instances += 1
                        for h in range(2, H.n + 1):
                            _, polluted, _ = count_clean_polluted(H, L, h, G, delta)
                            bound = polluted_bound(H, L, h, G, C, delta)
                            levels += 1
                            nonzero += polluted > 0
                            violations += polluted > bound
                            worst = max(worst, float(polluted / bound))
    record(8, violations == 0 and instances >= 50,
           f"{instances} verified instances, {levels} levels ({nonzero} with pollution), {violations} violations, "
           f"max polluted/bound = {worst:.3f}")


def _direct(a, target, gamma, delta):
    N = len(a)
    prem = sum(a) >= (1 - gamma) * N * target and sum(x * x for x in a) <= (1 + gamma) * N * target ** 2
    inside = sum(1 for x in a if abs(x - target) < delta * target)
    return prem, inside > (1 - delta) * N


def test_criterion_9_numeric_facts():
    deltas = [0.1, 0.2, 0.3, 0.4, 0.5]
    table = concentration_table(deltas)
    rng = np.random.default_rng(9)
    premised = falsified = disagreements = 0
    for _ in range(10_000):
        delta = deltas[int(rng.integers(len(deltas)))]
        gamma = table[delta]
        N = int(rng.integers(1, 200))
        sigma = 10 ** rng.uniform(-4, 0)
        a = np.abs(1 + sigma * rng.standard_normal(N))
        if rng.random() < 0.5:
            m = int(rng.integers(0, N + 1))
            a[:m] = rng.choice([1 - delta, 1 + delta], size=m)
        target = float(10 ** rng.uniform(-1, 2))
        a = (a * target).tolist()
        got = concentration_check(a, target, gamma, delta)
        disagreements += got != _direct(a, target, gamma, delta)
        if got[0]:
            premised += 1
            falsified += not got[1]
    gaps = {(a, r): binomial_ratio_gap(10_000, a, r) for a in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
            for r in (1, 2, 3)}
    worst = max(gaps.values())
    ok = falsified == 0 and disagreements == 0 and premised > 0 and worst < 0.01
    shown = ", ".join(f"{d}: {g:.2e}" for d, g in table.items())
    record(9, ok, f"gamma table {{{shown}}}; 10^4 sequences, premises held on {premised}, "
                  f"{falsified} falsified, {disagreements} mismatches vs direct; max ratio gap {worst:.5f}")


CONFIG = """name = "det"
assertions = ["thm14-band", "extension", "cor33", "cor34", "lemma21", "lemma25"]
epsilon = 0.5
C = 3.0
delta = 0.6
check_mode = "sampled"
samples = 300

[pattern]
catalog = "path-k3-l2"

[host]
kind = "binomial"
k = 3
n = [9, 11]
p = [0.4, 0.6]
seeds = [0, 1, 2]
"""


def _cli(*args, cwd):
    env = {k: v for k, v in os.environ.items() if k != "HYPERCOUNT_THREADS"}
    r = subprocess.run([sys.executable, "-m", "hypercount.cli", *args], cwd=cwd, env=env,
                       capture_output=True)
    assert r.returncode in (0, 1), r.stderr.decode()
    return r.stdout


def test_criterion_10_determinism(tmp_path):
    (tmp_path / "exp.toml").write_text(CONFIG)
    _cli("gen", "--kind", "binomial", "--n", "18", "--k", "3", "--p", "0.35", "--seed", "3", "--out", "G.hg", cwd=tmp_path)
    _cli("gen", "--kind", "loose-path", "--k", "3", "--length", "2", "--out", "H.hg", cwd=tmp_path)
    outputs = {}
    for w in ("1", "2", "8"):
        _cli("run", "--config", "exp.toml", "--out", f"run{w}", "--workers", w, cwd=tmp_path)
        outputs[w] = (
            (tmp_path / f"run{w}" / "records.json").read_bytes(),
            (tmp_path / f"run{w}" / "records.csv").read_bytes(),
            _cli("count", "--pattern", "H.hg", "--host", "G.hg", "--induced-split", "--workers", w, cwd=tmp_path),
            _cli("check-tuple", "G.hg", "--d", "2", "--delta", "0.4", "--mode", "sampled", "--samples", "3000",
                 "--seed", "5", "--workers", w, cwd=tmp_path),
            _cli("check-bdd", "G.hg", "--d", "2", "--C", "3", "--workers", w, cwd=tmp_path),
        )
    same = outputs["1"] == outputs["2"] == outputs["8"]
    n_records = len(json.loads(outputs["1"][0]))
    record(10, same, f"run/count/check-tuple/check-bdd byte-identical across 1, 2, 8 workers "
                     f"({n_records} run records)")
