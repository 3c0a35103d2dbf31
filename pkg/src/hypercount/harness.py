"""Seeded experiment sweeps that measure counting bounds on generated hosts.

An experiment is read from a TOML file::

    name = "band"
    assertions = ["thm14-band", "extension"]
    epsilon = 0.15
    C = 2.0
    delta = 0.5

    [pattern]
    catalog = "path-k3-l2"     # or: file = "pattern.hg"

    [host]
    kind = "binomial"
    k = 3
    n = [40, 60]
    p_scale = 2.0              # p = p_scale * n ** -p_exponent
    p_exponent = 0.45          # (or a fixed p = 0.3, or a list of them)
    seeds = [0, 1, 2]          # or seed_count = 10 (+ seed_start)

Every (n, p, seed) run records verdicts, the count report and one status
per assertion: ``pass``, ``fail`` or ``skip`` (hypotheses not verified).
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ._parallel import pmap
from .counting import (DEFAULT_NODE_BUDGET, INDUCED_MAX_M, BudgetExceeded, count_embeddings,
                       count_clean_polluted, extension_rhs, non_induced_bound, polluted_bound, PinSpec)
from .generators import GenSpec, catalog_pattern, generate
from .hypergraph import Hypergraph, density, load_hypergraph
from .properties import (BddParams, ExactCheckInfeasible, PseudoParams, TupleParams, check_bdd,
                         check_pseudorandom, check_tuple, exact)
from .structure import degeneracy, profile

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger(__name__)

ASSERTIONS = ("extension", "thm14-band", "cor33", "cor34", "lemma21", "lemma25")
CSV_BASE = ("experiment", "seed", "n", "p", "total", "expected", "relative_error")


class ConfigError(ValueError):
    pass


@dataclass
class Experiment:
    name: str
    pattern: dict
    host: dict
    assertions: list[str]
    epsilon: float = 0.15
    C: float = 2.0
    delta: float = 0.5
    d1: int | None = None
    d2: int | None = None
    delta_prime: float | None = None
    sigma: float | None = None
    lemma_d: int = 3
    check_mode: str = "exact"
    samples: int = 10_000
    thm14_pseudo: bool = False
    node_budget: int = DEFAULT_NODE_BUDGET
    pins: str = ""

    def __post_init__(self):
        if not self.assertions:
            raise ConfigError("an experiment needs at least one assertion")
        unknown = [a for a in self.assertions if a not in ASSERTIONS]
        if unknown:
            raise ConfigError(f"unknown assertions {unknown}; choose from {list(ASSERTIONS)}")
        if self.check_mode not in ("exact", "sampled"):
            raise ConfigError("check_mode must be 'exact' or 'sampled'")
        if not ("catalog" in self.pattern) ^ ("file" in self.pattern):
            raise ConfigError("[pattern] needs exactly one of 'catalog' or 'file'")
        if "kind" not in self.host:
            raise ConfigError("[host] needs a 'kind'")
        self.load_pattern()
        self.sweep()

    @classmethod
    def from_dict(cls, d: dict, base_dir: Path | None = None) -> "Experiment":
        d = dict(d)
        try:
            pattern = dict(d.pop("pattern"))
            host = dict(d.pop("host"))
        except KeyError as exc:
            raise ConfigError(f"missing [{exc.args[0]}] table") from None
        if "file" in pattern and base_dir is not None:
            pattern["file"] = str((base_dir / pattern["file"]).resolve())
        known = set(cls.__dataclass_fields__) - {"pattern", "host"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        if "name" not in d:
            raise ConfigError("config needs a 'name'")
        return cls(pattern=pattern, host=host, **d)

    @classmethod
    def load(cls, path) -> "Experiment":
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(data, path.parent)

    def load_pattern(self) -> Hypergraph:
        if "catalog" in self.pattern:
            try:
                return catalog_pattern(self.pattern["catalog"])
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        return load_hypergraph(self.pattern["file"])

    def sweep(self) -> list[tuple[int, float, float | None, int]]:
        """All (n, p, p_exponent, seed) points, in canonical order."""
        h = self.host
        ns = h.get("n")
        ns = [ns] if isinstance(ns, int) else list(ns or [])
        if not ns:
            raise ConfigError("[host] needs n")
        if "seeds" in h:
            seeds = list(h["seeds"])
        else:
            start = int(h.get("seed_start", 0))
            seeds = list(range(start, start + int(h.get("seed_count", 1))))
        points = []
        for n in ns:
            if "p" in h:
                ps = h["p"] if isinstance(h["p"], list) else [h["p"]]
                plist = [(float(p), None) for p in ps]
            elif "p_exponent" in h:
                alphas = h["p_exponent"] if isinstance(h["p_exponent"], list) else [h["p_exponent"]]
                scale = float(h.get("p_scale", 1.0))
                plist = [(min(1.0, scale * n ** -float(a)), float(a)) for a in alphas]
            else:
                plist = [(None, None)]
            for p, a in plist:
                for s in seeds:
                    points.append((int(n), p, a, int(s)))
        return sorted(points, key=lambda t: (t[0], -1.0 if t[1] is None else t[1], t[3]))


@dataclass
class RunRecord:
    experiment: str
    seed: int
    n: int
    p_requested: float | None
    p: float
    edges: int
    count: dict | None
    verdicts: dict
    assertions: dict
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "n": self.n,
            "p_requested": self.p_requested,
            "p": self.p,
            "edges": self.edges,
            "count": self.count,
            "verdicts": self.verdicts,
            "assertions": self.assertions,
        }


def _status(status: str, **detail) -> dict:
    return {"status": status, **detail}


def _check_exact_or_skip(fn):
    try:
        return fn(), None
    except ExactCheckInfeasible as exc:
        return None, str(exc)


def _run_point(task) -> RunRecord:
    cfg, (n, p, _alpha, seed) = task
    t0 = time.perf_counter()
    H = cfg.load_pattern()
    spec = GenSpec(kind=cfg.host["kind"], n=n, k=int(cfg.host.get("k", H.k)), p=p,
                   edges=cfg.host.get("edges"), seed=seed,
                   plant=tuple(cfg.host["plant"]) if "plant" in cfg.host else None,
                   boost=float(cfg.host.get("boost", 2.0)))
    G = generate(spec)
    prof = profile(H)
    d_H, d_order = degeneracy(H)
    realized = density(G) if G.n >= G.k else Fraction(0)
    mode = cfg.check_mode
    verdicts: dict = {}
    results: dict = {}
    cache: dict = {}

    def bdd_DH():
        if "bdd" not in cache:
            if prof.D_H < 1:
                cache["bdd"] = (True, None)
            else:
                v, why = _check_exact_or_skip(lambda: check_bdd(G, BddParams(prof.D_H, cfg.C)))
                if v is not None:
                    verdicts["bdd_DH"] = v.to_dict()
                cache["bdd"] = (None if v is None else v.holds, why)
        return cache["bdd"]

    def pseudo(name, d1, d2, delta, sampled_ok=False):
        if name not in cache:
            m = mode if sampled_ok else "exact"
            v, why = _check_exact_or_skip(lambda: check_pseudorandom(
                G, PseudoParams(d1, cfg.C, d2, delta, m, cfg.samples, seed)))
            if v is not None:
                verdicts[name] = v.to_dict()
            cache[name] = (None if v is None else v.holds, why)
        return cache[name]

    need_induced = "cor33" in cfg.assertions and H.n <= INDUCED_MAX_M
    report = None
    count_skip = None
    if {"extension", "thm14-band", "cor33"} & set(cfg.assertions):
        try:
            report = count_embeddings(H, G, PinSpec.parse(cfg.pins), induced_split=need_induced,
                                      node_budget=cfg.node_budget)
        except BudgetExceeded as exc:
            count_skip = str(exc)

    for name in cfg.assertions:
        if name == "extension":
            pins = PinSpec.parse(cfg.pins)
            ok, why = bdd_DH()
            if not prof.linear:
                results[name] = _status("skip", reason="pattern is not linear")
            elif pins.ell > max(H.k, d_H):
                results[name] = _status("skip", reason="pin length exceeds max(k, d_H)")
            elif ok is not True:
                results[name] = _status("skip", reason=why or "host fails BDD(D_H, C, p)")
            elif report is None:
                results[name] = _status("skip", reason=count_skip)
            else:
                rhs = extension_rhs(H, G, pins.W, cfg.C)
                results[name] = _status("pass" if report.total <= rhs else "fail",
                                        lhs=report.total, rhs=float(rhs))
        elif name == "thm14-band":
            if not (prof.linear and prof.connector_free and H.n >= 4):
                results[name] = _status("skip", reason="pattern not linear, connector-free with m >= 4")
            elif realized <= 0:
                results[name] = _status("skip", reason="p = 0")
            elif report is None:
                results[name] = _status("skip", reason=count_skip)
            else:
                ok, why = (True, None)
                if cfg.thm14_pseudo:
                    ok, why = pseudo("pseudo_DH_2", max(prof.D_H, 1), 2, cfg.delta, sampled_ok=True)
                if ok is not True:
                    results[name] = _status("skip", reason=why or "host is not pseudorandom")
                else:
                    within = report.relative_error < cfg.epsilon
                    results[name] = _status("pass" if within else "fail",
                                            relative_error=report.relative_error, epsilon=cfg.epsilon)
        elif name == "cor33":
            ok, why = bdd_DH()
            if not prof.linear or H.n < H.k:
                results[name] = _status("skip", reason="pattern must be linear with m >= k")
            elif ok is not True:
                results[name] = _status("skip", reason=why or "host fails BDD(D_H, C, p)")
            elif report is None or report.non_induced is None:
                results[name] = _status("skip", reason=count_skip or "induced split unavailable")
            else:
                bound = non_induced_bound(H, G, cfg.C)
                results[name] = _status("pass" if report.non_induced <= bound else "fail",
                                        non_induced=report.non_induced, bound=float(bound))
        elif name == "cor34":
            if not (prof.linear and prof.connector_free):
                results[name] = _status("skip", reason="pattern must be linear and connector-free")
                continue
            ok, why = pseudo("pseudo_DH_dH", max(prof.D_H, 1), max(d_H, 1), cfg.delta)
            if ok is not True:
                results[name] = _status("skip", reason=why or "host is not pseudorandom")
                continue
            worst, failed = [], False
            for h in range(2, H.n + 1):
                _, polluted, _ = count_clean_polluted(H, d_order, h, G, cfg.delta)
                bound = polluted_bound(H, d_order, h, G, cfg.C, cfg.delta)
                worst.append({"h": h, "polluted": polluted, "bound": float(bound)})
                failed |= polluted > bound
            results[name] = _status("fail" if failed else "pass", levels=worst)
        elif name in ("lemma21", "lemma25"):
            small = cfg.delta_prime if name == "lemma21" else cfg.sigma
            if small is None:
                small = cfg.delta / 4
            ok, why = pseudo(f"pseudo_2_2_{name}", 2, 2, small, sampled_ok=True)
            if ok is not True:
                results[name] = _status("skip", reason=why or "host is not (2, C, 2)-pseudorandom")
                continue
            if name == "lemma21":
                params = TupleParams(cfg.lemma_d, cfg.delta, None, None, mode, cfg.samples, seed)
            else:
                params = TupleParams(2, cfg.delta, 1, None, mode, cfg.samples, seed)
            v, why = _check_exact_or_skip(lambda: check_tuple(G, params))
            if v is None:
                results[name] = _status("skip", reason=why)
            else:
                verdicts[f"tuple_{name}"] = v.to_dict()
                results[name] = _status("pass" if v.holds else "fail", bad_fraction=v.bad_fraction)

    rec = RunRecord(
        experiment=cfg.name, seed=seed, n=n, p_requested=p, p=float(realized), edges=G.num_edges,
        count=None if report is None else report.to_dict(), verdicts=verdicts, assertions=results,
        wall_time=time.perf_counter() - t0,
    )
    log.info("run %s n=%d seed=%d took %.2fs", cfg.name, n, seed, rec.wall_time)
    return rec


def run_experiment(cfg: Experiment, workers: int = 1) -> list[RunRecord]:
    """Run every sweep point; records come back in canonical (n, p, seed) order."""
    tasks = [(cfg, point) for point in cfg.sweep()]
    return pmap(_run_point, tasks, workers)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_to_csv(records: list[dict]) -> str:
    names = sorted({a for r in records for a in r["assertions"]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_BASE) + names)
    rows = sorted(records, key=lambda r: (r["n"], r["seed"], -1.0 if r["p_requested"] is None else r["p_requested"]))
    for r in rows:
        c = r["count"] or {}
        w.writerow([r["experiment"], r["seed"], r["n"], _fmt(r["p"]), _fmt(c.get("total")),
                    _fmt(c.get("expected")), _fmt(c.get("relative_error"))]
                   + [r["assertions"].get(a, {}).get("status", "") for a in names])
    return buf.getvalue()


def records_to_json(records: list[dict]) -> str:
    rows = sorted(records, key=lambda r: (r["n"], r["seed"], -1.0 if r["p_requested"] is None else r["p_requested"]))
    return json.dumps(rows, indent=1, sort_keys=True, allow_nan=False) + "\n"


def report(records: list[RunRecord]) -> tuple[str, str]:
    """JSON text (one object per run) and CSV text for a list of records."""
    if not records:
        raise ValueError("no records to report")
    dicts = [r.to_dict() for r in records]
    return records_to_json(dicts), records_to_csv(dicts)


def write_report(records: list[RunRecord], out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    js, cs = report(records)
    jp, cp = out / "records.json", out / "records.csv"
    jp.write_text(js, encoding="utf-8")
    cp.write_text(cs, encoding="utf-8")
    return jp, cp


def failed(records: list[RunRecord]) -> bool:
    return any(a["status"] == "fail" for r in records for a in r.assertions.values())


def median_relative_errors(records: list[RunRecord]) -> dict[int, float]:
    """Median count relative error per n (runs without a count are ignored)."""
    by_n: dict[int, list[float]] = {}
    for r in records:
        if r.count and r.count.get("relative_error") is not None:
            by_n.setdefault(r.n, []).append(r.count["relative_error"])
    out = {}
    for n, errs in sorted(by_n.items()):
        errs.sort()
        mid = len(errs) // 2
        out[n] = errs[mid] if len(errs) % 2 else (errs[mid - 1] + errs[mid]) / 2
    return out
