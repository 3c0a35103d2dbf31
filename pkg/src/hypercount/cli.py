"""Command line entry point ``hypercount``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .counting import BudgetExceeded, DEFAULT_NODE_BUDGET, PinSpec, count_embeddings
from .generators import KINDS, GenSpec, generate
from .harness import ConfigError, Experiment, failed, run_experiment, write_report
from .hypergraph import HypergraphError, load_hypergraph, save_hypergraph, write_hypergraph
from .properties import (BddParams, ParameterError, PseudoParams, TupleParams, check_bdd,
                         check_pseudorandom, check_tuple)
from .structure import profile


def _emit(obj: dict, json_out: str | None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if json_out:
        Path(json_out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cmd_profile(a) -> int:
    _emit(profile(load_hypergraph(a.file)).to_dict(), a.json_out)
    return 0


def _check_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("host", help="host hypergraph file")
    p.add_argument("--i", type=int, default=None, help="subset size (default k-1)")
    p.add_argument("--p", type=float, default=None, help="override density (default: realized)")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json-out")


def _cmd_check_bdd(a) -> int:
    G = load_hypergraph(a.host)
    v = check_bdd(G, BddParams(a.d, a.C, a.i, a.p, a.mode, a.samples, a.seed), workers=a.workers)
    _emit(v.to_dict(), a.json_out)
    return 0


def _cmd_check_tuple(a) -> int:
    G = load_hypergraph(a.host)
    v = check_tuple(G, TupleParams(a.d, a.delta, a.i, a.p, a.mode, a.samples, a.seed), workers=a.workers)
    _emit(v.to_dict(), a.json_out)
    return 0


def _cmd_check_pseudo(a) -> int:
    G = load_hypergraph(a.host)
    v = check_pseudorandom(G, PseudoParams(a.d1, a.C, a.d2, a.delta, a.mode, a.samples, a.seed),
                           workers=a.workers)
    _emit(v.to_dict(), a.json_out)
    return 0


def _cmd_count(a) -> int:
    H, G = load_hypergraph(a.pattern), load_hypergraph(a.host)
    rep = count_embeddings(H, G, PinSpec.parse(a.pins or ""), induced_split=a.induced_split,
                           node_budget=a.node_budget, workers=a.workers)
    _emit(rep.to_dict(), a.json_out)
    return 0


def _cmd_gen(a) -> int:
    spec = GenSpec(kind=a.kind, n=a.n, k=a.k, p=a.p, edges=a.edges, length=a.length, seed=a.seed,
                   plant=tuple(a.plant) if a.plant else None, boost=a.boost)
    G = generate(spec)
    if a.out:
        save_hypergraph(G, a.out)
    else:
        sys.stdout.write(write_hypergraph(G))
    return 0


def _cmd_run(a) -> int:
    cfg = Experiment.load(a.config)
    records = run_experiment(cfg, workers=a.workers)
    jp, cp = write_report(records, a.out)
    logging.getLogger(__name__).info("wrote %s and %s", jp, cp)
    return 1 if failed(records) else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypercount", description="Embedding counts and pseudorandomness checks for uniform hypergraphs.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress and timings to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="print the structure profile of a pattern")
    p.add_argument("file")
    p.add_argument("--json-out")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("check-bdd", help="bounded joint neighborhoods")
    _check_common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--C", type=float, required=True)
    p.set_defaults(func=_cmd_check_bdd)

    p = sub.add_parser("check-tuple", help="concentrated joint neighborhoods")
    _check_common(p)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=_cmd_check_tuple)

    p = sub.add_parser("check-pseudo", help="density, BDD and TUPLE together")
    _check_common(p)
    p.add_argument("--d", "--d1", dest="d1", type=int, required=True, help="BDD depth")
    p.add_argument("--d2", type=int, default=None, help="TUPLE depth (default: same as --d)")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=_cmd_check_pseudo)

    p = sub.add_parser("count", help="count embeddings of a pattern in a host")
    p.add_argument("--pattern", required=True)
    p.add_argument("--host", required=True)
    p.add_argument("--pins", default="", help='pinned images, e.g. "0:5,1:7"')
    p.add_argument("--induced-split", action="store_true")
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json-out")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("gen", help="generate a hypergraph")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--p", type=float)
    p.add_argument("--edges", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--plant", type=int, nargs="+", help="target (k-1)-set for planted-bad")
    p.add_argument("--boost", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "d2", "unset") is None:
        args.d2 = args.d1
    try:
        return args.func(args)
    except (HypergraphError, ParameterError, ConfigError, BudgetExceeded, OSError) as exc:
        print(f"hypercount: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
