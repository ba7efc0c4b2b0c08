"""Command line entry point: ``mbsim <verb> [flags]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .breakers import make_breaker
from .checkers import property_from_id
from .digraphs import complete_digraph, sample_dnp
from .engine import play_game
from .errors import MbsimError, ParameterError
from .graph import Graph, Seed, complete_graph, make_rng, sample_gnp
from .harness import ExperimentConfig, default_out, game_parameters, run_experiment, _make_maker
from .posa import check_expansion, find_e_boosters
from .resilience import check_gpr_resilient, estimate_local_resilience
from .trees import random_tree_with_bare_path


def _common(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--n", type=int, default=None)
    ap.add_argument("--p", type=float, default=None)
    ap.add_argument("--eps", type=float, default=None)
    ap.add_argument("--bias", type=str, default=None, help="b, or a comma list for a sweep")
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--out", type=str, default=None)
    ap.add_argument("--scenario", type=str, default=None)
    ap.add_argument("--property", type=str, default=None)
    ap.add_argument("--breaker", type=str, default=None)
    ap.add_argument("--config", type=str, default=None, help="key=value file")
    ap.add_argument("--host", type=str, default=None, help="edge-list file for the base graph")
    ap.add_argument("--workers", type=int, default=None)


def _config(args, **defaults) -> ExperimentConfig:
    base = ExperimentConfig.from_text(Path(args.config).read_text()) if args.config else ExperimentConfig()
    kw = dataclasses.asdict(base)
    kw.update(defaults)
    for key in ("n", "p", "eps", "trials", "seed", "out", "scenario", "property", "breaker",
                "host", "workers"):
        v = getattr(args, key, None)
        if v is not None:
            kw[key] = v
    if args.bias is not None:
        vals = [int(x) for x in args.bias.split(",") if x.strip()]
        if len(vals) == 1:
            kw["b"], kw["biases"] = vals[0], []
        else:
            kw["biases"] = vals
    return ExperimentConfig(**kw)


def cmd_play(args) -> int:
    cfg = _config(args)
    G = Graph.from_edgelist(Path(cfg.host).read_text()) if cfg.host else complete_graph(cfg.n)
    p, eps, b = game_parameters(cfg, G, cfg.b)
    res = play_game(G, b, _make_maker(cfg, p, eps), make_breaker(cfg.breaker),
                    property_from_id(cfg.property), Seed(cfg.seed), trace=True)
    out = Path(cfg.out or default_out())
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.jsonl").write_text(res.trace_jsonl())
    (out / "maker.edges").write_text(res.maker_graph.to_edgelist())
    summary = {**res.summary(), "p": p, "eps": eps, "b": b, "maker_report": res.maker_report}
    print(json.dumps(summary, sort_keys=True, default=str))
    return 0


def cmd_mc(args) -> int:
    cfg = _config(args)
    res = run_experiment(cfg)
    for row in res.summary:
        print(json.dumps({k: row[k] for k in ("scenario", "b", "trials", "win_rate", "ci_low", "ci_high")}))
    print(f"records: {res.out_dir / 'records.jsonl'}")
    return 0


def cmd_minbox(args) -> int:
    args.scenario = "minbox"
    return cmd_mc(args)


def cmd_resilience(args) -> int:
    cfg = _config(args, n=args.n or 30, p=args.p if args.p is not None else 0.3)
    prop = property_from_id(cfg.property)
    if args.r is not None:
        host = Graph.from_edgelist(Path(cfg.host).read_text()) if cfg.host else complete_graph(cfg.n)
        res = check_gpr_resilient(host, cfg.p, args.r, prop, cfg.trials, cfg.seed)
        if cfg.out:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
            (Path(cfg.out) / "trials.csv").write_text(res.to_csv())
        print(json.dumps({"fraction": res.fraction, "ci": res.ci, "trials": res.trials,
                          "caveat": res.caveat}))
        return 0
    G = (Graph.from_edgelist(Path(cfg.host).read_text()) if cfg.host
         else sample_gnp(cfg.n, cfg.p, Seed(cfg.seed)))
    est = estimate_local_resilience(G, prop, seed=cfg.seed)
    print(json.dumps({"n": G.n, "m": G.m, "upper": est.upper, "lower": est.lower,
                      "exact": est.exact, "heuristic": est.heuristic}))
    return 0


def cmd_boosters(args) -> int:
    cfg = _config(args, n=args.n or 12, p=args.p if args.p is not None else 0.4)
    G = (Graph.from_edgelist(Path(cfg.host).read_text()) if cfg.host
         else sample_gnp(cfg.n, cfg.p, Seed(cfg.seed)))
    if args.edge:
        e = tuple(int(x) for x in args.edge.split(","))
    else:
        e = G.edges()[int(make_rng(cfg.seed).integers(G.m))]
    rep = find_e_boosters(G, e, seed=cfg.seed)
    exp = check_expansion(G, args.k, seed=cfg.seed)
    print(json.dumps({"e": e, "status": rep.status, "exact": rep.exact, "count": rep.count,
                      "boosters": sorted(rep.boosters), "longest": rep.longest,
                      "expansion": {"k": args.k, "status": exp.status}}, default=str))
    return 0


def cmd_gen(args) -> int:
    seed = Seed(args.seed or 0)
    n = args.n or 20
    if args.kind == "gnp":
        text = sample_gnp(n, args.p if args.p is not None else 0.5, seed).to_edgelist()
    elif args.kind == "complete":
        text = complete_graph(n).to_edgelist()
    elif args.kind == "tree":
        spec = random_tree_with_bare_path(n, args.Delta, args.alpha, seed)
        text = spec.to_json() + "\n"
    elif args.kind == "digraph":
        D = sample_dnp(complete_digraph(n), args.p if args.p is not None else 0.5, seed)
        text = D.to_arclist()
    else:
        raise ParameterError(f"unknown kind {args.kind!r}")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mbsim", description="Biased Maker-Breaker game lab")
    sub = ap.add_subparsers(dest="verb", required=True)
    for name, fn, doc in [("play", cmd_play, "play one traced game"),
                          ("mc", cmd_mc, "Monte Carlo experiment"),
                          ("minbox", cmd_minbox, "MinBox experiments"),
                          ("resilience", cmd_resilience, "local resilience estimates"),
                          ("boosters", cmd_boosters, "booster and expansion diagnostics"),
                          ("gen", cmd_gen, "graph, digraph and tree generators")]:
        sp = sub.add_parser(name, help=doc)
        _common(sp)
        sp.set_defaults(func=fn)
        if name == "resilience":
            sp.add_argument("--r", type=float, default=None,
                            help="check (G, p, r)-resilience on sampled subgraphs")
        if name == "boosters":
            sp.add_argument("--edge", type=str, default=None, help="protected pair u,v")
            sp.add_argument("--k", type=int, default=1)
        if name == "gen":
            sp.add_argument("--kind", default="gnp", choices=["gnp", "complete", "tree", "digraph"])
            sp.add_argument("--Delta", type=int, default=3)
            sp.add_argument("--alpha", type=float, default=0.3)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MbsimError, ValueError, OSError) as exc:
        print(f"mbsim: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
