"""Monte Carlo driver: flat key=value configs, per-trial seeds, JSONL records and CSV summaries.

Trial i of every bias group uses stream id i of the master seed, so a trial's
outcome depends only on (config, i).  Trials may run in worker processes;
records are always written in trial order.  Wall times go to a separate
``timing.jsonl`` so that ``records.jsonl`` and ``summary.csv`` are
byte-identical across reruns.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import time
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .breakers import make_breaker
from .checkers import property_from_id
from .engine import GreedyConnectivityMaker, PassiveMaker, RandomMaker, play_game
from .errors import ConfigurationError, ParameterError
from .graph import Graph, Seed, complete_graph, make_rng, sample_gnp, sample_subgraph
from .maker import SMStrategy, desk_parameters
from .minbox import MinBoxParams, play_minbox, winning_min_size
from .posa import check_expansion, find_e_boosters
from .resilience import estimate_local_resilience, wilson_interval
from .trees import embed_tree, random_tree_with_bare_path

OUT_ENV = "MBSIM_OUT"
SCENARIOS = ("minbox", "game", "resilience", "boosters", "tree-game")
MAKERS = {"random": RandomMaker, "greedy-connectivity": GreedyConnectivityMaker,
          "passive": PassiveMaker}


def default_out() -> str:
    return os.environ.get(OUT_ENV, "mbsim-out")


@dataclass
class ExperimentConfig:
    scenario: str = "game"
    n: int = 128
    p: float | None = None  # None: desk parameters from C and kappa
    C: float = 3.0
    kappa: float = 0.1
    eps: float | None = None
    b: int | None = None
    biases: list[int] = field(default_factory=list)
    host: str = ""  # edge-list file; empty means K_n
    maker: str = "sm"
    breaker: str = "random"
    property: str = "hamiltonicity"
    mode: str = "desk"
    trials: int = 10
    seed: int = 0
    out: str = ""
    workers: int = 1
    # minbox
    alpha: float = 0.3
    box_size: int | None = None
    allow_extra: bool = False
    # tree-game
    Delta: int = 3
    trees: int = 10
    reservoir_fraction: float = 0.1
    # boosters
    k: int = 1

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(f"unknown scenario {self.scenario!r}")
        if self.trials < 0:
            raise ConfigurationError("trials must be non-negative")
        if self.n < 1:
            raise ConfigurationError("n must be at least 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")

    # -- flat text form ------------------------------------------------
    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                s = "none"
            elif isinstance(v, list):
                s = ",".join(str(x) for x in v)
            elif isinstance(v, float):
                s = repr(v)
            else:
                s = str(v).lower() if isinstance(v, bool) else str(v)
            lines.append(f"{f.name}={s}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        hints = typing.get_type_hints(cls)
        kw = {}
        for ln in text.splitlines():
            ln = ln.split("#", 1)[0].strip()
            if not ln:
                continue
            if "=" not in ln:
                raise ConfigurationError(f"expected key=value, got {ln!r}")
            key, val = (t.strip() for t in ln.split("=", 1))
            if key not in hints:
                raise ConfigurationError(f"unknown config key {key!r}")
            kw[key] = _parse_value(hints[key], val)
        return cls(**kw)

    def groups(self) -> list[int | None]:
        return list(self.biases) if self.biases else [self.b]

    def total_trials(self) -> int:
        return self.trials * len(self.groups())


def _parse_value(tp, val: str):
    args = typing.get_args(tp)
    if type(None) in args:
        if val.lower() == "none":
            return None
        tp = next(a for a in args if a is not type(None))
    if typing.get_origin(tp) is list:
        inner = typing.get_args(tp)[0]
        return [inner(x) for x in val.split(",") if x.strip()]
    if tp is bool:
        if val.lower() not in ("true", "false", "1", "0"):
            raise ConfigurationError(f"not a boolean: {val!r}")
        return val.lower() in ("true", "1")
    try:
        return tp(val)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def tail_bound(n: int, p: float, k: float) -> float:
    """(e n p / k)^k, an upper bound on P[Bin(n, p) >= k]."""
    if n < 1 or not 0.0 < p <= 1.0 or k < 1:
        raise ParameterError("need n >= 1, 0 < p <= 1 and k >= 1")
    return (math.e * n * p / k) ** k


# -- trials ------------------------------------------------------------------

def _host(cfg: ExperimentConfig) -> Graph:
    if cfg.host:
        return Graph.from_edgelist(Path(cfg.host).read_text())
    return complete_graph(cfg.n)


def game_parameters(cfg: ExperimentConfig, G: Graph, b: int | None) -> tuple[float, float, int]:
    """(p, eps, b) for an S_M game.

    p defaults to the desk value C ln n/n and b to max(1, floor(kappa/p));
    eps defaults to just above 20 b p so that S_M's own bias equals b.
    """
    p = cfg.p if cfg.p is not None else desk_parameters(G.n, cfg.C, cfg.kappa)[0]
    if b is None:
        b = cfg.b if cfg.b is not None else max(1, int(math.floor(cfg.kappa / p)))
    eps = cfg.eps if cfg.eps is not None else 20.0 * b * p * (1.0 + 1e-12)
    return p, eps, b


def _make_maker(cfg, p, eps):
    if cfg.maker == "sm":
        return SMStrategy(p, eps, cfg.mode)
    try:
        return MAKERS[cfg.maker]()
    except KeyError:
        raise ConfigurationError(f"unknown maker {cfg.maker!r}") from None


def _game_record(cfg, G, b, seed):
    p, eps, b = game_parameters(cfg, G, b)
    res = play_game(G, b, _make_maker(cfg, p, eps), make_breaker(cfg.breaker),
                    property_from_id(cfg.property), seed)
    rep = res.maker_report
    rec = {"winner": res.winner, "turns": res.turns, "b": b,
           "maker_edges": res.maker_graph.m,
           "min_maker_degree": int(res.maker_graph.degrees.min())}
    for key in ("max_fII_ratio", "max_fI", "fII_flagged", "residue_pairs", "gate_violations"):
        if key in rep:
            rec[key] = rep[key]
    return rec, res


def _trial_game(cfg, G, b, seed):
    return _game_record(cfg, G, b, seed)[0]


def _trial_tree_game(cfg, G, b, seed):
    rec, res = _game_record(cfg, G, b, seed)
    ok = 0
    stages = {}
    for j in range(cfg.trees):
        spec = random_tree_with_bare_path(G.n, cfg.Delta, cfg.alpha, seed=make_rng(seed, 100 + j))
        er = embed_tree(res.maker_graph, spec, cfg.reservoir_fraction, seed=make_rng(seed, 200 + j))
        if er.success:
            ok += er.embedding.validate(res.maker_graph, spec)
        else:
            stages[er.failure["stage"]] = stages.get(er.failure["stage"], 0) + 1
    rec.update({"trees": cfg.trees, "embedded": ok, "embed_rate": ok / cfg.trees if cfg.trees else 0.0,
                "failures": stages})
    return rec


def _trial_minbox(cfg, G, b, seed):
    b = b if b is not None else 1
    D = cfg.box_size
    if D is None:
        D = math.ceil(winning_min_size(cfg.n, b, cfg.alpha))
    params = MinBoxParams.uniform(cfg.n, D, cfg.alpha, b)
    tr = play_minbox(params, cfg.breaker, cfg.allow_extra, seed, record=False)
    return {"winner": "maker" if tr.maker_won else "breaker", "b": b, "box_size": D,
            "violations": tr.violations, "max_danger": float(tr.max_danger),
            "bound": float(tr.bound), "active_at_end": tr.active_at_end}


def _sampled(cfg, G, seed):
    p = cfg.p if cfg.p is not None else desk_parameters(G.n, cfg.C, cfg.kappa)[0]
    return sample_subgraph(G, p, seed) if cfg.host else sample_gnp(cfg.n, p, seed)


def _trial_resilience(cfg, G, b, seed):
    H = _sampled(cfg, G, seed)
    prop = property_from_id(cfg.property)
    if not prop.check(H).holds:
        return {"winner": "absent", "edges": H.m}
    est = estimate_local_resilience(H, prop, seed=make_rng(seed, 5))
    return {"winner": "present", "edges": H.m, "upper": est.upper, "lower": est.lower,
            "exact": est.exact, "heuristic": est.heuristic}


def _trial_boosters(cfg, G, b, seed):
    H = _sampled(cfg, G, seed)
    if H.m == 0 or len(H.components()) != 1:
        return {"winner": "skipped", "edges": H.m}
    rng = make_rng(seed, 6)
    e = H.edges()[int(rng.integers(H.m))]
    rep = find_e_boosters(H, e, seed=int(rng.integers(2**31)))
    exp = check_expansion(H, cfg.k, seed=int(rng.integers(2**31)))
    return {"winner": rep.status, "edges": H.m, "e": list(e), "boosters": rep.count,
            "exact": rep.exact, "expansion": exp.status, "bound": (cfg.k + 1) ** 2 / 2}


_TRIALS = {"game": _trial_game, "tree-game": _trial_tree_game, "minbox": _trial_minbox,
           "resilience": _trial_resilience, "boosters": _trial_boosters}


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    return x


def run_trial(cfg: ExperimentConfig, index: int) -> tuple[dict, float]:
    """Record for global trial ``index`` plus its wall time in seconds."""
    groups = cfg.groups()
    g, i = divmod(index, cfg.trials)
    seed = Seed(cfg.seed, i)
    t0 = time.perf_counter()
    G = _host(cfg) if cfg.scenario != "minbox" else None
    rec = _TRIALS[cfg.scenario](cfg, G, groups[g], seed)
    rec = {"trial": i, "group": g, "seed": cfg.seed, "stream": i, **_plain(rec)}
    return rec, time.perf_counter() - t0


def _run_one(args):
    return run_trial(*args)


# -- summaries -------------------------------------------------------------

SUMMARY_SKIP = {"trial", "group", "seed", "stream", "b"}


def summarize(cfg: ExperimentConfig, records: list[dict]) -> list[dict]:
    """One row per bias group; every value is recomputable from the records."""
    rows = []
    for g, b in enumerate(cfg.groups()):
        recs = [r for r in records if r["group"] == g]
        if not recs:
            continue
        wins = sum(r["winner"] == "maker" for r in recs)
        lo, hi = wilson_interval(wins, len(recs))
        row = {"scenario": cfg.scenario, "group": g, "b": recs[0].get("b", b),
               "trials": len(recs), "maker_wins": wins, "win_rate": wins / len(recs),
               "ci_low": lo, "ci_high": hi}
        keys = sorted({k for r in recs for k, v in r.items()
                       if k not in SUMMARY_SKIP and isinstance(v, (int, float)) and not isinstance(v, bool)})
        for k in keys:
            vals = [r[k] for r in recs if isinstance(r.get(k), (int, float))]
            row[f"mean_{k}"] = float(np.mean(vals))
            row[f"max_{k}"] = max(vals)
            row[f"min_{k}"] = min(vals)
        rows.append(row)
    return rows


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        names = []
        for r in rows:
            names += [k for k in r if k not in names]
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()


@dataclass
class ExperimentResult:
    records: list[dict]
    summary: list[dict]
    out_dir: Path | None


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path | None = None,
                   workers: int | None = None) -> ExperimentResult:
    """Run every trial, streaming records to ``records.jsonl`` as they arrive in order."""
    out = Path(out_dir or cfg.out or default_out())
    out.mkdir(parents=True, exist_ok=True)
    workers = workers or cfg.workers
    (out / "config.txt").write_text(cfg.to_text())
    records: list[dict] = []
    jobs = [(cfg, i) for i in range(cfg.total_trials())]
    with open(out / "records.jsonl", "w") as rf, open(out / "timing.jsonl", "w") as tf:
        def take(rec, wall):
            records.append(rec)
            rf.write(json.dumps(rec, sort_keys=True) + "\n")
            rf.flush()
            tf.write(json.dumps({"trial": rec["trial"], "group": rec["group"],
                                 "seconds": round(wall, 6)}) + "\n")

        try:
            if workers == 1 or len(jobs) <= 1:
                for job in jobs:
                    take(*_run_one(job))
            else:
                with ProcessPoolExecutor(max_workers=workers) as ex:
                    for rec, wall in ex.map(_run_one, jobs):
                        take(rec, wall)
        finally:
            rows = summarize(cfg, records)
            (out / "summary.csv").write_text(summary_csv(rows))
    return ExperimentResult(records, rows, out)


def load_records(path: str | Path) -> list[dict]:
    return [json.loads(ln) for ln in Path(path).read_text().splitlines() if ln.strip()]
