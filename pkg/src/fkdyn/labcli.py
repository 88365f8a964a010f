"""Experiment driver: configs, runs, reports and the ``fkdyn`` command.

Each experiment reads its parameters from an :class:`ExperimentConfig`,
composes the library operations and returns a :class:`Report` with result
tables, a summary, and pass/fail verdicts.  Reports serialize to JSON (sorted
keys, timing kept in its own block) and to CSV (one file per table, with a
fixed column schema).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import yaml

from . import __version__
from .boundary import BoundaryCondition, make_bc, sample_theta_q_wired
from .dynamics.coupling import (ChainSpec, CoupledSystem, RandomStream,
                                coupling_time_profile)
from .dynamics.sampler import scan_block_dynamics, tree_blocks
from .oracle import (CapacityError, RCParams, check_detailed_balance, cut_table,
                     edge_marginals, measure_table, message_from_oracle, z_split_root)
from .percolation import bernoulli_percolation, giant_fraction_prediction
from .recursion import (ClassificationError, fixed_points, propagate_messages,
                        sharper_bound_check, thresholds, unicyclic_messages,
                        wsm_decay_profile, wsm_gap)
from .topology import (Graph, TreeSpec, bfs_ball, build_tree, generate_random_regular,
                       random_tree, random_unicyclic)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "Report",
    "EXPERIMENTS",
    "SCHEMAS",
    "run_experiment",
    "emit_report",
    "load_config",
    "main",
]

log = logging.getLogger("fkdyn")

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


# Defaults per experiment.  Every key a run reads is listed here, so the
# resolved config echoed into a report determines the run completely.
DEFAULTS = {
    "phase-diagram": {"q_values": [1.5, 2.0, 3.0, 4.0, 10.0, 25.0], "delta_values": [3, 4, 5]},
    "fixed-points": {"q": 3.0, "delta": 3, "p_values": [0.70, 0.74, 0.76, 0.90]},
    "wsm-decay": {"d": 2, "q": 3.0, "p": 0.85, "theta": 0.3, "depths": list(range(6, 17)),
                  "replicas": 64, "tolerance": 0.15},
    "coupling-time": {"delta": 3, "heights": list(range(4, 10)), "q": 3.0, "p": 0.85,
                      "bc": "wired", "replicas": 32, "max_steps": 10 ** 8, "max_ratio": 4.0},
    "block-scan": {"delta": 3, "height": 4, "q": 3.0, "p": 0.85, "bc": "wired",
                   "block_delta": 0.25, "runs": 200, "sweeps": 1, "min_agreement": 0.9},
    "rrg-pipeline": {"n": 2000, "delta": 3, "q": 8.0, "p": None, "p_factor": 1.05,
                     "n_seeds": 3, "n_balls": 30, "radius": None, "burn_in_constant": 4.0,
                     "local_factor": 200, "min_agreement": 0.9},
    "sharper-bound": {"cases": [[2, 9.0, 1.0], [3, 64.0, 1.0], [4, 128.0, 1.0]]},
    "validate": {"max_edges": 8, "trials": 200, "tol_message": 1e-9,
                 "tol_balance": 1e-12, "tol_marginal": 1e-12},
    "percolation": {"n": 20000, "delta": 3, "p_hat": 0.75, "n_seeds": 20, "n_balls": 50,
                    "radius": None, "band": 0.05, "min_fraction": 0.95},
}
EXPERIMENTS = tuple(DEFAULTS)

# Column schemas of every table; the first table is the primary one.
SCHEMAS = {
    "phase-diagram": {"thresholds": ["q", "delta", "d", "p_s", "p_u", "p_hat_at_p_s"]},
    "fixed-points": {"points": ["p", "q", "d", "regime", "count", "fixed_points",
                                "y_star", "beta_star", "p_s", "p_u", "p_hat"]},
    "wsm-decay": {"gaps": ["depth", "mean_gap", "min_gap", "max_gap"]},
    "coupling-time": {"profile": ["height", "n", "m", "median", "normalized", "censored"]},
    "block-scan": {"runs": ["run", "first_agree", "final_agree"]},
    "rrg-pipeline": {"balls": ["seed", "edge", "ball_edges", "excess", "agree"],
                     "burn_in": ["seed", "steps", "top_bottom_diff", "audited_steps"]},
    "sharper-bound": {"cases": ["d", "q", "a", "p_s", "y_star", "beta_star", "bound",
                                "r_P", "r_Q", "holds", "roots_ordered",
                                "r_Q_matches_y_star"]},
    "validate": {"trials": ["trial", "kind", "m", "check", "value", "ok"]},
    "percolation": {"seeds": ["seed", "giant_fraction", "second_largest",
                              "excess_le_1_fraction"]},
}


@dataclass
class ExperimentConfig:
    """Complete description of one run.

    Parameters
    ----------
    experiment : str
        One of :data:`EXPERIMENTS`.
    seed : int
        Root seed; every replica derives its own seed from it.
    params : dict
        Experiment parameters, merged over :data:`DEFAULTS`.
    out : str
        Output directory for reports.
    """

    experiment: str
    seed: int = 0
    params: dict = field(default_factory=dict)
    out: str = "."

    def __post_init__(self):
        if self.experiment not in DEFAULTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"choose from {', '.join(EXPERIMENTS)}")
        unknown = set(self.params) - set(DEFAULTS[self.experiment])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.experiment}: {sorted(unknown)}")
        merged = dict(DEFAULTS[self.experiment])
        merged.update(self.params)
        self.params = merged
        self.seed = int(self.seed)

    @classmethod
    def from_mapping(cls, data: dict, experiment: Optional[str] = None) -> "ExperimentConfig":
        data = dict(data or {})
        exp = data.pop("experiment", None)
        if experiment is not None and exp is not None and exp != experiment:
            raise ConfigError(f"config is for {exp!r}, command asked for {experiment!r}")
        exp = experiment or exp
        if exp is None:
            raise ConfigError("no experiment named")
        seed = data.pop("seed", 0)
        out = data.pop("out", ".")
        params = data.pop("params", {}) or {}
        if data:
            raise ConfigError(f"unknown top-level keys: {sorted(data)}")
        return cls(exp, seed, dict(params), str(out))

    def as_dict(self) -> dict:
        return {"experiment": self.experiment, "seed": self.seed,
                "params": dict(self.params), "out": self.out}


def load_config(path, experiment: Optional[str] = None) -> ExperimentConfig:
    """Read a YAML config file."""
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return ExperimentConfig.from_mapping(data or {}, experiment)


@dataclass
class Report:
    """Outcome of one experiment run."""

    experiment: str
    config: dict
    tables: dict
    summary: dict
    verdicts: dict
    timing: dict = field(default_factory=dict)
    code_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def content(self) -> dict:
        """Everything except timing."""
        return {"schema_version": self.schema_version, "code_version": self.code_version,
                "experiment": self.experiment, "config": self.config,
                "tables": self.tables, "summary": self.summary,
                "verdicts": self.verdicts, "passed": self.passed}


def _seed_of(*keys) -> int:
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


# --------------------------------------------------------------------------
# experiments


def _phase_diagram(cfg: ExperimentConfig):
    P = cfg.params
    rows = []
    for delta in P["delta_values"]:
        for q in P["q_values"]:
            p_s, p_u, p_hat = thresholds(float(q), int(delta))
            rows.append({"q": float(q), "delta": int(delta), "d": int(delta) - 1,
                         "p_s": p_s, "p_u": p_u, "p_hat_at_p_s": p_hat(p_s)})
    verdicts = {
        "p_u_not_above_p_s": all(r["p_u"] <= r["p_s"] + 1e-9 for r in rows),
        "p_u_equals_p_s_for_q_le_2": all(abs(r["p_u"] - r["p_s"]) <= 1e-9
                                         for r in rows if r["q"] <= 2.0),
    }
    return {"thresholds": rows}, {"rows": len(rows)}, verdicts


def _fixed_points(cfg: ExperimentConfig):
    P = cfg.params
    q, delta = float(P["q"]), int(P["delta"])
    _, p_u, _ = thresholds(q, delta)
    rows, ok = [], True
    for p in P["p_values"]:
        try:
            rep = fixed_points(RCParams(float(p), q), delta - 1, p_u=p_u)
        except ClassificationError as exc:
            log.error("%s", exc)
            ok = False
            continue
        d = rep.as_dict()
        d["count"] = rep.count
        rows.append(d)
    return {"points": rows}, {"p_u": p_u, "p_s": q / (delta + q - 2.0)}, {
        "counts_match_regimes": ok}


def _wsm_decay(cfg: ExperimentConfig):
    P = cfg.params
    params = RCParams(float(P["p"]), float(P["q"]))
    d = int(P["d"])
    rows, rate = wsm_decay_profile(d, params, float(P["theta"]), P["depths"],
                                   int(P["replicas"]), cfg.seed)
    beta = fixed_points(params, d).beta_star
    wired_gaps = []
    for h in P["depths"]:
        T = build_tree(TreeSpec("d-ary", d + 1, int(h)))
        wired_gaps.append(wsm_gap(T, make_bc(T.leaves(), "wired"), params))
    rel = abs(rate - beta) / beta if beta else math.inf
    summary = {"fitted_rate": rate, "beta_star": beta, "relative_error": rel}
    verdicts = {"rate_within_tolerance": rel <= float(P["tolerance"]),
                "wired_gap_zero": max(wired_gaps) == 0.0}
    return {"gaps": rows}, summary, verdicts


def _coupling_time(cfg: ExperimentConfig):
    P = cfg.params
    family = [TreeSpec("d-ary", int(P["delta"]), int(h)) for h in P["heights"]]
    rows = coupling_time_profile(family, RCParams(float(P["p"]), float(P["q"])), P["bc"],
                                 int(P["replicas"]), cfg.seed, int(P["max_steps"]))
    out = []
    for r in rows:
        n = r["n"]
        out.append({"height": r["height"], "n": n, "m": r["m"], "median": r["median"],
                    "normalized": r["median"] / (n * math.log(n) ** 2),
                    "censored": r["censored"]})
    norm = [r["normalized"] for r in out]
    ratio = max(norm) / min(norm) if out and min(norm) > 0 else math.inf
    censored = sum(r["censored"] for r in out)
    return {"profile": out}, {"ratio": ratio, "censored": censored}, {
        "ratio_within_bound": ratio <= float(P["max_ratio"]),
        "no_censored_replicas": censored == 0}


def _block_scan(cfg: ExperimentConfig):
    P = cfg.params
    G = build_tree(TreeSpec("d-ary", int(P["delta"]), int(P["height"])))
    bc = make_bc(G.leaves(), P["bc"])
    params = RCParams(float(P["p"]), float(P["q"]))
    B0, B1, hs = tree_blocks(G, float(P["block_delta"]))
    rows = []
    for r in range(int(P["runs"])):
        s = scan_block_dynamics(G, bc, params, (B0, B1), int(P["sweeps"]), _seed_of(cfg.seed, r))
        rows.append({"run": r, "first_agree": bool(s.agree_B0[0]),
                     "final_agree": bool(s.agree_B0[-1])})
    frac = float(np.mean([r["first_agree"] for r in rows])) if rows else 0.0
    summary = {"agreement": frac, "h0": hs[0], "h1": hs[1], "h2": hs[2],
               "B0_edges": int(B0.size), "B1_edges": int(B1.size)}
    return {"runs": rows}, summary, {"agreement_above_min": frac >= float(P["min_agreement"])}


def rrg_pipeline_seed(n, delta, params: RCParams, seed, n_balls, radius, burn_in_constant,
                      local_factor):
    """One graph of the RRG pipeline.

    Burn-in runs top/bottom Glauber chains plus the all-open frozen chain
    and the Bernoulli(p_hat) chain for ``burn_in_constant * n log n`` steps
    on one stream, auditing the sandwich order.  Each sampled ball then
    restarts from the burn-in state and runs ``local_factor * |B|`` updates
    drawn from its edges only; the ball's center edge is compared between
    the top and bottom chains.
    """
    G = generate_random_regular(n, delta, seed)
    m = G.m
    chains = [ChainSpec(np.ones(m, dtype=bool), None, "top"),
              ChainSpec(np.zeros(m, dtype=bool), None, "bottom"),
              ChainSpec(np.ones(m, dtype=bool), 1.0, "frozen-open"),
              ChainSpec(np.zeros(m, dtype=bool), params.p_hat, "bernoulli")]
    system = CoupledSystem(G, None, params, chains, audit=True)
    burn = int(math.ceil(burn_in_constant * n * math.log(n)))
    system.run(RandomStream(seed, 0), burn)
    burn_row = {"steps": burn, "top_bottom_diff": int(system.ndiff),
                "audited_steps": int(system.audited_steps)}
    snap = system.snapshot()
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    balls = []
    for i, e in enumerate(rng.choice(m, size=min(n_balls, m), replace=False)):
        e = int(e)
        system.restore(snap)
        ball = bfs_ball(G, e, radius)
        system.run(RandomStream(seed, 1 + i), local_factor * len(ball.edge_ids),
                   allowed=ball.edge_ids, draw_from_allowed=True)
        balls.append({"edge": e, "ball_edges": int(len(ball.edge_ids)),
                      "excess": int(ball.tree_excess),
                      "agree": bool(system.X[0, e] == system.X[1, e])})
    return burn_row, balls


def _rrg_pipeline(cfg: ExperimentConfig):
    P = cfg.params
    n, delta, q = int(P["n"]), int(P["delta"]), float(P["q"])
    p_s = q / (delta + q - 2.0)
    p = float(P["p"]) if P["p"] is not None else float(P["p_factor"]) * p_s
    if not p < 1.0:
        raise ConfigError(f"p = {p} must be below 1")
    params = RCParams(p, q)
    radius = int(P["radius"]) if P["radius"] is not None else int(math.floor(0.2 * math.log2(n)))
    burn_rows, ball_rows = [], []
    for s in range(int(P["n_seeds"])):
        sd = _seed_of(cfg.seed, s)
        log.info("rrg-pipeline: graph %d (seed %d)", s, sd)
        burn, balls = rrg_pipeline_seed(n, delta, params, sd, int(P["n_balls"]), radius,
                                        float(P["burn_in_constant"]), int(P["local_factor"]))
        burn_rows.append({"seed": s, **burn})
        ball_rows += [{"seed": s, **b} for b in balls]
    frac = float(np.mean([b["agree"] for b in ball_rows])) if ball_rows else 0.0
    summary = {"p": p, "p_s": p_s, "p_hat": params.p_hat, "radius": radius,
               "agreement": frac, "pairs": len(ball_rows)}
    return ({"balls": ball_rows, "burn_in": burn_rows}, summary,
            {"agreement_above_min": frac >= float(P["min_agreement"])})


def _sharper_bound(cfg: ExperimentConfig):
    rows = []
    for d, q, a in cfg.params["cases"]:
        rep = sharper_bound_check(int(d), float(q), float(a))
        rows.append(rep.as_dict())
    verdicts = {
        "bound_holds": all(r["holds"] for r in rows),
        "roots_ordered": all(r["roots_ordered"] for r in rows),
        "r_Q_matches_y_star": all(r["r_Q_matches_y_star"] for r in rows if r["d"] >= 3),
    }
    return {"cases": rows}, {"cases": len(rows)}, verdicts


def _percolation(cfg: ExperimentConfig):
    P = cfg.params
    n, delta, ph = int(P["n"]), int(P["delta"]), float(P["p_hat"])
    radius = int(P["radius"]) if P["radius"] is not None else int(math.floor(0.2 * math.log2(n)))
    pred = giant_fraction_prediction(delta, ph)
    rows = []
    for s in range(int(P["n_seeds"])):
        G = generate_random_regular(n, delta, _seed_of(cfg.seed, s, 0))
        _, st = bernoulli_percolation(G, ph, seed=_seed_of(cfg.seed, s, 1))
        rng = np.random.default_rng(_seed_of(cfg.seed, s, 2))
        cen = rng.choice(G.m, size=min(int(P["n_balls"]), G.m), replace=False)
        exc = [bfs_ball(G, int(e), radius).tree_excess for e in cen]
        rows.append({"seed": s, "giant_fraction": st.giant_fraction,
                     "second_largest": st.second_largest,
                     "excess_le_1_fraction": float(np.mean(np.asarray(exc) <= 1))})
    k = len(rows)
    cut = 20.0 * math.log(n)
    small_second = sum(r["second_largest"] <= cut for r in rows) / k if k else 0.0
    excess_ok = float(np.mean([r["excess_le_1_fraction"] for r in rows])) if k else 0.0
    summary = {"prediction": pred, "radius": radius, "second_largest_ok_fraction": small_second,
               "excess_le_1_fraction": excess_ok}
    verdicts = {
        "giant_within_band": all(abs(r["giant_fraction"] - pred) <= float(P["band"]) for r in rows),
        "second_largest_small": small_second >= float(P["min_fraction"]),
        "balls_nearly_treelike": excess_ok >= float(P["min_fraction"]),
    }
    return {"seeds": rows}, summary, verdicts


# -- validate ---------------------------------------------------------------


def random_single_component_bc(G: Graph, rng) -> BoundaryCondition:
    """Random wiring of the leaves, optionally with the root wired."""
    leaves = G.leaves() or [G.n - 1]
    theta = float(rng.uniform(0.0, 1.0))
    rw = bool(rng.random() < 0.3)
    return sample_theta_q_wired(leaves, theta, seed=int(rng.integers(2 ** 31)), root_wired=rw)


def _threshold_errors(G, bc, params) -> float:
    """Largest gap between the cut-edge rule and the exact conditional law."""
    t = measure_table(G, bc, params)
    masks = np.arange(1 << G.m, dtype=np.int64)
    thr = np.where(cut_table(G, bc), params.p_hat, params.p)
    worst = 0.0
    for e in range(G.m):
        on = t.logw[masks | (1 << e)]
        off = t.logw[masks & ~(1 << e)]
        cond = 1.0 / (1.0 + np.exp(off - on))
        worst = max(worst, float(np.abs(cond - thr[:, e]).max()))
    return worst


def _validate(cfg: ExperimentConfig):
    P = cfg.params
    cap = int(P["max_edges"])
    rng = np.random.default_rng(cfg.seed)
    rows = []

    def add(trial, kind, G, check, value, ok):
        rows.append({"trial": trial, "kind": kind, "m": int(G.m), "check": check,
                     "value": float(value), "ok": bool(ok)})

    for t in range(int(P["trials"])):
        kind = ("tree", "unicyclic")[t % 2]
        if kind == "tree":
            G = random_tree(int(rng.integers(2, cap + 2)), rng)
        else:
            G = random_unicyclic(int(rng.integers(3, cap + 1)), rng)
        params = RCParams(float(rng.uniform(0.05, 0.95)),
                          float(rng.choice([1.5, 2.0, 3.0, 7.5])))
        bc = random_single_component_bc(G, rng)

        # messages against enumeration at the root
        f = (propagate_messages(G, bc, params) if kind == "tree"
             else unicyclic_messages(G, bc, params))[G.root]
        f_or = message_from_oracle(G, bc, params, G.root)
        if np.isinf(f_or) or np.isinf(f):
            err = 0.0 if f == f_or else math.inf
        else:
            err = abs(f - f_or) / max(1.0, abs(f_or))
        add(t, kind, G, "message", err, err <= float(P["tol_message"]))

        # Z0 + Z1 = Z
        lz0, lz1 = z_split_root(G, bc, params, G.root)
        lz = measure_table(G, bc, params).logz
        err = abs(np.logaddexp(lz0, lz1) - lz)
        add(t, kind, G, "z_split", err, err <= 1e-12)

        err = check_detailed_balance(G, bc, params, tol=math.inf)
        add(t, kind, G, "detailed_balance", err, err <= float(P["tol_balance"]))

        err = _threshold_errors(G, bc, params)
        add(t, kind, G, "cut_rule", err, err <= float(P["tol_balance"]))

        if kind == "tree":
            marg = edge_marginals(G, None, params)
            err = float(np.abs(marg - params.p_hat).max())
            add(t, kind, G, "free_product_law", err, err <= float(P["tol_marginal"]))
    verdicts = {c: all(r["ok"] for r in rows if r["check"] == c)
                for c in ("message", "z_split", "detailed_balance", "cut_rule",
                          "free_product_law")}
    return {"trials": rows}, {"checks": len(rows)}, verdicts


_RUNNERS = {
    "phase-diagram": _phase_diagram,
    "fixed-points": _fixed_points,
    "wsm-decay": _wsm_decay,
    "coupling-time": _coupling_time,
    "block-scan": _block_scan,
    "rrg-pipeline": _rrg_pipeline,
    "sharper-bound": _sharper_bound,
    "validate": _validate,
    "percolation": _percolation,
}


def run_experiment(config: ExperimentConfig) -> Report:
    """Run the configured experiment and collect its report.

    Capacity errors from the modules propagate unchanged.
    """
    t0 = time.perf_counter()
    tables, summary, verdicts = _RUNNERS[config.experiment](config)
    timing = {"wall_seconds": time.perf_counter() - t0}
    return Report(config.experiment, config.as_dict(), tables, summary,
                  {k: bool(v) for k, v in verdicts.items()}, timing)


# --------------------------------------------------------------------------
# serialization


def _plain(x):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return x


def _cell(v):
    v = _plain(v)
    if isinstance(v, list):
        return ";".join(repr(x) if isinstance(x, float) else str(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return v


def emit_report(report: Report, format: str, path, table: Optional[str] = None) -> Path:
    """Write ``report`` as JSON or as CSV of one table.

    JSON files have sorted keys with the timing kept under ``"timing"``, so
    two runs of the same config differ only there.  CSV files follow the
    column order in :data:`SCHEMAS`; ``table`` defaults to the experiment's
    primary table.
    """
    path = Path(path)
    if format == "json":
        doc = report.content()
        doc["timing"] = report.timing
        path.write_text(json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n")
    elif format == "csv":
        schema = SCHEMAS[report.experiment]
        name = table or next(iter(schema))
        if name not in schema:
            raise KeyError(f"{report.experiment} has no table {name!r}")
        cols = schema[name]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in report.tables.get(name, []):
                w.writerow([_cell(row.get(c)) for c in cols])
    else:
        raise ValueError(f"unknown report format {format!r}")
    return path


# --------------------------------------------------------------------------
# command line


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fkdyn", description="Random-cluster dynamics experiments.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="YAML config file")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--out", default=None, help="output directory (overrides the config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.experiment)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out = args.out
        report = run_experiment(cfg)
    except (ConfigError, CapacityError, OSError) as exc:
        print(f"fkdyn: error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", out / f"{cfg.experiment}.json")
    for i, name in enumerate(SCHEMAS[cfg.experiment]):
        fname = f"{cfg.experiment}.csv" if i == 0 else f"{cfg.experiment}-{name}.csv"
        emit_report(report, "csv", out / fname, table=name)
    for k, v in sorted(report.verdicts.items()):
        print(f"{'PASS' if v else 'FAIL'} {k}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
