"""Config-driven command line front end.

Subcommands: ``run`` (Monte Carlo study -> results.csv/json + tau.csv),
``theory`` (closed-form bias/variance tables), ``exposure`` (exposure
histograms and variances). Configs are strict JSON: unknown keys are
rejected with their path, and referenced files must exist at parse time.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from gatesim.clustering import louvain
from gatesim.design import DesignPlan, assign, exposure_onehop
from gatesim.estimators import ESTIMATOR_IDS
from gatesim.graph import Graph, build_multihop_B, build_onehop_B, load_edge_list, synthetic_graph
from gatesim.harness import EstimateReport, Scenario, run_scenario, write_report
from gatesim.outcomes import MODEL_KINDS, OutcomeModel, true_gate
from gatesim import theory


class ConfigError(ValueError):
    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


_SCHEMA = {
    "graph": {"path": str, "format": str, "synthetic": {"kind": str, "n": int}},
    "clustering": {"resolution": (int, float), "seed": int},
    "model": {
        "kind": str,
        "beta0": (int, float),
        "beta1": (int, float),
        "r": (int, float, list),
        "sigma_e": (int, float),
    },
    "design": {
        "level": str,
        "scheme": str,
        "temporal": str,
        "proportions": list,
    },
    "estimators": list,
    "merge_depths": list,
    "mc": {"replications": int, "master_seed": int},
    "output": {"dir": str},
    "dynamic": {"enabled": bool},
    "plugins": dict,
    "expreg": {"hops": int, "ridge": (int, float)},
    "theory": {"x_grid": list},
    "exposure": {"bins": int},
    "gnn_seed": int,
}


def _check_keys(obj: dict, schema: dict, path: str) -> None:
    for key, value in obj.items():
        here = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(here, "unknown key")
        expected = schema[key]
        if isinstance(expected, dict) and expected and all(
            isinstance(k, str) for k in expected
        ):
            if key == "plugins":
                if not isinstance(value, dict):
                    raise ConfigError(here, "expected an object")
                continue
            if not isinstance(value, dict):
                raise ConfigError(here, "expected an object")
            _check_keys(value, expected, here)
        else:
            if not isinstance(value, expected):
                raise ConfigError(here, f"expected {expected}, got {type(value).__name__}")


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(str(path), "config file does not exist")
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(str(path), "top level must be an object")
    _check_keys(cfg, _SCHEMA, "")
    for required in ("graph", "model", "design", "mc"):
        if required not in cfg:
            raise ConfigError(required, "missing required section")
    graph_cfg = cfg["graph"]
    if "path" in graph_cfg:
        gpath = Path(graph_cfg["path"])
        if not gpath.exists():
            raise ConfigError("graph.path", f"file not found: {gpath}")
    elif "synthetic" not in graph_cfg:
        raise ConfigError("graph", "needs either path or synthetic")
    for est in cfg.get("estimators", []):
        if est not in ESTIMATOR_IDS:
            raise ConfigError("estimators", f"unknown estimator id {est!r}")
    for plugin_id, entry in cfg.get("plugins", {}).items():
        if not isinstance(entry, dict) or not isinstance(entry.get("cmd"), list) \
                or not all(isinstance(part, str) for part in entry["cmd"]):
            raise ConfigError(f"plugins.{plugin_id}",
                              "expected an object with a 'cmd' list of strings")
    kind = cfg["model"].get("kind")
    from gatesim.outcomes import _KIND_ALIASES

    if kind not in MODEL_KINDS and kind not in _KIND_ALIASES:
        raise ConfigError("model.kind", f"unknown model kind {kind!r}")
    if _KIND_ALIASES.get(kind, kind) == "general":
        raise ConfigError("model.kind", "general models need an explicit matrix; use the library API")
    return cfg


def _build_graph(cfg: dict) -> Graph:
    graph_cfg = cfg["graph"]
    if "path" in graph_cfg:
        return load_edge_list(graph_cfg["path"], format=graph_cfg.get("format", "plain"))
    syn = graph_cfg["synthetic"]
    return synthetic_graph(syn["kind"], syn["n"])


def _build_model(cfg: dict, g: Graph) -> OutcomeModel:
    m = cfg["model"]
    kind = m["kind"]
    r = m.get("r", 0.0)
    B = None
    from gatesim.outcomes import _KIND_ALIASES

    if _KIND_ALIASES.get(kind, kind) == "multihop":
        B = build_multihop_B(g, list(np.atleast_1d(r)))
    return OutcomeModel(kind=kind, beta0=m["beta0"], beta1=m["beta1"],
                        r=tuple(r) if isinstance(r, list) else r,
                        sigma_e=m.get("sigma_e", 0.0), B=B)


def _build_plan(cfg: dict, g: Graph) -> DesignPlan:
    d = cfg["design"]
    clustering = None
    if d["level"] == "cluster":
        if "clustering" not in cfg:
            raise ConfigError("clustering", "cluster-level designs need a clustering section")
        cl = cfg["clustering"]
        clustering = louvain(g, cl["resolution"], cl["seed"])
    return DesignPlan(level=d["level"], scheme=d["scheme"], temporal=d["temporal"],
                      proportions=tuple(d["proportions"]), clustering=clustering)


def _scenario_from(cfg: dict, config_path: Path, output_override: str | None) -> Scenario:
    g = _build_graph(cfg)
    model = _build_model(cfg, g)
    plan = _build_plan(cfg, g)
    out_dir = output_override or cfg.get("output", {}).get("dir", "results")
    expreg = cfg.get("expreg", {})
    return Scenario(
        graph=g,
        model=model,
        plan=plan,
        estimators=tuple(cfg.get("estimators", ("ols",))),
        replications=cfg["mc"]["replications"],
        master_seed=cfg["mc"]["master_seed"],
        merge_depths=tuple(cfg.get("merge_depths", ())),
        dynamic=cfg.get("dynamic", {}).get("enabled", False),
        scenario_id=config_path.stem,
        plugins=cfg.get("plugins", {}),
        expreg_hops=expreg.get("hops", 1),
        expreg_ridge=expreg.get("ridge", 1e-8),
        gnn_seed=cfg.get("gnn_seed", 2),
        workdir=out_dir,
    )


def _print_table(report: EstimateReport, estimators, depths, quiet: bool) -> None:
    if quiet:
        return
    print(f"true GATE = {report.true_gate:.6f}   (R = {report.replications})")
    header = "t     " + "".join(
        f"{est + ' bias':>16}{est + ' std':>15}{est + ' mse':>15}" for est in estimators
    )
    print(header)
    for t in depths:
        cells = []
        for est in estimators:
            row = report.row(est, t)
            cells.append(f"{row.bias:>16.3f}{row.std:>15.3f}{row.mse:>15.3f}")
        print(f"t={t:<4d}" + "".join(cells))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    scenario = _scenario_from(cfg, Path(args.config), args.output)
    workers = args.workers or (os.cpu_count() or 1)
    report = run_scenario(scenario, workers=workers)
    out_dir = Path(scenario.workdir)
    write_report(report, out_dir)
    _print_table(report, scenario.estimators, scenario.merge_depths, args.quiet)
    for row in report.rows:
        if row.n_effective < report.replications:
            print(
                f"warning: {row.estimator} at t={row.t} degenerated in "
                f"{report.replications - row.n_effective} replications",
                file=sys.stderr,
            )
    if not args.quiet:
        print(f"results written to {out_dir}")
    # Partial results are results: estimator degeneracies warn, not fail.
    return 0


def cmd_theory(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    g = _build_graph(cfg)
    model = _build_model(cfg, g)
    proportions = tuple(cfg["design"]["proportions"])
    if model.kind == "onehop":
        s_total = model.r * g.n
    elif model.kind == "multihop":
        s_total = model.B.total_sum
    else:
        print("theory tables need a model linear in the interference matrix",
              file=sys.stderr)
        return 2
    n = g.n
    print(f"n = {n}, total interference weight = {s_total:.6f}, "
          f"true GATE = {true_gate(model, g):.6f}")
    print("merge-depth bias predictions (suffix windows):")
    T = len(proportions)
    for t in range(1, T + 1):
        window = proportions[T - t:]
        b = theory.bias_merged(s_total, n, window)
        print(f"  t={t} proportions={window}: bias = {b:.6f}")
    if model.kind == "onehop":
        B = build_onehop_B(g, model.r)
    else:
        B = model.B
    bs = theory.bsums(B)
    print("single-step variance predictions:")
    for c in proportions:
        try:
            v = theory.variance_one_step_exact(bs, n, c, model.sigma_e)
            print(f"  c={c}: variance = {v:.6g}")
        except ValueError as exc:
            print(f"  c={c}: not available ({exc})")
    grid = cfg.get("theory", {}).get("x_grid",
                                     [round(0.05 * i, 2) for i in range(21)])
    print("merge-improvement criterion over new proportion x:")
    for x in grid:
        res = theory.merge_improvement_criterion(proportions, float(x))
        verdict = "improves" if res["improves"] else "no improvement"
        print(f"  x={x}: lhs = {res['lhs']:.6g} -> {verdict}")
    report = theory.interference_intensity_report(B)
    print("interference intensity diagnostics:")
    for key, value in report.items():
        print(f"  {key} = {value:.6g}")
    return 0


def cmd_exposure(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    g = _build_graph(cfg)
    plan = _build_plan(cfg, g)
    seed = cfg["mc"]["master_seed"]
    out_dir = Path(args.output or cfg.get("output", {}).get("dir", "results"))
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = assign(plan, g.n, seed)
    exposures = [exposure_onehop(g, panel.z[t]) for t in range(plan.steps)]
    merged = np.concatenate(exposures)
    edges = np.round(np.arange(0.0, 1.02, 0.02), 10)
    with (out_dir / "exposure_hist.csv").open("w", encoding="utf-8") as fh:
        fh.write("series,bin_lo,bin_hi,count\n")
        series = [(f"step_{t}", e) for t, e in enumerate(exposures)] + [("merged", merged)]
        for name, values in series:
            counts, _ = np.histogram(values, bins=edges)
            for lo, hi, cnt in zip(edges[:-1], edges[1:], counts):
                fh.write(f"{name},{lo},{hi},{cnt}\n")
    with (out_dir / "exposure_variance.csv").open("w", encoding="utf-8") as fh:
        fh.write("series,variance\n")
        for t, e in enumerate(exposures):
            fh.write(f"step_{t},{float(e.var())!r}\n")
        fh.write(f"merged,{float(merged.var())!r}\n")
    if not args.quiet:
        for t, e in enumerate(exposures):
            print(f"step {t} (c={plan.proportions[t]}): exposure variance = {e.var():.6f}")
        print(f"merged: exposure variance = {merged.var():.6f}")
        print(f"histograms written to {out_dir}")
    return 0


def main(argv: "list[str] | None" = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gatesim",
        description="GATE estimation studies under network interference",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("theory", cmd_theory), ("exposure", cmd_exposure)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON run config")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel replication workers (default: all cores)")
        p.add_argument("--output", default=None, help="output directory override")
        p.add_argument("--quiet", action="store_true")
        p.set_defaults(func=fn)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
