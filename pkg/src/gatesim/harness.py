"""Monte Carlo engine, exact enumeration oracle, and the plugin bridge.

Replications are independent work items: replication r derives all of
its randomness from SeedSequence((master_seed, r, ...)) via Philox, so
results are bit-identical regardless of how many workers execute them.
"""

from __future__ import annotations

import itertools
import json
import math
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gatesim.design import DesignPlan, assign
from gatesim.estimators import (
    DegenerateDesignError,
    GateEstimate,
    ESTIMATOR_IDS,
    diff_in_means,
    exposure_propensities_exact,
    exposure_propensities_mc,
    exposure_regression_gate,
    ht_exposure,
    ht_naive_pooled,
    ht_standard,
    lagrange_gate_from_dataset,
    ols_gate,
)
from gatesim.graph import Graph, ResourceLimitError, evolve_graph
from gatesim.outcomes import MergedDataset, OutcomeModel, run_experiment, true_gate
from gatesim.rng import generator as rng_generator


class PluginError(RuntimeError):
    """External estimator failed: bad exit, malformed output, or timeout."""


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo study: graph x model x design x estimators."""

    graph: Graph
    model: OutcomeModel
    plan: DesignPlan
    estimators: tuple[str, ...]
    replications: int
    master_seed: int
    merge_depths: tuple[int, ...] = ()
    dynamic: bool = False
    scenario_id: str = "scenario"
    plugins: dict = field(default_factory=dict)
    expreg_hops: int = 1
    expreg_ridge: float = 1e-8
    ht_exposure_draws: int = 10_000
    plugin_timeout: float = 600.0
    gnn_seed: int = 2
    workdir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "merge_depths", tuple(self.merge_depths) or
                           tuple(range(1, self.plan.steps + 1)))
        if self.replications < 1:
            raise ValueError("need at least one replication")
        for est in self.estimators:
            if est not in ESTIMATOR_IDS:
                raise ValueError(f"unknown estimator id {est!r}")
            if est == "gnn" and "gnn" not in self.plugins:
                raise ValueError("estimator 'gnn' requires a registered plugin command")
        for t in self.merge_depths:
            if not 1 <= t <= self.plan.steps:
                raise ValueError(f"merge depth {t} outside 1..{self.plan.steps}")


@dataclass(frozen=True)
class ReportRow:
    scenario_id: str
    estimator: str
    t: int
    bias: float
    std: float
    mse: float
    n_effective: int
    theory_bias: float | None
    wall_time: float


@dataclass(frozen=True)
class EstimateReport:
    rows: tuple[ReportRow, ...]
    taus: dict            # (estimator, t) -> list[float | None] in replication order
    true_gate: float
    replications: int

    def row(self, estimator: str, t: int) -> ReportRow:
        for r in self.rows:
            if r.estimator == estimator and r.t == t:
                return r
        raise KeyError((estimator, t))


def resolve_graphs(scenario: Scenario) -> tuple[Graph, ...]:
    """Per-step topologies; under dynamics, one growth pass per later step.

    The chain starts from the supplied baseline graph and is fixed for
    the whole Monte Carlo run (seeded from the master seed only).
    """
    if not scenario.dynamic:
        return tuple([scenario.graph] * scenario.plan.steps)
    graphs = [scenario.graph]
    for t in range(1, scenario.plan.steps):
        graphs.append(evolve_graph(graphs[-1],
                                   rng_generator((scenario.master_seed, "evolve", t))))
    return tuple(graphs)


def theory_bias_for(scenario: Scenario, proportions: tuple[float, ...]) -> float | None:
    """Closed-form bias where the derivation's hypotheses hold.

    Unit-level complete randomization with a model linear in the
    interference matrix, on a static graph; otherwise None.
    """
    from gatesim.theory import bias_merged

    if scenario.dynamic:
        return None
    if scenario.plan.level != "unit" or scenario.plan.scheme != "complete":
        return None
    model = scenario.model
    if model.kind == "onehop":
        s_total = model.r * scenario.graph.n
    elif model.kind in ("general", "multihop"):
        s_total = model.B.total_sum
    else:
        return None
    try:
        return bias_merged(s_total, scenario.graph.n, proportions)
    except ValueError:
        return None


def _propensities_for_final_step(scenario: Scenario, graphs: tuple[Graph, ...]):
    plan = scenario.plan
    c_last = plan.proportions[-1]
    g_last = graphs[-1]
    if plan.level == "unit":
        return exposure_propensities_exact(g_last.degrees, plan.scheme, c_last, g_last.n)
    step_plan = DesignPlan(level=plan.level, scheme=plan.scheme, temporal="independent",
                           proportions=(c_last,), clustering=plan.clustering)
    return exposure_propensities_mc(
        g_last, step_plan, scenario.ht_exposure_draws,
        (scenario.master_seed, "ht_exposure_propensity"),
    )


def write_exchange_dir(
    data: MergedDataset,
    model: OutcomeModel,
    directory: str | Path,
    gnn_seed: int = 2,
    blind: bool = False,
) -> Path:
    """Write the plugin exchange layout: per-step edges, panel.csv, meta.json."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    graph_files = []
    for t, g in enumerate(data.graphs):
        name = f"step_{t}_edges.csv"
        with (directory / name).open("w", encoding="utf-8") as fh:
            for u, v in g.edges:
                fh.write(f"{u},{v}\n")
        graph_files.append(name)
    with (directory / "panel.csv").open("w", encoding="utf-8") as fh:
        fh.write("step,unit,z,y\n")
        for t in range(data.steps):
            zt, yt = data.z_panel[t], data.y_panel[t]
            for unit in range(data.n):
                fh.write(f"{t},{unit},{int(zt[unit])},{float(yt[unit])!r}\n")
    meta = {
        "n": data.n,
        "proportions": list(data.proportions),
        "model_kind": model.kind,
        "graph_files": graph_files,
        "gnn_seed": gnn_seed,
    }
    if not blind:
        meta["true_gate"] = true_gate(model, data.graphs[-1])
    with (directory / "meta.json").open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)
    return directory


def plugin_estimate(exchange_dir: str | Path, cmd: "list[str]",
                    timeout: float = 600.0) -> GateEstimate:
    """Invoke an external estimator process on an exchange directory."""
    exchange_dir = Path(exchange_dir)
    if not (exchange_dir / "meta.json").exists():
        raise PluginError(f"missing meta.json in {exchange_dir}")
    if not (exchange_dir / "panel.csv").exists():
        raise PluginError(f"missing panel.csv in {exchange_dir}")
    try:
        proc = subprocess.run(
            list(cmd) + [str(exchange_dir)],
            capture_output=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired as exc:
        raise PluginError(f"plugin timed out after {timeout}s") from exc
    if proc.returncode != 0:
        tail = proc.stderr.decode(errors="replace")[-500:]
        raise PluginError(f"plugin exited with {proc.returncode}: {tail}")
    estimate_path = exchange_dir / "estimate.json"
    if not estimate_path.exists():
        raise PluginError("plugin did not write estimate.json")
    try:
        payload = json.loads(estimate_path.read_text())
        tau = float(payload["tau_hat"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise PluginError(f"malformed estimate.json: {exc}") from exc
    diag = {k: v for k, v in payload.items() if k != "tau_hat"}
    return GateEstimate(tau_hat=tau, estimator_id="gnn", diagnostics=diag)


# Worker-side state for process pools; populated by the initializer.
_CTX: dict = {}


def _init_worker(scenario: Scenario, graphs: tuple[Graph, ...], propensities) -> None:
    _CTX["scenario"] = scenario
    _CTX["graphs"] = graphs
    _CTX["propensities"] = propensities


def _estimate_window(
    scenario: Scenario,
    window: MergedDataset,
    estimator: str,
    propensities,
    replication: int,
    depth: int,
) -> float:
    if estimator == "ols":
        return ols_gate(window).tau_hat
    if estimator == "dim":
        return diff_in_means(window).tau_hat
    if estimator == "ht":
        return ht_standard(window.y_panel[-1], window.z_panel[-1],
                           window.proportions[-1]).tau_hat
    if estimator == "ht_pooled":
        return ht_naive_pooled(window).tau_hat
    if estimator == "ht_exposure":
        return ht_exposure(window.y_panel[-1], window.z_panel[-1],
                           window.graphs[-1], propensities).tau_hat
    if estimator == "lagrange":
        return lagrange_gate_from_dataset(window).tau_hat
    if estimator == "expreg":
        return exposure_regression_gate(window, hops=scenario.expreg_hops,
                                        ridge=scenario.expreg_ridge).tau_hat
    if estimator == "gnn":
        plugin_cfg = scenario.plugins["gnn"]
        root = Path(scenario.workdir or ".") / "exchange"
        directory = root / f"r{replication:05d}_t{depth}"
        write_exchange_dir(window, scenario.model, directory,
                           gnn_seed=scenario.gnn_seed)
        timeout = float(plugin_cfg.get("timeout", scenario.plugin_timeout))
        return plugin_estimate(directory, plugin_cfg["cmd"], timeout=timeout).tau_hat
    raise ValueError(f"unknown estimator id {estimator!r}")


def _run_replication(r: int) -> list[tuple[str, int, float | None, str | None]]:
    scenario: Scenario = _CTX["scenario"]
    graphs = _CTX["graphs"]
    propensities = _CTX["propensities"]
    data = run_experiment(scenario.model, scenario.plan, graphs,
                          (scenario.master_seed, r))
    out = []
    for t in scenario.merge_depths:
        window = data.suffix(t)
        for est in scenario.estimators:
            try:
                tau = _estimate_window(scenario, window, est, propensities, r, t)
                out.append((est, t, tau, None))
            except (DegenerateDesignError, PluginError) as exc:
                out.append((est, t, None, f"{type(exc).__name__}: {exc}"))
    return out


def run_scenario(scenario: Scenario, workers: int = 1) -> EstimateReport:
    """Execute the Monte Carlo study and aggregate (bias, std, mse) triplets.

    Sample standard deviation uses the (R-1) denominator; mse is the mean
    squared error against the exact ground-truth effect, so
    mse = bias^2 + std^2 * (R-1)/R up to float rounding.
    """
    graphs = resolve_graphs(scenario)
    propensities = None
    if "ht_exposure" in scenario.estimators:
        propensities = _propensities_for_final_step(scenario, graphs)
    tau_truth = true_gate(scenario.model, graphs[-1])

    per_rep: list = [None] * scenario.replications
    started = time.perf_counter()
    if workers <= 1:
        _init_worker(scenario, graphs, propensities)
        for r in range(scenario.replications):
            per_rep[r] = _run_replication(r)
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(scenario, graphs, propensities),
        ) as pool:
            for r, result in zip(range(scenario.replications),
                                 pool.map(_run_replication,
                                          range(scenario.replications))):
                per_rep[r] = result
    elapsed = time.perf_counter() - started

    taus: dict = {(est, t): [None] * scenario.replications
                  for t in scenario.merge_depths for est in scenario.estimators}
    errors: dict = {key: [] for key in taus}
    for r, results in enumerate(per_rep):
        for est, t, tau, err in results:
            taus[(est, t)][r] = tau
            if err is not None:
                errors[(est, t)].append((r, err))

    rows = []
    per_cell_time = elapsed / max(len(taus), 1)
    for t in scenario.merge_depths:
        theory = theory_bias_for(scenario, scenario.plan.proportions[-t:])
        for est in scenario.estimators:
            values = np.asarray([v for v in taus[(est, t)] if v is not None])
            n_eff = len(values)
            if n_eff == 0:
                rows.append(ReportRow(scenario.scenario_id, est, t,
                                      float("nan"), float("nan"), float("nan"),
                                      0, theory, per_cell_time))
                continue
            bias = float(values.mean() - tau_truth)
            std = float(values.std(ddof=1)) if n_eff > 1 else 0.0
            mse = float(np.mean((values - tau_truth) ** 2))
            rows.append(ReportRow(scenario.scenario_id, est, t, bias, std, mse,
                                  n_eff, theory, per_cell_time))
    return EstimateReport(rows=tuple(rows), taus=taus, true_gate=tau_truth,
                          replications=scenario.replications)


def _fmt(x: float | None) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return repr(float(x))


def write_report(report: EstimateReport, directory: str | Path) -> None:
    """results.csv + results.json mirror + per-replication tau.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / "results.csv").open("w", encoding="utf-8") as fh:
        fh.write("scenario_id,estimator,t,bias,std,mse,n_effective,theory_bias\n")
        for row in report.rows:
            fh.write(
                f"{row.scenario_id},{row.estimator},{row.t},{_fmt(row.bias)},"
                f"{_fmt(row.std)},{_fmt(row.mse)},{row.n_effective},"
                f"{_fmt(row.theory_bias)}\n"
            )
    payload = {
        "true_gate": report.true_gate,
        "replications": report.replications,
        "conventions": {
            "std": "sample standard deviation, (R-1) denominator",
            "mse": "mean squared error against the exact ground truth; "
                   "equals bias^2 + std^2*(R-1)/R",
        },
        "rows": [
            {
                "scenario_id": row.scenario_id,
                "estimator": row.estimator,
                "t": row.t,
                "bias": row.bias,
                "std": row.std,
                "mse": row.mse,
                "n_effective": row.n_effective,
                "theory_bias": row.theory_bias,
                "wall_time": row.wall_time,
            }
            for row in report.rows
        ],
    }
    with (directory / "results.json").open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
    with (directory / "tau.csv").open("w", encoding="utf-8") as fh:
        fh.write("replication,estimator,t,tau_hat\n")
        for (est, t), values in sorted(report.taus.items()):
            for r, tau in enumerate(values):
                fh.write(f"{r},{est},{t},{_fmt(tau)}\n")


def enumerate_oracle(
    g: Graph,
    model: OutcomeModel,
    plan: DesignPlan,
    estimator,
    budget: int = 1_000_000,
) -> tuple[float, float]:
    """Exact mean and population variance of an estimator over all draws.

    Supports one- and two-step complete randomization (independent
    coupling for two steps); the model must be noise free so that the
    assignment is the only source of randomness. ``estimator`` is either
    a registry id or a callable MergedDataset -> float.
    """
    from gatesim.design import round_half_up

    if model.sigma_e != 0.0:
        raise ValueError("oracle requires a noise-free model")
    if plan.scheme != "complete" or plan.level != "unit":
        raise ValueError("oracle supports unit-level complete randomization")
    if plan.steps > 2:
        raise ValueError("oracle supports one- or two-step plans")

    if callable(estimator):
        fn = estimator
    elif estimator == "ols":
        fn = lambda data: ols_gate(data).tau_hat
    elif estimator == "dim":
        fn = lambda data: diff_in_means(data).tau_hat
    elif estimator == "ht":
        fn = lambda data: ht_standard(data.y_panel[-1], data.z_panel[-1],
                                      data.proportions[-1]).tau_hat
    elif estimator == "ht_pooled":
        fn = lambda data: ht_naive_pooled(data).tau_hat
    else:
        raise ValueError(f"oracle cannot resolve estimator {estimator!r}")

    n = g.n
    ds = [round_half_up(c * n) for c in plan.proportions]
    total = math.prod(math.comb(n, d) for d in ds)
    if total > budget:
        raise ResourceLimitError(
            f"{total} assignments exceed the enumeration budget of {budget}"
        )

    outcome_cache: dict[frozenset, np.ndarray] = {}

    def outcomes_for(subset: tuple[int, ...]) -> np.ndarray:
        key = frozenset(subset)
        if key not in outcome_cache:
            z = np.zeros(n)
            z[list(subset)] = 1.0
            outcome_cache[key] = np.stack([z, generate_outcomes_cached(z)])
        return outcome_cache[key]

    from gatesim.outcomes import generate_outcomes

    def generate_outcomes_cached(z: np.ndarray) -> np.ndarray:
        return generate_outcomes(model, g, z, seed=None)

    values = []
    subset_iters = [itertools.combinations(range(n), d) for d in ds]
    for combo in itertools.product(*subset_iters):
        z_panel = np.empty((plan.steps, n))
        y_panel = np.empty((plan.steps, n))
        for t, subset in enumerate(combo):
            zy = outcomes_for(subset)
            z_panel[t] = zy[0]
            y_panel[t] = zy[1]
        data = MergedDataset(
            z_panel=z_panel,
            y_panel=y_panel,
            proportions=plan.proportions,
            graphs=tuple([g] * plan.steps),
            plan=plan,
        )
        values.append(fn(data))
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.var())
