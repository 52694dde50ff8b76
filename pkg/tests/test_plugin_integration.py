"""End-to-end integration with the spectral-GNN plugin package.

These tests shell out to the built Node plugin (gnn-plugin/dist) through
the same subprocess protocol the harness uses in production runs; they
skip when the plugin has not been built.
"""

import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

import gatesim as gs
from gatesim.outcomes import OutcomeModel

PLUGIN_MAIN = Path(__file__).resolve().parent.parent / "gnn-plugin" / "dist" / "main.js"
PLUGIN_COMPARE = PLUGIN_MAIN.parent / "compare.js"


@pytest.fixture(scope="module")
def node_plugin():
    if shutil.which("node") is None:
        pytest.skip("node is not installed")
    if not PLUGIN_MAIN.exists():
        pytest.skip("gnn-plugin not built; run `npm run build` in gnn-plugin/")
    return ["node", str(PLUGIN_MAIN)]


def clique_graph():
    import scipy.sparse as sp

    sizes = [5, 5, 8, 8, 12, 20, 30]
    edges, anchors, base = [], [], 0
    for s in sizes:
        for i in range(s):
            for j in range(i + 1, s):
                edges.append((base + i, base + j))
        anchors.append(base)
        base += s
    for a in range(len(anchors)):
        edges.append((anchors[a], anchors[(a + 1) % len(anchors)]))
    edges = np.asarray(edges)
    n = base
    adj = sp.csr_matrix(
        (np.ones(2 * len(edges)),
         (np.concatenate([edges[:, 0], edges[:, 1]]),
          np.concatenate([edges[:, 1], edges[:, 0]]))),
        shape=(n, n))
    adj.sum_duplicates()
    adj.data[:] = 1.0
    return gs.Graph(n=n, adjacency=adj,
                    degrees=np.asarray(adj.sum(axis=1)).ravel().astype(np.int64))


def test_gnn_estimator_through_harness(node_plugin, tmp_path):
    g = clique_graph()
    scenario = gs.Scenario(
        graph=g,
        model=OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1),
        plan=gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                           proportions=(0.05, 0.5)),
        estimators=("ols", "gnn"),
        replications=3,
        master_seed=77,
        merge_depths=(2,),
        plugins={"gnn": {"cmd": node_plugin, "timeout": 300}},
        workdir=str(tmp_path),
        scenario_id="gnn-integration",
    )
    report = gs.run_scenario(scenario)
    row = report.row("gnn", 2)
    assert row.n_effective == 3
    assert np.isfinite(row.bias)
    # The merged spectral regressor should comfortably beat the pooled
    # linear fit, which carries the full interference bias here.
    assert abs(row.bias) < abs(report.row("ols", 2).bias)
    # Exchange directories persist for audit; estimates carry diagnostics.
    estimate = json.loads((tmp_path / "exchange" / "r00000_t2" / "estimate.json").read_text())
    assert {"tau_hat", "final_loss", "converged"} <= estimate.keys()


def test_gnn_determinism_given_seed(node_plugin, tmp_path):
    g = clique_graph()
    model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1)
    plan = gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                         proportions=(0.05, 0.5))
    data = gs.run_experiment(model, plan, [g, g], seed=3)
    taus = []
    for attempt in range(2):
        directory = tmp_path / f"run{attempt}"
        gs.write_exchange_dir(data, model, directory, gnn_seed=2)
        est = gs.plugin_estimate(directory, node_plugin, timeout=300)
        taus.append(est.tau_hat)
    assert taus[0] == taus[1]


def test_repeated_vs_merged_comparison_surface(node_plugin, tmp_path):
    g = clique_graph()
    model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1)
    repeated_plan = gs.DesignPlan(level="unit", scheme="complete", temporal="repeated",
                                  proportions=(0.5, 0.5))
    merged_plan = gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                                proportions=(0.05, 0.5))
    repeated_dir = tmp_path / "repeated"
    merged_dir = tmp_path / "merged"
    gs.write_exchange_dir(gs.run_experiment(model, repeated_plan, [g, g], seed=5),
                          model, repeated_dir)
    gs.write_exchange_dir(gs.run_experiment(model, merged_plan, [g, g], seed=5),
                          model, merged_dir)
    out = tmp_path / "comparison.json"
    proc = subprocess.run(
        ["node", str(PLUGIN_COMPARE), str(repeated_dir), str(merged_dir), str(out)],
        capture_output=True, timeout=600,
    )
    assert proc.returncode == 0, proc.stderr.decode()
    comparison = json.loads(out.read_text())
    assert set(comparison) == {"repeated", "distinct", "distinct_improves"}
    assert np.isfinite(comparison["repeated"]["bias"])
    assert np.isfinite(comparison["distinct"]["bias"])
