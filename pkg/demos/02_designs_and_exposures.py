"""Treatment-exposure variation across randomization designs.

Exposure (share of treated neighbors) is the quantity a regression must
see varying to learn spillovers. Cluster-level randomization and merging
steps with different proportions both widen its distribution; this builds
a clique-of-cliques graph where the effect is stark.
"""

import numpy as np
import scipy.sparse as sp

import gatesim as gs

K, S = 12, 10  # cliques x clique size
edges = []
for b in range(K):
    base = b * S
    edges += [(base + i, base + j) for i in range(S) for j in range(i + 1, S)]
    edges.append((base, ((b + 1) % K) * S))  # one bridge per clique
edges = np.asarray(edges)
n = K * S
rows = np.concatenate([edges[:, 0], edges[:, 1]])
cols = np.concatenate([edges[:, 1], edges[:, 0]])
adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
adj.sum_duplicates()
adj.data[:] = 1.0
g = gs.Graph(n=n, adjacency=adj,
             degrees=np.asarray(adj.sum(axis=1)).ravel().astype(np.int64))

clusters = gs.louvain(g, resolution=1.0, seed=0)
print(f"{K} cliques of {S}; louvain finds {clusters.n_clusters} communities")

designs = {
    "unit complete, c=0.5": gs.DesignPlan(
        level="unit", scheme="complete", temporal="independent", proportions=(0.5,)),
    "unit complete, c=0.25": gs.DesignPlan(
        level="unit", scheme="complete", temporal="independent", proportions=(0.25,)),
    "cluster complete, c=0.5": gs.DesignPlan(
        level="cluster", scheme="complete", temporal="independent",
        proportions=(0.5,), clustering=clusters),
}

seeds = 200
print(f"\nmean exposure variance over {seeds} draws:")
for name, plan in designs.items():
    vs = []
    for seed in range(seeds):
        panel = gs.assign(plan, n, seed)
        vs.append(gs.exposure_onehop(g, panel.z[0]).var())
    print(f"  {name:28s} {np.mean(vs):.4f}")

merged_plan = gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                            proportions=(0.25, 0.75))
vs_merged, vs_max_single = [], []
for seed in range(seeds):
    panel = gs.assign(merged_plan, n, seed)
    e1 = gs.exposure_onehop(g, panel.z[0])
    e2 = gs.exposure_onehop(g, panel.z[1])
    vs_merged.append(np.concatenate([e1, e2]).var())
    vs_max_single.append(max(e1.var(), e2.var()))
print(f"  {'merged rollout (0.25, 0.75)':28s} {np.mean(vs_merged):.4f} "
      f"(best single step {np.mean(vs_max_single):.4f})")

B = gs.build_onehop_B(g, 1.0)
print("\nclosed-form exposure-variation diagnostic trace(B'B Cov[z]):")
print(f"  unit bernoulli c=0.5     {gs.exposure_trace(B, 'unit', 'bernoulli', 0.5):.4f}")
print(f"  cluster bernoulli c=0.5  "
      f"{gs.exposure_trace(B, 'cluster', 'bernoulli', 0.5, clustering=clusters):.4f}")
