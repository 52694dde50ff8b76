"""Louvain community detection for cluster-level randomization units."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import networkx as nx
import numpy as np

from gatesim.graph import Graph


@dataclass(frozen=True)
class Clustering:
    """A partition of the node set into dense cluster ids 0..K-1."""

    assignment: np.ndarray
    cluster_sizes: np.ndarray
    resolution: float
    seed: int

    def __post_init__(self) -> None:
        k = len(self.cluster_sizes)
        if self.assignment.min() < 0 or self.assignment.max() >= k:
            raise ValueError("cluster ids must be dense 0..K-1")
        counts = np.bincount(self.assignment, minlength=k)
        if not np.array_equal(counts, self.cluster_sizes):
            raise ValueError("cluster_sizes inconsistent with assignment")

    @property
    def n_clusters(self) -> int:
        return len(self.cluster_sizes)

    @property
    def n(self) -> int:
        return len(self.assignment)

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cluster_id)

    def to_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write("node_id,cluster_id\n")
            for node, cid in enumerate(self.assignment):
                fh.write(f"{node},{cid}\n")

    @staticmethod
    def from_csv(path: str | Path, resolution: float = 0.0, seed: int = 0) -> "Clustering":
        rows = []
        with Path(path).open("r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header != "node_id,cluster_id":
                raise ValueError(f"unexpected clustering header: {header!r}")
            for line in fh:
                node_s, cid_s = line.strip().split(",")
                rows.append((int(node_s), int(cid_s)))
        rows.sort()
        assignment = np.asarray([cid for _, cid in rows], dtype=np.int64)
        return _as_clustering(assignment, resolution, seed)


def _as_clustering(assignment: np.ndarray, resolution: float, seed: int) -> Clustering:
    """Relabel arbitrary cluster ids to dense 0..K-1 by first appearance."""
    remap: dict[int, int] = {}
    dense = np.empty_like(assignment)
    for i, cid in enumerate(assignment):
        cid = int(cid)
        if cid not in remap:
            remap[cid] = len(remap)
        dense[i] = remap[cid]
    sizes = np.bincount(dense, minlength=len(remap))
    dense.flags.writeable = False
    sizes.flags.writeable = False
    return Clustering(assignment=dense, cluster_sizes=sizes, resolution=resolution, seed=seed)


def louvain(g: Graph, resolution: float, seed: int) -> Clustering:
    """Louvain partition of the graph, deterministic given (g, resolution, seed)."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    nxg = nx.from_scipy_sparse_array(g.adjacency)
    communities = nx.community.louvain_communities(
        nxg, resolution=resolution, seed=int(seed)
    )
    assignment = np.empty(g.n, dtype=np.int64)
    for cid, nodes in enumerate(communities):
        for node in nodes:
            assignment[node] = cid
    return _as_clustering(assignment, float(resolution), int(seed))


def modularity(g: Graph, c: Clustering, resolution: float) -> float:
    """Q = sum_clusters [ e_c/m - gamma * (deg_c / 2m)^2 ].

    e_c counts intra-cluster edges, deg_c the total degree inside the
    cluster, m the edge count of the graph.
    """
    if c.n != g.n:
        raise ValueError(f"clustering covers {c.n} nodes but graph has {g.n}")
    m = g.num_edges
    edges = g.edges
    same = c.assignment[edges[:, 0]] == c.assignment[edges[:, 1]]
    intra = np.bincount(
        c.assignment[edges[same, 0]], minlength=c.n_clusters
    ).astype(np.float64)
    deg_c = np.bincount(
        c.assignment, weights=g.degrees.astype(np.float64), minlength=c.n_clusters
    )
    return float(np.sum(intra / m - resolution * (deg_c / (2.0 * m)) ** 2))
