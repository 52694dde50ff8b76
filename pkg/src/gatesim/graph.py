"""Sparse undirected graphs and interference-matrix construction.

Graphs are immutable once built: CSR adjacency over dense node ids
0..n-1, no self-loops, no duplicate edges, and every node has degree
at least one (loaders reject violations instead of repairing them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphFormatError(ValueError):
    """Raised when an edge-list file or graph violates an invariant."""


class ResourceLimitError(RuntimeError):
    """Raised when a sparse construction would exceed its memory budget."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph with all nodes of positive degree.

    ``adjacency`` is a symmetric 0/1 CSR matrix; ``node_labels`` maps the
    dense ids back to the identifiers found in the source file (dense ids
    follow first appearance order for plain edge lists).
    """

    n: int
    adjacency: sp.csr_matrix
    degrees: np.ndarray
    node_labels: np.ndarray | None = None

    @property
    def num_edges(self) -> int:
        return int(self.adjacency.nnz // 2)

    @property
    def edges(self) -> np.ndarray:
        """Edge array of shape (m, 2) with u < v, sorted lexicographically."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        pairs = np.stack([coo.row, coo.col], axis=1)
        order = np.lexsort((pairs[:, 1], pairs[:, 0]))
        return pairs[order]

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbors(u)

    def normalized_adjacency(self) -> sp.csr_matrix:
        """Row-normalized adjacency: entry (i, j) is 1/deg_i for j ~ i."""
        inv_deg = 1.0 / self.degrees.astype(np.float64)
        return sp.diags(inv_deg).dot(self.adjacency).tocsr()


@dataclass(frozen=True)
class InterferenceMatrix:
    """Sparse spillover-weight matrix with a zero diagonal.

    ``row_sums``/``total_sum`` are carried explicitly: constructions with
    a known analytic value (e.g. the row-normalized one-hop form, whose
    rows sum to the spillover scale exactly) store that value rather than
    a float accumulation.
    """

    matrix: sp.csr_matrix
    row_sums: np.ndarray
    total_sum: float

    def __post_init__(self) -> None:
        diag = self.matrix.diagonal()
        if np.any(diag != 0.0):
            raise ValueError("interference matrix must have a zero diagonal")
        accumulated = float(self.matrix.sum())
        tol = 1e-9 * max(self.matrix.nnz, 1)
        if not math.isclose(accumulated, self.total_sum, abs_tol=tol, rel_tol=1e-9):
            raise ValueError(
                f"total_sum {self.total_sum} inconsistent with accumulated {accumulated}"
            )

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply(self, z: np.ndarray) -> np.ndarray:
        """Spillover vector B @ z."""
        return self.matrix.dot(np.asarray(z, dtype=np.float64))


def _build_graph(edges: np.ndarray, n: int, node_labels: np.ndarray | None) -> Graph:
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.ones(rows.shape[0], dtype=np.float64)
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    adj.sum_duplicates()
    adj.data[:] = 1.0
    degrees = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
    if np.any(degrees == 0):
        bad = int(np.argmin(degrees))
        label = node_labels[bad] if node_labels is not None else bad
        raise GraphFormatError(f"isolated node {label}: all nodes must have degree > 0")
    adj.data.flags.writeable = False
    adj.indices.flags.writeable = False
    adj.indptr.flags.writeable = False
    degrees.flags.writeable = False
    return Graph(n=n, adjacency=adj, degrees=degrees, node_labels=node_labels)


def load_edge_list(path: str | Path, format: str = "plain") -> Graph:
    """Load an undirected graph from a whitespace edge list.

    ``format="plain"``: integer pairs, one edge per line; ids remapped to
    0..n-1 in first-appearance order, except that files whose ids are
    already the dense range keep them (so serialize/load round trips are
    identity). ``format="mm"``: matrix-market-like, '%' comment lines
    skipped, an optional leading dimensions triple, node ids 1-indexed.
    Symmetric duplicates collapse; self-loops are rejected with their
    line number.
    """
    if format not in {"plain", "mm"}:
        raise ValueError(f"unknown edge list format: {format!r}")
    path = Path(path)
    pairs: list[tuple[int, int]] = []
    declared_n: int | None = None
    saw_header_candidate = False
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if format == "mm" and line.startswith("%"):
                continue
            fields = line.split()
            if format == "mm" and not saw_header_candidate:
                saw_header_candidate = True
                if len(fields) == 3:
                    try:
                        r, c, _ = (int(x) for x in fields)
                    except ValueError as exc:
                        raise GraphFormatError(f"line {lineno}: malformed header {line!r}") from exc
                    declared_n = max(r, c)
                    continue
            if len(fields) < 2:
                raise GraphFormatError(f"line {lineno}: expected an integer pair, got {line!r}")
            try:
                u, v = int(fields[0]), int(fields[1])
            except ValueError as exc:
                raise GraphFormatError(f"line {lineno}: malformed edge {line!r}") from exc
            if u == v:
                raise GraphFormatError(f"line {lineno}: self-loop on node {u}")
            pairs.append((u, v))
    if not pairs:
        raise GraphFormatError(f"{path}: no edges found")

    if format == "mm":
        arr = np.asarray(pairs, dtype=np.int64) - 1
        if arr.min() < 0:
            raise GraphFormatError("mm format requires 1-indexed node ids")
        n = declared_n if declared_n is not None else int(arr.max()) + 1
        if arr.max() >= n:
            raise GraphFormatError(
                f"node id {int(arr.max()) + 1} exceeds declared dimension {n}"
            )
        labels = np.arange(1, n + 1, dtype=np.int64)
    else:
        arr = np.asarray(pairs, dtype=np.int64)
        distinct = np.unique(arr)
        n = len(distinct)
        if distinct[0] == 0 and distinct[-1] == n - 1:
            # Already dense 0..n-1: keep ids so that load/serialize/load
            # round trips are identity.
            labels = distinct
        else:
            seen: dict[int, int] = {}
            for u, v in pairs:
                if u not in seen:
                    seen[u] = len(seen)
                if v not in seen:
                    seen[v] = len(seen)
            labels = np.empty(n, dtype=np.int64)
            for original, dense in seen.items():
                labels[dense] = original
            remap = np.vectorize(seen.__getitem__, otypes=[np.int64])
            arr = remap(arr)
    return _build_graph(arr, n, labels)


def save_edge_list(g: Graph, path: str | Path) -> None:
    """Serialize as 0-indexed "u v" lines, u < v, sorted."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for u, v in g.edges:
            fh.write(f"{u} {v}\n")


def synthetic_graph(kind: str, n: int) -> Graph:
    """Named topologies: ring (n>=3), path (n>=2), complete (n>=3), star (n>=2)."""
    minima = {"ring": 3, "path": 2, "complete": 3, "star": 2}
    if kind not in minima:
        raise ValueError(f"unknown synthetic graph kind: {kind!r}")
    if n < minima[kind]:
        raise ValueError(f"{kind} graph requires n >= {minima[kind]}, got {n}")
    if kind == "ring":
        edges = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1)
    elif kind == "path":
        edges = np.stack([np.arange(n - 1), np.arange(1, n)], axis=1)
    elif kind == "complete":
        iu = np.triu_indices(n, k=1)
        edges = np.stack([iu[0], iu[1]], axis=1)
    else:  # star: hub is node 0
        edges = np.stack([np.zeros(n - 1, dtype=np.int64), np.arange(1, n)], axis=1)
    return _build_graph(edges.astype(np.int64), n, None)


def build_onehop_B(g: Graph, r: float) -> InterferenceMatrix:
    """One-hop spillover weights: r times the row-normalized adjacency.

    Every row sums to r by construction, so ``row_sums`` and
    ``total_sum`` store r and r*n analytically.
    """
    mat = g.normalized_adjacency()
    if r != 1.0:
        mat = mat.multiply(r).tocsr()
    mat.sort_indices()
    return InterferenceMatrix(
        matrix=mat,
        row_sums=np.full(g.n, float(r)),
        total_sum=float(r) * g.n,
    )


def build_multihop_B(
    g: Graph,
    r: "list[float] | tuple[float, ...]",
    nnz_budget: int = 200_000_000,
) -> InterferenceMatrix:
    """Multi-hop spillover weights with the self-influence diagonal removed.

    Accumulates r_m * P^m over hops m (P the row-normalized adjacency) via
    sparse products, then zeroes the diagonal once at the end. Requires a
    nonincreasing positive weight sequence.
    """
    r = [float(x) for x in r]
    if not r:
        raise ValueError("at least one hop weight required")
    if any(x <= 0 for x in r):
        raise ValueError("hop weights must be positive")
    if any(a < b for a, b in zip(r, r[1:])):
        raise ValueError("hop weights must be nonincreasing")
    p = g.normalized_adjacency()
    power = p
    total = p.multiply(r[0]).tocsr()
    for m, weight in enumerate(r[1:], start=2):
        power = (power @ p).tocsr()
        if power.nnz > nnz_budget or total.nnz + power.nnz > nnz_budget:
            raise ResourceLimitError(
                f"hop {m} densifies to {power.nnz} stored entries, over the "
                f"budget of {nnz_budget}"
            )
        total = (total + power.multiply(weight)).tocsr()
    total = total.tolil()
    total.setdiag(0.0)
    total = total.tocsr()
    total.eliminate_zeros()
    total.sort_indices()
    row_sums = np.asarray(total.sum(axis=1)).ravel()
    return InterferenceMatrix(matrix=total, row_sums=row_sums, total_sum=float(total.sum()))


def evolve_graph(g: Graph, seed: "int | np.random.Generator") -> Graph:
    """One preferential-attachment growth pass; returns a new Graph.

    Nodes in the top half by degree (ceil(n/2) of them, ties broken by
    lower node id) each draw 5 candidate partners with replacement, with
    probability proportional to degree. Draws that would create a
    self-loop or duplicate an edge that exists at that moment (including
    edges added earlier in the same pass) are discarded. The degree
    distribution used for sampling is frozen at the start of the pass.
    """
    from gatesim.rng import generator as rng_generator

    rng = rng_generator(seed)
    degrees = g.degrees.astype(np.float64)
    k = math.ceil(g.n / 2)
    order = np.lexsort((np.arange(g.n), -degrees))
    sources = np.sort(order[:k])
    probs = degrees / degrees.sum()
    draws = rng.choice(g.n, size=5 * k, replace=True, p=probs)

    adj_sets = [set(g.neighbors(i).tolist()) for i in range(g.n)]
    new_edges: list[tuple[int, int]] = []
    for idx, i in enumerate(sources):
        for j in draws[5 * idx:5 * idx + 5]:
            j = int(j)
            if j == i or j in adj_sets[i]:
                continue
            adj_sets[i].add(j)
            adj_sets[j].add(int(i))
            new_edges.append((int(i), j))
    old = g.edges
    if new_edges:
        added = np.asarray(new_edges, dtype=np.int64)
        added = np.stack([added.min(axis=1), added.max(axis=1)], axis=1)
        all_edges = np.concatenate([old, added], axis=0)
    else:
        all_edges = old
    return _build_graph(all_edges, g.n, g.node_labels)
