import os
from pathlib import Path

import numpy as np
import pytest

import gatesim as gs

FB_ENV = "GATESIM_FB_GRAPH"
FB_DEFAULT_CANDIDATES = (
    Path(__file__).resolve().parent.parent / "data" / "socfb-Stanford3.mtx",
    Path(__file__).resolve().parent.parent / "data" / "socfb-Stanford3.txt",
)


def locate_fb_graph() -> Path | None:
    env = os.environ.get(FB_ENV)
    if env:
        p = Path(env)
        if p.exists():
            return p
    for cand in FB_DEFAULT_CANDIDATES:
        if cand.exists():
            return cand
    return None


@pytest.fixture(scope="session")
def fb_graph():
    """The Facebook social-network benchmark graph, if present locally.

    Download socfb-Stanford3 (11586 nodes, 568309 edges) and place it at
    data/socfb-Stanford3.mtx, or point GATESIM_FB_GRAPH at the file.
    """
    path = locate_fb_graph()
    if path is None:
        pytest.skip(
            "FB-Stanford3 edge list not available (no network egress in this "
            f"environment); set {FB_ENV} or add data/socfb-Stanford3.mtx"
        )
    fmt = "mm" if path.suffix == ".mtx" else "plain"
    g = gs.load_edge_list(path, format=fmt)
    assert g.n == 11586 and g.num_edges == 568309
    return g


@pytest.fixture
def path3():
    return gs.synthetic_graph("path", 3)


@pytest.fixture
def path4():
    return gs.synthetic_graph("path", 4)


@pytest.fixture
def ring200():
    return gs.synthetic_graph("ring", 200)


def two_triangles() -> gs.Graph:
    """Two disjoint triangles on nodes {0,1,2} and {3,4,5}."""
    import scipy.sparse as sp

    edges = np.array([[0, 1], [1, 2], [0, 2], [3, 4], [4, 5], [3, 5]])
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    adj = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(6, 6))
    degrees = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
    return gs.Graph(n=6, adjacency=adj, degrees=degrees)


def random_simple_graph(n: int, p: float, rng: np.random.Generator) -> gs.Graph:
    """Erdos-Renyi draw conditioned on no isolated nodes."""
    import scipy.sparse as sp

    while True:
        mask = np.triu(rng.random((n, n)) < p, k=1)
        rows, cols = np.nonzero(mask)
        if len(rows) == 0:
            continue
        adj = sp.csr_matrix(
            (np.ones(2 * len(rows)), (np.concatenate([rows, cols]),
                                      np.concatenate([cols, rows]))),
            shape=(n, n),
        )
        degrees = np.asarray(adj.sum(axis=1)).ravel().astype(np.int64)
        if degrees.min() > 0:
            return gs.Graph(n=n, adjacency=adj, degrees=degrees)


def random_zero_diag_b(n: int, rng: np.random.Generator, density: float = 0.7):
    """Dense-ish random interference weights with an exactly zero diagonal."""
    import scipy.sparse as sp

    m = rng.normal(size=(n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(m, 0.0)
    return gs.InterferenceMatrix(
        matrix=sp.csr_matrix(m),
        row_sums=m.sum(axis=1),
        total_sum=float(m.sum()),
    )
