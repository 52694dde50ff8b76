"""GATE estimators over merged experiment datasets.

Every estimator is a pure function of its inputs; degenerate inputs
(empty arms, boundary proportions, rank-deficient bases) raise
DegenerateDesignError rather than returning silently biased numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from gatesim.design import DesignPlan, assign, exposure_onehop
from gatesim.graph import Graph
from gatesim.outcomes import MergedDataset

ESTIMATOR_IDS = ("ols", "dim", "ht", "ht_pooled", "ht_exposure", "lagrange", "expreg", "gnn")


class DegenerateDesignError(ValueError):
    """The estimator is undefined for this dataset (e.g. an empty arm)."""


@dataclass(frozen=True)
class GateEstimate:
    tau_hat: float
    estimator_id: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not math.isfinite(self.tau_hat):
            raise ValueError("estimates must be finite; degeneracies raise instead")


def ols_gate(data: MergedDataset) -> GateEstimate:
    """Pooled regression of outcome on [1, z]; the slope is the estimate."""
    z = data.z_flat.astype(np.float64)
    y = data.y_flat
    n_records = z.size
    treated = z.sum()
    if treated <= 0 or treated >= n_records:
        raise DegenerateDesignError("pooled data has an empty treatment or control arm")
    # 2x2 normal equations for [intercept, slope]; z binary makes z'z = z'1.
    zy = float(np.dot(z, y))
    sy = float(y.sum())
    det = treated * (n_records - treated)
    slope = (n_records * zy - treated * sy) / det
    return GateEstimate(tau_hat=slope, estimator_id="ols",
                        diagnostics={"treated_records": int(treated)})


def diff_in_means(data: MergedDataset) -> GateEstimate:
    z = data.z_flat.astype(bool)
    y = data.y_flat
    if not z.any() or z.all():
        raise DegenerateDesignError("difference in means needs both arms nonempty")
    tau = float(y[z].mean() - y[~z].mean())
    return GateEstimate(tau_hat=tau, estimator_id="dim")


def ht_values(y: np.ndarray, z: np.ndarray, c: float) -> np.ndarray:
    if not 0.0 < c < 1.0:
        raise DegenerateDesignError(f"HT weights undefined at proportion {c}")
    z = np.asarray(z, dtype=np.float64)
    return (z / c - (1.0 - z) / (1.0 - c)) * y


def ht_standard(y: np.ndarray, z: np.ndarray, c: float) -> GateEstimate:
    """Single-step inverse-probability estimate with known proportion c."""
    tau = float(ht_values(y, z, c).mean())
    return GateEstimate(tau_hat=tau, estimator_id="ht")


def ht_naive_pooled(data: MergedDataset) -> GateEstimate:
    """Average of the per-step inverse-probability estimates."""
    total = 0.0
    for t, c in enumerate(data.proportions):
        total += ht_values(data.y_panel[t], data.z_panel[t], c).mean()
    return GateEstimate(tau_hat=float(total / data.steps), estimator_id="ht_pooled")


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def exposure_propensities_exact(
    degrees: np.ndarray, scheme: str, c: float, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Full-neighborhood saturation propensities, per unit.

    P(unit and all its neighbors treated) and P(unit and all its
    neighbors control): the saturation events under which a one-hop
    outcome equals its global-treatment/control value, which is what
    makes the weighted estimator unbiased. Exact under unit-level
    designs: hypergeometric ratios for complete randomization
    (d = round(c*n) treated), powers for Bernoulli.
    """
    degrees = np.asarray(degrees)
    if scheme == "bernoulli":
        closed = degrees.astype(np.float64) + 1.0
        return c**closed, (1.0 - c) ** closed
    from gatesim.design import round_half_up

    d = round_half_up(c * n)
    p1 = np.zeros(len(degrees))
    p0 = np.zeros(len(degrees))
    log_cnd = _log_comb(n, d)
    for k in np.unique(degrees):
        mask = degrees == k
        k = int(k)
        if d >= k + 1:
            p1[mask] = math.exp(_log_comb(n - k - 1, d - k - 1) - log_cnd)
        if n - k - 1 >= d:
            p0[mask] = math.exp(_log_comb(n - k - 1, d) - log_cnd)
    return p1, p0


def exposure_propensities_mc(
    g: Graph,
    plan_step: DesignPlan,
    draws: int,
    seed: "int | tuple",
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo propensities for designs without a closed form."""
    hits1 = np.zeros(g.n)
    hits0 = np.zeros(g.n)
    base = seed if isinstance(seed, tuple) else (seed,)
    for b in range(draws):
        panel = assign(plan_step, g.n, base + (b,))
        z = panel.z[0]
        e = exposure_onehop(g, z)
        hits1 += (e == 1.0) & (z == 1)
        hits0 += (e == 0.0) & (z == 0)
    return hits1 / draws, hits0 / draws


def ht_exposure(
    y: np.ndarray,
    z: np.ndarray,
    g: Graph,
    propensities: tuple[np.ndarray, np.ndarray],
) -> GateEstimate:
    """Neighborhood-saturation inverse-propensity estimate.

    A unit counts toward the treated (control) side exactly when it and
    its whole neighborhood are treated (control), so under one-hop
    interference the weighted outcome is an unbiased estimate of the
    unit's global-treatment (global-control) value. Units whose
    saturation propensity is zero contribute nothing and are counted in
    diagnostics; clipping would bias the weights silently.
    """
    p1, p0 = propensities
    e = exposure_onehop(g, z)
    z = np.asarray(z)
    delta1 = ((e == 1.0) & (z == 1)).astype(np.float64)
    delta0 = ((e == 0.0) & (z == 0)).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        w1 = np.where(p1 > 0.0, delta1 / np.where(p1 > 0.0, p1, 1.0), 0.0)
        w0 = np.where(p0 > 0.0, delta0 / np.where(p0 > 0.0, p0, 1.0), 0.0)
    tau = float(((w1 - w0) * y).mean())
    dropped = int(np.sum((p1 == 0.0) | (p0 == 0.0)))
    return GateEstimate(
        tau_hat=tau,
        estimator_id="ht_exposure",
        diagnostics={
            "zero_propensity_units": dropped,
            "saturated_treated": int(delta1.sum()),
            "saturated_control": int(delta0.sum()),
        },
    )


def lagrange_gate(step_means: "list[tuple[float, float]]") -> GateEstimate:
    """Polynomial extrapolation of per-step mean outcomes to full rollout.

    Fits the unique degree-(T-1) polynomial through (proportion, mean)
    points and returns P(1) - P(0).
    """
    if len(step_means) < 2:
        raise DegenerateDesignError("interpolation needs at least two steps")
    cs = np.asarray([c for c, _ in step_means], dtype=np.float64)
    ys = np.asarray([m for _, m in step_means], dtype=np.float64)
    if len(np.unique(cs)) != len(cs):
        raise DegenerateDesignError("interpolation needs distinct treatment proportions")
    poly = BarycentricInterpolator(cs, ys)
    tau = float(poly(1.0) - poly(0.0))
    return GateEstimate(tau_hat=tau, estimator_id="lagrange",
                        diagnostics={"points": len(cs)})


def lagrange_gate_from_dataset(data: MergedDataset) -> GateEstimate:
    pts = [(c, float(data.y_panel[t].mean())) for t, c in enumerate(data.proportions)]
    return lagrange_gate(pts)


def exposure_regression_gate(
    data: MergedDataset,
    hops: int = 1,
    ridge: float = 1e-8,
) -> GateEstimate:
    """Pooled ridge regression on [1, z, multi-hop exposures].

    Hop-k exposure is the k-th power of the row-normalized adjacency
    applied to the step's assignment. The estimate is the fitted gap
    between everyone treated (z = 1, all exposures 1) and no one treated.
    """
    if hops < 1:
        raise ValueError("need at least one exposure hop")
    if ridge < 0:
        raise ValueError("ridge penalty must be nonnegative")
    cols = []
    for t in range(data.steps):
        g = data.graphs[t]
        p = g.normalized_adjacency()
        z = data.z_panel[t].astype(np.float64)
        feats = [np.ones(data.n), z]
        vec = z
        for _ in range(hops):
            vec = p.dot(vec)
            feats.append(vec)
        cols.append(np.stack(feats, axis=1))
    x = np.concatenate(cols, axis=0)
    y = data.y_flat
    gram = x.T @ x
    if ridge == 0.0:
        if np.linalg.matrix_rank(gram) < gram.shape[0]:
            raise DegenerateDesignError(
                "exposure design matrix is rank deficient; set ridge > 0"
            )
        theta = np.linalg.solve(gram, x.T @ y)
    else:
        theta = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), x.T @ y)
    tau = float(theta[1] + theta[2:].sum())
    return GateEstimate(tau_hat=tau, estimator_id="expreg",
                        diagnostics={"hops": hops, "ridge": ridge})
