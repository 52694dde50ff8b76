"""Closed-form bias and variance predictions for the pooled OLS estimator.

All formulas are exact pre-asymptotic expressions for complete
randomization with d = round(c*n) treated units per step; they are
cross-checked against full enumeration in the test suite. Asymptotic
displays are provided separately where they are the only known form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from gatesim.clustering import Clustering
from gatesim.design import round_half_up
from gatesim.graph import InterferenceMatrix


@dataclass(frozen=True)
class BSums:
    """Aggregate contractions of an interference matrix.

    ``s_rowcol`` (sum over i of row_i * col_i) is not part of the classic
    five-sum display but is required to assemble the variance exactly:
    the quadruple classes "only i=l" and "only j=k" carry their own
    expectation and cannot be folded into the all-distinct class.
    """

    s_total: float
    s_sq: float
    s_cross_ji: float
    s_row: float
    s_col: float
    s_rowcol: float

    def __post_init__(self) -> None:
        for name in ("s_sq", "s_row", "s_col"):
            if getattr(self, name) < -1e-12:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class TheoryPrediction:
    bias: float
    variance: float | None = None
    components: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.variance is not None and self.variance < -1e-12:
            raise ValueError("variance prediction must be nonnegative")


def bsums(B: "InterferenceMatrix | sp.spmatrix") -> BSums:
    """All index-set contractions, via row/column aggregates (no quad loops)."""
    mat = B.matrix if isinstance(B, InterferenceMatrix) else sp.csr_matrix(B)
    if np.any(mat.diagonal() != 0.0):
        raise ValueError("bsums requires a zero-diagonal matrix")
    row = np.asarray(mat.sum(axis=1)).ravel()
    col = np.asarray(mat.sum(axis=0)).ravel()
    return BSums(
        s_total=float(row.sum()),
        s_sq=float(mat.multiply(mat).sum()),
        s_cross_ji=float(mat.multiply(mat.T).sum()),
        s_row=float(np.dot(row, row)),
        s_col=float(np.dot(col, col)),
        s_rowcol=float(np.dot(row, col)),
    )


def bias_one_step(s_total: float, n: int) -> float:
    """Exact one-step bias: -(s_total/n) * (1/(n-1) + 1) = -s_total/(n-1).

    The treatment proportion cancels out of the exact expression.
    """
    if n < 2:
        raise ValueError("need at least two units")
    return -(s_total / n) * (1.0 / (n - 1.0) + 1.0)


def _bias_merged_d(s_total: float, n: int, ds: "list[int]") -> float:
    """Exact merged bias given integer per-step treated counts."""
    T = len(ds)
    big_n = T * n
    big_d = sum(ds)
    if big_d <= 0 or big_d >= big_n:
        raise ValueError("pooled treated count must be strictly inside (0, T*n)")
    estimator_shift = (big_n / (big_d * (big_n - big_d))) * (
        sum(d * (d - 1.0) for d in ds) / (n * (n - 1.0)) - big_d**2 / (T * n**2)
    )
    return s_total * estimator_shift - s_total / n


def bias_merged(s_total: float, n: int, proportions) -> float:
    """Exact bias of pooled OLS trained on a T-step merge, d_t = round(c_t*n)."""
    props = [float(c) for c in np.atleast_1d(proportions)]
    if not props:
        raise ValueError("at least one proportion required")
    if any(c < 0.0 or c > 1.0 for c in props):
        raise ValueError("proportions must lie in [0, 1]")
    if len(props) == 1:
        d = round_half_up(props[0] * n)
        if d <= 0 or d >= n:
            raise ValueError("single-step proportion is degenerate at this n")
        return bias_one_step(s_total, n)
    return _bias_merged_d(s_total, n, [round_half_up(c * n) for c in props])


def bias_two_step(s_total: float, n: int, c1: float, c2: float) -> float:
    """Two-step merge bias; equal proportions are allowed (the reduction
    term then turns into a small negative value rather than a gain)."""
    return bias_merged(s_total, n, (c1, c2))


def merged_reduction_factor(proportions) -> float:
    """Population-limit bias-reduction factor of a T-step merge.

    The merged bias is approximately -(s_total/n) * (1 - factor); the
    exact finite-n version lives in :func:`bias_merged`.
    """
    props = np.asarray(list(proportions), dtype=np.float64)
    T = len(props)
    c1 = props.sum()
    c2 = float(np.dot(props, props))
    denom = c1 * (T - c1)
    if denom == 0.0:
        raise ValueError("degenerate proportions (all zero or all one)")
    return (T * c2 - c1**2) / denom


def _falling(d: int, k: int, n: int) -> float:
    """Probability that k specific distinct units are all treated."""
    num = 1.0
    den = 1.0
    for s in range(k):
        num *= d - s
        den *= n - s
    if num <= 0.0:
        return 0.0
    return num / den


def variance_one_step_exact(bs: BSums, n: int, c: float, sigma_e: float) -> float:
    """Exact one-step variance of the OLS effect estimate.

    Assembles E[((z-c1)'Bz)^2] over the seven disjoint coincidence
    classes of the quadruple (i,j,k,l) with exact complete-randomization
    moments, subtracts the squared mean, rescales by (n/(d(n-d)))^2, and
    adds the noise contribution n*sigma_e^2/(d(n-d)).
    """
    if n < 4:
        raise ValueError("need n >= 4 for the all-distinct quadruple class")
    d = round_half_up(c * n)
    if d <= 0 or d >= n:
        raise ValueError("degenerate proportion: no variation in treatment")
    ce = d / n
    p1 = _falling(d, 1, n)
    p2 = _falling(d, 2, n)
    p3 = _falling(d, 3, n)
    p4 = _falling(d, 4, n)

    e_pair_sq = (1.0 - 2.0 * ce) * p2 + ce**2 * p1          # i=k, j=l
    e_swap = (1.0 - ce) ** 2 * p2                            # i=l, j=k
    e_src = (1.0 - 2.0 * ce) * p3 + ce**2 * p2               # only i=k
    e_dst = p3 - 2.0 * ce * p2 + ce**2 * p1                  # only j=l
    e_chain = (1.0 - ce) * (p3 - ce * p2)                    # only i=l or only j=k
    e_free = p4 - 2.0 * ce * p3 + ce**2 * p2                 # all distinct

    s1 = bs.s_sq
    s2 = bs.s_cross_ji
    s3 = bs.s_row - bs.s_sq
    s4 = bs.s_col - bs.s_sq
    s56 = 2.0 * (bs.s_rowcol - bs.s_cross_ji)
    s7 = bs.s_total**2 - s1 - s2 - s3 - s4 - s56

    ex2 = (
        s1 * e_pair_sq
        + s2 * e_swap
        + s3 * e_src
        + s4 * e_dst
        + s56 * e_chain
        + s7 * e_free
    )
    ex = bs.s_total * (p2 - ce * p1)
    var_quadratic = ex2 - ex**2
    scale = n / (d * (n - d))
    return scale**2 * var_quadratic + n * sigma_e**2 / (d * (n - d))


def one_step_prediction(bs: BSums, n: int, c: float, sigma_e: float) -> TheoryPrediction:
    """Bias and variance with the named contributions broken out."""
    d = round_half_up(c * n)
    noise = n * sigma_e**2 / (d * (n - d)) if 0 < d < n else float("nan")
    var = variance_one_step_exact(bs, n, c, sigma_e)
    return TheoryPrediction(
        bias=bias_one_step(bs.s_total, n),
        variance=var,
        components={
            "interference_variance": var - noise,
            "noise_variance": noise,
            "s_total": bs.s_total,
            "s_sq": bs.s_sq,
            "s_cross_ji": bs.s_cross_ji,
            "s_row": bs.s_row,
            "s_col": bs.s_col,
            "s_rowcol": bs.s_rowcol,
        },
    )


def merge_improvement_criterion(proportions, x: float) -> dict:
    """Does a new experiment at proportion x shrink the merged bias?

    Evaluates the quadratic improvement criterion in x with C1 = sum c_t
    and C2 = sum c_t^2; positive values mean the (T+1)-step merge has a
    strictly larger bias-reduction factor. For a single prior step at c
    the criterion factors as c(1-c)(x-c)^2: any genuinely new proportion
    helps, repeating the old one is exactly neutral.
    """
    props = [float(c) for c in np.atleast_1d(proportions)]
    if not props:
        raise ValueError("proportions must be nonempty")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    T = len(props)
    c1 = sum(props)
    c2 = sum(c * c for c in props)
    quad = T**2 * c1 - (T + 1) * c1**2 + T * c2
    lin = (T - 1) * c1**2 - 2.0 * T * c1 * c2 + T * (T + 1) * c2
    const = c1**3 - c1**2 * c2
    lhs = quad * x**2 - lin * x + const
    return {"improves": lhs > 0.0, "lhs": lhs, "quadratic": quad, "linear": -lin, "constant": const}


def exposure_trace(
    B: InterferenceMatrix,
    level: str,
    scheme: str,
    c: float,
    clustering: Clustering | None = None,
) -> float | None:
    """trace(B'B Cov[z]) without materializing the covariance.

    Supported closed forms: unit bernoulli, unit complete, cluster
    bernoulli. Returns None for designs without one.
    """
    n = B.n
    bs = bsums(B)
    if level == "unit" and scheme == "bernoulli":
        return c * (1.0 - c) * bs.s_sq
    if level == "unit" and scheme == "complete":
        return c * (1.0 - c) / (n - 1.0) * (n * bs.s_sq - bs.s_row)
    if level == "cluster" and scheme == "bernoulli":
        if clustering is None:
            raise ValueError("cluster designs need a clustering")
        indicator = sp.csr_matrix(
            (
                np.ones(n),
                (np.arange(n), clustering.assignment),
            ),
            shape=(n, clustering.n_clusters),
        )
        cols = B.matrix @ indicator
        return c * (1.0 - c) * float(cols.multiply(cols).sum())
    return None


def interference_intensity_report(B: InterferenceMatrix) -> dict:
    """Diagnostics for the regular-interference regime (no pass/fail)."""
    mat = B.matrix
    abs_row = np.abs(mat).sum(axis=1)
    bs = bsums(B)
    return {
        "max_abs_row_sum": float(np.max(abs_row)),
        "mean_total": bs.s_total / B.n,
        "col_sq_per_n": bs.s_col / B.n,
    }
