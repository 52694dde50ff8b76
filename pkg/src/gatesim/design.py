"""Treatment-assignment generation for multi-step ramp-up experiments.

The grid is {unit, cluster} x {bernoulli, complete} x {independent,
rollout, repeated}. Couplings: complete+rollout treats prefixes of one
uniform permutation; bernoulli+rollout thresholds one uniform draw per
unit against the growing proportions; independent (and repeated, which
is independent with equal proportions) redraws fresh randomness each
step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from gatesim.clustering import Clustering
from gatesim.rng import generator as rng_generator
from gatesim.graph import Graph

LEVELS = ("unit", "cluster")
SCHEMES = ("bernoulli", "complete")
TEMPORALS = ("independent", "rollout", "repeated")


class DesignError(ValueError):
    """Invalid design plan or assignment request."""


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class DesignPlan:
    level: str
    scheme: str
    temporal: str
    proportions: tuple[float, ...]
    clustering: Clustering | None = None

    def __post_init__(self) -> None:
        if self.level not in LEVELS:
            raise DesignError(f"level must be one of {LEVELS}, got {self.level!r}")
        if self.scheme not in SCHEMES:
            raise DesignError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.temporal not in TEMPORALS:
            raise DesignError(f"temporal must be one of {TEMPORALS}, got {self.temporal!r}")
        object.__setattr__(self, "proportions", tuple(float(c) for c in self.proportions))
        if not self.proportions:
            raise DesignError("at least one treatment proportion required")
        if any(c < 0.0 or c > 1.0 for c in self.proportions):
            raise DesignError("proportions must lie in [0, 1]")
        if self.temporal == "rollout":
            if any(a >= b for a, b in zip(self.proportions, self.proportions[1:])):
                raise DesignError("rollout requires strictly increasing proportions")
        if self.temporal == "repeated":
            if len(set(self.proportions)) != 1:
                raise DesignError("repeated design requires all proportions equal")
        if self.level == "cluster" and self.clustering is None:
            raise DesignError("cluster-level plans require a clustering")

    @property
    def steps(self) -> int:
        return len(self.proportions)

    def suffix(self, t: int) -> "DesignPlan":
        """Plan restricted to the last t steps (merge window)."""
        if not 1 <= t <= self.steps:
            raise DesignError(f"merge depth {t} outside 1..{self.steps}")
        return DesignPlan(
            level=self.level,
            scheme=self.scheme,
            temporal=self.temporal,
            proportions=self.proportions[-t:],
            clustering=self.clustering,
        )


@dataclass(frozen=True)
class AssignmentPanel:
    """Realized T x n binary treatment matrix for one ramp-up draw."""

    z: np.ndarray
    realized_counts: np.ndarray
    seed: int
    plan: DesignPlan
    diagnostics: dict = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.z.shape[0]

    @property
    def n(self) -> int:
        return self.z.shape[1]

    def step(self, t: int) -> np.ndarray:
        return self.z[t]


def _complete_prefix(order: np.ndarray, sizes: np.ndarray, d: int) -> np.ndarray:
    """Treat entities in permutation order until unit coverage reaches d."""
    take = np.flatnonzero(np.cumsum(sizes[order]) >= d)
    if d <= 0:
        return order[:0]
    stop = int(take[0]) + 1 if take.size else len(order)
    return order[:stop]


def _validate_panel(z: np.ndarray, plan: DesignPlan, n: int) -> np.ndarray:
    counts = z.sum(axis=1).astype(np.int64)
    if plan.scheme == "complete" and plan.level == "unit":
        for t, c in enumerate(plan.proportions):
            expected = round_half_up(c * n)
            if counts[t] != expected:
                raise AssertionError(
                    f"complete randomization drew {counts[t]} treated at step {t}, "
                    f"expected exactly {expected}"
                )
    if plan.temporal == "rollout":
        if np.any(np.diff(z.astype(np.int8), axis=0) < 0):
            raise AssertionError("rollout monotonicity violated")
    if plan.level == "cluster":
        assignment = plan.clustering.assignment
        for t in range(z.shape[0]):
            per_cluster = np.bincount(assignment, weights=z[t], minlength=plan.clustering.n_clusters)
            sizes = plan.clustering.cluster_sizes
            if not np.all((per_cluster == 0) | (per_cluster == sizes)):
                raise AssertionError("cluster purity violated: split cluster found")
    return counts


def assign(plan: DesignPlan, n: int, seed: "int | tuple | np.random.Generator") -> AssignmentPanel:
    """Draw the T x n treatment panel for a plan, deterministically in seed."""
    if plan.level == "cluster" and plan.clustering.n != n:
        raise DesignError(
            f"clustering covers {plan.clustering.n} units, population has {n}"
        )
    rng = rng_generator(seed)
    T = plan.steps
    if plan.level == "unit":
        n_entities = n
        sizes = np.ones(n, dtype=np.int64)
    else:
        n_entities = plan.clustering.n_clusters
        sizes = plan.clustering.cluster_sizes

    entity_z = np.zeros((T, n_entities), dtype=np.int8)
    if plan.scheme == "bernoulli":
        if plan.temporal == "rollout":
            u = rng.random(n_entities)
            for t, c in enumerate(plan.proportions):
                entity_z[t] = u < c
        else:
            for t, c in enumerate(plan.proportions):
                entity_z[t] = rng.random(n_entities) < c
    else:  # complete
        if plan.temporal == "rollout":
            order = rng.permutation(n_entities)
            for t, c in enumerate(plan.proportions):
                d = round_half_up(c * n)
                treated = order[:d] if plan.level == "unit" else _complete_prefix(order, sizes, d)
                entity_z[t, treated] = 1
        else:
            for t, c in enumerate(plan.proportions):
                order = rng.permutation(n_entities)
                d = round_half_up(c * n)
                treated = order[:d] if plan.level == "unit" else _complete_prefix(order, sizes, d)
                entity_z[t, treated] = 1

    if plan.level == "unit":
        z = entity_z
    else:
        z = entity_z[:, plan.clustering.assignment]

    counts = _validate_panel(z, plan, n)
    diagnostics = {}
    if plan.level == "cluster" and plan.scheme == "complete":
        targets = np.asarray([round_half_up(c * n) for c in plan.proportions])
        diagnostics["count_deviation"] = (counts - targets).tolist()
    z.flags.writeable = False
    counts.flags.writeable = False
    seed_tag = seed if isinstance(seed, int) else -1
    return AssignmentPanel(z=z, realized_counts=counts, seed=seed_tag, plan=plan,
                           diagnostics=diagnostics)


def exposure_onehop(g: Graph, z: np.ndarray) -> np.ndarray:
    """Fraction of treated neighbors, per unit."""
    z = np.asarray(z, dtype=np.float64)
    return g.adjacency.dot(z) / g.degrees


def panel_to_csv(panel: AssignmentPanel, path) -> None:
    """Serialize as "step,unit,z" rows."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("step,unit,z\n")
        for t in range(panel.steps):
            row = panel.z[t]
            for unit in range(panel.n):
                fh.write(f"{t},{unit},{int(row[unit])}\n")
