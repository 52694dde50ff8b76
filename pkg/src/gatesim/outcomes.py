"""Potential-outcome models, ground-truth effects, and merged datasets."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from gatesim.design import AssignmentPanel, DesignPlan, assign, exposure_onehop
from gatesim.graph import Graph, InterferenceMatrix
from gatesim.rng import generator as rng_generator

MODEL_KINDS = ("general", "onehop", "multihop", "multiplicative", "quadratic", "sqrt")
_KIND_ALIASES = {
    "general-linear": "general",
    "onehop-linear": "onehop",
    "multihop-linear": "multihop",
}


@dataclass(frozen=True)
class OutcomeModel:
    """Parameterized potential-outcome generator.

    ``r`` is a scalar spillover scale for the single-exposure kinds and a
    nonincreasing positive tuple for the multihop kind. ``B`` holds the
    explicit interference matrix for the kinds defined through one
    (general, multihop); the exposure-based kinds derive what they need
    from the graph on the fly.
    """

    kind: str
    beta0: float
    beta1: float
    r: "float | tuple[float, ...]" = 0.0
    sigma_e: float = 0.0
    B: InterferenceMatrix | None = None

    def __post_init__(self) -> None:
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown outcome model kind: {self.kind!r}")
        if self.sigma_e < 0:
            raise ValueError("sigma_e must be nonnegative")
        if kind == "multihop":
            weights = tuple(float(x) for x in np.atleast_1d(self.r))
            if any(x <= 0 for x in weights):
                raise ValueError("multihop weights must be positive")
            if any(a < b for a, b in zip(weights, weights[1:])):
                raise ValueError("multihop weights must be nonincreasing")
            object.__setattr__(self, "r", weights)
            if self.B is None:
                raise ValueError("multihop models store their interference matrix")
        elif kind == "general":
            if self.B is None:
                raise ValueError("general linear models store their interference matrix")
        else:
            object.__setattr__(self, "r", float(np.asarray(self.r).reshape(())))


def _noise(rng: np.random.Generator | None, sigma: float, n: int) -> np.ndarray:
    if sigma == 0.0 or rng is None:
        return np.zeros(n)
    return rng.normal(0.0, sigma, size=n)


def generate_outcomes(
    model: OutcomeModel,
    g: Graph,
    z: np.ndarray,
    seed: "int | tuple | np.random.Generator | None" = None,
) -> np.ndarray:
    """Realize the outcome vector for one treatment assignment.

    Noise is i.i.d. Gaussian(0, sigma_e^2), drawn fresh per call; pass the
    same seed to reproduce a draw bit for bit.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (g.n,):
        raise ValueError(f"assignment has shape {z.shape}, expected ({g.n},)")
    if isinstance(seed, np.random.Generator) or seed is None:
        rng = seed
    else:
        rng = rng_generator(seed)
    eps = _noise(rng, model.sigma_e, g.n)

    if model.kind in ("general", "multihop"):
        return model.beta0 + model.beta1 * z + model.B.apply(z) + eps
    e = exposure_onehop(g, z)
    if model.kind == "onehop":
        spill = model.r * e
    elif model.kind == "quadratic":
        spill = model.r * e**2
    elif model.kind == "sqrt":
        spill = model.r * np.sqrt(e)
    else:  # multiplicative
        rel_deg = g.degrees / g.degrees.mean()
        return (model.beta0 + eps) * rel_deg * (1.0 + model.beta1 * z + model.r * e)
    return model.beta0 + model.beta1 * z + spill + eps


def true_gate(model: OutcomeModel, g: Graph) -> float:
    """Exact global effect: noise-free mean outcome gap, everyone vs no one."""
    if model.kind in ("onehop", "quadratic", "sqrt"):
        return model.beta1 + model.r
    if model.kind == "multiplicative":
        return model.beta0 * (model.beta1 + model.r)
    return model.beta1 + model.B.total_sum / g.n


@dataclass(frozen=True)
class MergedDataset:
    """Pooled (step, unit, treatment, outcome) records across a ramp-up."""

    z_panel: np.ndarray
    y_panel: np.ndarray
    proportions: tuple[float, ...]
    graphs: tuple[Graph, ...]
    plan: DesignPlan
    panel: AssignmentPanel | None = None

    def __post_init__(self) -> None:
        if self.z_panel.shape != self.y_panel.shape:
            raise ValueError("treatment and outcome panels must align")
        if len(self.proportions) != self.z_panel.shape[0]:
            raise ValueError("one proportion per step required")
        if len(self.graphs) != self.z_panel.shape[0]:
            raise ValueError("one graph per step required")

    @property
    def steps(self) -> int:
        return self.z_panel.shape[0]

    @property
    def n(self) -> int:
        return self.z_panel.shape[1]

    @property
    def num_records(self) -> int:
        return self.z_panel.size

    @property
    def z_flat(self) -> np.ndarray:
        return self.z_panel.reshape(-1)

    @property
    def y_flat(self) -> np.ndarray:
        return self.y_panel.reshape(-1)

    def suffix(self, t: int) -> "MergedDataset":
        """Last t steps of the ramp-up, as their own merged dataset."""
        if not 1 <= t <= self.steps:
            raise ValueError(f"merge depth {t} outside 1..{self.steps}")
        return MergedDataset(
            z_panel=self.z_panel[-t:],
            y_panel=self.y_panel[-t:],
            proportions=self.proportions[-t:],
            graphs=self.graphs[-t:],
            plan=self.plan.suffix(t),
            panel=self.panel,
        )

    def to_csv(self, path: str | Path) -> None:
        """Serialize as "step,unit,z,y" rows."""
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write("step,unit,z,y\n")
            for t in range(self.steps):
                zt, yt = self.z_panel[t], self.y_panel[t]
                for unit in range(self.n):
                    fh.write(f"{t},{unit},{int(zt[unit])},{float(yt[unit])!r}\n")

    def sidecar(self, model: OutcomeModel, graph_files: list[str]) -> dict:
        return {
            "proportions": list(self.proportions),
            "n": self.n,
            "true_gate": true_gate(model, self.graphs[-1]),
            "model_kind": model.kind,
            "graph_files": graph_files,
        }

    def write(self, directory: str | Path, model: OutcomeModel) -> None:
        """Dataset exchange format: records CSV + JSON sidecar + edge lists."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        graph_files = []
        for t, g in enumerate(self.graphs):
            name = f"step_{t}_edges.csv"
            with (directory / name).open("w", encoding="utf-8") as fh:
                for u, v in g.edges:
                    fh.write(f"{u},{v}\n")
            graph_files.append(name)
        self.to_csv(directory / "records.csv")
        with (directory / "meta.json").open("w", encoding="utf-8") as fh:
            json.dump(self.sidecar(model, graph_files), fh, indent=2)


def run_experiment(
    model: OutcomeModel,
    plan: DesignPlan,
    graphs: "list[Graph] | tuple[Graph, ...]",
    seed: "int | tuple",
) -> MergedDataset:
    """Draw one ramp-up panel and realize outcomes step by step.

    ``graphs`` supplies the per-step topology (all identical outside the
    dynamic-graph scenario). Noise is fresh per step.
    """
    graphs = tuple(graphs)
    if len(graphs) != plan.steps:
        raise ValueError(f"need {plan.steps} per-step graphs, got {len(graphs)}")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise ValueError("all per-step graphs must share the node set")
    base = seed if isinstance(seed, tuple) else (seed,)
    panel = assign(plan, n, base + ("panel",))
    y_panel = np.empty((plan.steps, n))
    for t in range(plan.steps):
        y_panel[t] = generate_outcomes(model, graphs[t], panel.z[t], base + ("noise", t))
    return MergedDataset(
        z_panel=panel.z,
        y_panel=y_panel,
        proportions=plan.proportions,
        graphs=graphs,
        plan=plan,
        panel=panel,
    )
