"""Estimator shoot-out on one synthetic study.

Same merged ramp-up data, five estimators: pooled regression, difference
in means, per-step and pooled inverse-probability weighting, polynomial
extrapolation over step means, and the multi-hop exposure regression.
"""


import gatesim as gs
from gatesim.outcomes import OutcomeModel

g = gs.synthetic_graph("ring", 800)
model = OutcomeModel(kind="quadratic", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1)
scenario = gs.Scenario(
    graph=g,
    model=model,
    plan=gs.DesignPlan(level="unit", scheme="bernoulli", temporal="rollout",
                       proportions=(0.0, 0.1, 0.25, 0.5)),
    estimators=("ols", "dim", "ht_pooled", "lagrange", "expreg"),
    replications=300,
    master_seed=23,
    merge_depths=(2, 4),
    expreg_hops=2,
    scenario_id="estimator-comparison",
)
report = gs.run_scenario(scenario, workers=2)

print("quadratic spillovers on an 800-ring; true effect =", report.true_gate)
print(f"{'estimator':>12} {'t':>3} {'bias':>9} {'std':>8} {'mse':>9} {'n_eff':>6}")
for row in report.rows:
    print(f"{row.estimator:>12} {row.t:>3} {row.bias:>9.4f} {row.std:>8.4f} "
          f"{row.mse:>9.5f} {row.n_effective:>6}")
print("\nnotes: inverse-probability weights at c=0 are undefined, so pooled")
print("HT degenerates once the global-control step enters the window, and the")
print("exposure regression charges ahead of the plain pooled fit because its")
print("basis actually contains spillover terms.")
