"""Monte Carlo against the closed forms: bias trajectory and variance order.

Runs the ramp-up study on rings of growing size and checks two things the
formulas promise: the merged-bias column is hit within Monte Carlo noise,
and the estimator variance shrinks like 1/n.
"""


import gatesim as gs
from gatesim.outcomes import OutcomeModel

model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1)
ramp = (0.02, 0.05, 0.1, 0.25, 0.5)

g = gs.synthetic_graph("ring", 2000)
scenario = gs.Scenario(
    graph=g,
    model=model,
    plan=gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                       proportions=ramp),
    estimators=("ols",),
    replications=300,
    master_seed=17,
    scenario_id="ring-ramp",
)
report = gs.run_scenario(scenario, workers=2)
print("pooled regression on a ring of 2000, merging the last t ramp-up steps:")
print(f"{'t':>3} {'mc bias':>10} {'theory':>10} {'mc std':>9}")
for t in range(1, 6):
    row = report.row("ols", t)
    print(f"{t:>3} {row.bias:>10.4f} {row.theory_bias:>10.4f} {row.std:>9.4f}")

print("\nvariance shrinks like 1/n (ratios should sit near 4):")
prev = None
for n in (100, 400, 1600):
    sc = gs.Scenario(
        graph=gs.synthetic_graph("ring", n),
        model=model,
        plan=gs.DesignPlan(level="unit", scheme="complete", temporal="rollout",
                           proportions=(0.25, 0.5)),
        estimators=("ols",),
        replications=1000,
        master_seed=19,
        merge_depths=(2,),
        scenario_id=f"ring-{n}",
    )
    var = gs.run_scenario(sc, workers=2).rows[0].std ** 2
    note = "" if prev is None else f"   ratio vs previous: {prev / var:.2f}"
    print(f"  n={n:<5d} var = {var:.3e}{note}")
    prev = var
