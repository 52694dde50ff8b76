"""Simulation and estimation toolkit for global average treatment effects
under network interference, with merged ramp-up experiment designs.

The package is organised as a numpy/scipy library:

- :mod:`gatesim.graph` -- sparse graphs, interference matrices, dynamics
- :mod:`gatesim.clustering` -- Louvain communities for cluster randomization
- :mod:`gatesim.design` -- treatment assignment plans and exposures
- :mod:`gatesim.outcomes` -- potential-outcome models and merged datasets
- :mod:`gatesim.estimators` -- GATE estimators (OLS, HT variants, ...)
- :mod:`gatesim.theory` -- closed-form bias/variance predictions
- :mod:`gatesim.harness` -- Monte Carlo engine, enumeration oracle, plugins
- :mod:`gatesim.cli` -- config-driven command line front end
"""

from gatesim.graph import (
    Graph,
    InterferenceMatrix,
    GraphFormatError,
    ResourceLimitError,
    load_edge_list,
    save_edge_list,
    synthetic_graph,
    build_onehop_B,
    build_multihop_B,
    evolve_graph,
)
from gatesim.clustering import Clustering, louvain, modularity
from gatesim.design import (
    DesignPlan,
    AssignmentPanel,
    DesignError,
    assign,
    exposure_onehop,
)
from gatesim.outcomes import (
    OutcomeModel,
    MergedDataset,
    generate_outcomes,
    true_gate,
    run_experiment,
)
from gatesim.estimators import (
    GateEstimate,
    DegenerateDesignError,
    ols_gate,
    diff_in_means,
    ht_standard,
    ht_naive_pooled,
    ht_exposure,
    lagrange_gate,
    exposure_regression_gate,
)
from gatesim.theory import (
    BSums,
    TheoryPrediction,
    bsums,
    bias_one_step,
    bias_two_step,
    bias_merged,
    variance_one_step_exact,
    merge_improvement_criterion,
    exposure_trace,
    interference_intensity_report,
)
from gatesim.harness import (
    Scenario,
    EstimateReport,
    run_scenario,
    enumerate_oracle,
    plugin_estimate,
    write_exchange_dir,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
