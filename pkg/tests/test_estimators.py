import itertools

import numpy as np
import pytest

import gatesim as gs
from gatesim.estimators import (
    DegenerateDesignError,
    exposure_propensities_exact,
    exposure_propensities_mc,
    ht_exposure,
    lagrange_gate,
)
from gatesim.outcomes import MergedDataset, OutcomeModel



def make_dataset(g, z_panel, y_panel, proportions, plan=None):
    plan = plan or gs.DesignPlan(level="unit", scheme="complete",
                                 temporal="independent",
                                 proportions=proportions)
    return MergedDataset(
        z_panel=np.asarray(z_panel, dtype=np.int8),
        y_panel=np.asarray(y_panel, dtype=np.float64),
        proportions=tuple(proportions),
        graphs=tuple([g] * len(proportions)),
        plan=plan,
    )


def noise_free_dataset(g, model, proportions, seed, temporal="independent"):
    plan = gs.DesignPlan(level="unit", scheme="complete", temporal=temporal,
                         proportions=proportions)
    return gs.run_experiment(model, plan, [g] * len(proportions), seed)


class TestOlsAndDim:
    def test_no_interference_recovers_direct_effect(self, path4):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=0.0)
        for seed in range(5):
            data = noise_free_dataset(path4, model, (0.5,), seed)
            assert gs.ols_gate(data).tau_hat == pytest.approx(1.0, abs=1e-12)
            assert gs.diff_in_means(data).tau_hat == pytest.approx(1.0, abs=1e-12)

    def test_ols_equals_dim(self, ring200):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.3)
        for proportions in [(0.5,), (0.25, 0.5), (0.1, 0.25, 0.5)]:
            data = noise_free_dataset(ring200, model, proportions, seed=7)
            assert gs.ols_gate(data).tau_hat == pytest.approx(
                gs.diff_in_means(data).tau_hat, abs=1e-10
            )

    def test_degenerate_all_treated(self, path4):
        data = make_dataset(path4, [[1, 1, 1, 1]], [[1.0, 2.0, 3.0, 4.0]], (1.0,))
        with pytest.raises(DegenerateDesignError):
            gs.ols_gate(data)
        with pytest.raises(DegenerateDesignError):
            gs.diff_in_means(data)

    def test_path4_enumeration_mean(self, path4):
        # Frozen oracle: mean over all C(4,2) assignments is tau - 4/3.
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        taus = []
        for treated in itertools.combinations(range(4), 2):
            z = np.zeros(4)
            z[list(treated)] = 1
            y = gs.generate_outcomes(model, path4, z)
            data = make_dataset(path4, [z], [y], (0.5,))
            taus.append(gs.ols_gate(data).tau_hat)
        assert np.mean(taus) - 2.0 == pytest.approx(-4.0 / 3.0, abs=1e-12)


class TestHorvitzThompson:
    def test_exact_under_no_interference(self, path4):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=0.0)
        for treated in itertools.combinations(range(4), 2):
            z = np.zeros(4)
            z[list(treated)] = 1
            y = gs.generate_outcomes(model, path4, z)
            assert gs.ht_standard(y, z, 0.5).tau_hat == pytest.approx(1.0, abs=1e-12)

    def test_boundary_proportion_degenerate(self, path4):
        with pytest.raises(DegenerateDesignError):
            gs.ht_standard(np.ones(4), np.ones(4), 1.0)

    def test_pooled_single_step_equals_standard(self, ring200):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        data = noise_free_dataset(ring200, model, (0.5,), seed=3)
        pooled = gs.ht_naive_pooled(data).tau_hat
        single = gs.ht_standard(data.y_panel[0], data.z_panel[0], 0.5).tau_hat
        assert pooled == pytest.approx(single, abs=1e-12)

    def test_pooled_averages_steps(self, ring200):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        data = noise_free_dataset(ring200, model, (0.25, 0.5), seed=5)
        per_step = [
            gs.ht_standard(data.y_panel[t], data.z_panel[t], c).tau_hat
            for t, c in enumerate(data.proportions)
        ]
        assert gs.ht_naive_pooled(data).tau_hat == pytest.approx(np.mean(per_step))

    def test_interference_blind_bias_on_ring(self, ring200):
        # One-hop interference shifts HT by about -r (both arms absorb the
        # spillover equally at c=0.5).
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        taus = []
        for seed in range(200):
            data = noise_free_dataset(ring200, model, (0.5,), seed)
            taus.append(gs.ht_standard(data.y_panel[0], data.z_panel[0], 0.5).tau_hat)
        assert np.mean(taus) - 2.0 == pytest.approx(-1.0, abs=0.05)


class TestExposureHT:
    def test_star_hub_zero_propensity_flagged(self):
        g = gs.synthetic_graph("star", 3)
        p1, p0 = exposure_propensities_exact(g.degrees, "complete", 1.0 / 3.0, 3)
        # Hub has two neighbors but only one unit is ever treated.
        assert p1[0] == 0.0
        y = np.ones(3)
        z = np.array([0.0, 1.0, 0.0])
        est = ht_exposure(y, z, g, (p1, p0))
        assert est.diagnostics["zero_propensity_units"] >= 1

    def test_bernoulli_propensity_powers(self, path3):
        # Saturation needs the unit plus its neighbors: p^(deg+1).
        p1, p0 = exposure_propensities_exact(path3.degrees, "bernoulli", 0.5, 3)
        assert p1[1] == pytest.approx(0.125)
        assert p0[1] == pytest.approx(0.125)
        assert p1[0] == pytest.approx(0.25)

    def test_complete_propensity_matches_enumeration(self):
        g = gs.synthetic_graph("path", 5)
        d = 2
        p1, p0 = exposure_propensities_exact(g.degrees, "complete", d / 5, 5)
        count1 = np.zeros(5)
        count0 = np.zeros(5)
        total = 0
        for treated in itertools.combinations(range(5), d):
            z = np.zeros(5)
            z[list(treated)] = 1
            e = gs.exposure_onehop(g, z)
            count1 += (e == 1.0) & (z == 1)
            count0 += (e == 0.0) & (z == 0)
            total += 1
        assert np.allclose(p1, count1 / total, atol=1e-12)
        assert np.allclose(p0, count0 / total, atol=1e-12)

    def test_mc_unbiased_under_onehop_bernoulli(self):
        g = gs.synthetic_graph("ring", 10)
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        plan = gs.DesignPlan(level="unit", scheme="bernoulli", temporal="independent",
                             proportions=(0.5,))
        p = exposure_propensities_exact(g.degrees, "bernoulli", 0.5, 10)
        taus = []
        for seed in range(4000):
            data = gs.run_experiment(model, plan, [g], seed)
            taus.append(ht_exposure(data.y_panel[0], data.z_panel[0], g, p).tau_hat)
        taus = np.asarray(taus)
        se = taus.std(ddof=1) / np.sqrt(len(taus))
        assert abs(taus.mean() - 2.0) <= 3 * se

    def test_mc_propensities_close_to_exact(self):
        g = gs.synthetic_graph("ring", 12)
        plan = gs.DesignPlan(level="unit", scheme="complete", temporal="independent",
                             proportions=(0.5,))
        p1e, p0e = exposure_propensities_exact(g.degrees, "complete", 0.5, 12)
        p1m, p0m = exposure_propensities_mc(g, plan, draws=4000, seed=0)
        assert np.allclose(p1m, p1e, atol=0.03)
        assert np.allclose(p0m, p0e, atol=0.03)


class TestLagrange:
    def test_exact_on_linear_means(self):
        # ybar(c) = a + b*c sampled anywhere recovers b.
        est = lagrange_gate([(0.2, 1.0 + 3.0 * 0.2), (0.7, 1.0 + 3.0 * 0.7)])
        assert est.tau_hat == pytest.approx(3.0, abs=1e-12)

    def test_exact_on_polynomial_means(self):
        poly = np.polynomial.Polynomial([0.5, -1.0, 2.0, 0.7])
        cs = [0.0, 0.2, 0.35, 0.5]
        est = lagrange_gate([(c, float(poly(c))) for c in cs])
        assert est.tau_hat == pytest.approx(float(poly(1.0) - poly(0.0)), abs=1e-9)

    def test_duplicate_proportions_rejected(self):
        with pytest.raises(DegenerateDesignError):
            lagrange_gate([(0.5, 1.0), (0.5, 2.0)])

    def test_single_point_rejected(self):
        with pytest.raises(DegenerateDesignError):
            lagrange_gate([(0.5, 1.0)])


class TestExposureRegression:
    def test_recovers_realizable_onehop_model(self):
        g = gs.synthetic_graph("path", 5)
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0)
        data = noise_free_dataset(g, model, (0.25, 0.5), seed=2, temporal="rollout")
        est = gs.exposure_regression_gate(data, hops=1, ridge=0.0)
        assert est.tau_hat == pytest.approx(2.0, abs=1e-9)

    def test_collinear_exposures_degenerate(self):
        g = gs.synthetic_graph("complete", 6)
        # With everyone connected, d=3 gives every unit exposure 3/5 or 2/5
        # depending only on z_i, so [1, z, e] is collinear.
        z = np.array([1, 1, 1, 0, 0, 0], dtype=float)
        y = np.ones(6)
        data = make_dataset(g, [z], [y], (0.5,))
        with pytest.raises(DegenerateDesignError):
            gs.exposure_regression_gate(data, hops=1, ridge=0.0)

    def test_ridge_resolves_degeneracy(self):
        g = gs.synthetic_graph("complete", 6)
        z = np.array([1, 1, 1, 0, 0, 0], dtype=float)
        y = np.ones(6)
        data = make_dataset(g, [z], [y], (0.5,))
        est = gs.exposure_regression_gate(data, hops=1, ridge=1e-8)
        assert np.isfinite(est.tau_hat)

    def test_less_biased_than_ols_under_quadratic(self, ring200):
        model = OutcomeModel(kind="quadratic", beta0=1.0, beta1=1.0, r=1.0)
        ols_err, reg_err = [], []
        for seed in range(200):
            data = noise_free_dataset(ring200, model, (0.25, 0.5), seed,
                                      temporal="rollout")
            ols_err.append(gs.ols_gate(data).tau_hat - 2.0)
            reg_err.append(gs.exposure_regression_gate(data, hops=2).tau_hat - 2.0)
        assert abs(np.mean(reg_err)) < abs(np.mean(ols_err))


class TestPurity:
    def test_estimators_are_pure(self, ring200):
        model = OutcomeModel(kind="onehop", beta0=1.0, beta1=1.0, r=1.0, sigma_e=0.1)
        data = noise_free_dataset(ring200, model, (0.25, 0.5), seed=11)
        for fn in (gs.ols_gate, gs.diff_in_means, gs.ht_naive_pooled):
            assert fn(data).tau_hat == fn(data).tau_hat
