"""Smoke tests for the Python bindings.

The heavy statistical validation lives in the C++ suites; these check that
the main operations are callable from Python and return sane shapes.
"""

import math

import pytest

import surrex as sx


@pytest.fixture(scope="module")
def scenario_data():
    spec = sx.build_scenario(2)
    data, truth = sx.generate_replication(spec, sx.RngStream(7, 0))
    return spec, data, truth


def test_version():
    assert sx.__version__


def test_scenario_shapes(scenario_data):
    spec, data, truth = scenario_data
    assert spec.design == 1
    assert data.n_studies() == 40
    assert data.n_classes() == 5
    assert len(truth["mu2"]) == 40
    assert spec.psi1(4) == pytest.approx(0.3373608, abs=1e-4)


def test_csv_round_trip(tmp_path, scenario_data):
    _, data, _ = scenario_data
    path = str(tmp_path / "d.csv")
    sx.write_dataset(path, data)
    back = sx.load_dataset(path)
    assert back.n_studies() == data.n_studies()
    assert sx.dataset_fingerprint(back) == sx.dataset_fingerprint(data)
    assert sx.validate(back) == []


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("study_id,class_id,y1,se1,y2,se2,rho_w\ns1,a,0.1,0,0.2,0.1,0.4\n")
    with pytest.raises(ValueError, match="se1"):
        sx.load_dataset(str(bad))


def test_distribution_primitives():
    assert sx.bvn_logpdf(0, 0, 0, 0, 1, 1, 0) == pytest.approx(-math.log(2 * math.pi))
    assert sx.normal_cdf(sx.normal_quantile(0.025)) == pytest.approx(0.025)
    rng = sx.RngStream(1, 0)
    draws = [sx.sample_truncnorm(rng, 0.0, 1.0, 0.5) for _ in range(2000)]
    assert min(draws) >= 0.5


def test_fit_and_verdict(scenario_data):
    _, data, _ = scenario_data
    cfg = sx.McmcConfig(n_iter=2000, n_burnin=1000, seed=3)
    fit = sx.fit_fex(data, sx.PriorSpec(), cfg, sx.RngStream(3, 1),
                     store_latent=False, psi_prior_scale=2.0)
    assert fit.classes == data.classes
    assert len(fit.lambda1_chain(0)) == 2000
    assert "beta1" in fit.draws()
    verdict = sx.evaluate_surrogacy(fit)
    assert len(verdict) == 5
    assert {"strong", "bf_psi", "ci_lambda1"} <= set(verdict[0].keys())


def test_pex_weights(scenario_data):
    _, data, _ = scenario_data
    cfg = sx.McmcConfig(n_iter=1500, n_burnin=500, seed=4)
    fit = sx.fit_pex(data, sx.PriorSpec(), cfg, sx.RngStream(4, 1), [0.5] * 5,
                     store_latent=False)
    p = fit.chain("p[1]")
    assert set(p) <= {0.0, 1.0}
    assert sx.mixture_weight_conditional(0.5, 0.5, 0.1, 10.0, 0.5) == pytest.approx(
        0.99011, abs=1e-4)


def test_loo_predict(scenario_data):
    _, data, _ = scenario_data
    cfg = sx.McmcConfig(n_iter=1500, n_burnin=500, seed=5)
    res = sx.loo_predict(data, sx.ModelKind.standard(), sx.PriorSpec(), cfg,
                         data.studies[0].study_id)
    assert res.predictive_sd_observed >= res.predictive_sd_true
    assert res.interval_true.contains(res.predicted_mean)


def test_determinism(scenario_data):
    _, data, _ = scenario_data
    cfg = sx.McmcConfig(n_iter=1000, n_burnin=500, seed=9)
    a = sx.fit_standard(data.restricted_to_class("class1"), sx.PriorSpec(), cfg,
                        sx.RngStream(9, 0), store_latent=False)
    b = sx.fit_standard(data.restricted_to_class("class1"), sx.PriorSpec(), cfg,
                        sx.RngStream(9, 0), store_latent=False)
    assert a.lambda1_chain(0) == b.lambda1_chain(0)
