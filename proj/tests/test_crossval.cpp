#include <doctest.h>

#include <cmath>
#include <numeric>

#include "surrex/crossval.hpp"
#include "surrex/samplers.hpp"
#include "surrex/simulation.hpp"

using namespace surrex;

namespace {

double chain_sd(const std::vector<double>& c) {
    const double m = std::accumulate(c.begin(), c.end(), 0.0) / c.size();
    double s = 0.0;
    for (double v : c) s += (v - m) * (v - m);
    return std::sqrt(s / (c.size() - 1.0));
}

Dataset three_study_instance() {
    return Dataset::from_records({{"s1", "a", 0.2, 1e-6, 1.0, 0.1, 0.0},
                                  {"s2", "a", 0.8, 1e-6, 1.4, 0.1, 0.0},
                                  {"s3", "a", 0.5, 1e-6, 1.2, 0.1, 0.0}});
}

} // namespace

TEST_CASE("pinned line with vanishing noise predicts lambda0 + lambda1 * y1") {
    const Dataset data = three_study_instance();
    PriorSpec priors;
    McmcConfig cfg{4000, 1000, 3, 1};
    LooOptions opts;
    FitOptions hooks;
    hooks.fix_lambda0 = 0.25;
    hooks.fix_lambda1 = 0.5;
    hooks.fix_psi = 1e-4;
    opts.fit_options = hooks;
    const auto res = loo_predict(data, ModelKind::standard(), priors, cfg, "s3",
                                 PredictTarget::Observed, std::nullopt, opts);
    CHECK(res.predicted_mean == doctest::Approx(0.25 + 0.5 * 0.5).epsilon(1e-3 / 0.5));
}

TEST_CASE("holdout prediction matches the conjugate regression predictive mean") {
    // with psi fixed and se1 -> 0, the two retained studies give a closed-form
    // posterior for (lambda0, lambda1); the holdout's prediction is its mean
    // evaluated at the holdout's y1
    const Dataset data = three_study_instance();
    const double psi0 = 0.2, se2 = 0.1, a = 1.0;
    const double v = psi0 * psi0 + se2 * se2;
    const double xs[2] = {0.2, 0.8}, ys[2] = {1.0, 1.4};
    const double p00 = 2.0 / v + 1.0 / (a * a);
    const double p01 = (xs[0] + xs[1]) / v;
    const double p11 = (xs[0] * xs[0] + xs[1] * xs[1]) / v + 1.0 / (a * a);
    const double r0 = (ys[0] + ys[1]) / v;
    const double r1 = (xs[0] * ys[0] + xs[1] * ys[1]) / v;
    const double det = p00 * p11 - p01 * p01;
    const double m0 = (p11 * r0 - p01 * r1) / det;
    const double m1 = (p00 * r1 - p01 * r0) / det;
    const double y1h = 0.5;
    const double expected_mean = m0 + m1 * y1h;
    const double expected_var =
        p11 / det + y1h * y1h * p00 / det - 2.0 * y1h * p01 / det + psi0 * psi0;

    PriorSpec priors;
    priors.a = a;
    McmcConfig cfg{60000, 2000, 5, 1};
    LooOptions opts;
    FitOptions hooks;
    hooks.fix_psi = psi0;
    opts.fit_options = hooks;
    const auto res = loo_predict(data, ModelKind::standard(), priors, cfg, "s3",
                                 PredictTarget::Observed, std::nullopt, opts);
    CHECK(res.predicted_mean == doctest::Approx(expected_mean).epsilon(0.01));
    CHECK(res.predictive_sd_true ==
          doctest::Approx(std::sqrt(expected_var)).epsilon(0.05));
    CHECK(res.predictive_sd_observed ==
          doctest::Approx(std::sqrt(expected_var + se2 * se2)).epsilon(0.05));
}

TEST_CASE("sweep produces one result per study with consistent aggregates") {
    const auto spec = build_scenario(2);
    RngStream gen(77, 0);
    auto [data, truth] = generate_replication(spec, gen);
    // keep two classes for speed
    std::vector<StudyRecord> sub(data.studies.begin(), data.studies.begin() + 16);
    const Dataset small = Dataset::from_records(sub);

    PriorSpec priors;
    McmcConfig cfg{2000, 1000, 6, 1};
    LooOptions opts;
    opts.jobs = 2;
    std::vector<std::pair<std::string, double>> truths;
    for (std::size_t i = 0; i < small.studies.size(); ++i)
        truths.emplace_back(small.studies[i].study_id, truth.mu2[i]);

    const auto sweep = loo_sweep(small, ModelKind::fex(), priors, cfg, PredictTarget::True,
                                 truths, opts);
    CHECK(sweep.folds.size() == small.n_studies());
    CHECK(sweep.containment_fraction >= 0.0);
    CHECK(sweep.containment_fraction <= 1.0);
    CHECK(sweep.median_abs_error >= 0.0);

    for (const auto& f : sweep.folds) {
        CHECK(f.predictive_sd_observed >= f.predictive_sd_true);
        // intervals centered at the predicted mean
        CHECK(0.5 * (f.interval_true.lo + f.interval_true.hi) ==
              doctest::Approx(f.predicted_mean).epsilon(1e-9));
    }

    // self-ratio is exactly one
    const auto ratios = width_ratios(sweep, sweep);
    CHECK(ratios.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ratios.median == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("removing the holdout's final outcome widens its predictive sd") {
    Dataset data = Dataset::from_records({{"s1", "a", 0.15, 0.06, 0.20, 0.07, 0.2},
                                          {"s2", "a", 0.42, 0.05, 0.33, 0.06, 0.2},
                                          {"s3", "a", 0.27, 0.07, 0.25, 0.06, 0.2},
                                          {"s4", "a", 0.58, 0.06, 0.45, 0.07, 0.2},
                                          {"s5", "a", 0.05, 0.05, 0.07, 0.06, 0.2}});
    PriorSpec priors;
    McmcConfig cfg{20000, 4000, 7, 1};
    RngStream rng(cfg.seed, 0);
    FitOptions full_opts; // store latent chains
    const auto full = fit_standard(data, priors, cfg, rng, full_opts);

    LooOptions opts;
    for (int i = 0; i < 5; ++i) {
        const auto res = loo_predict(data, ModelKind::standard(), priors, cfg,
                                     data.studies[i].study_id, PredictTarget::Observed,
                                     std::nullopt, opts);
        const auto& mu2_full =
            full.draws.at("mu2[" + std::to_string(i + 1) + ",1]");
        CHECK(res.predictive_sd_true > 0.9 * chain_sd(mu2_full));
    }
}

TEST_CASE("containment is invariant to study relabeling") {
    const auto spec = build_scenario(2);
    RngStream gen(78, 0);
    auto [data, truth] = generate_replication(spec, gen);
    std::vector<StudyRecord> sub(data.studies.begin(), data.studies.begin() + 8);
    Dataset d1 = Dataset::from_records(sub);
    for (auto& s : sub) s.study_id = "renamed_" + s.study_id;
    Dataset d2 = Dataset::from_records(sub);

    PriorSpec priors;
    McmcConfig cfg{2000, 500, 8, 1};
    LooOptions opts;
    const auto s1 =
        loo_sweep(d1, ModelKind::standard(), priors, cfg, PredictTarget::Observed, {}, opts);
    const auto s2 =
        loo_sweep(d2, ModelKind::standard(), priors, cfg, PredictTarget::Observed, {}, opts);
    CHECK(s1.containment_fraction == s2.containment_fraction);
}

TEST_CASE("empirical intervals stay close to the normal-theory construction") {
    const Dataset data = three_study_instance();
    PriorSpec priors;
    McmcConfig cfg{20000, 2000, 9, 1};
    LooOptions normal_opts;
    LooOptions emp_opts;
    emp_opts.empirical_intervals = true;
    const auto a = loo_predict(data, ModelKind::standard(), priors, cfg, "s3",
                               PredictTarget::Observed, std::nullopt, normal_opts);
    const auto b = loo_predict(data, ModelKind::standard(), priors, cfg, "s3",
                               PredictTarget::Observed, std::nullopt, emp_opts);
    CHECK(b.interval_true.width() ==
          doctest::Approx(a.interval_true.width()).epsilon(0.2));
    CHECK(b.interval_observed.width() ==
          doctest::Approx(a.interval_observed.width()).epsilon(0.2));
}

TEST_CASE("errors: unknown study and missing true value") {
    const Dataset data = three_study_instance();
    PriorSpec priors;
    McmcConfig cfg{1000, 200, 10, 1};
    CHECK_THROWS_AS(loo_predict(data, ModelKind::standard(), priors, cfg, "nope",
                                PredictTarget::Observed),
                    ValidationError);
    CHECK_THROWS_AS(
        loo_predict(data, ModelKind::standard(), priors, cfg, "s1", PredictTarget::True),
        ValidationError);
}
