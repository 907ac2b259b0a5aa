#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "surrex/dataset_io.hpp"
#include "surrex/simulation.hpp"

using namespace surrex;

TEST_CASE("built-in scenarios carry the design parameters") {
    const auto s4 = build_scenario(4);
    CHECK(s4.design == 2);
    CHECK(s4.lambda1[0] == 0.60);
    CHECK(s4.lambda1[1] == 1.55);
    CHECK(s4.rho_b[1] == 0.99);
    CHECK(s4.n_per_class == std::vector<int>(5, 16));

    const auto s9 = build_scenario(9);
    CHECK(s9.design == 3);
    CHECK(s9.n_per_class == std::vector<int>{4, 8, 6, 10, 7});
    CHECK(s9.psi2[1] == 0.30);
    CHECK(s9.psi2[3] == 0.30);
    CHECK(s9.psi2[0] == 0.08);

    const auto s1 = build_scenario(1);
    for (double l0 : s1.lambda0) CHECK(l0 == 0.0);
    CHECK(s1.sigma_within == 0.1);
    CHECK(s1.rho_w == 0.4);
    for (double e : s1.eta1) CHECK(e == 0.3);

    CHECK_THROWS_AS(build_scenario(0), ValidationError);
    CHECK_THROWS_AS(build_scenario(10), ValidationError);
}

TEST_CASE("implied surrogate random-effect sd") {
    const auto s1 = build_scenario(1);
    // lambda1 = 0.60, rho_b = 0.93, psi2 = 0.08 for class 5
    CHECK(s1.psi1(4) == doctest::Approx(0.3373608).epsilon(1e-4));

    ScenarioSpec s = s1;
    s.rho_b.assign(5, 1.0 / std::sqrt(2.0));
    // sqrt(1/rho^2 - 1) = 1 exactly
    for (int j = 0; j < 5; ++j)
        CHECK(s.psi1(j) == doctest::Approx(s.psi2[j] / std::fabs(s.lambda1[j])).epsilon(1e-12));
}

TEST_CASE("one replication of the first scenario is 80 rows in 5 classes") {
    RngStream rng(1, 0);
    const auto [data, truth] = generate_replication(build_scenario(1), rng);
    CHECK(data.n_studies() == 80);
    CHECK(data.n_classes() == 5);
    CHECK(truth.mu2.size() == 80);
    CHECK(truth.lambda1.size() == 5);
    std::set<std::string> ids;
    for (const auto& s : data.studies) ids.insert(s.study_id);
    CHECK(ids.size() == 80);
    CHECK(validate(data).empty());
}

TEST_CASE("generated marginals match the product-normal construction") {
    ScenarioSpec s = build_scenario(1);
    s.lambda0 = {0.0};
    s.lambda1 = {0.45};
    s.rho_b = {0.90};
    s.psi2 = {0.08};
    s.eta1 = {0.3};
    s.n_per_class = {100000};
    RngStream rng(22, 0);
    const auto [data, truth] = generate_replication(s, rng);

    const double n = static_cast<double>(truth.mu1.size());
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < truth.mu1.size(); ++i) {
        m1 += truth.mu1[i];
        m2 += truth.mu2[i];
    }
    m1 /= n;
    m2 /= n;
    double v1 = 0, v2 = 0, c12 = 0;
    for (std::size_t i = 0; i < truth.mu1.size(); ++i) {
        v1 += (truth.mu1[i] - m1) * (truth.mu1[i] - m1);
        v2 += (truth.mu2[i] - m2) * (truth.mu2[i] - m2);
        c12 += (truth.mu1[i] - m1) * (truth.mu2[i] - m2);
    }
    v1 /= n;
    v2 /= n;
    c12 /= n;

    CHECK(std::sqrt(v1) == doctest::Approx(s.psi1(0)).epsilon(0.02));
    CHECK(c12 / std::sqrt(v1 * v2) == doctest::Approx(s.rho_b[0]).epsilon(0.02 / 0.9));
    CHECK(m1 == doctest::Approx(0.3).epsilon(0.02 / 0.3));
}

TEST_CASE("run_study with a single replication reports indicator-valued measures") {
    ScenarioSpec s = build_scenario(2);
    PriorSpec priors;
    McmcConfig cfg{1000, 500, 3, 1};
    RunStudyOptions opts;
    opts.cv = false;
    const auto report = run_study(s, 1, {ModelKind::standard(), ModelKind::fex()}, priors,
                                  cfg, opts);
    REQUIRE(report.models.size() == 2);
    CHECK(report.n_reps == 1);
    CHECK(report.n_failures == 0);
    for (const auto& m : report.models) {
        CHECK(m.coverage_lambda1 >= 0.0);
        CHECK(m.coverage_lambda1 <= 1.0);
        // with one replication the per-class coverage indicators are 0/1, so
        // the class mean is a multiple of 1/5
        const double scaled = m.coverage_lambda1 * 5.0;
        CHECK(scaled == doctest::Approx(std::round(scaled)).epsilon(1e-9));
        for (double p : m.prob_strong) CHECK((p == 0.0 || p == 1.0));
    }
    const double wr = report.models[1].width_ratio_lambda1;
    CHECK(std::isfinite(wr));
    CHECK(wr > 0.0);
}

TEST_CASE("run_study is reproducible and independent of parallelism") {
    ScenarioSpec s = build_scenario(2);
    PriorSpec priors;
    McmcConfig cfg{1000, 500, 11, 1};
    RunStudyOptions serial;
    serial.cv = false;
    serial.jobs = 1;
    RunStudyOptions parallel;
    parallel.cv = false;
    parallel.jobs = 2;
    const auto a = run_study(s, 4, {ModelKind::standard(), ModelKind::fex()}, priors, cfg,
                             serial);
    const auto b = run_study(s, 4, {ModelKind::standard(), ModelKind::fex()}, priors, cfg,
                             parallel);
    for (std::size_t m = 0; m < a.models.size(); ++m) {
        CHECK(a.models[m].coverage_lambda1 == b.models[m].coverage_lambda1);
        CHECK(a.models[m].abs_bias_lambda1 == b.models[m].abs_bias_lambda1);
        CHECK(a.models[m].rmse_lambda1 == b.models[m].rmse_lambda1);
        if (std::isnan(a.models[m].width_ratio_lambda1)) // subgroup has no baseline ratio
            CHECK(std::isnan(b.models[m].width_ratio_lambda1));
        else
            CHECK(a.models[m].width_ratio_lambda1 == b.models[m].width_ratio_lambda1);
        CHECK(a.models[m].prob_strong == b.models[m].prob_strong);
    }
}

TEST_CASE("run_study cross-validation block aggregates containment") {
    ScenarioSpec s = build_scenario(1);
    s.n_per_class.assign(5, 2); // tiny CV load
    PriorSpec priors;
    McmcConfig cfg{1000, 500, 13, 1};
    RunStudyOptions opts;
    opts.jobs = 2;
    const auto report = run_study(s, 2, {ModelKind::standard(), ModelKind::fex()}, priors,
                                  cfg, opts);
    for (const auto& m : report.models) {
        CHECK(m.coverage_mu2 >= 0.0);
        CHECK(m.coverage_mu2 <= 1.0);
        CHECK(std::isfinite(m.abs_bias_mu2));
        CHECK(std::isfinite(m.rmse_mu2));
    }
    CHECK(std::isfinite(report.models[1].width_ratio_mu2));
}

TEST_CASE("published reference values are wired for the built-in scenarios") {
    const auto r3 = scenario_reference(3, "fex");
    REQUIRE(r3.has_value());
    CHECK(r3->width_ratio_lambda1 == doctest::Approx(0.52));
    CHECK(r3->prob_strong_mean == doctest::Approx(0.89));
    const auto r7 = scenario_reference(7, "standard");
    REQUIRE(r7.has_value());
    REQUIRE(r7->prob_strong.size() == 5);
    CHECK(r7->prob_strong[0] == doctest::Approx(0.82));
    CHECK(r7->prob_strong[1] == doctest::Approx(0.00));
    CHECK(!scenario_reference(0, "fex").has_value());
    CHECK(!scenario_reference(3, "bogus").has_value());
}

TEST_CASE("custom scenario specs are validated") {
    ScenarioSpec bad = build_scenario(1);
    bad.rho_b[2] = 1.0;
    CHECK_THROWS_AS(bad.check(), ValidationError);
    bad = build_scenario(1);
    bad.psi2[0] = 0.0;
    CHECK_THROWS_AS(bad.check(), ValidationError);
    bad = build_scenario(1);
    bad.lambda1.pop_back();
    CHECK_THROWS_AS(bad.check(), ValidationError);
}
