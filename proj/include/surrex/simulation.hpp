#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "surrex/crossval.hpp"
#include "surrex/samplers.hpp"
#include "surrex/types.hpp"

namespace surrex {

/// Parameters of one simulated data design: five (by default) treatment
/// classes with per-class intercept, slope, between-study correlation and
/// conditional standard deviation, plus common within-study settings.
struct ScenarioSpec {
    std::string name;
    int design = 0; // 1..3 for the built-in designs, 0 for custom
    std::vector<double> lambda0;
    std::vector<double> lambda1;
    std::vector<double> rho_b;
    std::vector<double> psi2; // conditional sd of mu2 | mu1
    std::vector<double> eta1; // mean of the surrogate random effects
    std::vector<int> n_per_class;
    double sigma_within = 0.1;
    double rho_w = 0.4;

    std::size_t n_classes() const { return lambda1.size(); }
    void check() const;

    /// Implied sd of the surrogate random effects:
    /// psi1_j = psi2_j / (|lambda1_j| * sqrt(1/rho_b_j^2 - 1)).
    double psi1(std::size_t j) const;
};

/// Built-in scenarios 1..9: designs 1..3 crossed with class sizes
/// (16 each, 8 each, unbalanced 4/8/6/10/7).
ScenarioSpec build_scenario(int index);

/// Latent truths of one generated replication, for scoring.
struct ReplicationTruth {
    std::vector<double> mu1; // per study, dataset order
    std::vector<double> mu2;
    std::vector<double> lambda0, lambda1, psi1, psi2; // per class
};

/// One product-normal bivariate meta-analysis draw: random effects on the
/// surrogate, a linear link to the final outcome, and correlated
/// within-study noise on both observed effects.
std::pair<Dataset, ReplicationTruth> generate_replication(const ScenarioSpec& spec,
                                                          RngStream& rng);

struct ModelPerformance {
    std::string model;
    // slope estimates
    double coverage_lambda1 = 0.0;
    double abs_bias_lambda1 = 0.0;
    double rmse_lambda1 = 0.0;
    double width_ratio_lambda1 = 0.0; // vs subgroup, NaN when not applicable
    double mce_lambda1 = 0.0;         // mean over reps of the per-rep max MCE
    std::vector<double> prob_strong;  // per class
    double prob_strong_mean = 0.0;
    std::vector<double> mixture_weight; // per class, PEx only
    // leave-one-out predictions of the final-outcome effects
    double coverage_mu2 = 0.0;
    double abs_bias_mu2 = 0.0;
    double rmse_mu2 = 0.0;
    double width_ratio_mu2 = 0.0;
    double mce_mu2 = 0.0;
};

struct PerformanceReport {
    int scenario_index = 0; // 0 for custom specs
    ScenarioSpec spec;
    int n_reps = 0;
    int n_failures = 0;
    bool cv = true;
    PriorSpec priors;
    McmcConfig cfg;
    std::vector<ModelPerformance> models;
};

struct RunStudyOptions {
    bool cv = true; // run the leave-one-study-out block
    int jobs = 1;   // replication parallelism (does not change results)
    double level = 0.95;
};

/// Replication study: generate data, fit each requested model, evaluate the
/// surrogacy criteria and (optionally) leave-one-study-out predictions
/// against the true effects, then aggregate coverage, absolute bias, RMSE,
/// width ratios against the subgroup run, Monte Carlo errors and the
/// probability of a strong association per class. A failed replication is
/// retried once on a perturbed stream and excluded afterwards; more than 1%
/// exclusions abort the study.
PerformanceReport run_study(const ScenarioSpec& spec, int n_reps,
                            const std::vector<ModelKind>& models, const PriorSpec& priors,
                            const McmcConfig& cfg, const RunStudyOptions& options = {});

/// Published full-scale reference values for the built-in scenarios, used
/// for the side-by-side columns in simulation reports.
struct ScenarioReference {
    std::optional<double> coverage_lambda1, width_ratio_lambda1, prob_strong_mean,
        mce_lambda1;
    std::optional<double> coverage_mu2, width_ratio_mu2, mce_mu2;
    std::vector<double> prob_strong; // per class where published (design 3)
};

std::optional<ScenarioReference> scenario_reference(int scenario_index,
                                                    const std::string& model_name);

} // namespace surrex
