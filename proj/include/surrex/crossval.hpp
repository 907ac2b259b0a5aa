#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surrex/samplers.hpp"
#include "surrex/types.hpp"

namespace surrex {

enum class PredictTarget { Observed, True };

/// Leave-one-study-out prediction of the treatment effect on the final
/// outcome. The observed-target interval widens the true-effect interval by
/// the holdout's within-study variance: sd_observed = sqrt(se2^2 + sd_true^2).
struct PredictionResult {
    std::string study_id;
    std::string class_id;
    double y1 = 0.0;
    double y2_observed = 0.0;
    double predicted_mean = 0.0;
    double predictive_sd_true = 0.0;
    double predictive_sd_observed = 0.0;
    Interval interval_true;
    Interval interval_observed;
    PredictTarget target = PredictTarget::Observed;
    double target_value = 0.0;
    bool contains_target = false;
    double abs_error = 0.0; // |predicted_mean - target_value|
    double mce = 0.0;       // Monte Carlo error of the predicted mean
};

struct LooOptions {
    double level = 0.95;
    bool empirical_intervals = false; // quantile-based instead of mean +/- z*sd
    int jobs = 1;                     // fold parallelism in loo_sweep
    std::optional<double> psi_prior_scale;
    std::optional<FitOptions> fit_options; // test hooks carried into the refit
};

/// Refit with the holdout's final-outcome likelihood removed (its surrogate
/// estimate is kept, contributing the marginal of y1) and summarize the
/// posterior of the holdout's true effect on the final outcome.
/// stream_id, when given, pins the RNG stream; by default it is the
/// holdout's position so folds are reproducible and independent.
PredictionResult loo_predict(const Dataset& data, const ModelKind& model,
                             const PriorSpec& priors, const McmcConfig& cfg,
                             const std::string& holdout_id, PredictTarget target,
                             std::optional<double> true_value = std::nullopt,
                             const LooOptions& options = {},
                             std::optional<std::uint64_t> stream_id = std::nullopt);

struct LooSweep {
    std::vector<PredictionResult> folds;
    double containment_fraction = 0.0;
    double median_abs_error = 0.0;
    double mean_abs_error = 0.0;
    double max_mce = 0.0;
};

/// Leave-one-study-out over every study. For target = True, true_values
/// maps study_id to the known true effect.
LooSweep loo_sweep(const Dataset& data, const ModelKind& model, const PriorSpec& priors,
                   const McmcConfig& cfg, PredictTarget target,
                   const std::vector<std::pair<std::string, double>>& true_values = {},
                   const LooOptions& options = {});

struct WidthRatioSummary {
    double mean = 0.0;
    double median = 0.0;
    std::vector<double> per_fold; // matched by study_id, NaN when unmatched
};

/// Ratio of predictive-interval widths fold by fold against a baseline sweep
/// (same studies, typically the subgroup model).
WidthRatioSummary width_ratios(const LooSweep& sweep, const LooSweep& baseline);

} // namespace surrex
