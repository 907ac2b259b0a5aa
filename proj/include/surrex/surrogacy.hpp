#pragma once

#include <span>
#include <string>
#include <vector>

#include "surrex/samplers.hpp"
#include "surrex/types.hpp"

namespace surrex {

/// Per-class outcome of the three surrogacy criteria:
///   intercept — 0 inside the credible interval of lambda0j,
///   slope     — 0 outside the credible interval of lambda1j,
///   variance  — Bayes factor for psi_j^2 = 0 above 3.3.
struct ClassVerdict {
    std::string class_id;
    Interval ci_lambda0;
    Interval ci_lambda1;
    double bf_psi = 0.0;
    double psi2_median = 0.0;
    Interval ci_psi2;
    bool criterion_intercept = false;
    bool criterion_slope = false;
    bool criterion_variance = false;
    bool strong = false;
};

struct SurrogacyVerdict {
    double level = 0.95;
    double bf_threshold = 3.3;
    std::vector<ClassVerdict> classes;
};

/// Equal-tailed credible interval using linear interpolation between order
/// statistics (type-7 quantiles). Requires chain length >= 100.
Interval credible_interval(std::span<const double> chain, double level);

/// Type-7 sample quantile.
double quantile(std::span<const double> chain, double p);

/// Savage-Dickey ratio for the null psi^2 = 0, in interval form: posterior
/// over prior probability of the boundary window [0, prior_scale/20]. The
/// prior is the half-normal with the given scale; as the window shrinks the
/// ratio converges to the posterior/prior density ratio at zero.
double savage_dickey_bf(std::span<const double> psi_chain, double prior_scale);

/// Evaluate the three criteria for every class of a fit. psi^2 point
/// summaries use the posterior median.
SurrogacyVerdict evaluate_surrogacy(const FitResult& fit, double level = 0.95);

} // namespace surrex
