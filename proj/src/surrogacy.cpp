#include "surrex/surrogacy.hpp"

#include <algorithm>
#include <cmath>

#include "surrex/randkit.hpp"

namespace surrex {

double quantile(std::span<const double> chain, double p) {
    if (chain.empty()) throw ValidationError("quantile: empty chain");
    std::vector<double> x(chain.begin(), chain.end());
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= x.size()) return x.back();
    return x[lo] + (h - std::floor(h)) * (x[lo + 1] - x[lo]);
}

Interval credible_interval(std::span<const double> chain, double level) {
    if (chain.size() < 100)
        throw ValidationError("credible_interval: chain must have length >= 100");
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("credible_interval: level must be in (0,1)");
    std::vector<double> x(chain.begin(), chain.end());
    std::sort(x.begin(), x.end());
    auto q = [&](double p) {
        const double h = (static_cast<double>(x.size()) - 1.0) * p;
        const std::size_t lo = static_cast<std::size_t>(std::floor(h));
        if (lo + 1 >= x.size()) return x.back();
        return x[lo] + (h - std::floor(h)) * (x[lo + 1] - x[lo]);
    };
    const double tail = 0.5 * (1.0 - level);
    return Interval{q(tail), q(1.0 - tail)};
}

double savage_dickey_bf(std::span<const double> psi_chain, double prior_scale) {
    if (psi_chain.empty()) throw ValidationError("savage_dickey_bf: empty chain");
    if (!(prior_scale > 0.0))
        throw std::domain_error("savage_dickey_bf: prior_scale must be > 0");

    // Interval form of the density ratio: posterior over prior mass of the
    // boundary window [0, eps], eps = prior_scale / 20. The prior mass is
    // erf(eps / (prior_scale*sqrt(2))), within 0.05% of eps * sqrt(2/pi) /
    // prior_scale (the half-normal density at zero), so the ratio recovers
    // the point density ratio as eps -> 0 while staying estimable from a
    // finite chain whose posterior touches the boundary.
    const double eps = prior_scale / 20.0;
    const double n = static_cast<double>(psi_chain.size());
    double hits = 0.0;
    for (double v : psi_chain)
        if (v <= eps) hits += 1.0;
    const double prior_mass = std::erf(eps / (prior_scale * M_SQRT2));
    return (hits / n) / prior_mass;
}

SurrogacyVerdict evaluate_surrogacy(const FitResult& fit, double level) {
    SurrogacyVerdict verdict;
    verdict.level = level;
    const int nc = static_cast<int>(fit.classes.size());
    for (int j = 0; j < nc; ++j) {
        ClassVerdict cv;
        cv.class_id = fit.classes[j];
        cv.ci_lambda0 = credible_interval(fit.lambda0_chain(j), level);
        cv.ci_lambda1 = credible_interval(fit.lambda1_chain(j), level);
        const auto& psi = fit.psi_chain(j);
        cv.bf_psi = savage_dickey_bf(psi, fit.psi_prior_scale);
        std::vector<double> psi2(psi.size());
        std::transform(psi.begin(), psi.end(), psi2.begin(),
                       [](double x) { return x * x; });
        cv.psi2_median = quantile(psi2, 0.5);
        cv.ci_psi2 = credible_interval(psi2, level);
        cv.criterion_intercept = cv.ci_lambda0.contains(0.0);
        cv.criterion_slope = !cv.ci_lambda1.contains(0.0);
        cv.criterion_variance = cv.bf_psi > verdict.bf_threshold;
        cv.strong = cv.criterion_intercept && cv.criterion_slope && cv.criterion_variance;
        verdict.classes.push_back(std::move(cv));
    }
    return verdict;
}

} // namespace surrex
