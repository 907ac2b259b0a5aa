#include "surrex/diagnostics.hpp"

#include <cmath>
#include <numeric>

namespace surrex {

namespace {

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x, double m) {
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return x.size() > 1 ? s / static_cast<double>(x.size() - 1) : 0.0;
}

} // namespace

double mcmc_error(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 100) throw ValidationError("mcmc_error: chain must have length >= 100");
    const std::size_t k = static_cast<std::size_t>(std::floor(std::sqrt(double(n))));
    const std::size_t m = n / k; // batch size; trailing remainder dropped
    std::vector<double> bm(k);
    for (std::size_t b = 0; b < k; ++b) {
        double s = 0.0;
        for (std::size_t i = b * m; i < (b + 1) * m; ++i) s += chain[i];
        bm[b] = s / static_cast<double>(m);
    }
    const double g = mean_of(bm);
    double ss = 0.0;
    for (double v : bm) ss += (v - g) * (v - g);
    return std::sqrt(ss / (static_cast<double>(k) * static_cast<double>(k - 1)));
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) throw ValidationError("effective_sample_size: chain too short");
    const double m = mean_of(chain);
    const double g0 = [&] {
        double s = 0.0;
        for (double v : chain) s += (v - m) * (v - m);
        return s / static_cast<double>(n);
    }();
    if (!(g0 > 0.0)) return static_cast<double>(n); // constant chain

    auto gamma = [&](std::size_t t) {
        double s = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) s += (chain[i] - m) * (chain[i + t] - m);
        return s / static_cast<double>(n);
    };

    // sum of paired autocovariances while they stay positive
    double sigma2 = -g0;
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        const double pair = gamma(t) + gamma(t + 1);
        if (pair <= 0.0) break;
        sigma2 += 2.0 * pair;
    }
    if (!(sigma2 > 0.0)) sigma2 = g0;
    double ess = static_cast<double>(n) * g0 / sigma2;
    return std::min(ess, 1.05 * static_cast<double>(n));
}

double split_rhat(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) throw ValidationError("split_rhat: chain too short");
    const std::size_t m = n / 2;
    auto h1 = chain.first(m);
    auto h2 = chain.subspan(n - m, m);
    const double m1 = mean_of(h1), m2 = mean_of(h2);
    const double w = 0.5 * (variance_of(h1, m1) + variance_of(h2, m2));
    const double grand = 0.5 * (m1 + m2);
    const double b = static_cast<double>(m) *
                     ((m1 - grand) * (m1 - grand) + (m2 - grand) * (m2 - grand));
    if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    const double dm = static_cast<double>(m);
    const double var_plus = (dm - 1.0) / dm * w + b / dm;
    return std::sqrt(var_plus / w);
}

ChainDiagnostics chain_diagnostics(std::span<const double> chain) {
    ChainDiagnostics d;
    d.mce = mcmc_error(chain);
    d.ess = effective_sample_size(chain);
    d.split_rhat = split_rhat(chain);
    d.flagged = d.split_rhat > 1.05 || d.ess < 400.0;
    return d;
}

std::map<std::string, ChainDiagnostics> diagnostics_report(const FitResult& fit) {
    std::map<std::string, ChainDiagnostics> out;
    for (const auto& [name, chain] : fit.draws.all()) out[name] = chain_diagnostics(chain);
    return out;
}

} // namespace surrex
