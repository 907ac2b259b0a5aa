#pragma once

#include <map>
#include <span>
#include <string>

#include "surrex/samplers.hpp"

namespace surrex {

struct ChainDiagnostics {
    double mce = 0.0;        // batch-means Monte Carlo error of the mean
    double ess = 0.0;        // effective sample size (initial positive sequence)
    double split_rhat = 1.0; // first half vs second half
    bool flagged = false;    // split_rhat > 1.05 or ess < 400
};

/// Batch-means standard error of the chain mean, floor(sqrt(n)) batches.
/// Requires length >= 100.
double mcmc_error(std::span<const double> chain);

/// Effective sample size via Geyer's initial positive sequence, capped at
/// 1.05 * n.
double effective_sample_size(std::span<const double> chain);

/// Split-chain R-hat (two halves of a single chain).
double split_rhat(std::span<const double> chain);

ChainDiagnostics chain_diagnostics(std::span<const double> chain);

/// Diagnostics for every monitored chain of a fit.
std::map<std::string, ChainDiagnostics> diagnostics_report(const FitResult& fit);

} // namespace surrex
