#pragma once

// Shared Metropolis-within-Gibbs core for the three surrogacy models.
// Internal to the library: the public wrappers live in samplers.cpp and the
// cross-validation driver reuses the core directly so a holdout fit only
// records the chain it needs.

#include <cmath>
#include <cstdint>
#include <vector>

#include "surrex/randkit.hpp"
#include "surrex/samplers.hpp"
#include "surrex/types.hpp"

namespace surrex::detail {

struct GibbsProblem {
    // per-study quantities, dataset order
    std::vector<double> y1, y2;
    std::vector<double> om11, om12, om22; // within-study precision entries
    std::vector<double> se2;
    std::vector<int> cls;
    std::vector<std::vector<int>> class_rows;
    int n_classes = 0;

    ModelKind::Kind kind = ModelKind::Kind::Standard;
    std::vector<double> pi; // PEx

    double a = 100.0;      // sd of vague normal priors
    double b = 10.0;       // half-normal scale for xi and the non-exchangeable slope
    double psi_scale = 10.0; // half-normal scale for psi_j
};

struct GibbsOptions {
    bool store_latent = false;
    std::vector<int> track_mu2; // rows whose mu2 chain is recorded
    bool disable_likelihood = false;
    std::optional<double> fix_psi, fix_lambda0, fix_lambda1;
    std::optional<double> fix_beta0, fix_beta1, fix_xi0, fix_xi1;
    double slice_width = 1.0;
};

struct GibbsChains {
    // [class][draw]
    std::vector<std::vector<double>> lambda0, lambda1, psi, p;
    // [draw]
    std::vector<double> beta0, beta1, xi0, xi1;
    // [study][draw] when store_latent
    std::vector<std::vector<double>> mu1, mu2;
    // [k][draw] for options.track_mu2[k]
    std::vector<std::vector<double>> mu2_tracked;
};

/// Build the per-study likelihood terms. Rows listed in drop_y2 contribute
/// only the marginal of y1 (the holdout treatment in cross-validation).
GibbsProblem make_problem(const Dataset& data, const ModelKind& model, const PriorSpec& priors,
                          double psi_scale, const std::vector<int>& drop_y2 = {});

GibbsChains run_gibbs(const GibbsProblem& prob, const McmcConfig& cfg, RngStream& rng,
                      const GibbsOptions& options);

} // namespace surrex::detail
