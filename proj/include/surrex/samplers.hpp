#pragma once

#include <optional>
#include <string>
#include <vector>

#include "surrex/randkit.hpp"
#include "surrex/types.hpp"

namespace surrex {

/// Model selector. PEx carries the fixed per-class prior probabilities of
/// the exchangeable slope component.
struct ModelKind {
    enum class Kind { Standard, FEx, PEx };

    Kind kind = Kind::Standard;
    std::vector<double> pi; // PEx only, one entry per class

    static ModelKind standard() { return {Kind::Standard, {}}; }
    static ModelKind fex() { return {Kind::FEx, {}}; }
    static ModelKind pex(std::vector<double> pi_values) {
        return {Kind::PEx, std::move(pi_values)};
    }

    std::string name() const {
        switch (kind) {
            case Kind::Standard: return "standard";
            case Kind::FEx: return "fex";
            default: return "pex";
        }
    }
};

/// Sampler options. The fix_* hooks pin a parameter for the whole run
/// (used by the oracle and degeneracy tests); disable_likelihood drops every
/// within-study likelihood term so the chain targets the prior.
struct FitOptions {
    bool store_latent = true; // record mu1/mu2 chains
    std::optional<double> psi_prior_scale; // overrides PriorSpec.b for the psi_j prior
    bool disable_likelihood = false;
    std::optional<double> fix_psi;
    std::optional<double> fix_lambda0;
    std::optional<double> fix_lambda1;
    std::optional<double> fix_beta0;
    std::optional<double> fix_beta1;
    std::optional<double> fix_xi0;
    std::optional<double> fix_xi1;
    double slice_width = 1.0;
};

struct FitResult {
    ModelKind model;
    PriorSpec priors;
    McmcConfig config;
    double psi_prior_scale = 0.0; // half-normal scale actually used for psi_j
    std::vector<std::string> classes;
    std::string dataset_fingerprint;
    PosteriorDraws draws;
    std::vector<std::string> warnings;

    const std::vector<double>& lambda0_chain(int class_index) const;
    const std::vector<double>& lambda1_chain(int class_index) const;
    const std::vector<double>& psi_chain(int class_index) const;
};

/// Standard single-class surrogacy model: within-study bivariate normal
/// likelihood, linear relationship mu2 | mu1 ~ N(lambda0 + lambda1*mu1,
/// psi^2), vague N(0, a^2) priors on mu1, lambda0, lambda1 and a half-normal
/// prior on psi. Exact normal full conditionals for mu1, mu2 and the
/// (lambda0, lambda1) block; slice updates for psi.
FitResult fit_standard(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                       RngStream& rng, const FitOptions& options = {});

/// Hierarchical extension with fully exchangeable intercepts and slopes:
/// lambda0j ~ N(beta0, xi0^2), lambda1j ~ N(beta1, xi1^2), vague priors on
/// beta0, beta1 and half-normal priors on xi0, xi1 and psi_j.
FitResult fit_fex(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                  RngStream& rng, const FitOptions& options = {});

/// Partial exchangeability: as fit_fex, but each slope follows a
/// two-component mixture selected by a Bernoulli indicator p_j updated each
/// sweep — exchangeable N(beta1, xi1^2) when p_j = 1, non-exchangeable
/// N(0, b^2) when p_j = 0. Intercepts stay fully exchangeable. The posterior
/// mean of the p_j chain is the mixture weight of class j.
FitResult fit_pex(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                  RngStream& rng, const std::vector<double>& pi,
                  const FitOptions& options = {});

/// Conditional probability that a slope belongs to the exchangeable
/// component given the current value of lambda1j and the hyper-parameters:
///   pi_j * phi(lambda1j; beta1, xi1^2) /
///   [pi_j * phi(lambda1j; beta1, xi1^2) + (1 - pi_j) * phi(lambda1j; 0, b^2)]
double mixture_weight_conditional(double lambda1j, double beta1, double xi1, double b,
                                  double pi_j);

} // namespace surrex
