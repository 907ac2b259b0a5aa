#include "surrex/samplers.hpp"

#include <cmath>

#include "surrex/dataset_io.hpp"
#include "gibbs_core.hpp"

namespace surrex {

double mixture_weight_conditional(double lambda1j, double beta1, double xi1, double b,
                                  double pi_j) {
    if (!(xi1 > 0.0) || !(b > 0.0))
        throw std::domain_error("mixture_weight_conditional: xi1 and b must be > 0");
    if (!(pi_j >= 0.0 && pi_j <= 1.0))
        throw std::domain_error("mixture_weight_conditional: pi_j must be in [0,1]");
    if (pi_j == 0.0) return 0.0;
    if (pi_j == 1.0) return 1.0;
    // work with log densities to survive extreme ratios
    const double la = std::log(pi_j) + normal_logpdf(lambda1j, beta1, xi1);
    const double lb = std::log1p(-pi_j) + normal_logpdf(lambda1j, 0.0, b);
    const double m = std::max(la, lb);
    const double ea = std::exp(la - m), eb = std::exp(lb - m);
    return ea / (ea + eb);
}

namespace {

std::string idx1(const char* base, int j) {
    return std::string(base) + "[" + std::to_string(j + 1) + "]";
}

FitResult package(const Dataset& data, const ModelKind& model, const PriorSpec& priors,
                  const McmcConfig& cfg, double psi_scale, detail::GibbsChains&& chains,
                  bool store_latent) {
    FitResult fit;
    fit.model = model;
    fit.priors = priors;
    fit.config = cfg;
    fit.psi_prior_scale = psi_scale;
    fit.classes = data.classes;
    fit.dataset_fingerprint = dataset_fingerprint(data);

    const int nc = static_cast<int>(data.classes.size());
    for (int j = 0; j < nc; ++j) {
        fit.draws.insert(idx1("lambda0", j), std::move(chains.lambda0[j]));
        fit.draws.insert(idx1("lambda1", j), std::move(chains.lambda1[j]));
        fit.draws.insert(idx1("psi", j), std::move(chains.psi[j]));
        if (model.kind == ModelKind::Kind::PEx)
            fit.draws.insert(idx1("p", j), std::move(chains.p[j]));
    }
    if (model.kind != ModelKind::Kind::Standard) {
        fit.draws.insert("beta0", std::move(chains.beta0));
        fit.draws.insert("beta1", std::move(chains.beta1));
        fit.draws.insert("xi0", std::move(chains.xi0));
        fit.draws.insert("xi1", std::move(chains.xi1));
    }
    if (store_latent) {
        // mu chains named by within-class study index i and class index j
        std::vector<int> within(data.studies.size(), 0);
        const auto rows = data.rows_by_class();
        for (const auto& cls : rows)
            for (std::size_t i = 0; i < cls.size(); ++i)
                within[cls[i]] = static_cast<int>(i) + 1;
        for (std::size_t r = 0; r < data.studies.size(); ++r) {
            const int j = data.class_index(data.studies[r].class_id) + 1;
            const std::string suffix =
                "[" + std::to_string(within[r]) + "," + std::to_string(j) + "]";
            fit.draws.insert("mu1" + suffix, std::move(chains.mu1[r]));
            fit.draws.insert("mu2" + suffix, std::move(chains.mu2[r]));
        }
    }
    return fit;
}

detail::GibbsOptions to_core_options(const FitOptions& options) {
    detail::GibbsOptions g;
    g.store_latent = options.store_latent;
    g.disable_likelihood = options.disable_likelihood;
    g.fix_psi = options.fix_psi;
    g.fix_lambda0 = options.fix_lambda0;
    g.fix_lambda1 = options.fix_lambda1;
    g.fix_beta0 = options.fix_beta0;
    g.fix_beta1 = options.fix_beta1;
    g.fix_xi0 = options.fix_xi0;
    g.fix_xi1 = options.fix_xi1;
    g.slice_width = options.slice_width;
    return g;
}

void check_dataset(const Dataset& data) {
    const auto violations = validate(data);
    if (!violations.empty()) {
        const auto& v = violations.front();
        throw ValidationError("invalid dataset: " +
                              (v.study_id.empty() ? v.field : v.study_id + "." + v.field) +
                              ": " + v.message);
    }
}

} // namespace

const std::vector<double>& FitResult::lambda0_chain(int class_index) const {
    return draws.at(idx1("lambda0", class_index));
}
const std::vector<double>& FitResult::lambda1_chain(int class_index) const {
    return draws.at(idx1("lambda1", class_index));
}
const std::vector<double>& FitResult::psi_chain(int class_index) const {
    return draws.at(idx1("psi", class_index));
}

FitResult fit_standard(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                       RngStream& rng, const FitOptions& options) {
    check_dataset(data);
    if (data.classes.size() != 1)
        throw ValidationError("fit_standard: dataset must contain exactly one class");
    const double psi_scale = options.psi_prior_scale.value_or(priors.b);
    const auto model = ModelKind::standard();
    auto prob = detail::make_problem(data, model, priors, psi_scale);
    auto chains = detail::run_gibbs(prob, cfg, rng, to_core_options(options));
    auto fit = package(data, model, priors, cfg, psi_scale, std::move(chains),
                       options.store_latent);
    if (data.studies.size() < 3)
        fit.warnings.push_back("fewer than 3 studies: posterior is valid but surrogacy "
                               "criteria are unreliable");
    return fit;
}

FitResult fit_fex(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                  RngStream& rng, const FitOptions& options) {
    check_dataset(data);
    if (data.classes.size() < 2)
        throw ValidationError("fit_fex: needs at least two classes; use fit_standard for a "
                              "single class");
    const double psi_scale = options.psi_prior_scale.value_or(priors.b);
    const auto model = ModelKind::fex();
    auto prob = detail::make_problem(data, model, priors, psi_scale);
    auto chains = detail::run_gibbs(prob, cfg, rng, to_core_options(options));
    return package(data, model, priors, cfg, psi_scale, std::move(chains),
                   options.store_latent);
}

FitResult fit_pex(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                  RngStream& rng, const std::vector<double>& pi, const FitOptions& options) {
    check_dataset(data);
    if (data.classes.size() < 2)
        throw ValidationError("fit_pex: needs at least two classes; use fit_standard for a "
                              "single class");
    if (pi.size() != data.classes.size())
        throw ValidationError("fit_pex: pi must have one entry per class");
    for (double w : pi)
        if (!(w >= 0.0 && w <= 1.0))
            throw ValidationError("fit_pex: every pi_j must lie in [0,1]");
    const double psi_scale = options.psi_prior_scale.value_or(priors.b);
    const auto model = ModelKind::pex(pi);
    auto prob = detail::make_problem(data, model, priors, psi_scale);
    auto chains = detail::run_gibbs(prob, cfg, rng, to_core_options(options));
    return package(data, model, priors, cfg, psi_scale, std::move(chains),
                   options.store_latent);
}

} // namespace surrex
