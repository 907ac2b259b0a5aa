#include "gibbs_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace surrex::detail {

GibbsProblem make_problem(const Dataset& data, const ModelKind& model, const PriorSpec& priors,
                          double psi_scale, const std::vector<int>& drop_y2) {
    priors.check();
    GibbsProblem p;
    const std::size_t n = data.studies.size();
    p.y1.resize(n);
    p.y2.resize(n);
    p.om11.resize(n);
    p.om12.resize(n);
    p.om22.resize(n);
    p.se2.resize(n);
    p.cls.resize(n);
    p.n_classes = static_cast<int>(data.classes.size());
    p.class_rows = data.rows_by_class();
    p.kind = model.kind;
    p.pi = model.pi;
    if (p.kind == ModelKind::Kind::PEx && p.pi.size() != data.classes.size())
        throw ValidationError("pex model needs one pi entry per class");
    p.a = priors.a;
    p.b = priors.b;
    p.psi_scale = psi_scale;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = data.studies[i];
        p.y1[i] = s.y1;
        p.y2[i] = s.y2;
        p.se2[i] = s.se2;
        p.cls[i] = data.class_index(s.class_id);
        const bool dropped =
            std::find(drop_y2.begin(), drop_y2.end(), static_cast<int>(i)) != drop_y2.end();
        if (dropped) {
            // only the marginal of y1 survives for a held-out final outcome
            p.om11[i] = 1.0 / (s.se1 * s.se1);
            p.om12[i] = 0.0;
            p.om22[i] = 0.0;
        } else {
            const double omr2 = 1.0 - s.rho_w * s.rho_w;
            p.om11[i] = 1.0 / (omr2 * s.se1 * s.se1);
            p.om12[i] = -s.rho_w / (omr2 * s.se1 * s.se2);
            p.om22[i] = 1.0 / (omr2 * s.se2 * s.se2);
        }
    }
    return p;
}

namespace {

// OLS slope of y2 on y1 over the given rows; 0 when degenerate.
double ols_slope(const GibbsProblem& p, const std::vector<int>& rows) {
    if (rows.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (int i : rows) {
        sx += p.y1[i];
        sy += p.y2[i];
        sxx += p.y1[i] * p.y1[i];
        sxy += p.y1[i] * p.y2[i];
    }
    const double denom = sxx - sx * sx / n;
    if (!(denom > 1e-12)) return 0.0;
    return (sxy - sx * sy / n) / denom;
}

struct LambdaPrior {
    double mean0, var0; // intercept
    double mean1, var1; // slope
};

} // namespace

GibbsChains run_gibbs(const GibbsProblem& prob, const McmcConfig& cfg, RngStream& rng,
                      const GibbsOptions& opt) {
    cfg.check();
    const int n = static_cast<int>(prob.y1.size());
    const int nc = prob.n_classes;
    if (n == 0 || nc == 0) throw SamplerError("gibbs: empty problem");

    const double inv_a2 = 1.0 / (prob.a * prob.a);
    const double a2 = prob.a * prob.a;
    const double b2 = prob.b * prob.b;
    const double psi_scale2 = prob.psi_scale * prob.psi_scale;
    const bool hier = prob.kind != ModelKind::Kind::Standard;
    const bool pex = prob.kind == ModelKind::Kind::PEx;

    // state
    std::vector<double> mu1(prob.y1), mu2(prob.y2);
    std::vector<double> lam0(nc, 0.0), lam1(nc), psi(nc, 0.1);
    std::vector<double> pj(nc, 1.0);
    double beta0 = 0.0, beta1 = 0.0, xi0 = 0.1, xi1 = 0.1;

    for (int j = 0; j < nc; ++j) lam1[j] = ols_slope(prob, prob.class_rows[j]);
    if (hier) {
        double s = 0.0;
        for (int j = 0; j < nc; ++j) s += lam1[j];
        beta1 = s / nc;
    }
    if (opt.fix_psi) std::fill(psi.begin(), psi.end(), *opt.fix_psi);
    if (opt.fix_lambda0) std::fill(lam0.begin(), lam0.end(), *opt.fix_lambda0);
    if (opt.fix_lambda1) std::fill(lam1.begin(), lam1.end(), *opt.fix_lambda1);
    if (opt.fix_beta0) beta0 = *opt.fix_beta0;
    if (opt.fix_beta1) beta1 = *opt.fix_beta1;
    if (opt.fix_xi0) xi0 = *opt.fix_xi0;
    if (opt.fix_xi1) xi1 = *opt.fix_xi1;
    for (int j = 0; j < nc; ++j)
        if (!(psi[j] > 0.0)) throw SamplerError("gibbs: psi must be fixed at a value > 0");

    const double* om11 = prob.om11.data();
    const double* om12 = prob.om12.data();
    const double* om22 = prob.om22.data();
    std::vector<double> zeros;
    if (opt.disable_likelihood) {
        zeros.assign(n, 0.0);
        om11 = om12 = om22 = zeros.data();
    }

    SliceOptions slice_opt;
    slice_opt.width = opt.slice_width;

    const std::int64_t n_draws = cfg.n_draws();
    GibbsChains out;
    auto reserve2 = [&](std::vector<std::vector<double>>& v, int k) {
        v.assign(k, {});
        for (auto& c : v) c.reserve(n_draws);
    };
    reserve2(out.lambda0, nc);
    reserve2(out.lambda1, nc);
    reserve2(out.psi, nc);
    if (pex) reserve2(out.p, nc);
    if (hier) {
        out.beta0.reserve(n_draws);
        out.beta1.reserve(n_draws);
        out.xi0.reserve(n_draws);
        out.xi1.reserve(n_draws);
    }
    if (opt.store_latent) {
        reserve2(out.mu1, n);
        reserve2(out.mu2, n);
    }
    reserve2(out.mu2_tracked, static_cast<int>(opt.track_mu2.size()));

    const std::int64_t total = cfg.n_burnin + cfg.n_iter;
    for (std::int64_t sweep = 0; sweep < total; ++sweep) {
        // latent true effects
        for (int i = 0; i < n; ++i) {
            const int j = prob.cls[i];
            const double ip2 = 1.0 / (psi[j] * psi[j]);
            const double l1 = lam1[j];

            double prec = om11[i] + l1 * l1 * ip2 + inv_a2;
            double lin = om11[i] * prob.y1[i] + om12[i] * (prob.y2[i] - mu2[i]) +
                         l1 * (mu2[i] - lam0[j]) * ip2;
            mu1[i] = lin / prec + rng.normal() / std::sqrt(prec);

            prec = om22[i] + ip2;
            lin = om22[i] * prob.y2[i] + om12[i] * (prob.y1[i] - mu1[i]) +
                  (lam0[j] + l1 * mu1[i]) * ip2;
            mu2[i] = lin / prec + rng.normal() / std::sqrt(prec);
        }

        // per-class regression blocks
        for (int j = 0; j < nc; ++j) {
            const auto& rows = prob.class_rows[j];
            const double ip2 = 1.0 / (psi[j] * psi[j]);

            if (pex && !opt.fix_lambda1) {
                const double w =
                    mixture_weight_conditional(lam1[j], beta1, xi1, prob.b, prob.pi[j]);
                pj[j] = rng.uniform() < w ? 1.0 : 0.0;
            }

            LambdaPrior prior;
            if (!hier) {
                prior = {0.0, a2, 0.0, a2};
            } else {
                prior.mean0 = beta0;
                prior.var0 = xi0 * xi0;
                if (pex && pj[j] == 0.0) {
                    prior.mean1 = 0.0;
                    prior.var1 = b2;
                } else {
                    prior.mean1 = beta1;
                    prior.var1 = xi1 * xi1;
                }
            }

            double sn = 0, s1 = 0, s11 = 0, s2 = 0, s12 = 0;
            for (int i : rows) {
                sn += 1.0;
                s1 += mu1[i];
                s11 += mu1[i] * mu1[i];
                s2 += mu2[i];
                s12 += mu1[i] * mu2[i];
            }

            const bool f0 = opt.fix_lambda0.has_value();
            const bool f1 = opt.fix_lambda1.has_value();
            if (!f0 && !f1) {
                const double p00 = sn * ip2 + 1.0 / prior.var0;
                const double p01 = s1 * ip2;
                const double p11 = s11 * ip2 + 1.0 / prior.var1;
                const double r0 = s2 * ip2 + prior.mean0 / prior.var0;
                const double r1 = s12 * ip2 + prior.mean1 / prior.var1;
                // 2x2 Cholesky draw from N(P^{-1} r, P^{-1})
                const double l00 = std::sqrt(p00);
                const double l10 = p01 / l00;
                const double d = p11 - l10 * l10;
                if (!(d > 0.0) || !std::isfinite(r0) || !std::isfinite(r1))
                    throw SamplerError("gibbs: degenerate lambda block");
                const double l11 = std::sqrt(d);
                const double w0 = r0 / l00;
                const double w1 = (r1 - l10 * w0) / l11;
                const double m1 = w1 / l11;
                const double m0 = (w0 - l10 * m1) / l00;
                const double z0 = rng.normal(), z1 = rng.normal();
                const double x1 = z1 / l11;
                const double x0 = (z0 - l10 * x1) / l00;
                lam0[j] = m0 + x0;
                lam1[j] = m1 + x1;
            } else if (!f0) {
                const double prec = sn * ip2 + 1.0 / prior.var0;
                const double lin =
                    (s2 - lam1[j] * s1) * ip2 + prior.mean0 / prior.var0;
                lam0[j] = lin / prec + rng.normal() / std::sqrt(prec);
            } else if (!f1) {
                const double prec = s11 * ip2 + 1.0 / prior.var1;
                const double lin =
                    (s12 - lam0[j] * s1) * ip2 + prior.mean1 / prior.var1;
                lam1[j] = lin / prec + rng.normal() / std::sqrt(prec);
            }

            if (!opt.fix_psi) {
                double sse = 0.0;
                for (int i : rows) {
                    const double r = mu2[i] - lam0[j] - lam1[j] * mu1[i];
                    sse += r * r;
                }
                const double nj = static_cast<double>(rows.size());
                psi[j] = slice_positive_impl(
                    rng,
                    [nj, sse, psi_scale2](double x) {
                        return -nj * std::log(x) - 0.5 * sse / (x * x) -
                               0.5 * x * x / psi_scale2;
                    },
                    psi[j], slice_opt);
            }
        }

        // hyper-parameters
        if (hier) {
            if (!opt.fix_beta0) {
                const double iv = 1.0 / (xi0 * xi0);
                double s = 0.0;
                for (int j = 0; j < nc; ++j) s += lam0[j];
                const double prec = nc * iv + inv_a2;
                beta0 = s * iv / prec + rng.normal() / std::sqrt(prec);
            }
            int m = 0;
            double sl = 0.0;
            for (int j = 0; j < nc; ++j) {
                if (!pex || pj[j] == 1.0) {
                    ++m;
                    sl += lam1[j];
                }
            }
            if (!opt.fix_beta1) {
                const double iv = 1.0 / (xi1 * xi1);
                const double prec = m * iv + inv_a2;
                beta1 = sl * iv / prec + rng.normal() / std::sqrt(prec);
            }
            if (!opt.fix_xi0) {
                double sse = 0.0;
                for (int j = 0; j < nc; ++j) {
                    const double r = lam0[j] - beta0;
                    sse += r * r;
                }
                const double k = static_cast<double>(nc);
                xi0 = slice_positive_impl(
                    rng,
                    [k, sse, b2](double x) {
                        return -k * std::log(x) - 0.5 * sse / (x * x) - 0.5 * x * x / b2;
                    },
                    xi0, slice_opt);
            }
            if (!opt.fix_xi1) {
                double sse = 0.0;
                for (int j = 0; j < nc; ++j) {
                    if (!pex || pj[j] == 1.0) {
                        const double r = lam1[j] - beta1;
                        sse += r * r;
                    }
                }
                const double k = static_cast<double>(m);
                xi1 = slice_positive_impl(
                    rng,
                    [k, sse, b2](double x) {
                        return -k * std::log(x) - 0.5 * sse / (x * x) - 0.5 * x * x / b2;
                    },
                    xi1, slice_opt);
            }
        }

        // record
        if (sweep >= cfg.n_burnin && (sweep - cfg.n_burnin) % cfg.thin == cfg.thin - 1) {
            for (int j = 0; j < nc; ++j) {
                out.lambda0[j].push_back(lam0[j]);
                out.lambda1[j].push_back(lam1[j]);
                out.psi[j].push_back(psi[j]);
                if (pex) out.p[j].push_back(pj[j]);
            }
            if (hier) {
                out.beta0.push_back(beta0);
                out.beta1.push_back(beta1);
                out.xi0.push_back(xi0);
                out.xi1.push_back(xi1);
            }
            if (opt.store_latent) {
                for (int i = 0; i < n; ++i) {
                    out.mu1[i].push_back(mu1[i]);
                    out.mu2[i].push_back(mu2[i]);
                }
            }
            for (std::size_t k = 0; k < opt.track_mu2.size(); ++k)
                out.mu2_tracked[k].push_back(mu2[opt.track_mu2[k]]);
        }
    }

    // final sanity pass over the recorded state
    for (int j = 0; j < nc; ++j) {
        if (!out.lambda1[j].empty() && !std::isfinite(out.lambda1[j].back()))
            throw SamplerError("gibbs: non-finite chain state");
    }
    return out;
}

} // namespace surrex::detail
