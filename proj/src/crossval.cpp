#include "surrex/crossval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#include "surrex/diagnostics.hpp"
#include "surrex/randkit.hpp"
#include "surrex/surrogacy.hpp"
#include "gibbs_core.hpp"

namespace surrex {

namespace {

int find_study(const Dataset& data, const std::string& study_id) {
    for (std::size_t i = 0; i < data.studies.size(); ++i)
        if (data.studies[i].study_id == study_id) return static_cast<int>(i);
    return -1;
}

} // namespace

PredictionResult loo_predict(const Dataset& data, const ModelKind& model,
                             const PriorSpec& priors, const McmcConfig& cfg,
                             const std::string& holdout_id, PredictTarget target,
                             std::optional<double> true_value, const LooOptions& options,
                             std::optional<std::uint64_t> stream_id) {
    const int row = find_study(data, holdout_id);
    if (row < 0) throw ValidationError("loo_predict: unknown study '" + holdout_id + "'");
    if (target == PredictTarget::True && !true_value)
        throw ValidationError("loo_predict: target=true requires a true value");

    // the subgroup model sees only the holdout's class; hierarchical models
    // see everything
    Dataset working = data;
    int working_row = row;
    if (model.kind == ModelKind::Kind::Standard) {
        working = data.restricted_to_class(data.studies[row].class_id);
        working_row = find_study(working, holdout_id);
    }

    const double psi_scale = options.psi_prior_scale.value_or(priors.b);
    auto prob = detail::make_problem(working, model, priors, psi_scale, {working_row});

    detail::GibbsOptions gopt;
    gopt.track_mu2 = {working_row};
    if (options.fit_options) {
        gopt.disable_likelihood = options.fit_options->disable_likelihood;
        gopt.fix_psi = options.fit_options->fix_psi;
        gopt.fix_lambda0 = options.fit_options->fix_lambda0;
        gopt.fix_lambda1 = options.fit_options->fix_lambda1;
        gopt.slice_width = options.fit_options->slice_width;
    }

    RngStream rng(cfg.seed, stream_id.value_or(static_cast<std::uint64_t>(row)));
    auto chains = detail::run_gibbs(prob, cfg, rng, gopt);
    const auto& mu2 = chains.mu2_tracked.front();

    const auto& holdout = data.studies[row];
    PredictionResult res;
    res.study_id = holdout.study_id;
    res.class_id = holdout.class_id;
    res.y1 = holdout.y1;
    res.y2_observed = holdout.y2;
    res.target = target;

    const double n = static_cast<double>(mu2.size());
    double mean = 0.0;
    for (double v : mu2) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : mu2) var += (v - mean) * (v - mean);
    var /= std::max(1.0, n - 1.0);

    res.predicted_mean = mean;
    res.predictive_sd_true = std::sqrt(var);
    res.predictive_sd_observed = std::sqrt(holdout.se2 * holdout.se2 + var);
    res.mce = mcmc_error(mu2);

    const double z = normal_quantile(0.5 + 0.5 * options.level);
    if (options.empirical_intervals) {
        const double tail = 0.5 * (1.0 - options.level);
        res.interval_true = Interval{quantile(mu2, tail), quantile(mu2, 1.0 - tail)};
        // add fresh within-study noise draw-by-draw for the observed scale
        RngStream noise(cfg.seed, stream_id.value_or(static_cast<std::uint64_t>(row)) +
                                      0x517cc1b727220a95ULL);
        std::vector<double> y2_draws(mu2.size());
        for (std::size_t k = 0; k < mu2.size(); ++k)
            y2_draws[k] = mu2[k] + holdout.se2 * noise.normal();
        res.interval_observed =
            Interval{quantile(y2_draws, tail), quantile(y2_draws, 1.0 - tail)};
    } else {
        res.interval_true = Interval{mean - z * res.predictive_sd_true,
                                     mean + z * res.predictive_sd_true};
        res.interval_observed = Interval{mean - z * res.predictive_sd_observed,
                                         mean + z * res.predictive_sd_observed};
    }

    if (target == PredictTarget::True) {
        res.target_value = *true_value;
        res.contains_target = res.interval_true.contains(res.target_value);
    } else {
        res.target_value = holdout.y2;
        res.contains_target = res.interval_observed.contains(res.target_value);
    }
    res.abs_error = std::fabs(res.predicted_mean - res.target_value);
    return res;
}

LooSweep loo_sweep(const Dataset& data, const ModelKind& model, const PriorSpec& priors,
                   const McmcConfig& cfg, PredictTarget target,
                   const std::vector<std::pair<std::string, double>>& true_values,
                   const LooOptions& options) {
    const int n = static_cast<int>(data.studies.size());
    auto true_for = [&](const std::string& id) -> std::optional<double> {
        for (const auto& [sid, v] : true_values)
            if (sid == id) return v;
        return std::nullopt;
    };

    LooSweep sweep;
    sweep.folds.resize(n);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n || failed.load()) break;
            try {
                const auto& id = data.studies[i].study_id;
                sweep.folds[i] =
                    loo_predict(data, model, priors, cfg, id, target, true_for(id), options,
                                static_cast<std::uint64_t>(i));
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                error_message = e.what();
                failed.store(true);
            }
        }
    };

    const int jobs = std::max(1, std::min(options.jobs, n));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw SamplerError("loo_sweep: " + error_message);

    int contained = 0;
    std::vector<double> errors;
    for (const auto& f : sweep.folds) {
        contained += f.contains_target ? 1 : 0;
        errors.push_back(f.abs_error);
        sweep.max_mce = std::max(sweep.max_mce, f.mce);
    }
    sweep.containment_fraction = static_cast<double>(contained) / n;
    sweep.median_abs_error = quantile(errors, 0.5);
    sweep.mean_abs_error =
        std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(n);
    return sweep;
}

WidthRatioSummary width_ratios(const LooSweep& sweep, const LooSweep& baseline) {
    WidthRatioSummary out;
    std::vector<double> ratios;
    for (const auto& f : sweep.folds) {
        double ratio = std::numeric_limits<double>::quiet_NaN();
        for (const auto& b : baseline.folds) {
            if (b.study_id == f.study_id) {
                const double bw = b.interval_true.width();
                if (bw > 0.0) ratio = f.interval_true.width() / bw;
                break;
            }
        }
        out.per_fold.push_back(ratio);
        if (std::isfinite(ratio)) ratios.push_back(ratio);
    }
    if (!ratios.empty()) {
        out.mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) /
                   static_cast<double>(ratios.size());
        out.median = quantile(ratios, 0.5);
    }
    return out;
}

} // namespace surrex
