// surrex — study-level surrogate endpoint evaluation.
//
// Subcommands: fit (posterior + surrogacy verdict), crossval
// (leave-one-study-out predictions), simulate (replication study over the
// built-in or user-supplied scenarios), rerun (replay a manifest).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "surrex/crossval.hpp"
#include "surrex/dataset_io.hpp"
#include "surrex/diagnostics.hpp"
#include "surrex/manifest.hpp"
#include "surrex/samplers.hpp"
#include "surrex/simulation.hpp"
#include "surrex/surrogacy.hpp"
#include "surrex/version.hpp"

using nlohmann::json;
using namespace surrex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSampler = 3;

struct McmcFlags {
    std::int64_t iters = 8000;
    std::int64_t burnin = 4000;
    std::int64_t thin = 1;
    std::uint64_t seed = 1;
    double a = 100.0;
    double b = 10.0;
    double psi_bf_scale = 2.0;
    double level = 0.95;

    void attach(CLI::App* cmd) {
        cmd->add_option("--iters", iters, "post-burn-in iterations");
        cmd->add_option("--burnin", burnin, "burn-in iterations");
        cmd->add_option("--thin", thin, "thinning interval");
        cmd->add_option("--seed", seed, "RNG seed (SURREX_SEED overrides)");
        cmd->add_option("--a", a, "sd of the vague normal priors");
        cmd->add_option("--b", b, "half-normal scale for sd parameters");
        cmd->add_option("--psi-bf-scale", psi_bf_scale,
                        "half-normal scale for psi when Bayes factors are produced");
        cmd->add_option("--level", level, "credible/predictive level");
    }

    PriorSpec priors() const { return PriorSpec{a, b, psi_bf_scale}; }
    McmcConfig config() const { return McmcConfig{iters, burnin, seed, thin}; }

    void apply_env_seed() {
        if (const char* env = std::getenv("SURREX_SEED")) {
            try {
                seed = std::stoull(env);
            } catch (...) {
                throw ValidationError("SURREX_SEED is not an integer");
            }
        }
    }
};

std::string num(double x) { return format_double(x); }

std::vector<double> parse_pi(const std::string& text, std::size_t n_classes) {
    if (text.empty()) return std::vector<double>(n_classes, 0.5);
    std::vector<double> pi;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) pi.push_back(std::stod(tok));
    if (pi.size() == 1 && n_classes > 1) pi.assign(n_classes, pi.front());
    if (pi.size() != n_classes)
        throw ValidationError("--pi needs one value per class (or a single shared value)");
    return pi;
}

ModelKind make_model(const std::string& name, const std::string& pi_text,
                     std::size_t n_classes) {
    if (name == "standard") return ModelKind::standard();
    if (name == "fex") return ModelKind::fex();
    if (name == "pex") return ModelKind::pex(parse_pi(pi_text, n_classes));
    throw ValidationError("unknown model '" + name + "' (expected standard|fex|pex)");
}

// Subgroup analysis: independent standard fits per class, merged into one
// result with per-class parameter names.
FitResult fit_subgroup(const Dataset& data, const PriorSpec& priors, const McmcConfig& cfg,
                       const FitOptions& opts) {
    if (data.n_classes() == 1) {
        RngStream rng(cfg.seed, 0);
        return fit_standard(data, priors, cfg, rng, opts);
    }
    FitResult merged;
    merged.model = ModelKind::standard();
    merged.priors = priors;
    merged.config = cfg;
    merged.classes = data.classes;
    merged.dataset_fingerprint = dataset_fingerprint(data);
    for (std::size_t j = 0; j < data.n_classes(); ++j) {
        RngStream rng(cfg.seed, j);
        const auto sub = data.restricted_to_class(data.classes[j]);
        auto fit = fit_standard(sub, priors, cfg, rng, opts);
        merged.psi_prior_scale = fit.psi_prior_scale;
        for (const auto& [name, chain] : fit.draws.all()) {
            std::string renamed = name;
            const auto bracket = renamed.rfind("[");
            if (renamed.rfind("mu", 0) == 0) {
                // mu1[i,1] -> mu1[i,j+1]
                renamed = renamed.substr(0, renamed.rfind(',') + 1) +
                          std::to_string(j + 1) + "]";
            } else if (bracket != std::string::npos) {
                renamed = renamed.substr(0, bracket) + "[" + std::to_string(j + 1) + "]";
            }
            merged.draws.insert(renamed, chain);
        }
        for (auto& w : fit.warnings)
            merged.warnings.push_back(data.classes[j] + ": " + w);
    }
    return merged;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json verdict_json(const SurrogacyVerdict& v, const FitResult& fit) {
    json classes = json::array();
    for (std::size_t j = 0; j < v.classes.size(); ++j) {
        const auto& c = v.classes[j];
        json jc;
        jc["class_id"] = c.class_id;
        jc["ci_lambda0"] = interval_json(c.ci_lambda0);
        jc["ci_lambda1"] = interval_json(c.ci_lambda1);
        jc["bf_psi"] = c.bf_psi;
        jc["psi2_median"] = c.psi2_median;
        jc["ci_psi2"] = interval_json(c.ci_psi2);
        jc["criterion_intercept"] = c.criterion_intercept;
        jc["criterion_slope"] = c.criterion_slope;
        jc["criterion_variance"] = c.criterion_variance;
        jc["strong"] = c.strong;
        const std::string pname = "p[" + std::to_string(j + 1) + "]";
        if (fit.draws.has(pname)) {
            const auto& p = fit.draws.at(pname);
            double s = 0.0;
            for (double x : p) s += x;
            jc["mixture_weight"] = s / static_cast<double>(p.size());
        }
        classes.push_back(jc);
    }
    json out;
    out["level"] = v.level;
    out["bf_threshold"] = v.bf_threshold;
    out["model"] = fit.model.name();
    out["classes"] = classes;
    out["warnings"] = fit.warnings;
    return out;
}

std::string summary_csv(const FitResult& fit, const std::string& hash) {
    std::string out = "# manifest_hash=" + hash + "\n";
    out += "parameter,mean,sd,q025,q500,q975\n";
    for (const auto& [name, chain] : fit.draws.all()) {
        double mean = 0.0;
        for (double v : chain) mean += v;
        mean /= static_cast<double>(chain.size());
        double var = 0.0;
        for (double v : chain) var += (v - mean) * (v - mean);
        var /= std::max<double>(1.0, static_cast<double>(chain.size()) - 1.0);
        out += name + "," + num(mean) + "," + num(std::sqrt(var)) + "," +
               num(quantile(chain, 0.025)) + "," + num(quantile(chain, 0.5)) + "," +
               num(quantile(chain, 0.975)) + "\n";
    }
    return out;
}

json diagnostics_json(const FitResult& fit, const std::string& hash) {
    json out;
    out["manifest_hash"] = hash;
    json params;
    for (const auto& [name, d] : diagnostics_report(fit)) {
        params[name] = {{"mce", d.mce},
                        {"ess", d.ess},
                        {"split_rhat", std::isfinite(d.split_rhat) ? json(d.split_rhat)
                                                                   : json("inf")},
                        {"flagged", d.flagged}};
    }
    out["parameters"] = params;
    return out;
}

RunManifest base_manifest(const std::string& command, std::vector<std::string> argv,
                          const McmcFlags& flags, const std::string& model,
                          const std::vector<double>& pi, const std::string& fingerprint,
                          double psi_scale_used) {
    RunManifest m;
    m.command = command;
    m.argv = std::move(argv);
    m.version = version_string;
    m.dataset_fingerprint = fingerprint;
    m.model = model;
    m.pi = pi;
    m.priors = flags.priors();
    m.psi_prior_scale_used = psi_scale_used;
    m.cfg = flags.config();
    m.level = flags.level;
    m.extra["slice_width"] = "1";
    m.extra["bf_threshold"] = "3.3";
    m.extra["quantile_rule"] = "type7";
    m.extra["bf_estimator"] = "interval-savage-dickey-eps-scale/20";
    m.extra["intervals"] = "normal-theory";
    return m;
}

std::vector<std::string> canonical_mcmc_argv(const McmcFlags& f) {
    return {"--iters",  std::to_string(f.iters),
            "--burnin", std::to_string(f.burnin),
            "--thin",   std::to_string(f.thin),
            "--seed",   std::to_string(f.seed),
            "--a",      num(f.a),
            "--b",      num(f.b),
            "--psi-bf-scale", num(f.psi_bf_scale),
            "--level",  num(f.level)};
}

int dispatch(const std::vector<std::string>& args);

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const std::string& data_path, const std::string& model_name,
            const std::string& pi_text, McmcFlags flags, const std::string& out_dir,
            const std::string& prefix) {
    flags.apply_env_seed();
    const Dataset data = load_dataset(data_path);
    const ModelKind model = make_model(model_name, pi_text, data.n_classes());
    const PriorSpec priors = flags.priors();
    const McmcConfig cfg = flags.config();
    cfg.check();
    priors.check();
    if (cfg.n_iter < 1000)
        throw ValidationError("verdict-producing runs need --iters >= 1000");

    FitOptions opts;
    opts.store_latent = true;
    opts.psi_prior_scale = priors.psi_bf_scale;

    FitResult fit;
    if (model.kind == ModelKind::Kind::Standard) {
        fit = fit_subgroup(data, priors, cfg, opts);
    } else {
        RngStream rng(cfg.seed, 0);
        fit = model.kind == ModelKind::Kind::FEx
                  ? fit_fex(data, priors, cfg, rng, opts)
                  : fit_pex(data, priors, cfg, rng, model.pi, opts);
    }
    const auto verdict = evaluate_surrogacy(fit, flags.level);

    std::vector<std::string> argv = {"fit", "--data", data_path, "--model", model_name};
    if (model.kind == ModelKind::Kind::PEx) {
        std::string pis;
        for (double p : model.pi) pis += (pis.empty() ? "" : ",") + num(p);
        argv.push_back("--pi");
        argv.push_back(pis);
    }
    for (auto& s : canonical_mcmc_argv(flags)) argv.push_back(s);

    RunManifest manifest = base_manifest("fit", argv, flags, model.name(), model.pi,
                                         fit.dataset_fingerprint, fit.psi_prior_scale);
    const std::string hash = manifest.hash();

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string stem = (fs::path(out_dir) / prefix).string();
    manifest.write(stem + "_manifest.json");
    write_text(stem + "_summary.csv", summary_csv(fit, hash));
    json v = verdict_json(verdict, fit);
    v["manifest_hash"] = hash;
    write_text(stem + "_verdict.json", v.dump(2) + "\n");
    write_text(stem + "_diagnostics.json", diagnostics_json(fit, hash).dump(2) + "\n");
    std::cerr << "fit: wrote " << stem << "_{summary.csv,verdict.json,diagnostics.json,manifest.json}\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// crossval

std::vector<std::pair<std::string, double>> load_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open truth file '" + path + "'");
    std::vector<std::pair<std::string, double>> out;
    std::string line;
    bool first = true;
    long row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, val;
        std::getline(ss, id, ',');
        std::getline(ss, val, ',');
        if (first) {
            first = false;
            if (id == "study_id") continue; // header
        }
        ++row;
        try {
            out.emplace_back(id, std::stod(val));
        } catch (...) {
            throw ParseError("truth file row " + std::to_string(row) +
                                 ": cannot parse value '" + val + "'",
                             row, "mu2_true");
        }
    }
    return out;
}

// study_id -> interval_true width from a previous folds CSV
std::vector<std::pair<std::string, double>> load_baseline_widths(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open baseline '" + path + "'");
    std::string line;
    std::vector<std::string> header;
    std::vector<std::pair<std::string, double>> out;
    int id_col = -1, lo_col = -1, hi_col = -1;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (header.empty()) {
            header = fields;
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (header[c] == "study_id") id_col = static_cast<int>(c);
                if (header[c] == "true_lo") lo_col = static_cast<int>(c);
                if (header[c] == "true_hi") hi_col = static_cast<int>(c);
            }
            if (id_col < 0 || lo_col < 0 || hi_col < 0)
                throw ParseError("baseline '" + path +
                                 "' lacks study_id/true_lo/true_hi columns");
            continue;
        }
        out.emplace_back(fields[id_col],
                         std::stod(fields[hi_col]) - std::stod(fields[lo_col]));
    }
    return out;
}

int cmd_crossval(const std::string& data_path, const std::string& model_name,
                 const std::string& pi_text, const std::string& target_name,
                 const std::string& truth_path, const std::string& baseline_path,
                 bool empirical, int jobs, McmcFlags flags, const std::string& out_dir,
                 const std::string& prefix) {
    flags.apply_env_seed();
    const Dataset data = load_dataset(data_path);
    const ModelKind model = make_model(model_name, pi_text, data.n_classes());
    PredictTarget target;
    if (target_name == "observed")
        target = PredictTarget::Observed;
    else if (target_name == "true")
        target = PredictTarget::True;
    else
        throw ValidationError("--target must be observed or true");

    std::vector<std::pair<std::string, double>> truth;
    if (target == PredictTarget::True) {
        if (truth_path.empty()) throw ValidationError("--target true requires --truth");
        truth = load_truth(truth_path);
        for (const auto& s : data.studies) {
            bool found = false;
            for (const auto& [id, v] : truth) found = found || id == s.study_id;
            if (!found)
                throw ValidationError("truth file has no entry for study '" + s.study_id +
                                      "'");
        }
    }

    LooOptions opts;
    opts.level = flags.level;
    opts.empirical_intervals = empirical;
    opts.jobs = jobs;
    opts.psi_prior_scale = flags.priors().psi_bf_scale;

    const auto sweep =
        loo_sweep(data, model, flags.priors(), flags.config(), target, truth, opts);

    std::optional<WidthRatioSummary> ratios;
    if (!baseline_path.empty()) {
        const auto base_widths = load_baseline_widths(baseline_path);
        LooSweep base;
        for (const auto& [id, w] : base_widths) {
            PredictionResult r;
            r.study_id = id;
            r.interval_true = Interval{0.0, w};
            base.folds.push_back(r);
        }
        ratios = width_ratios(sweep, base);
    }

    std::vector<std::string> argv = {"crossval", "--data", data_path, "--model", model_name,
                                     "--target", target_name};
    if (model.kind == ModelKind::Kind::PEx) {
        std::string pis;
        for (double p : model.pi) pis += (pis.empty() ? "" : ",") + num(p);
        argv.push_back("--pi");
        argv.push_back(pis);
    }
    if (!truth_path.empty()) {
        argv.push_back("--truth");
        argv.push_back(truth_path);
    }
    if (!baseline_path.empty()) {
        argv.push_back("--baseline");
        argv.push_back(baseline_path);
    }
    if (empirical) argv.push_back("--empirical");
    for (auto& s : canonical_mcmc_argv(flags)) argv.push_back(s);

    RunManifest manifest = base_manifest("crossval", argv, flags, model.name(), model.pi,
                                         dataset_fingerprint(data),
                                         flags.priors().psi_bf_scale);
    manifest.extra["target"] = target_name;
    manifest.extra["intervals"] = empirical ? "empirical" : "normal-theory";
    const std::string hash = manifest.hash();

    std::string csv = "# manifest_hash=" + hash + "\n";
    csv += "study_id,class_id,y1,y2,target,predicted_mean,predictive_sd_true,"
           "predictive_sd_observed,true_lo,true_hi,obs_lo,obs_hi,contains_target,abs_error,"
           "mce";
    if (ratios) csv += ",width_ratio";
    csv += "\n";
    for (std::size_t i = 0; i < sweep.folds.size(); ++i) {
        const auto& f = sweep.folds[i];
        csv += f.study_id + "," + f.class_id + "," + num(f.y1) + "," + num(f.y2_observed) +
               "," + (f.target == PredictTarget::True ? "true" : "observed") + "," +
               num(f.predicted_mean) + "," + num(f.predictive_sd_true) + "," +
               num(f.predictive_sd_observed) + "," + num(f.interval_true.lo) + "," +
               num(f.interval_true.hi) + "," + num(f.interval_observed.lo) + "," +
               num(f.interval_observed.hi) + "," + (f.contains_target ? "1" : "0") + "," +
               num(f.abs_error) + "," + num(f.mce);
        if (ratios) csv += "," + num(ratios->per_fold[i]);
        csv += "\n";
    }

    json summary;
    summary["manifest_hash"] = hash;
    summary["n_folds"] = sweep.folds.size();
    summary["target"] = target_name;
    summary["containment_fraction"] = sweep.containment_fraction;
    summary["median_abs_error"] = sweep.median_abs_error;
    summary["mean_abs_error"] = sweep.mean_abs_error;
    summary["max_mce"] = sweep.max_mce;
    if (ratios) {
        summary["width_ratio_median"] = ratios->median;
        summary["width_ratio_mean"] = ratios->mean;
    }

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string stem = (fs::path(out_dir) / prefix).string();
    manifest.write(stem + "_manifest.json");
    write_text(stem + "_folds.csv", csv);
    write_text(stem + "_summary.json", summary.dump(2) + "\n");
    std::cerr << "crossval: " << sweep.folds.size() << " folds, containment "
              << sweep.containment_fraction << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

ScenarioSpec load_spec_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario spec '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ParseError("scenario spec '" + path + "': " + e.what());
    }
    ScenarioSpec s;
    try {
        s.name = j.value("name", "custom");
        s.design = j.value("design", 0);
        s.lambda0 = j.at("lambda0").get<std::vector<double>>();
        s.lambda1 = j.at("lambda1").get<std::vector<double>>();
        s.rho_b = j.at("rho_b").get<std::vector<double>>();
        s.psi2 = j.at("psi2").get<std::vector<double>>();
        s.eta1 = j.at("eta1").get<std::vector<double>>();
        s.n_per_class = j.at("n_per_class").get<std::vector<int>>();
        s.sigma_within = j.value("sigma_within", 0.1);
        s.rho_w = j.value("rho_w", 0.4);
    } catch (const json::exception& e) {
        throw ParseError("scenario spec '" + path + "': " + e.what());
    }
    s.check();
    return s;
}

json spec_json(const ScenarioSpec& s) {
    json j;
    j["name"] = s.name;
    j["design"] = s.design;
    j["lambda0"] = s.lambda0;
    j["lambda1"] = s.lambda1;
    j["rho_b"] = s.rho_b;
    j["psi2"] = s.psi2;
    j["eta1"] = s.eta1;
    j["n_per_class"] = s.n_per_class;
    j["sigma_within"] = s.sigma_within;
    j["rho_w"] = s.rho_w;
    return j;
}

int cmd_simulate(int scenario, const std::string& spec_path, int reps,
                 const std::string& models_text, const std::string& pi_text, bool full_scale,
                 bool no_cv, int jobs, McmcFlags flags, const std::string& out_dir,
                 const std::string& prefix) {
    flags.apply_env_seed();
    if (full_scale) {
        flags.iters = 50000;
        flags.burnin = 20000;
        reps = 1000;
    }

    ScenarioSpec spec;
    if (!spec_path.empty()) {
        spec = load_spec_json(spec_path);
        scenario = 0;
    } else {
        if (scenario < 1 || scenario > 9)
            throw ValidationError("--scenario must be 1..9 (or use --spec)");
        spec = build_scenario(scenario);
    }

    std::vector<ModelKind> models;
    {
        std::stringstream ss(models_text);
        std::string tok;
        while (std::getline(ss, tok, ','))
            models.push_back(make_model(tok, pi_text, spec.n_classes()));
        if (models.empty()) throw ValidationError("--models is empty");
    }

    RunStudyOptions opts;
    opts.cv = !no_cv;
    opts.jobs = jobs;
    opts.level = flags.level;

    auto report = run_study(spec, reps, models, flags.priors(), flags.config(), opts);
    report.scenario_index = scenario;

    std::vector<std::string> argv = {"simulate"};
    if (scenario > 0) {
        argv.push_back("--scenario");
        argv.push_back(std::to_string(scenario));
    } else {
        argv.push_back("--spec");
        argv.push_back(spec_path);
    }
    argv.insert(argv.end(), {"--reps", std::to_string(reps), "--models", models_text});
    if (!pi_text.empty()) argv.insert(argv.end(), {"--pi", pi_text});
    if (no_cv) argv.push_back("--no-cv");
    argv.insert(argv.end(), {"--jobs", std::to_string(jobs)});
    for (auto& s : canonical_mcmc_argv(flags)) argv.push_back(s);

    RunManifest manifest = base_manifest("simulate", argv, flags, models_text, {},
                                         "", flags.priors().psi_bf_scale);
    manifest.extra["scenario"] = scenario > 0 ? std::to_string(scenario) : spec.name;
    manifest.extra["reps"] = std::to_string(reps);
    manifest.extra["cv"] = opts.cv ? "true" : "false";
    const std::string hash = manifest.hash();

    // long-form CSV: one row per measure, published value alongside
    std::string csv = "# manifest_hash=" + hash + "\n";
    csv += "scenario,model,measure,value,reference\n";
    const std::string sname = scenario > 0 ? std::to_string(scenario) : spec.name;
    auto row = [&](const std::string& model, const std::string& measure, double value,
                   std::optional<double> ref) {
        csv += sname + "," + model + "," + measure + "," +
               (std::isnan(value) ? "" : num(value)) + "," + (ref ? num(*ref) : "") + "\n";
    };
    json jmodels = json::array();
    for (const auto& m : report.models) {
        const auto ref = scenario_reference(scenario, m.model);
        auto refv = [&](std::optional<double> ScenarioReference::* field)
            -> std::optional<double> { return ref ? (*ref).*field : std::nullopt; };
        row(m.model, "coverage_lambda1", m.coverage_lambda1,
            refv(&ScenarioReference::coverage_lambda1));
        row(m.model, "abs_bias_lambda1", m.abs_bias_lambda1, std::nullopt);
        row(m.model, "rmse_lambda1", m.rmse_lambda1, std::nullopt);
        row(m.model, "width_ratio_lambda1", m.width_ratio_lambda1,
            refv(&ScenarioReference::width_ratio_lambda1));
        row(m.model, "mce_lambda1", m.mce_lambda1, refv(&ScenarioReference::mce_lambda1));
        row(m.model, "prob_strong_mean", m.prob_strong_mean,
            refv(&ScenarioReference::prob_strong_mean));
        for (std::size_t j = 0; j < m.prob_strong.size(); ++j) {
            std::optional<double> r;
            if (ref && j < ref->prob_strong.size()) r = ref->prob_strong[j];
            row(m.model, "prob_strong[" + std::to_string(j + 1) + "]", m.prob_strong[j], r);
        }
        for (std::size_t j = 0; j < m.mixture_weight.size(); ++j)
            row(m.model, "mixture_weight[" + std::to_string(j + 1) + "]",
                m.mixture_weight[j], std::nullopt);
        if (report.cv) {
            row(m.model, "coverage_mu2", m.coverage_mu2,
                refv(&ScenarioReference::coverage_mu2));
            row(m.model, "abs_bias_mu2", m.abs_bias_mu2, std::nullopt);
            row(m.model, "rmse_mu2", m.rmse_mu2, std::nullopt);
            row(m.model, "width_ratio_mu2", m.width_ratio_mu2,
                refv(&ScenarioReference::width_ratio_mu2));
            row(m.model, "mce_mu2", m.mce_mu2, refv(&ScenarioReference::mce_mu2));
        }

        json jm;
        jm["model"] = m.model;
        jm["coverage_lambda1"] = m.coverage_lambda1;
        jm["abs_bias_lambda1"] = m.abs_bias_lambda1;
        jm["rmse_lambda1"] = m.rmse_lambda1;
        if (!std::isnan(m.width_ratio_lambda1))
            jm["width_ratio_lambda1"] = m.width_ratio_lambda1;
        jm["mce_lambda1"] = m.mce_lambda1;
        jm["prob_strong"] = m.prob_strong;
        jm["prob_strong_mean"] = m.prob_strong_mean;
        if (!m.mixture_weight.empty()) jm["mixture_weight"] = m.mixture_weight;
        if (report.cv) {
            jm["coverage_mu2"] = m.coverage_mu2;
            jm["abs_bias_mu2"] = m.abs_bias_mu2;
            jm["rmse_mu2"] = m.rmse_mu2;
            if (!std::isnan(m.width_ratio_mu2)) jm["width_ratio_mu2"] = m.width_ratio_mu2;
            jm["mce_mu2"] = m.mce_mu2;
        }
        jmodels.push_back(jm);
    }

    json out;
    out["manifest_hash"] = hash;
    out["scenario"] = sname;
    out["spec"] = spec_json(spec);
    out["n_reps"] = report.n_reps;
    out["n_failures"] = report.n_failures;
    out["cv"] = report.cv;
    out["models"] = jmodels;

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string stem = (fs::path(out_dir) / prefix).string();
    manifest.write(stem + "_manifest.json");
    write_text(stem + "_report.csv", csv);
    write_text(stem + "_report.json", out.dump(2) + "\n");
    std::cerr << "simulate: " << report.n_reps << " replications, " << report.n_failures
              << " failures\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// rerun

int cmd_rerun(const std::string& manifest_path, const std::string& out_dir) {
    const RunManifest m = RunManifest::load(manifest_path);
    std::vector<std::string> args = m.argv;
    // strip any previous --out/--prefix, then point at the new directory
    std::vector<std::string> cleaned;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--out" || args[i] == "--prefix") {
            ++i;
            continue;
        }
        cleaned.push_back(args[i]);
    }
    if (!out_dir.empty()) {
        cleaned.push_back("--out");
        cleaned.push_back(out_dir);
    }
    return dispatch(cleaned);
}

// ---------------------------------------------------------------------------

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"study-level surrogate endpoint evaluation"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a model and evaluate the surrogacy criteria");
    std::string fit_data, fit_model, fit_pi, fit_out = ".", fit_prefix = "fit";
    McmcFlags fit_flags;
    fit->add_option("--data", fit_data, "study CSV")->required();
    fit->add_option("--model", fit_model, "standard|fex|pex")->required();
    fit->add_option("--pi", fit_pi, "PEx mixture priors, comma separated (default 0.5)");
    fit->add_option("--out", fit_out, "output directory");
    fit->add_option("--prefix", fit_prefix, "output file prefix");
    fit_flags.attach(fit);

    // crossval
    auto* cv = app.add_subcommand("crossval", "leave-one-study-out predictions");
    std::string cv_data, cv_model, cv_pi, cv_target = "observed", cv_truth, cv_baseline,
                cv_out = ".", cv_prefix = "loo";
    bool cv_empirical = false;
    int cv_jobs = 1;
    McmcFlags cv_flags;
    cv->add_option("--data", cv_data, "study CSV")->required();
    cv->add_option("--model", cv_model, "standard|fex|pex")->required();
    cv->add_option("--pi", cv_pi, "PEx mixture priors");
    cv->add_option("--target", cv_target, "observed|true");
    cv->add_option("--truth", cv_truth, "CSV of study_id,mu2_true (target=true)");
    cv->add_option("--baseline", cv_baseline, "folds CSV of a baseline sweep");
    cv->add_flag("--empirical", cv_empirical, "empirical predictive intervals");
    cv->add_option("--jobs", cv_jobs, "fold parallelism");
    cv->add_option("--out", cv_out, "output directory");
    cv->add_option("--prefix", cv_prefix, "output file prefix");
    cv_flags.attach(cv);

    // simulate
    auto* sim = app.add_subcommand("simulate", "replication study over a scenario");
    int sim_scenario = 0, sim_reps = 200, sim_jobs = 1;
    std::string sim_spec, sim_models = "standard,fex,pex", sim_pi, sim_out = ".",
                sim_prefix = "sim";
    bool sim_full = false, sim_nocv = false;
    McmcFlags sim_flags;
    sim->add_option("--scenario", sim_scenario, "built-in scenario 1..9");
    sim->add_option("--spec", sim_spec, "scenario spec JSON");
    sim->add_option("--reps", sim_reps, "replications");
    sim->add_option("--models", sim_models, "comma-separated model list");
    sim->add_option("--pi", sim_pi, "PEx mixture priors");
    sim->add_flag("--full-scale", sim_full, "published configuration (1000 x 50000/20000)");
    sim->add_flag("--no-cv", sim_nocv, "skip the leave-one-study-out block");
    sim->add_option("--jobs", sim_jobs, "replication parallelism");
    sim->add_option("--out", sim_out, "output directory");
    sim->add_option("--prefix", sim_prefix, "output file prefix");
    sim_flags.attach(sim);

    // rerun
    auto* rr = app.add_subcommand("rerun", "replay a recorded manifest");
    std::string rr_manifest, rr_out;
    rr->add_option("--manifest", rr_manifest, "manifest JSON")->required();
    rr->add_option("--out", rr_out, "output directory");

    std::vector<char*> argv_c;
    std::vector<std::string> full = args;
    full.insert(full.begin(), "surrex");
    argv_c.reserve(full.size());
    for (auto& s : full) argv_c.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv_c.size()), argv_c.data());
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitInput;
    }

    if (fit->parsed())
        return cmd_fit(fit_data, fit_model, fit_pi, fit_flags, fit_out, fit_prefix);
    if (cv->parsed())
        return cmd_crossval(cv_data, cv_model, cv_pi, cv_target, cv_truth, cv_baseline,
                            cv_empirical, cv_jobs, cv_flags, cv_out, cv_prefix);
    if (sim->parsed())
        return cmd_simulate(sim_scenario, sim_spec, sim_reps, sim_models, sim_pi, sim_full,
                            sim_nocv, sim_jobs, sim_flags, sim_out, sim_prefix);
    if (rr->parsed()) return cmd_rerun(rr_manifest, rr_out);
    return kExitInput;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const SamplerError& e) {
        std::cerr << "sampler error: " << e.what() << "\n";
        return kExitSampler;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSampler;
    }
}
