// Acceptance suite: every release criterion in one binary, one PASS/FAIL
// line each. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "surrex/crossval.hpp"
#include "surrex/dataset_io.hpp"
#include "surrex/diagnostics.hpp"
#include "surrex/randkit.hpp"
#include "surrex/samplers.hpp"
#include "surrex/simulation.hpp"
#include "surrex/surrogacy.hpp"

using namespace surrex;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& details) {
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "C" << id << " " << name << " — "
              << details << "\n";
    std::cout.flush();
    if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int prec = 3) {
    std::ostringstream ss;
    ss.precision(prec);
    ss << std::fixed << x;
    return ss.str();
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (v.size() - 1.0));
}

int hardware_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, hw == 0 ? 1u : hw));
}

// --- shared two-study fixed-psi instance -----------------------------------

const std::vector<double> kX = {0.2, 0.8};
const std::vector<double> kY = {1.0, 1.4};
constexpr double kPsiFixed = 0.2;
constexpr double kSe2 = 0.1;
constexpr double kPriorSd = 1.0;

Dataset oracle_dataset() {
    return Dataset::from_records({{"s1", "a", kX[0], 1e-6, kY[0], kSe2, 0.0},
                                  {"s2", "a", kX[1], 1e-6, kY[1], kSe2, 0.0}});
}

struct Posterior2 {
    double m0, m1, sd0, sd1;
};

Posterior2 conjugate_oracle() {
    const double v = kPsiFixed * kPsiFixed + kSe2 * kSe2;
    const double inv_a2 = 1.0 / (kPriorSd * kPriorSd);
    double n = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t i = 0; i < kX.size(); ++i) {
        n += 1.0;
        sx += kX[i];
        sxx += kX[i] * kX[i];
        sy += kY[i];
        sxy += kX[i] * kY[i];
    }
    const double p00 = n / v + inv_a2, p01 = sx / v, p11 = sxx / v + inv_a2;
    const double r0 = sy / v, r1 = sxy / v;
    const double det = p00 * p11 - p01 * p01;
    return {(p11 * r0 - p01 * r1) / det, (p00 * r1 - p01 * r0) / det,
            std::sqrt(p11 / det), std::sqrt(p00 / det)};
}

Posterior2 grid_oracle() {
    const double v = kPsiFixed * kPsiFixed + kSe2 * kSe2;
    const int n = 101;
    const double lo = -5.0 * kPriorSd, hi = 5.0 * kPriorSd;
    const double step = (hi - lo) / (n - 1);
    double wsum = 0, s0 = 0, s1 = 0, s00 = 0, s11 = 0;
    for (int i = 0; i < n; ++i) {
        const double l0 = lo + i * step;
        for (int j = 0; j < n; ++j) {
            const double l1 = lo + j * step;
            double logp = -0.5 * (l0 * l0 + l1 * l1) / (kPriorSd * kPriorSd);
            for (std::size_t k = 0; k < kX.size(); ++k) {
                const double r = kY[k] - l0 - l1 * kX[k];
                logp -= 0.5 * r * r / v;
            }
            const double w = std::exp(logp);
            wsum += w;
            s0 += w * l0;
            s1 += w * l1;
            s00 += w * l0 * l0;
            s11 += w * l1 * l1;
        }
    }
    const double m0 = s0 / wsum, m1 = s1 / wsum;
    return {m0, m1, std::sqrt(s00 / wsum - m0 * m0), std::sqrt(s11 / wsum - m1 * m1)};
}

FitResult fit_oracle_instance(std::uint64_t seed) {
    PriorSpec priors;
    priors.a = kPriorSd;
    McmcConfig cfg{60000, 2000, seed, 1};
    RngStream rng(cfg.seed, 0);
    FitOptions opts;
    opts.store_latent = false;
    opts.fix_psi = kPsiFixed;
    return fit_standard(oracle_dataset(), priors, cfg, rng, opts);
}

bool rel_close(double value, double target, double tol) {
    return std::fabs(value - target) <= tol * std::fabs(target);
}

// --- criteria ---------------------------------------------------------------

void criterion_1() {
    const auto t0 = Clock::now();
    const auto oracle = conjugate_oracle();
    const auto fit = fit_oracle_instance(42);
    const auto& l0 = fit.lambda0_chain(0);
    const auto& l1 = fit.lambda1_chain(0);
    const double elapsed = seconds_since(t0);
    const bool pass = rel_close(mean_of(l0), oracle.m0, 0.02) &&
                      rel_close(mean_of(l1), oracle.m1, 0.02) &&
                      rel_close(sd_of(l0), oracle.sd0, 0.02) &&
                      rel_close(sd_of(l1), oracle.sd1, 0.02) && elapsed < 5.0;
    report(1, "conjugate oracle",
           pass,
           "lambda0 " + fmt(mean_of(l0)) + "/" + fmt(oracle.m0) + ", lambda1 " +
               fmt(mean_of(l1)) + "/" + fmt(oracle.m1) + ", sds " + fmt(sd_of(l0)) + "/" +
               fmt(oracle.sd0) + " and " + fmt(sd_of(l1)) + "/" + fmt(oracle.sd1) + ", " +
               fmt(elapsed, 1) + "s");
}

void criterion_2() {
    const auto t0 = Clock::now();
    const auto grid = grid_oracle();
    const auto fit = fit_oracle_instance(43);
    const auto& l0 = fit.lambda0_chain(0);
    const auto& l1 = fit.lambda1_chain(0);
    const double elapsed = seconds_since(t0);
    const bool pass = rel_close(mean_of(l0), grid.m0, 0.02) &&
                      rel_close(mean_of(l1), grid.m1, 0.02) &&
                      rel_close(sd_of(l0), grid.sd0, 0.05) &&
                      rel_close(sd_of(l1), grid.sd1, 0.05) && elapsed < 30.0;
    report(2, "dense-grid oracle", pass,
           "means " + fmt(mean_of(l0)) + "/" + fmt(grid.m0) + ", " + fmt(mean_of(l1)) +
               "/" + fmt(grid.m1) + "; sds " + fmt(sd_of(l0)) + "/" + fmt(grid.sd0) + ", " +
               fmt(sd_of(l1)) + "/" + fmt(grid.sd1) + ", " + fmt(elapsed, 1) + "s");
}

PerformanceReport desk_study(int scenario, const std::vector<ModelKind>& models, bool cv,
                             std::uint64_t seed) {
    PriorSpec priors;
    McmcConfig cfg{8000, 4000, seed, 1};
    RunStudyOptions opts;
    opts.cv = cv;
    opts.jobs = hardware_jobs();
    return run_study(build_scenario(scenario), 200, models, priors, cfg, opts);
}

void criteria_3_and_7() {
    const auto t0 = Clock::now();
    std::cerr << "acceptance: scenario-1 desk-scale study (200 reps, 3 models, CV) ...\n";
    const std::vector<ModelKind> models = {ModelKind::standard(), ModelKind::fex(),
                                           ModelKind::pex(std::vector<double>(5, 0.5))};
    const auto rep = desk_study(1, models, true, 1001);
    const double elapsed = seconds_since(t0);

    const auto& sub = rep.models[0];
    const auto& fex = rep.models[1];
    const auto& pex = rep.models[2];
    bool cov_ok = true;
    for (const auto& m : rep.models)
        cov_ok = cov_ok && m.coverage_lambda1 >= 0.90 && m.coverage_lambda1 <= 0.99;
    const bool strong_ok = fex.prob_strong_mean >= sub.prob_strong_mean &&
                           pex.prob_strong_mean >= sub.prob_strong_mean;
    const bool width_ok =
        fex.width_ratio_lambda1 >= 0.62 && fex.width_ratio_lambda1 <= 0.82;
    const bool time_ok = elapsed < 1800.0;
    report(3, "scenario 1 desk-scale",
           cov_ok && strong_ok && width_ok && time_ok,
           "coverage " + fmt(sub.coverage_lambda1) + "/" + fmt(fex.coverage_lambda1) + "/" +
               fmt(pex.coverage_lambda1) + ", prob_strong " + fmt(sub.prob_strong_mean) +
               "/" + fmt(fex.prob_strong_mean) + "/" + fmt(pex.prob_strong_mean) +
               ", fex width ratio " + fmt(fex.width_ratio_lambda1) + " (ref 0.72), " +
               fmt(elapsed / 60.0, 1) + " min");

    bool cv_ok = true;
    for (const auto& m : rep.models)
        cv_ok = cv_ok && m.coverage_mu2 >= 0.90 && m.coverage_mu2 <= 0.99;
    report(7, "cross-validation coverage, scenario 1", cv_ok,
           "true-effect containment " + fmt(sub.coverage_mu2) + "/" + fmt(fex.coverage_mu2) +
               "/" + fmt(pex.coverage_mu2) + " (ref 0.95)");
}

void criterion_4() {
    std::cerr << "acceptance: scenario-3 desk-scale study ...\n";
    const auto rep =
        desk_study(3, {ModelKind::standard(), ModelKind::fex()}, false, 1003);
    const auto& sub = rep.models[0];
    const auto& fex = rep.models[1];
    const bool width_ok =
        fex.width_ratio_lambda1 >= 0.42 && fex.width_ratio_lambda1 <= 0.62;
    const double gap = fex.prob_strong_mean - sub.prob_strong_mean;
    report(4, "scenario 3 borrowing", width_ok && gap >= 0.20,
           "fex width ratio " + fmt(fex.width_ratio_lambda1) +
               " (ref 0.52), prob_strong gap " + fmt(gap) + " (fex " +
               fmt(fex.prob_strong_mean) + " vs subgroup " + fmt(sub.prob_strong_mean) +
               ", ref 0.89 vs 0.56)");
}

void criterion_5() {
    std::cerr << "acceptance: scenario-5 desk-scale study ...\n";
    const auto rep = desk_study(5, {ModelKind::pex(std::vector<double>(5, 0.5))}, false,
                                1005);
    const auto& w = rep.models[0].mixture_weight;
    bool pass = w[0] < 0.6;
    for (int j = 1; j < 5; ++j) pass = pass && w[0] < w[j] && w[j] > 0.85;
    std::string ws;
    for (double x : w) ws += (ws.empty() ? "" : "/") + fmt(x);
    report(5, "scenario 5 mixture weights", pass, "weights " + ws + " (ref 0.31, ~0.97)");
}

void criterion_6() {
    std::cerr << "acceptance: scenario-7 desk-scale study ...\n";
    const std::vector<ModelKind> models = {ModelKind::standard(), ModelKind::fex(),
                                           ModelKind::pex(std::vector<double>(5, 0.5))};
    const auto rep = desk_study(7, models, false, 1007);
    bool weak_ok = true;
    for (const auto& m : rep.models)
        weak_ok = weak_ok && m.prob_strong[1] <= 0.05 && m.prob_strong[3] <= 0.05;
    bool strong_ok = true;
    for (int mi : {1, 2})
        for (int j : {0, 2, 4})
            strong_ok = strong_ok && rep.models[mi].prob_strong[j] >= 0.70;
    std::string detail;
    for (const auto& m : rep.models) {
        detail += m.model + " [";
        for (int j = 0; j < 5; ++j) detail += (j ? " " : "") + fmt(m.prob_strong[j], 2);
        detail += "] ";
    }
    report(6, "scenario 7 class discrimination", weak_ok && strong_ok, detail);
}

void criterion_8() {
    const auto spec = build_scenario(1);
    RngStream gen(555, 0);
    const auto [data, truth] = generate_replication(spec, gen);
    PriorSpec priors;
    McmcConfig cfg{8000, 4000, 556, 1};
    FitOptions opts;
    opts.store_latent = false;
    opts.psi_prior_scale = priors.psi_bf_scale;
    RngStream rf(cfg.seed, 1), rp(cfg.seed, 2);
    const auto fex = fit_fex(data, priors, cfg, rf, opts);
    const auto pex = fit_pex(data, priors, cfg, rp, std::vector<double>(5, 1.0), opts);
    bool pass = true;
    std::string detail;
    for (int j = 0; j < 5; ++j) {
        const auto& fc = fex.lambda1_chain(j);
        const auto& pc = pex.lambda1_chain(j);
        const double diff = std::fabs(mean_of(fc) - mean_of(pc));
        const double tol = 3.0 * std::sqrt(std::pow(mcmc_error(fc), 2) +
                                           std::pow(mcmc_error(pc), 2));
        pass = pass && diff < tol;
        detail += (j ? ", " : "") + fmt(diff, 4) + "<" + fmt(tol, 4);
    }
    report(8, "P-EX reduces to F-EX at pi = 1", pass, detail);
}

void criterion_9() {
    RngStream rng(77, 0);
    double s = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) s += sample_truncnorm(rng, 0.0, 1.0, 0.0);
    const double hn_mean = std::sqrt(2.0 / M_PI);
    const bool trunc_ok = std::fabs(s / n - hn_mean) <= 0.005;

    const int g = 200;
    const double h = 12.0 / g;
    double integral = 0.0;
    for (int i = 0; i < g; ++i) {
        const double x = -6.0 + (i + 0.5) * h;
        for (int j = 0; j < g; ++j) {
            const double y = -6.0 + (j + 0.5) * h;
            integral += std::exp(bvn_logpdf(x, y, 0, 0, 1, 1, 0.3));
        }
    }
    integral *= h * h;
    const bool grid_ok = std::fabs(integral - 1.0) <= 1e-3;

    // prior-only psi chain through the full sampler path
    Dataset d = Dataset::from_records({{"s1", "a", 0.1, 0.05, 0.2, 0.06, 0.4},
                                       {"s2", "a", 0.4, 0.04, 0.3, 0.05, 0.4},
                                       {"s3", "a", -0.2, 0.06, 0.0, 0.07, 0.4}});
    PriorSpec priors;
    McmcConfig cfg{30000, 2000, 78, 1};
    FitOptions opts;
    opts.store_latent = false;
    opts.disable_likelihood = true;
    opts.psi_prior_scale = priors.psi_bf_scale;
    RngStream rng2(cfg.seed, 0);
    const auto fit = fit_standard(d, priors, cfg, rng2, opts);
    const double bf = savage_dickey_bf(fit.psi_chain(0), fit.psi_prior_scale);
    const bool bf_ok = std::fabs(bf - 1.0) <= 0.15;

    report(9, "distribution primitives", trunc_ok && grid_ok && bf_ok,
           "half-normal mean " + fmt(s / n, 4) + "/" + fmt(hn_mean, 4) + ", grid integral " +
               fmt(integral, 5) + ", prior-only BF " + fmt(bf, 3));
}

void criterion_10() {
    const char* bin = std::getenv("SURREX_BIN");
    if (bin == nullptr) {
        report(10, "byte-identical re-runs", false, "SURREX_BIN not set");
        return;
    }
    const fs::path dir = "/tmp/surrex_acceptance_c10";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RngStream rng(90, 0);
    auto [data, truth] = generate_replication(build_scenario(2), rng);
    const std::string csv = (dir / "data.csv").string();
    write_dataset(csv, data);

    auto sh = [&](const std::string& args) {
        const std::string cmd = std::string(bin) + " " + args + " >/dev/null 2>&1";
        return WEXITSTATUS(std::system(cmd.c_str()));
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    const std::string mcmc = " --iters 2000 --burnin 1000 --seed 9 --out " + dir.string();
    bool pass = sh("fit --data " + csv + " --model fex" + mcmc + " --prefix r1") == 0;
    pass = pass && sh("fit --data " + csv + " --model fex" + mcmc + " --prefix r2") == 0;
    for (const char* suffix : {"_summary.csv", "_verdict.json", "_diagnostics.json",
                               "_manifest.json"})
        pass = pass && slurp(dir / ("r1" + std::string(suffix))) ==
                           slurp(dir / ("r2" + std::string(suffix)));

    pass = pass && sh("simulate --scenario 2 --reps 2 --models standard,fex --no-cv" +
                      mcmc + " --prefix s1") == 0;
    // replaying the manifest reproduces the report byte for byte
    const fs::path rerun_dir = dir / "rerun";
    pass = pass && sh("rerun --manifest " + (dir / "s1_manifest.json").string() + " --out " +
                      rerun_dir.string()) == 0;
    pass = pass && !slurp(dir / "s1_report.csv").empty() &&
           slurp(dir / "s1_report.csv") == slurp(rerun_dir / "sim_report.csv");

    report(10, "byte-identical re-runs", pass,
           "fit outputs, simulate report and manifest replay compared byte-for-byte");
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    std::cout << "surrex acceptance suite (desk scale: 200 reps, 8000+4000 iterations)\n";
    criterion_1();
    criterion_2();
    criteria_3_and_7();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_8();
    criterion_9();
    criterion_10();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
              << fmt(seconds_since(t0) / 60.0, 1) << " min total)\n";
    return g_failures == 0 ? 0 : 1;
}
