#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "surrex/crossval.hpp"
#include "surrex/dataset_io.hpp"
#include "surrex/diagnostics.hpp"
#include "surrex/randkit.hpp"
#include "surrex/samplers.hpp"
#include "surrex/simulation.hpp"
#include "surrex/surrogacy.hpp"
#include "surrex/version.hpp"

namespace py = pybind11;
using namespace surrex;

namespace {

py::dict draws_dict(const FitResult& fit) {
    py::dict d;
    for (const auto& [name, chain] : fit.draws.all()) d[name.c_str()] = chain;
    return d;
}

FitOptions options_from_kwargs(bool store_latent, std::optional<double> psi_prior_scale) {
    FitOptions o;
    o.store_latent = store_latent;
    o.psi_prior_scale = psi_prior_scale;
    return o;
}

} // namespace

PYBIND11_MODULE(_surrex, m) {
    m.doc() = "Bayesian study-level surrogate endpoint evaluation";
    m.attr("__version__") = version_string;

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<SamplerError>(m, "SamplerError", PyExc_RuntimeError);

    py::class_<Interval>(m, "Interval")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_readonly("lo", &Interval::lo)
        .def_readonly("hi", &Interval::hi)
        .def("width", &Interval::width)
        .def("contains", &Interval::contains)
        .def("__repr__", [](const Interval& iv) {
            return "Interval(" + format_double(iv.lo) + ", " + format_double(iv.hi) + ")";
        });

    py::class_<StudyRecord>(m, "StudyRecord")
        .def(py::init([](std::string study_id, std::string class_id, double y1, double se1,
                         double y2, double se2, double rho_w) {
                 return StudyRecord{std::move(study_id), std::move(class_id), y1, se1,
                                    y2,                  se2,                 rho_w};
             }),
             py::arg("study_id"), py::arg("class_id"), py::arg("y1"), py::arg("se1"),
             py::arg("y2"), py::arg("se2"), py::arg("rho_w"))
        .def_readwrite("study_id", &StudyRecord::study_id)
        .def_readwrite("class_id", &StudyRecord::class_id)
        .def_readwrite("y1", &StudyRecord::y1)
        .def_readwrite("se1", &StudyRecord::se1)
        .def_readwrite("y2", &StudyRecord::y2)
        .def_readwrite("se2", &StudyRecord::se2)
        .def_readwrite("rho_w", &StudyRecord::rho_w);

    py::class_<Dataset>(m, "Dataset")
        .def_static("from_records", &Dataset::from_records)
        .def_readonly("studies", &Dataset::studies)
        .def_readonly("classes", &Dataset::classes)
        .def("n_studies", &Dataset::n_studies)
        .def("n_classes", &Dataset::n_classes)
        .def("restricted_to_class", &Dataset::restricted_to_class);

    py::class_<PriorSpec>(m, "PriorSpec")
        .def(py::init([](double a, double b, double psi_bf_scale) {
                 return PriorSpec{a, b, psi_bf_scale};
             }),
             py::arg("a") = 100.0, py::arg("b") = 10.0, py::arg("psi_bf_scale") = 2.0)
        .def_readwrite("a", &PriorSpec::a)
        .def_readwrite("b", &PriorSpec::b)
        .def_readwrite("psi_bf_scale", &PriorSpec::psi_bf_scale);

    py::class_<McmcConfig>(m, "McmcConfig")
        .def(py::init([](std::int64_t n_iter, std::int64_t n_burnin, std::uint64_t seed,
                         std::int64_t thin) {
                 return McmcConfig{n_iter, n_burnin, seed, thin};
             }),
             py::arg("n_iter") = 8000, py::arg("n_burnin") = 4000, py::arg("seed") = 1,
             py::arg("thin") = 1)
        .def_readwrite("n_iter", &McmcConfig::n_iter)
        .def_readwrite("n_burnin", &McmcConfig::n_burnin)
        .def_readwrite("seed", &McmcConfig::seed)
        .def_readwrite("thin", &McmcConfig::thin);

    py::class_<RngStream>(m, "RngStream")
        .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"),
             py::arg("stream_id") = 0)
        .def("uniform", py::overload_cast<>(&RngStream::uniform))
        .def("normal", py::overload_cast<>(&RngStream::normal))
        .def("exponential", &RngStream::exponential);

    py::class_<ModelKind>(m, "ModelKind")
        .def_static("standard", &ModelKind::standard)
        .def_static("fex", &ModelKind::fex)
        .def_static("pex", &ModelKind::pex, py::arg("pi"))
        .def("name", &ModelKind::name);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("classes", &FitResult::classes)
        .def_readonly("warnings", &FitResult::warnings)
        .def_readonly("dataset_fingerprint", &FitResult::dataset_fingerprint)
        .def_readonly("psi_prior_scale", &FitResult::psi_prior_scale)
        .def_property_readonly("model", [](const FitResult& f) { return f.model.name(); })
        .def("draws", &draws_dict)
        .def("chain",
             [](const FitResult& f, const std::string& name) { return f.draws.at(name); })
        .def("lambda1_chain", &FitResult::lambda1_chain, py::arg("class_index"))
        .def("lambda0_chain", &FitResult::lambda0_chain, py::arg("class_index"))
        .def("psi_chain", &FitResult::psi_chain, py::arg("class_index"));

    // io
    m.def("load_dataset", &load_dataset, py::arg("path"));
    m.def("write_dataset", &write_dataset, py::arg("path"), py::arg("dataset"));
    m.def("dataset_fingerprint", &dataset_fingerprint);
    m.def("validate", [](const Dataset& d) {
        py::list out;
        for (const auto& v : validate(d)) {
            py::dict item;
            item["study_id"] = v.study_id;
            item["field"] = v.field;
            item["message"] = v.message;
            out.append(item);
        }
        return out;
    });

    // distribution primitives
    m.def("normal_cdf", &normal_cdf);
    m.def("normal_quantile", &normal_quantile);
    m.def("bvn_logpdf", &bvn_logpdf, py::arg("y1"), py::arg("y2"), py::arg("mu1"),
          py::arg("mu2"), py::arg("s1"), py::arg("s2"), py::arg("rho"));
    m.def("sample_truncnorm", &sample_truncnorm, py::arg("rng"), py::arg("mu"), py::arg("sd"),
          py::arg("lower"));
    m.def(
        "slice_sample_positive",
        [](RngStream& rng, const std::function<double(double)>& f, double current,
           double width) { return slice_sample_positive(rng, f, current, width); },
        py::arg("rng"), py::arg("log_target"), py::arg("current"), py::arg("width") = 1.0);

    // samplers
    m.def(
        "fit_standard",
        [](const Dataset& d, const PriorSpec& p, const McmcConfig& c, RngStream& rng,
           bool store_latent, std::optional<double> psi_prior_scale) {
            return fit_standard(d, p, c, rng, options_from_kwargs(store_latent, psi_prior_scale));
        },
        py::arg("data"), py::arg("priors"), py::arg("cfg"), py::arg("rng"),
        py::arg("store_latent") = true, py::arg("psi_prior_scale") = std::nullopt);
    m.def(
        "fit_fex",
        [](const Dataset& d, const PriorSpec& p, const McmcConfig& c, RngStream& rng,
           bool store_latent, std::optional<double> psi_prior_scale) {
            return fit_fex(d, p, c, rng, options_from_kwargs(store_latent, psi_prior_scale));
        },
        py::arg("data"), py::arg("priors"), py::arg("cfg"), py::arg("rng"),
        py::arg("store_latent") = true, py::arg("psi_prior_scale") = std::nullopt);
    m.def(
        "fit_pex",
        [](const Dataset& d, const PriorSpec& p, const McmcConfig& c, RngStream& rng,
           const std::vector<double>& pi, bool store_latent,
           std::optional<double> psi_prior_scale) {
            return fit_pex(d, p, c, rng, pi, options_from_kwargs(store_latent, psi_prior_scale));
        },
        py::arg("data"), py::arg("priors"), py::arg("cfg"), py::arg("rng"), py::arg("pi"),
        py::arg("store_latent") = true, py::arg("psi_prior_scale") = std::nullopt);
    m.def("mixture_weight_conditional", &mixture_weight_conditional, py::arg("lambda1j"),
          py::arg("beta1"), py::arg("xi1"), py::arg("b"), py::arg("pi_j"));

    // surrogacy
    m.def("credible_interval",
          [](const std::vector<double>& chain, double level) {
              return credible_interval(chain, level);
          },
          py::arg("chain"), py::arg("level") = 0.95);
    m.def("savage_dickey_bf",
          [](const std::vector<double>& chain, double prior_scale) {
              return savage_dickey_bf(chain, prior_scale);
          },
          py::arg("psi_chain"), py::arg("prior_scale") = 2.0);
    m.def(
        "evaluate_surrogacy",
        [](const FitResult& fit, double level) {
            py::list classes;
            const auto verdict = evaluate_surrogacy(fit, level);
            for (const auto& c : verdict.classes) {
                py::dict d;
                d["class_id"] = c.class_id;
                d["ci_lambda0"] = c.ci_lambda0;
                d["ci_lambda1"] = c.ci_lambda1;
                d["bf_psi"] = c.bf_psi;
                d["psi2_median"] = c.psi2_median;
                d["criterion_intercept"] = c.criterion_intercept;
                d["criterion_slope"] = c.criterion_slope;
                d["criterion_variance"] = c.criterion_variance;
                d["strong"] = c.strong;
                classes.append(d);
            }
            return classes;
        },
        py::arg("fit"), py::arg("level") = 0.95);

    // cross-validation
    py::class_<PredictionResult>(m, "PredictionResult")
        .def_readonly("study_id", &PredictionResult::study_id)
        .def_readonly("class_id", &PredictionResult::class_id)
        .def_readonly("predicted_mean", &PredictionResult::predicted_mean)
        .def_readonly("predictive_sd_true", &PredictionResult::predictive_sd_true)
        .def_readonly("predictive_sd_observed", &PredictionResult::predictive_sd_observed)
        .def_readonly("interval_true", &PredictionResult::interval_true)
        .def_readonly("interval_observed", &PredictionResult::interval_observed)
        .def_readonly("contains_target", &PredictionResult::contains_target)
        .def_readonly("abs_error", &PredictionResult::abs_error);
    m.def(
        "loo_predict",
        [](const Dataset& d, const ModelKind& model, const PriorSpec& p, const McmcConfig& c,
           const std::string& holdout, const std::string& target,
           std::optional<double> true_value, double level) {
            LooOptions o;
            o.level = level;
            return loo_predict(d, model, p, c, holdout,
                               target == "true" ? PredictTarget::True
                                                : PredictTarget::Observed,
                               true_value, o);
        },
        py::arg("data"), py::arg("model"), py::arg("priors"), py::arg("cfg"),
        py::arg("holdout"), py::arg("target") = "observed",
        py::arg("true_value") = std::nullopt, py::arg("level") = 0.95);

    // simulation
    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def_readonly("name", &ScenarioSpec::name)
        .def_readonly("design", &ScenarioSpec::design)
        .def_readonly("lambda0", &ScenarioSpec::lambda0)
        .def_readonly("lambda1", &ScenarioSpec::lambda1)
        .def_readonly("rho_b", &ScenarioSpec::rho_b)
        .def_readonly("psi2", &ScenarioSpec::psi2)
        .def_readonly("eta1", &ScenarioSpec::eta1)
        .def_readonly("n_per_class", &ScenarioSpec::n_per_class)
        .def_readonly("sigma_within", &ScenarioSpec::sigma_within)
        .def_readonly("rho_w", &ScenarioSpec::rho_w)
        .def("psi1", &ScenarioSpec::psi1, py::arg("class_index"));
    m.def("build_scenario", &build_scenario, py::arg("index"));
    m.def(
        "generate_replication",
        [](const ScenarioSpec& spec, RngStream& rng) {
            auto [data, truth] = generate_replication(spec, rng);
            py::dict t;
            t["mu1"] = truth.mu1;
            t["mu2"] = truth.mu2;
            t["lambda0"] = truth.lambda0;
            t["lambda1"] = truth.lambda1;
            t["psi1"] = truth.psi1;
            t["psi2"] = truth.psi2;
            return py::make_tuple(data, t);
        },
        py::arg("spec"), py::arg("rng"));

    // diagnostics
    m.def("mcmc_error",
          [](const std::vector<double>& chain) { return mcmc_error(chain); });
    m.def("effective_sample_size",
          [](const std::vector<double>& chain) { return effective_sample_size(chain); });
    m.def("split_rhat", [](const std::vector<double>& chain) { return split_rhat(chain); });
}
