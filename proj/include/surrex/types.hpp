#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace surrex {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// CSV / input errors carrying the offending row and column.
class ParseError : public std::runtime_error {
  public:
    ParseError(std::string msg, long row = -1, std::string column = "")
        : std::runtime_error(std::move(msg)), row_(row), column_(std::move(column)) {}

    long row() const { return row_; }
    const std::string& column() const { return column_; }

  private:
    long row_;
    std::string column_;
};

class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside an MCMC run.
class SamplerError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One randomised trial: estimated effects on the surrogate (y1) and the
/// final outcome (y2) with their standard errors and the within-study
/// correlation between the two estimates.
struct StudyRecord {
    std::string study_id;
    std::string class_id;
    double y1 = 0.0;
    double se1 = 0.0;
    double y2 = 0.0;
    double se2 = 0.0;
    double rho_w = 0.0;
};

struct Violation {
    std::string study_id; // empty for dataset-level violations
    std::string field;
    std::string message;
};

/// An ordered collection of studies plus the distinct treatment classes in
/// first-appearance order. Class indices derived from `classes` are the
/// parameter indices used everywhere downstream.
struct Dataset {
    std::vector<StudyRecord> studies;
    std::vector<std::string> classes;

    static Dataset from_records(std::vector<StudyRecord> records);

    std::size_t n_studies() const { return studies.size(); }
    std::size_t n_classes() const { return classes.size(); }

    /// Index of class_id in `classes`, or -1.
    int class_index(const std::string& class_id) const;

    /// Row indices grouped per class, in dataset order.
    std::vector<std::vector<int>> rows_by_class() const;

    Dataset restricted_to_class(const std::string& class_id) const;
};

/// Scales of the vague priors. `a` and `b` are standard deviations: normal
/// N(0, a^2) for location parameters, half-normal with scale b for standard
/// deviations and for the non-exchangeable slope component. `psi_bf_scale`
/// is the half-normal scale used for the conditional standard deviations
/// when Bayes factors are requested (verdict-producing runs).
struct PriorSpec {
    double a = 100.0;
    double b = 10.0;
    double psi_bf_scale = 2.0;

    void check() const {
        if (!(a > 0.0) || !(b > 0.0) || !(psi_bf_scale > 0.0))
            throw ValidationError("PriorSpec: a, b and psi_bf_scale must be > 0");
    }
};

struct McmcConfig {
    std::int64_t n_iter = 8000;   // post-burn-in sweeps
    std::int64_t n_burnin = 4000;
    std::uint64_t seed = 1;
    std::int64_t thin = 1;

    std::int64_t n_draws() const { return n_iter / thin; }

    void check() const {
        if (n_iter < 1 || n_burnin < 1)
            throw ValidationError("McmcConfig: n_iter and n_burnin must be >= 1");
        if (thin < 1) throw ValidationError("McmcConfig: thin must be >= 1");
        if (n_iter % thin != 0)
            throw ValidationError("McmcConfig: n_iter must be a multiple of thin");
    }
};

/// Post-burn-in chains keyed by parameter name ("lambda1[2]", "beta0",
/// "mu2[3,1]", ...). All chains have equal length.
class PosteriorDraws {
  public:
    void insert(std::string name, std::vector<double> chain);
    bool has(const std::string& name) const { return chains_.count(name) > 0; }
    const std::vector<double>& at(const std::string& name) const;
    std::vector<std::string> names() const;
    std::size_t n_draws() const { return n_draws_; }
    std::size_t n_params() const { return chains_.size(); }
    const std::map<std::string, std::vector<double>>& all() const { return chains_; }

  private:
    std::map<std::string, std::vector<double>> chains_;
    std::size_t n_draws_ = 0;
};

} // namespace surrex
