#include "surrex/randkit.hpp"

#include <cmath>
#include <limits>

#include "surrex/types.hpp"

namespace surrex {

namespace {

constexpr std::uint64_t kGolden64 = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += kGolden64;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t x = seed;
    x ^= (stream_id + 1) * kGolden64; // fold the stream id into the seeding chain
    bool all_zero = true;
    for (auto& s : s_) {
        s = splitmix64(x);
        all_zero = all_zero && s == 0;
    }
    if (all_zero) s_[0] = 1;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double normal_pdf(double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI));
}

double normal_logpdf(double x, double mu, double sd) {
    const double z = (x - mu) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

// AS 241 PPND16 (Wichura 1988).
double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("normal_quantile: p must be in (0,1)");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            q * (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                       6.7265770927008700853e+4) *
                          r +
                      4.5921953931549871457e+4) *
                         r +
                     1.3731693765509461125e+4) *
                        r +
                    1.9715909503065514427e+3) *
                       r +
                   1.3314166789178437745e+2) *
                      r +
                  3.3871328727963666080e+0);
        const double den =
            (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                  3.9307895800092710610e+4) *
                     r +
                 2.1213794301586595867e+4) *
                    r +
                5.3941960214247511077e+3) *
                   r +
               6.8718700749205790830e+2) *
                  r +
              4.2313330701600911252e+1) *
                 r +
             1.0);
        return num / den;
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) *
                     r +
                 1.27045825245236838258e+0) *
                    r +
                3.64784832476320460504e+0) *
                   r +
               5.76949722146069140550e+0) *
                  r +
              4.63033784615654529590e+0) *
                 r +
             1.42343711074968357734e+0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) *
                     r +
                 1.48103976427480074590e-1) *
                    r +
                6.89767334985100004550e-1) *
                   r +
               1.67638483018380384940e+0) *
                  r +
              2.05319162663775882187e+0) *
                 r +
             1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) *
                     r +
                 2.65321895265761230930e-2) *
                    r +
                2.96560571828504891230e-1) *
                   r +
               1.78482653991729133580e+0) *
                  r +
              5.46378491116411436990e+0) *
                 r +
             6.65790464350110377720e+0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) *
                     r +
                 7.86869131145613259100e-4) *
                    r +
                1.48753612908506148525e-2) *
                   r +
               1.36929880922735805310e-1) *
                  r +
              5.99832206555887937690e-1) *
                 r +
             1.0);
        x = num / den;
    }
    return q < 0.0 ? -x : x;
}

double bvn_logpdf(double y1, double y2, double mu1, double mu2, double s1, double s2,
                  double rho) {
    if (!(s1 > 0.0) || !(s2 > 0.0))
        throw std::domain_error("bvn_logpdf: standard deviations must be > 0");
    if (!(std::fabs(rho) < 1.0)) throw std::domain_error("bvn_logpdf: |rho| must be < 1");
    const double z1 = (y1 - mu1) / s1;
    const double z2 = (y2 - mu2) / s2;
    const double omr2 = 1.0 - rho * rho;
    const double quad = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / omr2;
    return -std::log(2.0 * M_PI) - std::log(s1) - std::log(s2) - 0.5 * std::log(omr2) -
           0.5 * quad;
}

double sample_truncnorm(RngStream& rng, double mu, double sd, double lower) {
    if (!(sd > 0.0)) throw std::domain_error("sample_truncnorm: sd must be > 0");
    if (lower == -std::numeric_limits<double>::infinity()) return rng.normal(mu, sd);
    const double alpha = (lower - mu) / sd;
    double z;
    if (alpha <= 2.0) {
        // inverse CDF on the surviving upper tail, computed in survival space
        // so the quantile keeps full accuracy near the boundary
        const double tail = 0.5 * std::erfc(alpha * M_SQRT1_2);
        const double u = rng.uniform() * tail;
        z = -normal_quantile(u);
        if (z < alpha) z = alpha; // guard the last-ulp case
    } else {
        // Robert (1995) exponential rejection for far truncations
        const double rate = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
        for (;;) {
            z = alpha + rng.exponential() / rate;
            const double d = z - rate;
            if (std::log(rng.uniform()) <= -0.5 * d * d) break;
        }
    }
    return mu + sd * z;
}

double slice_sample_positive(RngStream& rng, const std::function<double(double)>& log_target,
                             double current, double width) {
    SliceOptions opt;
    opt.width = width;
    return detail::slice_positive_impl(rng, log_target, current, opt);
}

double slice_sample_positive(RngStream& rng, const std::function<double(double)>& log_target,
                             double current, const SliceOptions& opt) {
    return detail::slice_positive_impl(rng, log_target, current, opt);
}

} // namespace surrex
