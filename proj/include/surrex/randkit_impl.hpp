#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "surrex/types.hpp"

namespace surrex {

inline std::uint64_t RngStream::next_u64() {
    auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

inline double RngStream::uniform() {
    // 53-bit mantissa shifted into (0,1); never exactly 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

inline double RngStream::normal() { return normal_quantile(uniform()); }

inline double RngStream::exponential() { return -std::log(uniform()); }

namespace detail {

template <class LogTarget>
double slice_positive_impl(RngStream& rng, LogTarget&& log_target, double current,
                           const SliceOptions& opt) {
    if (!(current > 0.0))
        throw SamplerError("slice_sample_positive: current point must be > 0");
    const double f0 = log_target(current);
    if (!std::isfinite(f0))
        throw SamplerError("slice_sample_positive: log target not finite at current point");

    // eval with the positivity constraint folded in
    auto f = [&](double x) {
        return x > 0.0 ? log_target(x) : -std::numeric_limits<double>::infinity();
    };

    const double logy = f0 - rng.exponential();
    const double w = opt.width;

    double left = current - w * rng.uniform();
    double right = left + w;
    if (left < 0.0) left = 0.0;

    // stepping out, total step budget split at random between the sides
    int j = static_cast<int>(opt.max_steps * rng.uniform());
    int k = opt.max_steps - 1 - j;
    while (j-- > 0 && left > 0.0 && f(left) > logy) {
        left -= w;
        if (left < 0.0) {
            left = 0.0;
            break;
        }
    }
    while (k-- > 0 && f(right) > logy) right += w;

    for (int it = 0; it < opt.max_shrink; ++it) {
        const double x1 = left + (right - left) * rng.uniform();
        if (x1 > 0.0 && log_target(x1) > logy) return x1;
        if (x1 < current)
            left = x1;
        else
            right = x1;
    }
    return current; // interval shrank to the current point
}

} // namespace detail

} // namespace surrex
