#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "surprisal/util.hpp"

namespace surprisal {

/// All randomized operations draw from mt19937_64 through the helpers below.
/// The std:: distributions are implementation-defined, so we do not use them;
/// every draw here is reproducible bit-for-bit across platforms.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

/// Derives an independent stream from a master seed and up to three tags
/// (purpose, year, epoch, node key, ...).
inline Rng make_rng(std::uint64_t seed, std::uint64_t tag0 = 0,
                    std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
    return Rng(mix64(mix64(mix64(seed, tag0), tag1), tag2));
}

/// Uniform in [0, 1).
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Rejection keeps the draw unbiased.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
    if (n == 0) fail("uniform_below: empty range");
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % n;
}

/// Standard normal via Box-Muller (no cached spare, so streams stay aligned).
inline double normal01(Rng& rng) {
    double u1 = 1.0 - uniform01(rng); // (0, 1]
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Inverse standard normal CDF (Acklam's rational approximation, |err| < 1.2e-9).
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) fail("inverse_normal_cdf: p outside (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

/// Poisson draw by multiplication of uniforms, chunked so exp(-lambda) never
/// underflows for large means.
inline long long poisson(Rng& rng, double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda)) fail("poisson: bad lambda");
    if (lambda == 0.0) return 0;
    long long k = 0;
    double remaining = lambda;
    while (remaining > 0.0) {
        double chunk = remaining > 30.0 ? 30.0 : remaining;
        remaining -= chunk;
        double threshold = std::exp(-chunk);
        double p = 1.0;
        long long kk = -1;
        do {
            ++kk;
            p *= uniform01(rng);
        } while (p > threshold);
        k += kk;
    }
    return k;
}

} // namespace surprisal
