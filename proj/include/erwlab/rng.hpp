// rng.hpp - counter-addressable random streams and a few fast exact samplers.
//
// Every Monte Carlo path gets its own stream, keyed by (master seed, path index),
// and a path can key sub-streams per site.  Draw i of a stream is a pure function
// of (key, i), so results do not depend on how paths are scheduled across workers.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

namespace erwlab {

inline constexpr std::uint64_t kRngGamma = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer: full-avalanche 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Child stream key from a parent key and a salt (path index, site index, ...).
constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t salt) {
    return mix64(parent ^ mix64(salt * kRngGamma + 0x632BE59BD9B4E019ull));
}

constexpr double to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;  // [0, 1)
}

class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key, std::uint64_t start = 0) : key_(key), ctr_(start) {}

    static Stream child(std::uint64_t parent, std::uint64_t salt) {
        return Stream(derive_key(parent, salt));
    }

    // Draw i is addressable without consuming state.  Index 0 is reserved by
    // convention for one-off setup draws (e.g. picking a site's cookie stack).
    std::uint64_t at(std::uint64_t i) const { return mix64(key_ + (i + 1) * kRngGamma); }
    double uniform_at(std::uint64_t i) const { return to_unit(at(i)); }

    std::uint64_t operator()() { return at(ctr_++); }
    double uniform() { return to_unit((*this)()); }
    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t key() const { return key_; }
    std::uint64_t position() const { return ctr_; }
    void seek(std::uint64_t i) { ctr_ = i; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

// Standard normals by Marsaglia's polar method, caching the spare deviate.
class NormalSource {
public:
    double operator()(Stream& s) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, r2;
        do {
            u = 2.0 * s.uniform() - 1.0;
            v = 2.0 * s.uniform() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    void reset() { has_spare_ = false; }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Gamma(shape, 1) by Marsaglia-Tsang squeeze rejection, exact for shape >= 1;
// shapes below 1 use the boosting identity G(a) = G(a+1) * U^(1/a).
inline double gamma_draw(double shape, Stream& s, NormalSource& nrm) {
    if (shape < 1.0) {
        const double u = s.uniform();
        return gamma_draw(shape + 1.0, s, nrm) * std::pow(u > 0.0 ? u : 0x1.0p-53, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = nrm(s);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = s.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

namespace detail {

// Poisson for small means: product-of-uniforms inversion.
inline std::int64_t poisson_small(double mean, Stream& s) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double prod = s.uniform();
    while (prod > limit) {
        prod *= s.uniform();
        ++k;
    }
    return k;
}

// Poisson for large means: Hoermann's transformed rejection with squeeze (PTRS).
inline std::int64_t poisson_ptrs(double mean, Stream& s) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = s.uniform() - 0.5;
        const double v = s.uniform();
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            k * loglam - mean - std::lgamma(k + 1.0)) {
            return static_cast<std::int64_t>(k);
        }
    }
}

}  // namespace detail

inline std::int64_t poisson_draw(double mean, Stream& s) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) return detail::poisson_small(mean, s);
    return detail::poisson_ptrs(mean, s);
}

// Number of successes before the r-th failure in fair coin tosses
// (negative binomial with p = 1/2).  Small r walks raw bits; large r goes
// through the exact gamma-Poisson mixture.
inline std::int64_t neg_binomial_half(std::int64_t r, Stream& s, NormalSource& nrm) {
    if (r <= 0) return 0;
    if (r <= 48) {
        std::int64_t succ = 0, fail = 0;
        std::uint64_t bits = s();
        int left = 64;
        while (fail < r) {
            if (left == 0) {
                bits = s();
                left = 64;
            }
            if (bits & 1)
                ++succ;
            else
                ++fail;
            bits >>= 1;
            --left;
        }
        return succ;
    }
    const double lambda = gamma_draw(static_cast<double>(r), s, nrm);
    return poisson_draw(lambda, s);
}

constexpr double keyed_uniform(std::uint64_t key, std::uint64_t i) {
    return to_unit(mix64(key + (i + 1) * kRngGamma));
}

// Runs fn(lo, hi) over a fixed partition of [0, n).  Each chunk can set up
// worker-local scratch state; per-path streams keep results schedule-independent.
template <class Fn>
void parallel_chunks(std::uint64_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers <= 1 || n < 2) {
        if (n > 0) fn(std::uint64_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = n * w / workers;
        const std::uint64_t hi = n * (w + 1) / workers;
        if (lo == hi) continue;
        pool.emplace_back([lo, hi, &fn] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

// Runs fn(path_index) for every index in [0, n).  Work is split into fixed
// blocks per worker, but because each path derives its own stream the results
// are identical for any worker count.
template <class Fn>
void parallel_paths(std::uint64_t n, unsigned workers, Fn&& fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t lo = n * w / workers;
        const std::uint64_t hi = n * (w + 1) / workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::uint64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace erwlab
