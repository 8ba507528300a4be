// Sampler verification against closed-form laws and the standard library's
// independent implementations.  All seeds pinned.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_one_sample(std::vector<double> v, double (*cdf)(double)) {
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max(d, std::max(std::abs(f - i / n), std::abs(f - (i + 1) / n)));
    }
    return d;
}

double chi2_stat(const std::vector<double>& expected, const std::vector<std::uint64_t>& observed) {
    REQUIRE(expected.size() == observed.size());
    double s = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        REQUIRE(expected[i] > 0.0);
        const double diff = static_cast<double>(observed[i]) - expected[i];
        s += diff * diff / expected[i];
    }
    return s;
}

double log_poisson_pmf(int k, double lam) {
    return k * std::log(lam) - lam - std::lgamma(k + 1.0);
}

// P[S = k] for S = successes before the r-th failure on fair coins.
double log_nb_half_pmf(int k, int r) {
    return std::lgamma(k + r + 0.0) - std::lgamma(k + 1.0) - std::lgamma(r + 0.0) -
           (k + r) * std::log(2.0);
}

}  // namespace

TEST_CASE("stream draws are counter-addressable", "[rng]") {
    erwlab::Stream a(12345);
    erwlab::Stream b(12345);
    std::vector<std::uint64_t> seq;
    for (int i = 0; i < 100; ++i) seq.push_back(a());
    for (int i = 0; i < 100; ++i) REQUIRE(b.at(i) == seq[i]);
    REQUIRE(a.position() == 100);

    erwlab::Stream c(12345);
    c.seek(50);
    REQUIRE(c() == seq[50]);

    REQUIRE(erwlab::Stream(1).at(0) != erwlab::Stream(2).at(0));
    REQUIRE(erwlab::derive_key(7, 1) != erwlab::derive_key(7, 2));
    REQUIRE(erwlab::derive_key(7, 1) != erwlab::derive_key(8, 1));
}

TEST_CASE("keyed uniforms match stream order and land in [0,1)", "[rng]") {
    erwlab::Stream s(999);
    for (int i = 0; i < 1000; ++i) {
        const double u = erwlab::keyed_uniform(999, i);
        REQUIRE(u == s.uniform());
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal source matches the Gaussian law", "[rng]") {
    erwlab::Stream s(0x40A11ull);
    erwlab::NormalSource nrm;
    const std::size_t n = 100'000;
    std::vector<double> v(n);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = nrm(s);
        sum += v[i];
        sumsq += v[i] * v[i];
    }
    REQUIRE(std::abs(sum / n) < 0.013);           // 4 sigma
    REQUIRE(std::abs(sumsq / n - 1.0) < 0.018);   // 4 sigma of the variance
    REQUIRE(ks_one_sample(v, normal_cdf) < 0.01);
}

TEST_CASE("gamma sampler matches the standard library's", "[rng]") {
    for (const double shape : {0.5, 1.0, 2.5, 17.0}) {
        erwlab::Stream s(0x6A3Bull + static_cast<std::uint64_t>(shape * 16));
        erwlab::NormalSource nrm;
        const std::size_t n = 50'000;
        std::vector<double> mine(n), ref(n);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mine[i] = erwlab::gamma_draw(shape, s, nrm);
            sum += mine[i];
        }
        std::mt19937_64 gen(4242 + static_cast<unsigned>(shape * 8));
        std::gamma_distribution<double> gd(shape, 1.0);
        for (std::size_t i = 0; i < n; ++i) ref[i] = gd(gen);
        REQUIRE(std::abs(sum / n - shape) < 5.0 * std::sqrt(shape / n));
        const erwlab::KsResult k = erwlab::ks_two_sample(mine, ref);
        INFO("shape " << shape << " KS " << k.d);
        REQUIRE(k.d < 0.015);
    }
}

TEST_CASE("poisson sampler matches the exact pmf", "[rng]") {
    // small-mean product path
    {
        const double lam = 3.0;
        erwlab::Stream s(0xB01550Dull);
        const std::size_t n = 100'000;
        const int kmax = 13;
        std::vector<std::uint64_t> counts(kmax + 2, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t k = erwlab::poisson_draw(lam, s);
            REQUIRE(k >= 0);
            counts[std::min<std::int64_t>(k, kmax + 1)]++;
        }
        std::vector<double> expected;
        double tail = 1.0;
        for (int k = 0; k <= kmax; ++k) {
            const double p = std::exp(log_poisson_pmf(k, lam));
            expected.push_back(n * p);
            tail -= p;
        }
        expected.push_back(n * tail);
        REQUIRE(chi2_stat(expected, counts) < 40.0);  // 14 dof
    }
    // transformed-rejection path
    {
        const double lam = 30.0;
        erwlab::Stream s(0xB01551Eull);
        const std::size_t n = 100'000;
        const int lo = 10, hi = 55;
        std::vector<std::uint64_t> counts(hi - lo + 3, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t k = erwlab::poisson_draw(lam, s);
            REQUIRE(k >= 0);
            if (k < lo)
                counts.front()++;
            else if (k > hi)
                counts.back()++;
            else
                counts[k - lo + 1]++;
        }
        std::vector<double> expected;
        double plo = 0.0, mid = 0.0;
        for (int k = 0; k < lo; ++k) plo += std::exp(log_poisson_pmf(k, lam));
        expected.push_back(n * plo);
        for (int k = lo; k <= hi; ++k) {
            const double p = std::exp(log_poisson_pmf(k, lam));
            expected.push_back(n * p);
            mid += p;
        }
        expected.push_back(n * (1.0 - plo - mid));
        REQUIRE(chi2_stat(expected, counts) < 90.0);  // 47 dof
    }
}

TEST_CASE("negative binomial sampler matches the exact pmf on both paths", "[rng]") {
    for (const int r : {1, 5, 48, 100}) {
        erwlab::Stream s(0x4B1D00ull + r);
        erwlab::NormalSource nrm;
        const std::size_t n = 60'000;
        double sum = 0.0, sumsq = 0.0;
        const int lo = std::max(0, r - 4 * static_cast<int>(std::sqrt(2.0 * r)) - 4);
        const int hi = r + 4 * static_cast<int>(std::sqrt(2.0 * r)) + 8;
        std::vector<std::uint64_t> counts(hi - lo + 3, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::int64_t k = erwlab::neg_binomial_half(r, s, nrm);
            REQUIRE(k >= 0);
            sum += static_cast<double>(k);
            sumsq += static_cast<double>(k) * static_cast<double>(k);
            if (k < lo)
                counts.front()++;
            else if (k > hi)
                counts.back()++;
            else
                counts[k - lo + 1]++;
        }
        const double mean = sum / n;
        const double var = sumsq / n - mean * mean;
        REQUIRE(std::abs(mean - r) < 5.0 * std::sqrt(2.0 * r / n));
        REQUIRE(std::abs(var - 2.0 * r) / (2.0 * r) < 0.05);
        std::vector<double> expected;
        double plo = 0.0, mid = 0.0;
        for (int k = 0; k < lo; ++k) plo += std::exp(log_nb_half_pmf(k, r));
        expected.push_back(n * plo + 1e-9);
        for (int k = lo; k <= hi; ++k) {
            const double p = std::exp(log_nb_half_pmf(k, r));
            expected.push_back(n * p);
            mid += p;
        }
        expected.push_back(n * (1.0 - plo - mid) + 1e-9);
        const double dof = static_cast<double>(expected.size()) - 1.0;
        INFO("r " << r << " chi2 " << chi2_stat(expected, counts) << " bins " << expected.size());
        REQUIRE(chi2_stat(expected, counts) < dof + 5.0 * std::sqrt(2.0 * dof) + 10.0);
    }
    erwlab::Stream s(1);
    erwlab::NormalSource nrm;
    REQUIRE(erwlab::neg_binomial_half(0, s, nrm) == 0);
}

TEST_CASE("parallel chunks partition exactly and deterministically", "[rng]") {
    for (const unsigned workers : {1u, 3u, 7u}) {
        const std::uint64_t n = 1000;
        std::vector<int> hits(n, 0);
        erwlab::parallel_chunks(n, workers, [&](std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i) hits[i]++;
        });
        for (std::uint64_t i = 0; i < n; ++i) REQUIRE(hits[i] == 1);
    }

    const auto fill = [](unsigned workers) {
        std::vector<double> out(5000);
        erwlab::parallel_paths(5000, workers, [&](std::uint64_t i) {
            erwlab::Stream s(erwlab::derive_key(77, i));
            out[i] = s.uniform();
        });
        return out;
    };
    REQUIRE(fill(1) == fill(4));
}
