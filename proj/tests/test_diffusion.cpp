#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "erwlab/diffusion.hpp"
#include "erwlab/rng.hpp"
#include "erwlab/stats.hpp"

TEST_CASE("exact marginal carries the correct absorption atom", "[diffusion]") {
    const std::uint64_t n = 100'000;
    std::uint64_t zeros = 0;
    erwlab::Stream s(0xA70Aull);
    erwlab::NormalSource nrm;
    for (std::uint64_t i = 0; i < n; ++i)
        if (erwlab::exact_marginal_draw(0.0, 1.0, 1.0, s, nrm) == 0.0) ++zeros;
    const double want = std::exp(-1.0);
    const double got = static_cast<double>(zeros) / n;
    REQUIRE(std::fabs(got - want) < 4.5 * std::sqrt(want * (1.0 - want) / n));

    for (std::uint64_t i = 0; i < 10'000; ++i)
        REQUIRE(erwlab::exact_marginal_draw(0.5, 1.0, 1.0, s, nrm) > 0.0);
    REQUIRE_THROWS_AS(erwlab::exact_marginal_draw(0.5, 1.0, 0.0, s, nrm),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(erwlab::exact_marginal_draw(-0.1, 1.0, 1.0, s, nrm),
                      std::invalid_argument);
}

TEST_CASE("exact marginal has the linear-drift mean", "[diffusion]") {
    const double delta = 0.7, x0 = 1.3, t = 0.8;
    const std::uint64_t n = 100'000;
    const std::vector<double> ys = erwlab::exact_marginal_samples(delta, x0, t, n, 0x3EA2ull, 1);
    double sum = 0.0;
    for (const double y : ys) sum += y;
    const double mean = sum / n;
    // second moment: Var = delta t^2 + 2 t x0
    const double sd = std::sqrt(delta * t * t + 2.0 * t * x0);
    REQUIRE(std::fabs(mean - (x0 + delta * t)) < 4.5 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("half-integer dimension reduces to a shifted gaussian square", "[diffusion]") {
    // doubled state from 1 is the square of a unit-drift brownian motion, so
    // 2 Y(1) must match (N + 1)^2 against an independent generator
    const std::uint64_t n = 100'000;
    std::vector<double> mine = erwlab::exact_marginal_samples(0.5, 0.5, 1.0, n, 0xB0B0ull, 1);
    for (double& y : mine) y *= 2.0;
    std::mt19937_64 gen(1234567);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> ref(n);
    for (double& r : ref) {
        const double z = nd(gen) + 1.0;
        r = z * z;
    }
    const erwlab::KsResult ks = erwlab::ks_two_sample(mine, ref);
    INFO("ks " << ks.d);
    REQUIRE(ks.d < 0.02);
}

TEST_CASE("euler marginal converges to the exact law", "[diffusion]") {
    const std::uint64_t n = 20'000;
    {
        erwlab::SdeConfig cfg;
        cfg.delta = 2.0;
        cfg.x0 = 1.0;
        cfg.dt = 1e-3;
        cfg.horizon = 1.0;
        const std::vector<double> eu = erwlab::euler_marginal_samples(cfg, n, 0xE13ull, 1);
        const std::vector<double> ex = erwlab::exact_marginal_samples(2.0, 1.0, 1.0, n, 0xEE2ull, 1);
        const erwlab::KsResult ks = erwlab::ks_two_sample(eu, ex);
        INFO("supercritical ks " << ks.d);
        REQUIRE(ks.d < 0.03);
    }
    {
        erwlab::SdeConfig cfg;
        cfg.delta = 0.5;
        cfg.x0 = 1.0;
        cfg.dt = 1e-4;
        cfg.horizon = 0.15;  // early enough that absorption has negligible mass
        const std::vector<double> eu = erwlab::euler_marginal_samples(cfg, n, 0x51Eull, 1);
        const std::vector<double> ex =
            erwlab::exact_marginal_samples(0.5, 1.0, 0.15, n, 0x5E2ull, 1);
        const erwlab::KsResult ks = erwlab::ks_two_sample(eu, ex);
        INFO("subcritical ks " << ks.d);
        REQUIRE(ks.d < 0.03);
    }
}

TEST_CASE("euler absorption frequency matches the exact atom", "[diffusion]") {
    erwlab::SdeConfig cfg;
    cfg.delta = 0.0;
    cfg.x0 = 1.0;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    const std::uint64_t n = 20'000;
    const erwlab::FunctionalSamples fs = erwlab::sample_functionals(cfg, n, 0xAB5ull, 1);
    const double got = static_cast<double>(fs.absorbed) / n;
    INFO("absorbed " << got);
    REQUIRE(std::fabs(got - std::exp(-1.0)) < 0.04);
}

TEST_CASE("after-hit modes agree up to the hit and differ after", "[diffusion]") {
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        erwlab::SdeConfig frozen;
        frozen.delta = 0.0;
        frozen.x0 = 0.3;
        frozen.dt = 1e-3;
        frozen.horizon = 5.0;
        erwlab::SdeConfig restart = frozen;
        restart.after_hit = erwlab::AfterHit::drift_restart;
        erwlab::Stream s1(erwlab::derive_key(0xF2ull, i)), s2(erwlab::derive_key(0xF2ull, i));
        erwlab::NormalSource n1, n2;
        const erwlab::EulerResult a = erwlab::simulate_euler(frozen, s1, n1);
        const erwlab::EulerResult b = erwlab::simulate_euler(restart, s2, n2);
        REQUIRE(a.absorbed == b.absorbed);
        if (!a.absorbed) continue;
        ++hits;
        REQUIRE(a.sigma0 == b.sigma0);
        REQUIRE(a.area == b.area);
        REQUIRE(a.y_end == 0.0);
        // zero drift and zero diffusion at the boundary: the state cannot recover
        REQUIRE(b.y_end <= 0.0);
    }
    REQUIRE(hits > 30);
    erwlab::Stream s(1);
    erwlab::NormalSource nrm;
    erwlab::SdeConfig bad;
    bad.dt = 0.0;
    REQUIRE_THROWS_AS(erwlab::simulate_euler(bad, s, nrm), std::invalid_argument);
}

TEST_CASE("hitting times scale linearly in the start point", "[diffusion]") {
    const erwlab::KsResult ks =
        erwlab::hitting_scaling_check(0.5, 1.0, 3.0, 5e-4, 60.0, 3'000, 0x5CA1Eull, 1);
    INFO("scaling ks " << ks.d << " over " << ks.n_a << "/" << ks.n_b);
    REQUIRE(ks.n_a > 2'000);
    REQUIRE(ks.n_b > 2'000);
    REQUIRE(ks.d < 0.06);
}

TEST_CASE("plateau estimator recovers the hitting-tail coefficient", "[diffusion]") {
    // At zero drift the hit time from x0 is x0 over a unit exponential, so
    // survival(t) = 1 - exp(-x0/t) and the t -> infinity coefficient is x0.
    const double x0 = 1.0, horizon = 400.0;
    erwlab::Stream s(0x9B1ull);
    std::vector<erwlab::Sample> sigma0;
    for (int i = 0; i < 200'000; ++i) {
        const double e = -std::log(1.0 - s.uniform());
        const double t = x0 / std::max(e, 1e-300);
        if (t >= horizon)
            sigma0.push_back({horizon, true});
        else
            sigma0.push_back({t, false});
    }
    const erwlab::PlateauEstimate est = erwlab::estimate_hit_coefficient(sigma0, 0.0, horizon);
    INFO("coefficient " << est.coefficient << " flatness " << est.flatness);
    REQUIRE(est.ok);
    REQUIRE(est.coefficient > 0.95);
    REQUIRE(est.coefficient < 1.02);
    REQUIRE(est.ts.size() == 12);
    REQUIRE_THROWS_AS(erwlab::estimate_hit_coefficient(sigma0, 1.0, horizon),
                      std::invalid_argument);
}

TEST_CASE("functional sampling censors at the horizon", "[diffusion]") {
    erwlab::SdeConfig cfg;
    cfg.delta = 0.5;
    cfg.x0 = 1.0;
    cfg.dt = 1e-4;
    cfg.horizon = 0.001;
    const erwlab::FunctionalSamples fs = erwlab::sample_functionals(cfg, 300, 0xCE2ull, 1);
    REQUIRE(fs.absorbed == 0);
    for (const erwlab::Sample& smp : fs.sigma0) {
        REQUIRE(smp.censored);
        REQUIRE(smp.value == cfg.horizon);
    }

    erwlab::SdeConfig high;
    high.delta = 5.0;
    high.x0 = 1.0;
    high.dt = 1e-3;
    high.horizon = 5.0;
    const erwlab::FunctionalSamples hs = erwlab::sample_functionals(high, 500, 0xD1Cull, 1);
    REQUIRE(hs.absorbed <= 5);
}
