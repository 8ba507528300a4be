#include <cstdint>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "erwlab/experiments.hpp"

TEST_CASE("sweep point recovers the zero-drift exponent triple", "[experiments]") {
    const erwlab::CookieLaw law = erwlab::CookieLaw::fair();
    const erwlab::SweepPoint pt = erwlab::sweep_point(law, 3'000, 0x53EE7ull);
    REQUIRE(pt.delta == 0.0);
    REQUIRE(pt.target_depth == 1.0);
    REQUIRE(pt.target_duration == 0.5);
    REQUIRE(pt.target_return == 0.5);
    INFO("depth " << pt.depth.exponent << " duration " << pt.duration.exponent << " return "
                  << pt.ret.exponent);
    REQUIRE(pt.depth.exponent == Catch::Approx(1.0).margin(0.25));
    REQUIRE(pt.duration.exponent == Catch::Approx(0.5).margin(0.2));
    REQUIRE(pt.ret.exponent == Catch::Approx(0.5).margin(0.2));
}

TEST_CASE("phase sweep carries per-point targets", "[experiments]") {
    const std::vector<erwlab::SweepPoint> pts = erwlab::phase_sweep({0.25}, 1'500, 0x9A3Eull);
    REQUIRE(pts.size() == 1);
    REQUIRE(pts[0].delta == Catch::Approx(0.25).margin(1e-12));
    REQUIRE(pts[0].target_depth == Catch::Approx(0.75));
    REQUIRE(pts[0].target_duration == Catch::Approx(0.375));
    REQUIRE(pts[0].target_return == Catch::Approx(0.375));
    REQUIRE(pts[0].depth.exponent == Catch::Approx(0.75).margin(0.3));
}

TEST_CASE("truncated return means separate the cap scales", "[experiments]") {
    const erwlab::CookieLaw law = erwlab::CookieLaw::fair();
    const std::vector<erwlab::CensoredMeanPoint> pts =
        erwlab::mean_r_censored(law, {100, 10'000}, 20'000, 0x43AAull, 1);
    REQUIRE(pts.size() == 2);
    for (const erwlab::CensoredMeanPoint& p : pts) {
        REQUIRE(p.runs == 20'000);
        REQUIRE(p.returned <= p.runs);
        REQUIRE(p.returned > 0);
        REQUIRE(p.se >= 0.0);
        REQUIRE(p.truncated_mean > 0.0);
    }
    // the return tail decays like one over the square root, so the truncated
    // mean grows like the square root of the cap: the ratio should be near 10
    INFO("means " << pts[0].truncated_mean << " " << pts[1].truncated_mean);
    REQUIRE(pts[1].truncated_mean > 3.0 * pts[0].truncated_mean);
    REQUIRE_THROWS_AS(erwlab::mean_r_censored(law, {0}, 10, 1, 1), std::invalid_argument);
}

TEST_CASE("content hashing matches the reference vectors", "[experiments]") {
    REQUIRE(erwlab::fnv1a64("") == 0xcbf29ce484222325ull);
    REQUIRE(erwlab::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    REQUIRE(erwlab::fnv1a64("ab") != erwlab::fnv1a64("ba"));
}

TEST_CASE("run metadata is stable and distinguishes configs", "[experiments]") {
    const erwlab::RunMeta a = erwlab::make_meta("{\"m\": 1}", 7);
    const erwlab::RunMeta b = erwlab::make_meta("{\"m\": 1}", 7);
    const erwlab::RunMeta c = erwlab::make_meta("{\"m\": 2}", 7);
    REQUIRE(a.config_hash == b.config_hash);
    REQUIRE(a.config_hash != c.config_hash);
    REQUIRE(a.seed == 7);
    REQUIRE(a.version == std::string(erwlab::kContentVersion));
}
