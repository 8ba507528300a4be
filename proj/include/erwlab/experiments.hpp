// experiments.hpp - composed studies: exponent sweeps across the drift axis
// and truncated return-time means.
//
// Sweeps sample excursion observables through the branching representation
// (exact in law by the shared-coin construction; the coupling suite checks
// that path by path): excursion depth is the extinction generation, excursion
// duration is 2 * progeny - 1, and the return time from the origin mixes the
// two directions, the left one through the mirrored law.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "branching.hpp"
#include "cookie_env.hpp"
#include "stats.hpp"
#include "walk.hpp"

namespace erwlab {

inline constexpr const char* kContentVersion = "erwlab-1";

struct SweepPoint {
    double delta = 0.0;
    TailFit depth;
    TailFit duration;
    TailFit ret;
    double target_depth = 0.0;
    double target_duration = 0.0;
    double target_return = 0.0;
};

inline SweepPoint sweep_point(const CookieLaw& law, std::uint64_t paths_per_direction,
                              std::uint64_t seed, const ConditionedOptions& copt = {},
                              const TailFitOptions& fopt = {}, unsigned workers = 1) {
    SweepPoint pt;
    pt.delta = law.delta();
    const CookieLaw left = mirror(law);
    const ConditionedBatch br =
        conditioned_sample(law, 1, paths_per_direction, derive_key(seed, 1), copt, workers);
    const ConditionedBatch bl =
        conditioned_sample(left, 1, paths_per_direction, derive_key(seed, 2), copt, workers);

    std::vector<Sample> depth, duration, ret;
    depth.reserve(br.sigma0.size());
    for (std::int64_t s : br.sigma0) depth.push_back({static_cast<double>(s), false});
    duration.reserve(br.progeny.size());
    ret.reserve(br.progeny.size() + bl.progeny.size());
    for (std::uint64_t p : br.progeny) {
        duration.push_back({2.0 * static_cast<double>(p) - 1.0, false});
        ret.push_back({2.0 * static_cast<double>(p), false});
    }
    for (std::uint64_t p : bl.progeny) ret.push_back({2.0 * static_cast<double>(p), false});

    pt.depth = fit_tail(build_survival(depth), fopt);
    pt.duration = fit_tail(build_survival(duration), fopt);
    pt.ret = fit_tail(build_survival(ret), fopt);
    const double d = pt.delta;
    pt.target_depth = std::abs(d - 1.0);
    pt.target_duration = std::abs(d - 1.0) / 2.0;
    pt.target_return = std::min(std::abs(d - 1.0), std::abs(d + 1.0)) / 2.0;
    return pt;
}

// One point per drift value, each through the minimal single-stack law that
// realizes it.
inline std::vector<SweepPoint> phase_sweep(const std::vector<double>& deltas,
                                           std::uint64_t paths_per_direction, std::uint64_t seed,
                                           const ConditionedOptions& copt = {},
                                           const TailFitOptions& fopt = {},
                                           unsigned workers = 1) {
    std::vector<SweepPoint> points;
    points.reserve(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const CookieLaw law = CookieLaw::equal_strength(deltas[i]);
        points.push_back(
            sweep_point(law, paths_per_direction, derive_key(seed, i), copt, fopt, workers));
    }
    return points;
}

struct CensoredMeanPoint {
    std::int64_t cap = 0;
    std::uint64_t runs = 0;
    std::uint64_t returned = 0;
    double truncated_mean = 0.0;  // mean of R over all runs, counting R > cap as 0
    double se = 0.0;
};

// Truncated mean of the return time at a ladder of caps.  Whether the points
// stabilize or keep growing with the cap separates a summable return tail
// from a non-summable one; each cap gets its own honest set of runs.
inline std::vector<CensoredMeanPoint> mean_r_censored(const CookieLaw& law,
                                                      const std::vector<std::int64_t>& caps,
                                                      std::uint64_t runs_per_cap,
                                                      std::uint64_t seed, unsigned workers = 1) {
    std::vector<CensoredMeanPoint> points;
    for (std::size_t ci = 0; ci < caps.size(); ++ci) {
        const std::int64_t cap = caps[ci];
        if (cap < 1) throw std::invalid_argument("mean_r_censored: caps must be >= 1");
        WalkConfig cfg;
        cfg.step_cap = cap;
        cfg.range_cap = cap + 2;
        std::atomic<std::uint64_t> sum{0}, sumsq{0}, returned{0};
        const std::uint64_t cap_seed = derive_key(seed, ci);
        parallel_chunks(runs_per_cap, workers, [&](std::uint64_t lo, std::uint64_t hi) {
            WalkArena arena;
            std::uint64_t ls = 0, lq = 0, lr = 0;
            for (std::uint64_t i = lo; i < hi; ++i) {
                const ReturnOutcome r =
                    run_return(law, cfg, derive_key(cap_seed, i), arena);
                if (!r.returned) continue;
                const std::uint64_t v = static_cast<std::uint64_t>(r.duration);
                ls += v;
                lq += v * v;
                ++lr;
            }
            sum += ls;
            sumsq += lq;
            returned += lr;
        });
        CensoredMeanPoint pt;
        pt.cap = cap;
        pt.runs = runs_per_cap;
        pt.returned = returned.load();
        const double n = static_cast<double>(runs_per_cap);
        pt.truncated_mean = static_cast<double>(sum.load()) / n;
        const double var =
            static_cast<double>(sumsq.load()) / n - pt.truncated_mean * pt.truncated_mean;
        pt.se = std::sqrt(std::max(var, 0.0) / n);
        points.push_back(pt);
    }
    return points;
}

inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

struct RunMeta {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version = kContentVersion;
};

inline RunMeta make_meta(const std::string& config_text, std::uint64_t seed) {
    RunMeta m;
    m.config_hash = fnv1a64(config_text);
    m.seed = seed;
    return m;
}

}  // namespace erwlab
