// walk.hpp - nearest-neighbour walks in cookie environments.
//
// Environments are sampled lazily: a site draws its stack the first time the
// walk arrives, from a stream keyed by (path, site).  Visit i of a site reads
// coin i of that stream, so a branching process handed the same path key reads
// the exact same coins.
#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cookie_env.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace erwlab {

struct WalkConfig {
    std::int64_t start = 1;
    std::int64_t step_cap = 1'000'000;
    std::int64_t range_cap = 1'000'000;
};

struct ExcursionOutcome {
    std::int64_t duration = 0;  // steps taken (T_0 when returned, cap when censored)
    std::int64_t depth = 0;     // running max of the position before absorption
    bool returned = false;
    bool censored = false;
};

struct ReturnOutcome {
    std::int64_t duration = 0;  // first return time R when returned
    std::int64_t max_abs = 0;
    bool returned = false;
    bool censored = false;
};

namespace detail {

struct SiteSlot {
    std::uint64_t key = 0;
    std::uint32_t stack = 0;
    std::uint32_t visits = 0;
    std::uint32_t epoch = 0;
};

}  // namespace detail

// Reusable per-worker site table; avoids reallocating across runs.
class WalkArena {
public:
    void begin_run() {
        ++epoch_;
        if (epoch_ == 0) {  // wrapped: invalidate everything the slow way
            pos_.assign(pos_.size(), {});
            neg_.assign(neg_.size(), {});
            origin_ = {};
            epoch_ = 1;
        }
    }

    detail::SiteSlot& slot(std::int64_t z) {
        if (z > 0) {
            const std::size_t i = static_cast<std::size_t>(z - 1);
            if (i >= pos_.size()) pos_.resize(std::max<std::size_t>(i + 64, pos_.size() * 2));
            return pos_[i];
        }
        if (z < 0) {
            const std::size_t i = static_cast<std::size_t>(-z - 1);
            if (i >= neg_.size()) neg_.resize(std::max<std::size_t>(i + 64, neg_.size() * 2));
            return neg_[i];
        }
        return origin_;
    }

    std::uint32_t epoch() const { return epoch_; }

private:
    std::vector<detail::SiteSlot> pos_, neg_;
    detail::SiteSlot origin_;
    std::uint32_t epoch_ = 0;
};

namespace detail {

// One step from site z: consumes the site's next cookie.  Returns +1 or -1.
inline int step_at(const CookieLaw& law, WalkArena& arena, std::uint64_t path_key,
                   std::int64_t z) {
    SiteSlot& s = arena.slot(z);
    if (s.epoch != arena.epoch()) {
        s.epoch = arena.epoch();
        s.key = derive_key(path_key, static_cast<std::uint64_t>(z));
        s.stack = static_cast<std::uint32_t>(law.sample_index(keyed_uniform(s.key, 0)));
        s.visits = 0;
    }
    const std::uint32_t visit = s.visits++;
    const double p = law.prob(s.stack, visit);
    return keyed_uniform(s.key, visit + 1) < p ? 1 : -1;
}

}  // namespace detail

// Excursion from cfg.start >= 1, absorbed at 0.  Censored when step_cap steps
// pass or the walk touches range_cap (the environment is not tracked further).
inline ExcursionOutcome run_excursion(const CookieLaw& law, const WalkConfig& cfg,
                                      std::uint64_t path_key, WalkArena& arena) {
    if (cfg.start < 1) throw std::invalid_argument("run_excursion: start must be >= 1");
    arena.begin_run();
    ExcursionOutcome out;
    std::int64_t x = cfg.start;
    out.depth = x;
    while (true) {
        if (out.duration >= cfg.step_cap) {
            out.censored = true;
            return out;
        }
        x += detail::step_at(law, arena, path_key, x);
        ++out.duration;
        if (x == 0) {
            out.returned = true;
            return out;
        }
        if (x > out.depth) out.depth = x;
        if (x >= cfg.range_cap) {
            out.censored = true;
            return out;
        }
    }
}

inline ExcursionOutcome run_excursion(const CookieLaw& law, const WalkConfig& cfg,
                                      std::uint64_t path_key) {
    WalkArena arena;
    return run_excursion(law, cfg, path_key, arena);
}

// Walk from the origin until its first return to 0.
inline ReturnOutcome run_return(const CookieLaw& law, const WalkConfig& cfg,
                                std::uint64_t path_key, WalkArena& arena) {
    arena.begin_run();
    ReturnOutcome out;
    std::int64_t x = 0;
    while (true) {
        if (out.duration >= cfg.step_cap) {
            out.censored = true;
            return out;
        }
        x += detail::step_at(law, arena, path_key, x);
        ++out.duration;
        if (x == 0) {
            out.returned = true;
            return out;
        }
        const std::int64_t ax = x < 0 ? -x : x;
        if (ax > out.max_abs) out.max_abs = ax;
        if (ax >= cfg.range_cap) {
            out.censored = true;
            return out;
        }
    }
}

inline ReturnOutcome run_return(const CookieLaw& law, const WalkConfig& cfg,
                                std::uint64_t path_key) {
    WalkArena arena;
    return run_return(law, cfg, path_key, arena);
}

struct EscapeEstimate {
    WilsonInterval interval;
    std::uint64_t escaped = 0;
    std::uint64_t runs = 0;
};

// Fraction of excursions censored while at depth >= range_cap.  A lower bound
// on the escape probability that is consistent as both caps grow.
inline EscapeEstimate estimate_escape(const CookieLaw& law, const WalkConfig& cfg,
                                      std::uint64_t runs, std::uint64_t seed,
                                      unsigned workers = 1) {
    std::atomic<std::uint64_t> escaped{0};
    parallel_chunks(runs, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        WalkArena arena;
        std::uint64_t local = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            const ExcursionOutcome o = run_excursion(law, cfg, derive_key(seed, i), arena);
            if (o.censored && o.depth >= cfg.range_cap) ++local;
        }
        escaped += local;
    });
    EscapeEstimate e;
    e.escaped = escaped.load();
    e.runs = runs;
    e.interval = wilson_interval(e.escaped, runs);
    return e;
}

struct ExcursionSamples {
    std::vector<Sample> durations;  // censored entries carry the cap value
    std::vector<Sample> depths;
    std::uint64_t returned = 0;
    std::uint64_t censored = 0;
};

inline ExcursionSamples collect_excursions(const CookieLaw& law, const WalkConfig& cfg,
                                           std::uint64_t runs, std::uint64_t seed,
                                           unsigned workers = 1) {
    ExcursionSamples out;
    out.durations.resize(runs);
    out.depths.resize(runs);
    std::atomic<std::uint64_t> returned{0};
    parallel_chunks(runs, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        WalkArena arena;
        std::uint64_t local_ret = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            const ExcursionOutcome o = run_excursion(law, cfg, derive_key(seed, i), arena);
            out.durations[i] = {static_cast<double>(o.duration), o.censored};
            out.depths[i] = {static_cast<double>(o.depth), o.censored};
            if (o.returned) ++local_ret;
        }
        returned += local_ret;
    });
    out.returned = returned.load();
    out.censored = runs - out.returned;
    return out;
}

}  // namespace erwlab
