// branching.hpp - branching processes attached to cookie walks.
//
// Generation k+1 reads the coin stream of site k+1: each individual's offspring
// count is the run of successes before the next failure in the site's trial
// sequence (cookie probabilities first, fair coins after).  With the same path
// key, these are bit-for-bit the coins the walk module consumes at that site.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "cookie_env.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace erwlab {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Offspring of v individuals at one site: successes before the v-th failure.
// The fair tail is drawn in one negative-binomial block unless exact_coins
// demands the trial-by-trial reading shared with the walk.
inline std::int64_t bp_step(const CookieLaw& law, std::size_t stack, std::int64_t v,
                            Stream& site, NormalSource& nrm, bool exact_coins = false) {
    if (v <= 0) return 0;
    std::int64_t succ = 0, fail = 0;
    const std::uint64_t m = static_cast<std::uint64_t>(law.m());
    while (site.position() <= m && fail < v) {
        const double p = law.prob(stack, static_cast<std::uint32_t>(site.position() - 1));
        if (site.uniform() < p)
            ++succ;
        else
            ++fail;
    }
    if (fail == v) return succ;
    if (exact_coins) {
        while (fail < v) {
            if (site.uniform() < 0.5)
                ++succ;
            else
                ++fail;
        }
        return succ;
    }
    return succ + neg_binomial_half(v - fail, site, nrm);
}

struct BpOptions {
    std::int64_t gen_cap = 1'000'000;
    std::int64_t value_cap = std::numeric_limits<std::int64_t>::max();
    bool record_trajectory = false;
    bool exact_coins = false;
};

struct BpPath {
    std::vector<std::int64_t> trajectory;  // filled only when requested
    std::int64_t extinction_time = -1;     // sigma_0; -1 when censored
    std::uint64_t total_progeny = 0;
    bool censored = false;        // hit gen_cap or value_cap before dying out
    bool progeny_overflow = false;
    std::int64_t final_value = 0;
};

inline BpPath simulate_bp(const CookieLaw& law, std::int64_t v0, std::uint64_t path_key,
                          const BpOptions& opt = {}) {
    if (v0 < 0) throw std::invalid_argument("simulate_bp: v0 must be >= 0");
    BpPath path;
    NormalSource nrm;
    unsigned __int128 progeny = static_cast<unsigned __int128>(v0);
    std::int64_t v = v0;
    if (opt.record_trajectory) path.trajectory.push_back(v);
    std::int64_t k = 0;
    while (v > 0) {
        if (k >= opt.gen_cap || v >= opt.value_cap) {
            path.censored = true;
            break;
        }
        Stream site(derive_key(path_key, static_cast<std::uint64_t>(k + 1)));
        const std::size_t stack = law.sample_index(site.uniform());
        v = bp_step(law, stack, v, site, nrm, opt.exact_coins);
        ++k;
        progeny += static_cast<unsigned __int128>(v);
        if (opt.record_trajectory) path.trajectory.push_back(v);
    }
    path.final_value = v;
    if (!path.censored) path.extinction_time = k;
    constexpr unsigned __int128 cap = static_cast<unsigned __int128>(
        std::numeric_limits<std::int64_t>::max());
    if (progeny > cap) {
        path.progeny_overflow = true;
        path.censored = true;
        path.total_progeny = std::numeric_limits<std::int64_t>::max();
    } else {
        path.total_progeny = static_cast<std::uint64_t>(progeny);
    }
    return path;
}

// Exact first and second moments of one generation's offspring sum from m
// individuals (the quantity whose centered mean is delta).  Dynamic programming
// over the biased trial prefix; the fair remainder enters in closed form.
struct OffspringMoments {
    double mean = 0.0;      // E[sum of the first m offspring counts]
    double variance = 0.0;  // the martingale's per-step variance contribution
    double delta = 0.0;     // mean - m; must reproduce delta_of(law)
};

inline OffspringMoments offspring_moments(const CookieLaw& law) {
    const int m = law.m();
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t st = 0; st < law.n_stacks(); ++st) {
        // state[f][s]: probability of f failures and s successes after t trials
        std::vector<std::vector<double>> state(m + 1, std::vector<double>(m + 1, 0.0));
        state[0][0] = 1.0;
        double se1 = 0.0, se2 = 0.0;
        for (int t = 0; t < m; ++t) {
            std::vector<std::vector<double>> next(m + 1, std::vector<double>(m + 1, 0.0));
            const double p = law.probs(st)[t];
            for (int f = 0; f < m; ++f) {
                for (int s = 0; s <= t; ++s) {
                    const double pr = state[f][s];
                    if (pr == 0.0) continue;
                    next[f][s + 1] += pr * p;
                    if (f + 1 == m) {  // m-th failure inside the prefix: sum is final
                        se1 += pr * (1.0 - p) * s;
                        se2 += pr * (1.0 - p) * s * s;
                    } else {
                        next[f + 1][s] += pr * (1.0 - p);
                    }
                }
            }
            state.swap(next);
        }
        for (int f = 0; f < m; ++f) {
            for (int s = 0; s <= m; ++s) {
                const double pr = state[f][s];
                if (pr == 0.0) continue;
                // remainder: successes before (m - f) fair failures, mean r, variance 2r
                const double r = m - f;
                se1 += pr * (s + r);
                se2 += pr * (s * s + 2.0 * s * r + (r * r + 2.0 * r));
            }
        }
        e1 += law.weight(st) * se1;
        e2 += law.weight(st) * se2;
    }
    OffspringMoments mo;
    mo.mean = e1;
    mo.variance = e2 - e1 * e1;
    mo.delta = e1 - m;
    return mo;
}

// Branching process without absorption: every generation draws at least m
// individuals' offspring, so the state can dip as low as -m.
struct ModifiedBpPath {
    std::vector<std::int64_t> trajectory;
    std::vector<double> martingale;   // V_k - k * delta
    std::vector<double> compensator;  // v * k + 2 * sum of (V_j - m)^+ over j < k
    std::int64_t sigma0 = -1;         // first k with V_k <= 0, if reached
};

inline ModifiedBpPath simulate_modified_bp(const CookieLaw& law, std::int64_t v0,
                                           std::int64_t n_steps, std::uint64_t path_key) {
    const OffspringMoments mo = offspring_moments(law);
    const std::int64_t m = law.m();
    ModifiedBpPath path;
    path.trajectory.reserve(n_steps + 1);
    path.martingale.reserve(n_steps + 1);
    path.compensator.reserve(n_steps + 1);
    NormalSource nrm;
    std::int64_t v = v0;
    double comp = 0.0;
    for (std::int64_t k = 0; k <= n_steps; ++k) {
        path.trajectory.push_back(v);
        path.martingale.push_back(static_cast<double>(v) - static_cast<double>(k) * mo.delta);
        path.compensator.push_back(comp);
        if (v <= 0 && path.sigma0 < 0) path.sigma0 = k;
        if (k == n_steps) break;
        comp += mo.variance + 2.0 * static_cast<double>(std::max<std::int64_t>(v - m, 0));
        const std::int64_t draws = std::max(v, m);
        Stream site(derive_key(path_key, static_cast<std::uint64_t>(k + 1)));
        const std::size_t stack = law.sample_index(site.uniform());
        v = v + bp_step(law, stack, draws, site, nrm) - draws;
    }
    return path;
}

struct HarmonicEstimate {
    std::vector<std::int64_t> n_values;
    std::vector<double> h_hat;
    std::vector<WilsonInterval> intervals;
    double exponent = 0.0;  // decay rate of h(n)
    double exponent_se = 0.0;
    bool degenerate = false;  // drift <= 1: extinction is certain, h is identically 1
    std::uint64_t ambiguous = 0;  // paths that ran out of generations undecided
};

// Extinction probability h(n) of the plain process from n, over a grid of n.
// Paths that climb past escape_mult * n are counted as surviving; for drift
// above 1 this misclassifies a fraction on the order of escape_mult^(1-delta).
inline HarmonicEstimate estimate_h(const CookieLaw& law, const std::vector<std::int64_t>& grid,
                                   std::uint64_t runs_per_point, std::int64_t gen_cap,
                                   std::int64_t escape_mult, std::uint64_t seed,
                                   unsigned workers = 1) {
    HarmonicEstimate est;
    est.n_values = grid;
    est.degenerate = delta_of(law) <= 1.0;
    std::vector<double> lx, ly, lw;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::int64_t n = grid[gi];
        if (n < 1) throw std::invalid_argument("estimate_h: grid values must be >= 1");
        BpOptions opt;
        opt.gen_cap = gen_cap;
        opt.value_cap = escape_mult * n;
        std::atomic<std::uint64_t> extinct{0}, undecided{0};
        const std::uint64_t point_seed = derive_key(seed, gi);
        parallel_chunks(runs_per_point, workers, [&](std::uint64_t lo, std::uint64_t hi) {
            std::uint64_t loc_e = 0, loc_u = 0;
            for (std::uint64_t i = lo; i < hi; ++i) {
                const BpPath p = simulate_bp(law, n, derive_key(point_seed, i), opt);
                if (p.extinction_time >= 0)
                    ++loc_e;
                else if (p.final_value < opt.value_cap)
                    ++loc_u;  // ran out of generations while still small
            }
            extinct += loc_e;
            undecided += loc_u;
        });
        est.ambiguous += undecided.load();
        const double h = static_cast<double>(extinct.load()) / runs_per_point;
        est.h_hat.push_back(h);
        est.intervals.push_back(wilson_interval(extinct.load(), runs_per_point));
        if (!est.degenerate && extinct.load() > 0 && h < 1.0) {
            lx.push_back(std::log(static_cast<double>(n)));
            ly.push_back(std::log(h));
            lw.push_back(static_cast<double>(extinct.load()));
        }
    }
    if (!est.degenerate && lx.size() >= 3) {
        const LineFit f = weighted_line_fit(lx, ly, lw);
        est.exponent = -f.slope;
        est.exponent_se = f.slope_se;
    }
    return est;
}

struct ConditionedOptions {
    std::int64_t gen_cap = 1'000'000;
    std::int64_t value_cap = 200'000;   // climbing past this counts as survival
    std::int64_t record_gen = -1;       // if >= 0, capture the value at this generation
    double min_acceptance = 1e-4;
    std::uint64_t max_attempts = 0;  // 0: derived from the target and min_acceptance
};

struct ConditionedBatch {
    std::vector<std::int64_t> sigma0;
    std::vector<std::uint64_t> progeny;
    std::vector<std::int64_t> at_gen;  // aligned with sigma0 when record_gen >= 0
    std::uint64_t attempts = 0;
    std::uint64_t accepted = 0;
    WilsonInterval acceptance;
};

// Paths of the process started at v0 conditioned on dying out, by rejection:
// run the plain process, keep extinct paths.  Below drift 1 extinction is
// almost sure and nothing is rejected.
inline ConditionedBatch conditioned_sample(const CookieLaw& law, std::int64_t v0,
                                           std::uint64_t n_target, std::uint64_t seed,
                                           const ConditionedOptions& opt = {},
                                           unsigned workers = 1) {
    ConditionedBatch batch;
    batch.sigma0.reserve(n_target);
    batch.progeny.reserve(n_target);
    const std::uint64_t hard_cap = opt.max_attempts > 0
                                       ? opt.max_attempts
                                       : static_cast<std::uint64_t>(
                                             static_cast<double>(n_target) / opt.min_acceptance);
    BpOptions bopt;
    bopt.gen_cap = opt.gen_cap;
    bopt.value_cap = opt.value_cap;
    const bool capture = opt.record_gen >= 0;
    bopt.record_trajectory = capture;

    std::uint64_t next_attempt = 0;
    while (batch.accepted < n_target) {
        if (next_attempt >= hard_cap) {
            throw BudgetError("conditioned_sample: acceptance rate below " +
                              std::to_string(opt.min_acceptance) +
                              " after " + std::to_string(next_attempt) +
                              " attempts; raise the budget or lower v0");
        }
        const std::uint64_t block = std::min<std::uint64_t>(
            hard_cap - next_attempt,
            std::max<std::uint64_t>(4 * (n_target - batch.accepted), 1024));
        struct Hit {
            std::uint64_t attempt;
            std::int64_t sigma0;
            std::uint64_t progeny;
            std::int64_t at_gen;
        };
        std::vector<Hit> merged;
        std::mutex merge_mtx;
        const std::uint64_t base = next_attempt;
        parallel_chunks(block, workers, [&](std::uint64_t lo, std::uint64_t hi) {
            std::vector<Hit> local;
            for (std::uint64_t i = lo; i < hi; ++i) {
                const std::uint64_t attempt = base + i;
                const BpPath p = simulate_bp(law, v0, derive_key(seed, attempt), bopt);
                if (p.extinction_time < 0) continue;
                Hit h;
                h.attempt = attempt;
                h.sigma0 = p.extinction_time;
                h.progeny = p.total_progeny;
                h.at_gen = 0;
                if (capture) {
                    const std::size_t g = static_cast<std::size_t>(opt.record_gen);
                    h.at_gen = g < p.trajectory.size() ? p.trajectory[g] : 0;
                }
                local.push_back(h);
            }
            const std::lock_guard<std::mutex> lk(merge_mtx);
            merged.insert(merged.end(), local.begin(), local.end());
        });
        std::sort(merged.begin(), merged.end(),
                  [](const Hit& a, const Hit& b) { return a.attempt < b.attempt; });
        for (const Hit& h : merged) {
            if (batch.accepted == n_target) break;
            batch.sigma0.push_back(h.sigma0);
            batch.progeny.push_back(h.progeny);
            if (capture) batch.at_gen.push_back(h.at_gen);
            ++batch.accepted;
            batch.attempts = h.attempt + 1;
        }
        next_attempt += block;
        if (batch.accepted < n_target) batch.attempts = next_attempt;
    }
    batch.acceptance = wilson_interval(batch.accepted, batch.attempts);
    return batch;
}

// Tail fit of total progeny under the extinction conditioning.
inline TailFit progeny_tail(const CookieLaw& law, std::int64_t v0, std::uint64_t n_paths,
                            std::uint64_t seed, const ConditionedOptions& copt = {},
                            const TailFitOptions& fopt = {}, unsigned workers = 1) {
    const ConditionedBatch b = conditioned_sample(law, v0, n_paths, seed, copt, workers);
    std::vector<Sample> samples;
    samples.reserve(b.progeny.size());
    for (std::uint64_t p : b.progeny) samples.push_back({static_cast<double>(p), false});
    return fit_tail(build_survival(samples), fopt);
}

struct OvershootReport {
    std::vector<std::int64_t> overshoots;  // V at first crossing minus x, crossings only
    std::uint64_t crossed = 0;
    std::uint64_t runs = 0;
    double mean_overshoot = 0.0;
    bool empty = false;  // no valid start site exists (x < 2)
};

// Overshoot over level x of the process started at ceil(x/2), on paths that
// reach x before dying out.
inline OvershootReport overshoot_stat(const CookieLaw& law, std::int64_t x, std::uint64_t runs,
                                      std::uint64_t seed, std::int64_t gen_cap = 1'000'000) {
    OvershootReport rep;
    rep.runs = runs;
    const std::int64_t z = (x + 1) / 2;
    if (!(z >= 1 && z < x)) {
        rep.empty = true;
        return rep;
    }
    NormalSource nrm;
    double sum = 0.0;
    for (std::uint64_t i = 0; i < runs; ++i) {
        const std::uint64_t key = derive_key(seed, i);
        std::int64_t v = z;
        for (std::int64_t k = 0; v > 0 && k < gen_cap; ++k) {
            Stream site(derive_key(key, static_cast<std::uint64_t>(k + 1)));
            const std::size_t stack = law.sample_index(site.uniform());
            v = bp_step(law, stack, v, site, nrm);
            if (v >= x) {
                rep.overshoots.push_back(v - x);
                ++rep.crossed;
                sum += static_cast<double>(v - x);
                break;
            }
        }
    }
    if (rep.crossed > 0) rep.mean_overshoot = sum / static_cast<double>(rep.crossed);
    return rep;
}

}  // namespace erwlab
