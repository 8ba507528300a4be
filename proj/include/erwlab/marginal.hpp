// marginal.hpp - one-time marginals of the rescaled branching process against
// the diffusion, on the scale value-at-generation(n*t) / n.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "branching.hpp"
#include "diffusion.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace erwlab {

// Plain process from n, stopped at generation floor(n*t); extinct paths sit at 0.
inline std::vector<double> bp_marginal_samples(const CookieLaw& law, std::int64_t n, double t,
                                               std::uint64_t n_paths, std::uint64_t seed,
                                               unsigned workers = 1) {
    const std::int64_t gen = static_cast<std::int64_t>(std::floor(n * t));
    std::vector<double> out(n_paths);
    BpOptions opt;
    opt.gen_cap = gen;  // stop exactly at the readout generation
    parallel_paths(n_paths, workers, [&](std::uint64_t i) {
        const BpPath p = simulate_bp(law, n, derive_key(seed, i), opt);
        out[i] = static_cast<double>(p.final_value) / static_cast<double>(n);
    });
    return out;
}

// Extinction-conditioned process from n, read at generation floor(n*t).
inline std::vector<double> bp_marginal_samples_conditioned(const CookieLaw& law, std::int64_t n,
                                                           double t, std::uint64_t n_accepted,
                                                           std::uint64_t seed,
                                                           ConditionedOptions copt = {},
                                                           unsigned workers = 1) {
    copt.record_gen = static_cast<std::int64_t>(std::floor(n * t));
    const ConditionedBatch b = conditioned_sample(law, n, n_accepted, seed, copt, workers);
    std::vector<double> out;
    out.reserve(b.at_gen.size());
    for (std::int64_t v : b.at_gen) out.push_back(static_cast<double>(v) / static_cast<double>(n));
    return out;
}

}  // namespace erwlab
