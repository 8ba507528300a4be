// diffusion.hpp - the scaling limit: dY = delta dt + sqrt(2 Y+) dB.
//
// Doubling the state gives a squared Bessel process of dimension 2*delta, so
// the transition law is Poisson-mixed Gamma and is available exactly; the
// Euler scheme exists to be checked against it, not the other way round.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "stats.hpp"

namespace erwlab {

enum class AfterHit {
    frozen,         // absorb: the state stays at zero
    drift_restart,  // keep integrating; at zero the dynamics degenerate to pure drift
};

struct SdeConfig {
    double delta = 0.0;
    double x0 = 1.0;
    double dt = 1e-4;
    double horizon = 10.0;
    AfterHit after_hit = AfterHit::frozen;
};

struct EulerResult {
    double sigma0 = -1.0;  // first-hit time of 0, grid-interpolated; -1 if not hit
    double area = 0.0;     // integral of the path up to sigma0, or up to the horizon
    double y_end = 0.0;
    bool absorbed = false;
};

// One Euler path.  The hitting time is placed by linear interpolation inside
// the crossing step and the area gets the matching triangle sliver.
inline EulerResult simulate_euler(const SdeConfig& cfg, Stream& s, NormalSource& nrm) {
    if (cfg.dt <= 0.0 || cfg.horizon <= 0.0) throw std::invalid_argument("simulate_euler: dt and horizon must be positive");
    EulerResult res;
    const double sqdt = std::sqrt(cfg.dt);
    const std::uint64_t n_steps = static_cast<std::uint64_t>(std::ceil(cfg.horizon / cfg.dt));
    double y = cfg.x0;
    bool hit = false;
    for (std::uint64_t k = 0; k < n_steps; ++k) {
        if (hit && cfg.after_hit == AfterHit::frozen) break;
        const double yp = std::max(y, 0.0);
        const double ynext = y + cfg.delta * cfg.dt + std::sqrt(2.0 * yp) * sqdt * nrm(s);
        if (!hit && y > 0.0 && ynext <= 0.0) {
            const double frac = y / (y - ynext);
            res.sigma0 = (static_cast<double>(k) + frac) * cfg.dt;
            res.area += 0.5 * y * frac * cfg.dt;
            res.absorbed = true;
            hit = true;
            y = cfg.after_hit == AfterHit::frozen ? 0.0 : ynext;
            continue;
        }
        if (!hit) res.area += 0.5 * (std::max(y, 0.0) + std::max(ynext, 0.0)) * cfg.dt;
        y = ynext;
    }
    res.y_end = hit && cfg.after_hit == AfterHit::frozen ? 0.0 : y;
    return res;
}

// Exact one-time marginal of the unstopped process: a Gamma variable with a
// Poisson-randomized shape.  For delta >= 1 the path never reaches zero, so
// this is also the stopped law; at delta == 0 zero is already absorbing and
// the N == 0 branch is the absorption atom.
inline double exact_marginal_draw(double delta, double x0, double t, Stream& s,
                                  NormalSource& nrm) {
    if (t <= 0.0) throw std::invalid_argument("exact_marginal_draw: t must be positive");
    if (delta < 0.0 || x0 < 0.0) throw std::invalid_argument("exact_marginal_draw: delta and x0 must be >= 0");
    const std::int64_t n = x0 > 0.0 ? poisson_draw(x0 / t, s) : 0;
    const double shape = delta + static_cast<double>(n);
    if (shape == 0.0) return 0.0;
    return t * gamma_draw(shape, s, nrm);
}

struct FunctionalSamples {
    std::vector<Sample> sigma0;  // censored entries sit at the horizon
    std::vector<Sample> area;    // censored entries carry the area accrued so far
    std::uint64_t n_paths = 0;
    std::uint64_t absorbed = 0;
};

inline FunctionalSamples sample_functionals(const SdeConfig& cfg, std::uint64_t n_paths,
                                            std::uint64_t seed, unsigned workers = 1) {
    FunctionalSamples out;
    out.n_paths = n_paths;
    out.sigma0.resize(n_paths);
    out.area.resize(n_paths);
    std::atomic<std::uint64_t> absorbed{0};
    SdeConfig stop_cfg = cfg;
    stop_cfg.after_hit = AfterHit::frozen;  // functionals only run to the hit
    parallel_chunks(n_paths, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t loc = 0;
        for (std::uint64_t i = lo; i < hi; ++i) {
            Stream s(derive_key(seed, i));
            NormalSource nrm;
            const EulerResult r = simulate_euler(stop_cfg, s, nrm);
            if (r.absorbed) {
                out.sigma0[i] = {r.sigma0, false};
                out.area[i] = {r.area, false};
                ++loc;
            } else {
                out.sigma0[i] = {cfg.horizon, true};
                out.area[i] = {r.area, true};
            }
        }
        absorbed += loc;
    });
    out.absorbed = absorbed.load();
    return out;
}

inline std::vector<double> euler_marginal_samples(const SdeConfig& cfg, std::uint64_t n_paths,
                                                 std::uint64_t seed, unsigned workers = 1) {
    std::vector<double> out(n_paths);
    parallel_chunks(n_paths, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Stream s(derive_key(seed, i));
            NormalSource nrm;
            out[i] = simulate_euler(cfg, s, nrm).y_end;
        }
    });
    return out;
}

inline std::vector<double> exact_marginal_samples(double delta, double x0, double t,
                                                 std::uint64_t n_paths, std::uint64_t seed,
                                                 unsigned workers = 1) {
    std::vector<double> out(n_paths);
    parallel_chunks(n_paths, workers, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Stream s(derive_key(seed, i));
            NormalSource nrm;
            out[i] = exact_marginal_draw(delta, x0, t, s, nrm);
        }
    });
    return out;
}

// Hitting times scale linearly in the start point (state c * x at time c * t
// matches state x at time t in law), so sigma0 from x0_a, multiplied by
// x0_b / x0_a, must match sigma0 from x0_b.  Censored paths are dropped on
// both sides; keep the censored fraction small when using this.
inline KsResult hitting_scaling_check(double delta, double x0_a, double x0_b, double dt,
                                      double horizon_b, std::uint64_t n_paths,
                                      std::uint64_t seed, unsigned workers = 1) {
    if (x0_a <= 0.0 || x0_b <= 0.0) throw std::invalid_argument("hitting_scaling_check: start points must be positive");
    const double ratio = x0_b / x0_a;
    SdeConfig ca;
    ca.delta = delta;
    ca.x0 = x0_a;
    ca.dt = dt;
    ca.horizon = horizon_b / ratio;
    SdeConfig cb = ca;
    cb.x0 = x0_b;
    cb.dt = dt * ratio;  // keep the step count per unit of rescaled time equal
    cb.horizon = horizon_b;
    const FunctionalSamples fa = sample_functionals(ca, n_paths, derive_key(seed, 1), workers);
    const FunctionalSamples fb = sample_functionals(cb, n_paths, derive_key(seed, 2), workers);
    std::vector<double> a, b;
    for (const Sample& smp : fa.sigma0)
        if (!smp.censored) a.push_back(smp.value * ratio);
    for (const Sample& smp : fb.sigma0)
        if (!smp.censored) b.push_back(smp.value);
    return ks_two_sample(a, b);
}

struct PlateauEstimate {
    std::vector<double> ts;
    std::vector<double> values;  // survival(t) * t^(1 - delta) at each grid time
    double coefficient = 0.0;
    double flatness = 1.0;  // relative spread across the grid; small means a real plateau
    bool ok = false;
};

// Leading tail coefficient of the hitting time: survival(t) ~ a * t^(delta - 1)
// for drift below 1.  Scanned over [horizon/20, horizon/2], where censoring at
// the horizon cannot bias the counts.
inline PlateauEstimate estimate_hit_coefficient(const std::vector<Sample>& sigma0,
                                                double delta, double horizon,
                                                std::size_t grid_points = 12) {
    if (delta >= 1.0) throw std::invalid_argument("estimate_hit_coefficient: needs drift below 1");
    PlateauEstimate est;
    if (sigma0.empty() || grid_points < 2) return est;
    const double lo = horizon / 20.0, hi = horizon / 2.0;
    const double n = static_cast<double>(sigma0.size());
    double vmin = 0.0, vmax = 0.0, vsum = 0.0;
    for (std::size_t j = 0; j < grid_points; ++j) {
        const double t = lo * std::pow(hi / lo, static_cast<double>(j) / (grid_points - 1));
        std::uint64_t exceed = 0;
        for (const Sample& s : sigma0)
            if (s.value > t) ++exceed;  // horizon-censored values exceed every grid t
        const double v = (static_cast<double>(exceed) / n) * std::pow(t, 1.0 - delta);
        est.ts.push_back(t);
        est.values.push_back(v);
        vsum += v;
        if (j == 0) {
            vmin = vmax = v;
        } else {
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    est.coefficient = vsum / static_cast<double>(grid_points);
    if (est.coefficient > 0.0) est.flatness = (vmax - vmin) / est.coefficient;
    est.ok = est.flatness < 0.1;
    return est;
}

}  // namespace erwlab
