// stats.hpp - survival estimation, tail-exponent fitting and classical tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "rng.hpp"

namespace erwlab {

struct Sample {
    double value = 0.0;
    bool censored = false;  // right-censored: true value is >= recorded value
};

// Tail counts and Kaplan-Meier survival on a geometric threshold grid.
struct SurvivalTable {
    std::vector<double> thresholds;
    std::vector<std::uint64_t> at_risk;         // samples with recorded value >= threshold
    std::vector<std::uint64_t> exceed;          // samples confirmed > threshold
    std::vector<std::uint64_t> censored_below;  // censored at or below threshold
    std::vector<double> survival;               // product-limit estimate of P[X > threshold]
    std::uint64_t total = 0;
    std::uint64_t total_censored = 0;
    double base = 0.0;
};

struct TailFit {
    double exponent = 0.0;  // decay rate alpha in P[X > n] ~ n^(-alpha)
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double intercept = 0.0;  // log-scale, at the fitted window
    double window_lo = 0.0;  // threshold range used
    double window_hi = 0.0;
    int points_used = 0;
    bool window_found = true;  // false: no stable window, fit used all usable points
};

struct KsResult {
    double d = 0.0;
    double p_value = 1.0;
    std::size_t n_a = 0, n_b = 0;
};

struct WilsonInterval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.959963984540054) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline LineFit weighted_line_fit(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& w) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n || w.size() != n)
        throw std::invalid_argument("weighted_line_fit: need >= 2 matched points");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w[i];
        sx += w[i] * x[i];
        sy += w[i] * y[i];
    }
    const double xb = sx / sw, yb = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    if (sxx <= 0.0) throw std::invalid_argument("weighted_line_fit: degenerate x");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += w[i] * r * r;
        }
        f.slope_se = std::sqrt(rss / (static_cast<double>(n) - 2.0) / sxx);
    }
    return f;
}

namespace detail {

// Product-limit survival evaluated at the given thresholds.  Ties: deaths are
// processed before censorings at the same value.
inline std::vector<double> km_at_thresholds(std::vector<Sample> sorted,
                                            const std::vector<double>& thresholds) {
    std::vector<double> out;
    out.reserve(thresholds.size());
    double s = 1.0;
    std::size_t i = 0;
    const std::size_t n = sorted.size();
    for (double thr : thresholds) {
        while (i < n && sorted[i].value <= thr) {
            const double v = sorted[i].value;
            std::uint64_t deaths = 0, drops = 0;
            std::size_t j = i;
            while (j < n && sorted[j].value == v) {
                if (sorted[j].censored)
                    ++drops;
                else
                    ++deaths;
                ++j;
            }
            const double at_risk = static_cast<double>(n - i);
            if (deaths > 0) s *= 1.0 - static_cast<double>(deaths) / at_risk;
            (void)drops;
            i = j;
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace detail

inline SurvivalTable build_survival(const std::vector<Sample>& samples,
                                    double base = 1.4142135623730951) {
    if (samples.size() < 100)
        throw std::invalid_argument("build_survival: need at least 100 samples");
    if (base <= 1.0) throw std::invalid_argument("build_survival: base must exceed 1");
    std::uint64_t n_censored = 0;
    double vmax = 0.0;
    for (const auto& s : samples) {
        if (s.censored) ++n_censored;
        vmax = std::max(vmax, s.value);
    }
    if (n_censored == samples.size())
        throw std::invalid_argument("build_survival: all samples censored");

    SurvivalTable t;
    t.total = samples.size();
    t.total_censored = n_censored;
    t.base = base;
    double g = 1.0;
    while (true) {
        const double thr = std::ceil(g);
        if (thr > vmax) break;
        if (t.thresholds.empty() || thr > t.thresholds.back()) t.thresholds.push_back(thr);
        g *= base;
    }
    if (t.thresholds.empty()) t.thresholds.push_back(1.0);

    const std::size_t k = t.thresholds.size();
    t.at_risk.assign(k, 0);
    t.exceed.assign(k, 0);
    t.censored_below.assign(k, 0);
    for (const auto& s : samples) {
        // linear scan is fine: the grid is logarithmic in the data range
        for (std::size_t j = 0; j < k; ++j) {
            if (s.value >= t.thresholds[j]) ++t.at_risk[j];
            if (s.value > t.thresholds[j])
                ++t.exceed[j];
            else if (s.censored)
                ++t.censored_below[j];
        }
    }

    std::vector<Sample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), [](const Sample& a, const Sample& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.censored < b.censored;
    });
    t.survival = detail::km_at_thresholds(std::move(sorted), t.thresholds);
    return t;
}

struct TailFitOptions {
    std::uint64_t min_exceed = 30;
    int min_usable = 8;
    int min_window = 5;
    double slope_tol = 0.20;  // max relative deviation of local slopes in the window
    int bootstrap = 200;
    std::uint64_t bootstrap_seed = 0x5eedb00ull;
};

namespace detail {

struct WindowChoice {
    std::size_t lo = 0, hi = 0;  // inclusive index range into the usable-point list
    bool found = false;
};

inline WindowChoice pick_window(const std::vector<double>& lx, const std::vector<double>& ly,
                                int min_window, double tol) {
    const std::size_t n = lx.size();
    WindowChoice best;
    if (n < 2) return best;
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        slope[i] = (ly[i + 1] - ly[i]) / (lx[i + 1] - lx[i]);
    for (std::size_t lo = 0; lo < n; ++lo) {
        for (std::size_t hi = lo + static_cast<std::size_t>(min_window) - 1; hi < n; ++hi) {
            std::vector<double> win(slope.begin() + lo, slope.begin() + hi);
            std::nth_element(win.begin(), win.begin() + win.size() / 2, win.end());
            const double med = win[win.size() / 2];
            if (med >= 0.0) continue;
            bool ok = true;
            for (std::size_t j = lo; j < hi; ++j) {
                if (std::fabs(slope[j] - med) > tol * std::fabs(med)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            const std::size_t len = hi - lo + 1;
            const std::size_t blen = best.found ? best.hi - best.lo + 1 : 0;
            if (!best.found || len > blen || (len == blen && hi > best.hi)) {
                best = {lo, hi, true};
            }
        }
    }
    return best;
}

struct BinnedTail {
    std::vector<double> thresholds;
    std::vector<std::uint64_t> deaths;    // uncensored values per bin (0..k: bin k is overflow)
    std::vector<std::uint64_t> censored;  // censored values per bin
    std::uint64_t total = 0;
};

inline BinnedTail bin_table(const SurvivalTable& t) {
    const std::size_t k = t.thresholds.size();
    BinnedTail b;
    b.thresholds = t.thresholds;
    b.deaths.assign(k + 1, 0);
    b.censored.assign(k + 1, 0);
    b.total = t.total;
    for (std::size_t j = 0; j <= k; ++j) {
        const std::uint64_t above_prev = (j == 0) ? t.total : t.exceed[j - 1];
        const std::uint64_t above_cur = (j == k) ? 0 : t.exceed[j];
        const std::uint64_t in_bin = above_prev - above_cur;
        const std::uint64_t cens_prev = (j == 0) ? 0 : t.censored_below[j - 1];
        const std::uint64_t cens_cur = (j == k) ? t.total_censored : t.censored_below[j];
        const std::uint64_t cens_in = cens_cur - cens_prev;
        b.censored[j] = cens_in;
        b.deaths[j] = in_bin - cens_in;
    }
    return b;
}

// Survival and exceedance counts recomputed from binned counts (life-table form,
// events at the bin's right edge).  Used by the bootstrap resamples.
inline void binned_survival(const BinnedTail& b, std::vector<double>& surv,
                            std::vector<std::uint64_t>& exceed) {
    const std::size_t k = b.thresholds.size();
    surv.assign(k, 1.0);
    exceed.assign(k, 0);
    double s = 1.0;
    std::uint64_t seen = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t at_risk = b.total - seen;
        if (at_risk > 0 && b.deaths[j] > 0)
            s *= 1.0 - static_cast<double>(b.deaths[j]) / static_cast<double>(at_risk);
        seen += b.deaths[j] + b.censored[j];
        surv[j] = s;
        exceed[j] = b.total - seen;
    }
}

inline bool fit_from_counts(const std::vector<double>& thresholds,
                            const std::vector<double>& surv,
                            const std::vector<std::uint64_t>& exceed, const TailFitOptions& opt,
                            bool require_min, TailFit& out) {
    std::vector<double> lx, ly, lw;
    for (std::size_t j = 0; j < thresholds.size(); ++j) {
        if (exceed[j] >= opt.min_exceed && surv[j] > 0.0 && thresholds[j] >= 1.0) {
            lx.push_back(std::log(thresholds[j]));
            ly.push_back(std::log(surv[j]));
            lw.push_back(static_cast<double>(exceed[j]));
        }
    }
    if (static_cast<int>(lx.size()) < (require_min ? opt.min_usable : 2)) return false;
    WindowChoice w = pick_window(lx, ly, opt.min_window, opt.slope_tol);
    std::size_t lo = 0, hi = lx.size() - 1;
    if (w.found) {
        lo = w.lo;
        hi = w.hi;
    }
    std::vector<double> fx(lx.begin() + lo, lx.begin() + hi + 1);
    std::vector<double> fy(ly.begin() + lo, ly.begin() + hi + 1);
    std::vector<double> fw(lw.begin() + lo, lw.begin() + hi + 1);
    LineFit lf = weighted_line_fit(fx, fy, fw);
    out.exponent = -lf.slope;
    out.intercept = lf.intercept;
    out.window_lo = std::exp(fx.front());
    out.window_hi = std::exp(fx.back());
    out.points_used = static_cast<int>(fx.size());
    out.window_found = w.found;
    return true;
}

inline std::uint64_t binomial_counts(std::uint64_t n, double p, Stream& s, NormalSource& nrm) {
    // exact binomial via the beta/gamma relation would be heavier than needed here;
    // counts are only used inside bootstrap resamples, so sum bernoulli for small n
    // and use the gamma-split recursion otherwise
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n <= 64) {
        std::uint64_t c = 0;
        for (std::uint64_t i = 0; i < n; ++i) c += s.uniform() < p ? 1u : 0u;
        return c;
    }
    // split at the median of a beta draw: X ~ Beta(a, n+1-a) with a = (n+1)/2,
    // then recurse on the half containing p  (exact; see Devroye ch. X.4)
    const std::uint64_t a = (n + 1) / 2;
    const double g1 = gamma_draw(static_cast<double>(a), s, nrm);
    const double g2 = gamma_draw(static_cast<double>(n + 1 - a), s, nrm);
    const double x = g1 / (g1 + g2);
    if (p < x) return binomial_counts(a - 1, p / x, s, nrm);
    return a + binomial_counts(n - a, (p - x) / (1.0 - x), s, nrm);
}

}  // namespace detail

inline TailFit fit_tail(const SurvivalTable& t, const TailFitOptions& opt = {}) {
    TailFit fit;
    if (!detail::fit_from_counts(t.thresholds, t.survival, t.exceed, opt, true, fit))
        throw std::invalid_argument("fit_tail: fewer than the required usable grid points");

    if (opt.bootstrap > 0) {
        const detail::BinnedTail bins = detail::bin_table(t);
        const std::size_t k = bins.thresholds.size();
        std::vector<double> probs(2 * (k + 1));
        for (std::size_t j = 0; j <= k; ++j) {
            probs[2 * j] = static_cast<double>(bins.deaths[j]) / static_cast<double>(bins.total);
            probs[2 * j + 1] =
                static_cast<double>(bins.censored[j]) / static_cast<double>(bins.total);
        }
        std::vector<double> exps;
        exps.reserve(opt.bootstrap);
        NormalSource nrm;
        for (int rep = 0; rep < opt.bootstrap; ++rep) {
            Stream rs = Stream::child(opt.bootstrap_seed, static_cast<std::uint64_t>(rep));
            detail::BinnedTail rb = bins;
            rb.deaths.assign(k + 1, 0);
            rb.censored.assign(k + 1, 0);
            std::uint64_t left = bins.total;
            double pleft = 1.0;
            for (std::size_t c = 0; c < probs.size() && left > 0; ++c) {
                const double pc = pleft > 0.0 ? std::min(1.0, probs[c] / pleft) : 1.0;
                const std::uint64_t draw = (c + 1 == probs.size())
                                               ? left
                                               : detail::binomial_counts(left, pc, rs, nrm);
                if (c % 2 == 0)
                    rb.deaths[c / 2] = draw;
                else
                    rb.censored[c / 2] = draw;
                left -= draw;
                pleft -= probs[c];
            }
            std::vector<double> surv;
            std::vector<std::uint64_t> exceed;
            detail::binned_survival(rb, surv, exceed);
            TailFit bf;
            if (detail::fit_from_counts(rb.thresholds, surv, exceed, opt, false, bf))
                exps.push_back(bf.exponent);
        }
        if (exps.size() >= 50) {
            std::sort(exps.begin(), exps.end());
            const auto q = [&](double p) {
                return exps[static_cast<std::size_t>(p * (exps.size() - 1))];
            };
            fit.ci_lo = std::min(q(0.025), fit.exponent);
            fit.ci_hi = std::max(q(0.975), fit.exponent);
        } else {
            fit.ci_lo = fit.ci_hi = fit.exponent;
            fit.window_found = false;
        }
    } else {
        fit.ci_lo = fit.ci_hi = fit.exponent;
    }
    return fit;
}

inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.d = d;
    r.n_a = a.size();
    r.n_b = b.size();
    const double ne = std::sqrt(na * nb / (na + nb));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    if (lambda < 0.2) {
        r.p_value = 1.0;  // alternating series is slow here and the answer is 1 to 4 digits
        return r;
    }
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        p += sign * term;
        sign = -sign;
        if (term < 1e-12) break;
    }
    r.p_value = std::clamp(2.0 * p, 0.0, 1.0);
    return r;
}

struct ConcentrationReport {
    std::uint64_t pairs_checked = 0;
    std::uint64_t violations = 0;
    double min_slack = 0.0;  // min over pairs of bound - probability
    int worst_x = 0, worst_y = 0;
};

// For S = successes before the x-th failure in fair coin tosses, checks
//   P[|S - x| >= y]  <=  2 exp(-y^2 / (6 max(x, y)))
// for every pair 1 <= x <= x_max, 1 <= y <= y_max.  The left side is evaluated
// through the regularized incomplete beta function, so the only tolerance is
// floating-point rounding.
inline ConcentrationReport concentration_bound_check(int x_max, int y_max) {
    if (x_max < 1 || y_max < 1 || x_max > 2000 || y_max > 2000)
        throw std::invalid_argument("concentration_bound_check: caps must lie in [1, 2000]");
    ConcentrationReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();
    for (int x = 1; x <= x_max; ++x) {
        for (int y = 1; y <= y_max; ++y) {
            const double upper = boost::math::ibeta(static_cast<double>(x + y),
                                                    static_cast<double>(x), 0.5);
            const double lower =
                (y <= x) ? boost::math::ibeta(static_cast<double>(x),
                                              static_cast<double>(x - y + 1), 0.5)
                         : 0.0;
            const double prob = upper + lower;
            const double bound =
                2.0 * std::exp(-static_cast<double>(y) * y / (6.0 * std::max(x, y)));
            const double slack = bound - prob;
            ++rep.pairs_checked;
            if (slack < rep.min_slack) {
                rep.min_slack = slack;
                rep.worst_x = x;
                rep.worst_y = y;
            }
            if (prob > bound + 1e-12) ++rep.violations;
        }
    }
    return rep;
}

}  // namespace erwlab
