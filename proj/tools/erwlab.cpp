// erwlab - command-line front end for the excited-walk laboratory.
//
// Subcommands: walk, bp, sde, fit, sweep, mean-r, accept.  Tables go to
// --out (default stdout) as CSV with leading # meta lines, or as JSON when
// --format json.  Exit codes: 0 success, 1 failed acceptance criterion,
// 2 configuration or budget error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erwlab/acceptance.hpp"
#include "erwlab/erwlab.hpp"

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 0x5eedull;

std::uint64_t resolve_seed(bool seed_set, std::uint64_t seed_flag) {
    if (seed_set) return seed_flag;
    if (const char* env = std::getenv("ERWLAB_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument("ERWLAB_SEED is not a number: " + std::string(env));
        }
    }
    return kDefaultSeed;
}

erwlab::CookieLaw resolve_law(const std::string& config_path, bool delta_set, double delta) {
    if (!config_path.empty() && delta_set)
        throw std::invalid_argument("give either --config or --delta, not both");
    if (!config_path.empty()) return erwlab::CookieLaw::from_file(config_path);
    if (delta_set) return erwlab::CookieLaw::equal_strength(delta);
    throw std::invalid_argument("need --config or --delta");
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file.open(path);
        if (!file) throw std::invalid_argument("cannot open output file: " + path);
        os = &file;
    }
    std::ostream& stream() { return *os; }
};

using MetaPairs = std::vector<std::pair<std::string, std::string>>;

void write_csv_meta(std::ostream& os, const erwlab::RunMeta& meta, const MetaPairs& extra) {
    os << "# version=" << meta.version << "\n";
    os << "# config_hash=" << meta.config_hash << "\n";
    os << "# seed=" << meta.seed << "\n";
    for (const auto& [k, v] : extra) os << "# " << k << "=" << v << "\n";
}

json meta_json(const erwlab::RunMeta& meta, const MetaPairs& extra) {
    json j{{"version", meta.version}, {"config_hash", meta.config_hash}, {"seed", meta.seed}};
    for (const auto& [k, v] : extra) j[k] = v;
    return j;
}

json fit_json(const erwlab::TailFit& f) {
    return json{{"exponent", f.exponent},
                {"ci_lo", f.ci_lo},
                {"ci_hi", f.ci_hi},
                {"intercept", f.intercept},
                {"window_lo", f.window_lo},
                {"window_hi", f.window_hi},
                {"points_used", f.points_used},
                {"window_found", f.window_found}};
}

void write_survival_csv(std::ostream& os, const erwlab::SurvivalTable& t) {
    os << "n,survivors,censored,survival\n";
    for (std::size_t i = 0; i < t.thresholds.size(); ++i) {
        os << t.thresholds[i] << "," << t.exceed[i] << "," << t.censored_below[i] << ","
           << t.survival[i] << "\n";
    }
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

// Shared state filled by CLI11.
struct Args {
    std::string config_path;
    double delta = 0.0;
    bool delta_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 1;
    std::string out_path;
    std::string format = "csv";

    std::string mode;
    std::uint64_t runs = 10'000;
    std::int64_t step_cap = 1'000'000;
    std::int64_t range_cap = 1'000'000;
    std::int64_t start = 1;
    std::int64_t v0 = 1;
    std::int64_t gen_cap = 1'000'000;
    std::int64_t value_cap = 200'000;
    std::int64_t level = 100;
    std::int64_t escape_mult = 16;
    std::string grid = "8,16,32,64,128,256,512,1024";
    std::int64_t steps = 200;

    double x0 = 1.0;
    double x0b = 2.0;
    double dt = 1e-4;
    double horizon = 10.0;
    double t_marginal = 1.0;
    std::string sampler = "exact";
    std::uint64_t stride = 100;

    std::string in_path;
    int value_col = 0;
    int censored_col = -1;

    std::string deltas = "-2.5,-1.5,-0.5,0.5,1.5,2.5";
    std::uint64_t paths = 20'000;
    std::string caps = "10000,1000000";
    std::string suite;
};

int cmd_walk(Args& a) {
    if (a.mode.empty()) a.mode = "excursion";
    const erwlab::CookieLaw law = resolve_law(a.config_path, a.delta_set, a.delta);
    const std::uint64_t seed = resolve_seed(a.seed_set, a.seed);
    erwlab::WalkConfig cfg;
    cfg.start = a.start;
    cfg.step_cap = a.step_cap;
    cfg.range_cap = a.range_cap;
    const erwlab::RunMeta meta = erwlab::make_meta(law.to_json_text(), seed);
    const MetaPairs caps{{"step_cap", std::to_string(cfg.step_cap)},
                         {"range_cap", std::to_string(cfg.range_cap)},
                         {"runs", std::to_string(a.runs)},
                         {"mode", a.mode}};
    Output out(a.out_path);

    if (a.mode == "escape") {
        const erwlab::EscapeEstimate e = erwlab::estimate_escape(law, cfg, a.runs, seed, a.workers);
        json j{{"meta", meta_json(meta, caps)},
               {"estimate", e.interval.estimate},
               {"lo", e.interval.lo},
               {"hi", e.interval.hi},
               {"escaped", e.escaped},
               {"runs", e.runs}};
        out.stream() << j.dump(2) << "\n";
        return 0;
    }
    if (a.mode == "excursion") {
        const erwlab::ExcursionSamples ex =
            erwlab::collect_excursions(law, cfg, a.runs, seed, a.workers);
        if (a.format == "json") {
            out.stream() << meta_json(meta, caps).dump() << "\n";
            for (std::size_t i = 0; i < ex.durations.size(); ++i) {
                out.stream() << json{{"duration", ex.durations[i].value},
                                     {"depth", ex.depths[i].value},
                                     {"censored", ex.durations[i].censored}}
                                    .dump()
                             << "\n";
            }
        } else {
            write_csv_meta(out.stream(), meta, caps);
            write_survival_csv(out.stream(), erwlab::build_survival(ex.durations));
        }
        return 0;
    }
    if (a.mode == "return") {
        std::vector<erwlab::Sample> durations(a.runs);
        std::vector<char> returned(a.runs);
        erwlab::parallel_chunks(a.runs, a.workers, [&](std::uint64_t lo, std::uint64_t hi) {
            erwlab::WalkArena arena;
            for (std::uint64_t i = lo; i < hi; ++i) {
                const erwlab::ReturnOutcome r =
                    erwlab::run_return(law, cfg, erwlab::derive_key(seed, i), arena);
                durations[i] = {static_cast<double>(r.duration), r.censored};
                returned[i] = r.returned ? 1 : 0;
            }
        });
        if (a.format == "json") {
            out.stream() << meta_json(meta, caps).dump() << "\n";
            for (std::size_t i = 0; i < durations.size(); ++i) {
                out.stream() << json{{"duration", durations[i].value},
                                     {"returned", static_cast<bool>(returned[i])},
                                     {"censored", durations[i].censored}}
                                    .dump()
                             << "\n";
            }
        } else {
            write_csv_meta(out.stream(), meta, caps);
            write_survival_csv(out.stream(), erwlab::build_survival(durations));
        }
        return 0;
    }
    throw std::invalid_argument("walk: unknown --mode " + a.mode);
}

int cmd_bp(Args& a) {
    if (a.mode.empty()) a.mode = "raw";
    const erwlab::CookieLaw law = resolve_law(a.config_path, a.delta_set, a.delta);
    const std::uint64_t seed = resolve_seed(a.seed_set, a.seed);
    const erwlab::RunMeta meta = erwlab::make_meta(law.to_json_text(), seed);
    const MetaPairs caps{{"gen_cap", std::to_string(a.gen_cap)},
                         {"value_cap", std::to_string(a.value_cap)},
                         {"runs", std::to_string(a.runs)},
                         {"v0", std::to_string(a.v0)},
                         {"mode", a.mode}};
    Output out(a.out_path);

    if (a.mode == "raw") {
        erwlab::BpOptions opt;
        opt.gen_cap = a.gen_cap;
        opt.value_cap = a.value_cap;
        std::vector<erwlab::Sample> sigma0(a.runs);
        erwlab::parallel_paths(a.runs, a.workers, [&](std::uint64_t i) {
            const erwlab::BpPath p = erwlab::simulate_bp(law, a.v0, erwlab::derive_key(seed, i), opt);
            sigma0[i] = p.extinction_time >= 0
                            ? erwlab::Sample{static_cast<double>(p.extinction_time), false}
                            : erwlab::Sample{static_cast<double>(a.gen_cap), true};
        });
        const erwlab::SurvivalTable table = erwlab::build_survival(sigma0);
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)}};
            try {
                j["extinction_time_fit"] = fit_json(erwlab::fit_tail(table));
            } catch (const std::exception& e) {
                j["extinction_time_fit"] = nullptr;
                j["fit_error"] = e.what();
            }
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            write_survival_csv(out.stream(), table);
        }
        return 0;
    }
    if (a.mode == "modified") {
        const erwlab::ModifiedBpPath p =
            erwlab::simulate_modified_bp(law, a.v0, a.steps, seed);
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)},
                   {"sigma0", p.sigma0},
                   {"trajectory", p.trajectory},
                   {"martingale", p.martingale},
                   {"compensator", p.compensator}};
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            out.stream() << "k,value,martingale,compensator\n";
            for (std::size_t k = 0; k < p.trajectory.size(); ++k) {
                out.stream() << k << "," << p.trajectory[k] << "," << p.martingale[k] << ","
                             << p.compensator[k] << "\n";
            }
        }
        return 0;
    }
    if (a.mode == "conditioned" || a.mode == "progeny") {
        erwlab::ConditionedOptions copt;
        copt.gen_cap = a.gen_cap;
        copt.value_cap = a.value_cap;
        const erwlab::ConditionedBatch b =
            erwlab::conditioned_sample(law, a.v0, a.runs, seed, copt, a.workers);
        std::vector<erwlab::Sample> st, pt;
        for (std::int64_t s : b.sigma0) st.push_back({static_cast<double>(s), false});
        for (std::uint64_t p : b.progeny) pt.push_back({static_cast<double>(p), false});
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)},
                   {"accepted", b.accepted},
                   {"attempts", b.attempts},
                   {"acceptance", b.acceptance.estimate}};
            try {
                j["sigma0_fit"] = fit_json(erwlab::fit_tail(erwlab::build_survival(st)));
                j["progeny_fit"] = fit_json(erwlab::fit_tail(erwlab::build_survival(pt)));
            } catch (const std::exception& e) {
                j["fit_error"] = e.what();
            }
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            write_survival_csv(out.stream(),
                               erwlab::build_survival(a.mode == "progeny" ? pt : st));
        }
        return 0;
    }
    if (a.mode == "h") {
        std::vector<std::int64_t> grid;
        for (const std::string& s : split_commas(a.grid)) grid.push_back(std::stoll(s));
        const erwlab::HarmonicEstimate est =
            erwlab::estimate_h(law, grid, a.runs, a.gen_cap, a.escape_mult, seed, a.workers);
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)},
                   {"exponent", est.exponent},
                   {"exponent_se", est.exponent_se},
                   {"degenerate", est.degenerate},
                   {"n", est.n_values},
                   {"h", est.h_hat}};
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            out.stream() << "n,h,lo,hi\n";
            for (std::size_t i = 0; i < est.n_values.size(); ++i) {
                out.stream() << est.n_values[i] << "," << est.h_hat[i] << ","
                             << est.intervals[i].lo << "," << est.intervals[i].hi << "\n";
            }
        }
        return 0;
    }
    if (a.mode == "overshoot") {
        const erwlab::OvershootReport rep =
            erwlab::overshoot_stat(law, a.level, a.runs, seed, a.gen_cap);
        json j{{"meta", meta_json(meta, caps)},
               {"level", a.level},
               {"crossed", rep.crossed},
               {"runs", rep.runs},
               {"mean_overshoot", rep.mean_overshoot},
               {"empty", rep.empty}};
        out.stream() << j.dump(2) << "\n";
        return 0;
    }
    throw std::invalid_argument("bp: unknown --mode " + a.mode);
}

int cmd_sde(Args& a) {
    if (a.mode.empty()) a.mode = "functionals";
    const std::uint64_t seed = resolve_seed(a.seed_set, a.seed);
    erwlab::SdeConfig cfg;
    cfg.delta = a.delta;
    cfg.x0 = a.x0;
    cfg.dt = a.dt;
    cfg.horizon = a.horizon;
    const std::string cfg_text = "sde delta=" + std::to_string(a.delta) +
                                 " x0=" + std::to_string(a.x0) + " dt=" + std::to_string(a.dt);
    const erwlab::RunMeta meta = erwlab::make_meta(cfg_text, seed);
    const MetaPairs caps{{"dt", std::to_string(a.dt)},
                         {"horizon", std::to_string(a.horizon)},
                         {"runs", std::to_string(a.runs)},
                         {"mode", a.mode}};
    Output out(a.out_path);

    if (a.mode == "path") {
        erwlab::Stream s(seed);
        erwlab::NormalSource nrm;
        write_csv_meta(out.stream(), meta, caps);
        out.stream() << "t,y\n";
        const double sqdt = std::sqrt(cfg.dt);
        double y = cfg.x0;
        const std::uint64_t n_steps =
            static_cast<std::uint64_t>(std::ceil(cfg.horizon / cfg.dt));
        for (std::uint64_t k = 0; k <= n_steps; ++k) {
            if (k % a.stride == 0) out.stream() << k * cfg.dt << "," << y << "\n";
            const double yp = std::max(y, 0.0);
            y += cfg.delta * cfg.dt + std::sqrt(2.0 * yp) * sqdt * nrm(s);
        }
        return 0;
    }
    if (a.mode == "functionals") {
        const erwlab::FunctionalSamples fs =
            erwlab::sample_functionals(cfg, a.runs, seed, a.workers);
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)}, {"absorbed", fs.absorbed}};
            try {
                j["sigma0_fit"] = fit_json(erwlab::fit_tail(erwlab::build_survival(fs.sigma0)));
                j["area_fit"] = fit_json(erwlab::fit_tail(erwlab::build_survival(fs.area)));
            } catch (const std::exception& e) {
                j["fit_error"] = e.what();
            }
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            out.stream() << "sigma0,area,absorbed\n";
            for (std::size_t i = 0; i < fs.sigma0.size(); ++i) {
                out.stream() << fs.sigma0[i].value << "," << fs.area[i].value << ","
                             << (fs.sigma0[i].censored ? 0 : 1) << "\n";
            }
        }
        return 0;
    }
    if (a.mode == "scaling") {
        const erwlab::KsResult k = erwlab::hitting_scaling_check(a.delta, a.x0b, a.x0, a.dt,
                                                                a.horizon, a.runs, seed, a.workers);
        json j{{"meta", meta_json(meta, caps)},
               {"ks", k.d},
               {"p_value", k.p_value},
               {"n_a", k.n_a},
               {"n_b", k.n_b}};
        out.stream() << j.dump(2) << "\n";
        return 0;
    }
    if (a.mode == "ab") {
        const erwlab::FunctionalSamples fs =
            erwlab::sample_functionals(cfg, a.runs, seed, a.workers);
        const erwlab::PlateauEstimate pe =
            erwlab::estimate_hit_coefficient(fs.sigma0, cfg.delta, cfg.horizon);
        if (a.format == "json") {
            json j{{"meta", meta_json(meta, caps)},
                   {"coefficient", pe.coefficient},
                   {"flatness", pe.flatness},
                   {"ok", pe.ok}};
            out.stream() << j.dump(2) << "\n";
        } else {
            write_csv_meta(out.stream(), meta, caps);
            out.stream() << "t,scaled_survival\n";
            for (std::size_t i = 0; i < pe.ts.size(); ++i)
                out.stream() << pe.ts[i] << "," << pe.values[i] << "\n";
        }
        return 0;
    }
    if (a.mode == "marginal") {
        std::vector<double> vals;
        if (a.sampler == "exact") {
            vals = erwlab::exact_marginal_samples(a.delta, a.x0, a.t_marginal, a.runs, seed,
                                                  a.workers);
        } else if (a.sampler == "euler") {
            erwlab::SdeConfig mc = cfg;
            mc.horizon = a.t_marginal;
            vals = erwlab::euler_marginal_samples(mc, a.runs, seed, a.workers);
        } else {
            throw std::invalid_argument("sde: unknown --sampler " + a.sampler);
        }
        write_csv_meta(out.stream(), meta, caps);
        out.stream() << "value\n";
        for (double v : vals) out.stream() << v << "\n";
        return 0;
    }
    throw std::invalid_argument("sde: unknown --mode " + a.mode);
}

int cmd_fit(const Args& a) {
    std::ifstream in(a.in_path);
    if (!in) throw std::invalid_argument("cannot open input file: " + a.in_path);
    std::vector<erwlab::Sample> samples;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::vector<std::string> cells = split_commas(line);
        if (a.value_col >= static_cast<int>(cells.size())) continue;
        double value = 0.0;
        try {
            value = std::stod(cells[a.value_col]);
        } catch (const std::exception&) {
            continue;  // header or stray text row
        }
        bool censored = false;
        if (a.censored_col >= 0 && a.censored_col < static_cast<int>(cells.size()))
            censored = cells[a.censored_col] == "1" || cells[a.censored_col] == "true";
        samples.push_back({value, censored});
    }
    const erwlab::TailFit f = erwlab::fit_tail(erwlab::build_survival(samples));
    Output out(a.out_path);
    json j = fit_json(f);
    j["samples"] = samples.size();
    out.stream() << j.dump(2) << "\n";
    return 0;
}

int cmd_sweep(const Args& a) {
    const std::uint64_t seed = resolve_seed(a.seed_set, a.seed);
    std::vector<double> deltas;
    for (const std::string& s : split_commas(a.deltas)) deltas.push_back(std::stod(s));
    erwlab::ConditionedOptions copt;
    copt.gen_cap = a.gen_cap;
    copt.value_cap = a.value_cap;
    const erwlab::RunMeta meta = erwlab::make_meta("sweep " + a.deltas, seed);
    const MetaPairs caps{{"paths", std::to_string(a.paths)},
                         {"gen_cap", std::to_string(a.gen_cap)},
                         {"value_cap", std::to_string(a.value_cap)}};
    const std::vector<erwlab::SweepPoint> points =
        erwlab::phase_sweep(deltas, a.paths, seed, copt, {}, a.workers);
    Output out(a.out_path);
    if (a.format == "json") {
        json rows = json::array();
        for (const erwlab::SweepPoint& p : points) {
            rows.push_back(json{{"delta", p.delta},
                                {"depth", fit_json(p.depth)},
                                {"duration", fit_json(p.duration)},
                                {"return", fit_json(p.ret)},
                                {"target_depth", p.target_depth},
                                {"target_duration", p.target_duration},
                                {"target_return", p.target_return}});
        }
        out.stream() << json{{"meta", meta_json(meta, caps)}, {"points", rows}}.dump(2) << "\n";
    } else {
        write_csv_meta(out.stream(), meta, caps);
        out.stream() << "delta,depth,depth_lo,depth_hi,target_depth,duration,duration_lo,"
                        "duration_hi,target_duration,return,return_lo,return_hi,target_return\n";
        for (const erwlab::SweepPoint& p : points) {
            out.stream() << p.delta << "," << p.depth.exponent << "," << p.depth.ci_lo << ","
                         << p.depth.ci_hi << "," << p.target_depth << "," << p.duration.exponent
                         << "," << p.duration.ci_lo << "," << p.duration.ci_hi << ","
                         << p.target_duration << "," << p.ret.exponent << "," << p.ret.ci_lo
                         << "," << p.ret.ci_hi << "," << p.target_return << "\n";
        }
    }
    return 0;
}

int cmd_mean_r(const Args& a) {
    const erwlab::CookieLaw law = resolve_law(a.config_path, a.delta_set, a.delta);
    const std::uint64_t seed = resolve_seed(a.seed_set, a.seed);
    std::vector<std::int64_t> caps;
    for (const std::string& s : split_commas(a.caps)) caps.push_back(std::stoll(s));
    const erwlab::RunMeta meta = erwlab::make_meta(law.to_json_text(), seed);
    const MetaPairs extra{{"caps", a.caps}, {"runs_per_cap", std::to_string(a.runs)}};
    const std::vector<erwlab::CensoredMeanPoint> points =
        erwlab::mean_r_censored(law, caps, a.runs, seed, a.workers);
    Output out(a.out_path);
    if (a.format == "json") {
        json rows = json::array();
        for (const erwlab::CensoredMeanPoint& p : points) {
            rows.push_back(json{{"cap", p.cap},
                                {"runs", p.runs},
                                {"returned", p.returned},
                                {"truncated_mean", p.truncated_mean},
                                {"se", p.se}});
        }
        json j{{"meta", meta_json(meta, extra)}, {"points", rows}};
        if (points.size() >= 2 && points.front().truncated_mean > 0.0)
            j["ratio"] = points.back().truncated_mean / points.front().truncated_mean;
        out.stream() << j.dump(2) << "\n";
    } else {
        write_csv_meta(out.stream(), meta, extra);
        out.stream() << "cap,runs,returned,truncated_mean,se\n";
        for (const erwlab::CensoredMeanPoint& p : points) {
            out.stream() << p.cap << "," << p.runs << "," << p.returned << ","
                         << p.truncated_mean << "," << p.se << "\n";
        }
    }
    return 0;
}

int cmd_accept(const Args& a) {
    static const std::vector<std::pair<std::string, int>> names{
        {"duration-tail-fair", 1},   {"depth-tail-fair", 2},     {"conditioned-tails", 3},
        {"extinction-prob-decay", 4}, {"strong-transience", 5},   {"martingale-increments", 6},
        {"concentration", 7},        {"diffusion-marginal", 8},  {"functional-tails", 9},
        {"hitting-scaling", 10},     {"coupling-identity", 11}};
    std::vector<int> only;
    if (!a.suite.empty() && a.suite != "all") {
        for (const std::string& item : split_commas(a.suite)) {
            bool found = false;
            for (const auto& [name, id] : names) {
                if (item == name || item == std::to_string(id)) {
                    only.push_back(id);
                    found = true;
                    break;
                }
            }
            if (!found) throw std::invalid_argument("accept: unknown criterion " + item);
        }
    }
    std::ostringstream report;
    const int failed = erwlab::accept::run_suite(report, only, a.workers);
    std::cout << report.str();
    if (!a.out_path.empty()) {
        Output out(a.out_path);
        json j{{"version", erwlab::kContentVersion},
               {"failed", failed},
               {"report", report.str()}};
        out.stream() << j.dump(2) << "\n";
    }
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"excited random walk laboratory"};
    app.require_subcommand(1);
    Args a;

    const auto add_common = [&](CLI::App* sub, bool with_law) {
        sub->add_option("--seed", a.seed, "base seed (ERWLAB_SEED as fallback)")
            ->each([&](const std::string&) { a.seed_set = true; });
        sub->add_option("--workers", a.workers, "worker thread count");
        sub->add_option("--out", a.out_path, "output file (default stdout)");
        sub->add_option("--format", a.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        if (with_law) {
            sub->add_option("--config", a.config_path, "environment config file (JSON)");
            sub->add_option("--delta", a.delta, "equal-strength law with this drift")
                ->each([&](const std::string&) { a.delta_set = true; });
        }
    };

    CLI::App* walk = app.add_subcommand("walk", "simulate walk excursions and returns");
    add_common(walk, true);
    walk->add_option("--mode", a.mode, "excursion, return, or escape (default excursion)")
        ->check(CLI::IsMember({"excursion", "return", "escape"}));
    walk->add_option("--runs", a.runs, "number of paths");
    walk->add_option("--start", a.start, "excursion start site");
    walk->add_option("--step-cap", a.step_cap, "censor after this many steps");
    walk->add_option("--range-cap", a.range_cap, "censor at this displacement");

    CLI::App* bp = app.add_subcommand("bp", "simulate branching representations");
    add_common(bp, true);
    bp->add_option("--mode", a.mode, "raw, modified, conditioned, h, progeny, or overshoot")
        ->check(CLI::IsMember({"raw", "modified", "conditioned", "h", "progeny", "overshoot"}));
    bp->add_option("--runs", a.runs, "paths (accepted paths for conditioned modes)");
    bp->add_option("--v0", a.v0, "initial value");
    bp->add_option("--gen-cap", a.gen_cap, "generation cap");
    bp->add_option("--value-cap", a.value_cap, "value escape cut");
    bp->add_option("--steps", a.steps, "steps for the modified path dump");
    bp->add_option("--grid", a.grid, "comma list of n values for mode h");
    bp->add_option("--escape-mult", a.escape_mult, "escape cut multiple of n for mode h");
    bp->add_option("--level", a.level, "crossing level for mode overshoot");

    CLI::App* sde = app.add_subcommand("sde", "simulate the limiting diffusion");
    add_common(sde, false);
    sde->add_option("--delta", a.delta, "drift")->required();
    sde->add_option("--mode", a.mode, "path, functionals, scaling, ab, or marginal")
        ->check(CLI::IsMember({"path", "functionals", "scaling", "ab", "marginal"}));
    sde->add_option("--runs", a.runs, "number of paths");
    sde->add_option("--x0", a.x0, "start point");
    sde->add_option("--x0b", a.x0b, "second start point for mode scaling");
    sde->add_option("--dt", a.dt, "Euler step");
    sde->add_option("--horizon", a.horizon, "time horizon");
    sde->add_option("--t", a.t_marginal, "readout time for mode marginal");
    sde->add_option("--sampler", a.sampler, "exact or euler, for mode marginal")
        ->check(CLI::IsMember({"exact", "euler"}));
    sde->add_option("--stride", a.stride, "row decimation for mode path");

    CLI::App* fit = app.add_subcommand("fit", "fit a survival tail from a CSV of samples");
    add_common(fit, false);
    fit->add_option("--in", a.in_path, "input CSV")->required();
    fit->add_option("--value-col", a.value_col, "0-based value column");
    fit->add_option("--censored-col", a.censored_col, "0-based censored column (-1: none)");

    CLI::App* sweep = app.add_subcommand("sweep", "exponent sweep across drift values");
    add_common(sweep, false);
    sweep->add_option("--deltas", a.deltas, "comma list of drift values");
    sweep->add_option("--paths", a.paths, "accepted paths per direction");
    sweep->add_option("--gen-cap", a.gen_cap, "generation cap");
    sweep->add_option("--value-cap", a.value_cap, "value escape cut");

    CLI::App* meanr = app.add_subcommand("mean-r", "truncated return-time means across caps");
    add_common(meanr, true);
    meanr->add_option("--caps", a.caps, "comma list of step caps");
    meanr->add_option("--runs", a.runs, "runs per cap");

    CLI::App* accept = app.add_subcommand("accept", "run the acceptance suite");
    add_common(accept, false);
    accept->add_option("--suite", a.suite, "all, or comma list of criterion names/ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (walk->parsed()) return cmd_walk(a);
        if (bp->parsed()) return cmd_bp(a);
        if (sde->parsed()) return cmd_sde(a);
        if (fit->parsed()) return cmd_fit(a);
        if (sweep->parsed()) return cmd_sweep(a);
        if (meanr->parsed()) return cmd_mean_r(a);
        if (accept->parsed()) return cmd_accept(a);
    } catch (const erwlab::BudgetError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
