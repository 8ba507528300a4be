// End-to-end checks of the command-line tool: spawn the real binary, parse
// what it wrote, verify exit codes.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>

#ifndef ERWLAB_CLI_PATH
#error "ERWLAB_CLI_PATH must point at the built binary"
#endif

namespace {

const std::string kCli = ERWLAB_CLI_PATH;

int run_cmd(const std::string& cmd) {
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp_path(const std::string& tag) {
    return "/tmp/erwlab_cli_test_" + tag;
}

}  // namespace

TEST_CASE("walk emits a survival table with meta lines", "[cli]") {
    const std::string out = tmp_path("walk.csv");
    const int rc = run_cmd(kCli + " walk --delta 0 --runs 2000 --step-cap 10000 --seed 7 --out " +
                           out + " 2> /dev/null");
    REQUIRE(rc == 0);
    const std::string text = slurp(out);
    REQUIRE(text.find("# version=erwlab-1") != std::string::npos);
    REQUIRE(text.find("# config_hash=") != std::string::npos);
    REQUIRE(text.find("# seed=7") != std::string::npos);
    REQUIRE(text.find("# step_cap=10000") != std::string::npos);
    REQUIRE(text.find("n,survivors,censored,survival") != std::string::npos);
    std::remove(out.c_str());
}

TEST_CASE("missing law and bad flags exit with the config code", "[cli]") {
    REQUIRE(run_cmd(kCli + " walk --runs 50 > /dev/null 2>&1") == 2);
    REQUIRE(run_cmd(kCli + " walk --delta 0 --bogus-flag 1 > /dev/null 2>&1") == 2);
    REQUIRE(run_cmd(kCli + " walk --delta 0 --config x.json --runs 50 > /dev/null 2>&1") == 2);
    REQUIRE(run_cmd(kCli + " > /dev/null 2>&1") == 2);

    const std::string bad = tmp_path("bad.json");
    {
        std::ofstream f(bad);
        f << "{ this is not json";
    }
    REQUIRE(run_cmd(kCli + " walk --config " + bad + " --runs 50 > /dev/null 2>&1") == 2);
    std::remove(bad.c_str());
}

TEST_CASE("a stack config file drives the walk", "[cli]") {
    const std::string cfg = tmp_path("law.json");
    {
        std::ofstream f(cfg);
        f << R"({"m": 2, "stacks": [{"probs": [0.7, 0.6], "weight": 1.0}]})";
    }
    const std::string out = tmp_path("cfg_walk.csv");
    const int rc = run_cmd(kCli + " walk --config " + cfg +
                           " --runs 1000 --step-cap 5000 --seed 3 --out " + out +
                           " 2> /dev/null");
    REQUIRE(rc == 0);
    REQUIRE(slurp(out).find("n,survivors") != std::string::npos);
    std::remove(cfg.c_str());
    std::remove(out.c_str());
}

TEST_CASE("extinction decay runs over a grid and reports json", "[cli]") {
    const std::string out = tmp_path("h.json");
    const int rc = run_cmd(kCli +
                           " bp --delta 2 --mode h --runs 800 --grid 8,16 --gen-cap 5000"
                           " --escape-mult 8 --format json --seed 3 --out " +
                           out + " 2> /dev/null");
    REQUIRE(rc == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    REQUIRE(j.contains("exponent"));
    REQUIRE(j.contains("h"));
    REQUIRE(j["h"].size() == 2);
    REQUIRE(j["meta"]["version"] == "erwlab-1");
    REQUIRE(j["degenerate"] == false);
    std::remove(out.c_str());
}

TEST_CASE("identical invocations produce identical bytes", "[cli]") {
    const std::string base = " walk --delta 0.5 --runs 300 --step-cap 3000 --mode excursion"
                             " --format json --seed 11 2> /dev/null --out ";
    const std::string o1 = tmp_path("det1.jsonl"), o2 = tmp_path("det2.jsonl"),
                      o3 = tmp_path("det3.jsonl");
    REQUIRE(run_cmd(kCli + base + o1) == 0);
    REQUIRE(run_cmd(kCli + base + o2) == 0);
    REQUIRE(run_cmd(kCli + base + o3 + " --workers 3") == 0);
    const std::string a = slurp(o1);
    REQUIRE_FALSE(a.empty());
    REQUIRE(a == slurp(o2));
    REQUIRE(a == slurp(o3));
    std::remove(o1.c_str());
    std::remove(o2.c_str());
    std::remove(o3.c_str());
}

TEST_CASE("the seed environment fallback matches the flag", "[cli]") {
    const std::string args = " walk --delta 0.5 --runs 200 --step-cap 3000 --mode excursion"
                             " --format json 2> /dev/null --out ";
    const std::string o1 = tmp_path("env1.jsonl"), o2 = tmp_path("env2.jsonl");
    REQUIRE(run_cmd(kCli + args + o1 + " --seed 7") == 0);
    REQUIRE(run_cmd("ERWLAB_SEED=7 " + kCli + args + o2) == 0);
    const std::string a = slurp(o1);
    REQUIRE_FALSE(a.empty());
    REQUIRE(a == slurp(o2));
    REQUIRE(run_cmd("ERWLAB_SEED=zzz " + kCli + args + "/dev/null") == 2);
    std::remove(o1.c_str());
    std::remove(o2.c_str());
}

TEST_CASE("tail fitting reads a sample file", "[cli]") {
    const std::string csv = tmp_path("tail.csv");
    {
        std::ofstream f(csv);
        f << "value,censored\n";
        const int n = 20'000;
        for (int i = 0; i < n; ++i) {
            const double u = (i + 0.5) / n;
            f << static_cast<long long>(std::ceil(1.0 / u)) << ",0\n";
        }
    }
    const std::string out = tmp_path("fit.json");
    const int rc = run_cmd(kCli + " fit --in " + csv + " --value-col 0 --censored-col 1 --out " +
                           out + " 2> /dev/null");
    REQUIRE(rc == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(out));
    REQUIRE(j["samples"] == 20'000);
    REQUIRE(std::fabs(j["exponent"].get<double>() - 1.0) < 0.1);
    REQUIRE(run_cmd(kCli + " fit --in /nonexistent.csv > /dev/null 2>&1") == 2);
    std::remove(csv.c_str());
    std::remove(out.c_str());
}

TEST_CASE("sweep and mean-r emit their tables", "[cli]") {
    const std::string sw = tmp_path("sweep.csv");
    REQUIRE(run_cmd(kCli + " sweep --deltas 0 --paths 1200 --seed 5 --out " + sw +
                    " 2> /dev/null") == 0);
    const std::string sweep_text = slurp(sw);
    REQUIRE(sweep_text.find("delta,depth,depth_lo,depth_hi,target_depth") != std::string::npos);
    REQUIRE(sweep_text.find("# paths=1200") != std::string::npos);
    std::remove(sw.c_str());

    const std::string mr = tmp_path("meanr.json");
    REQUIRE(run_cmd(kCli + " mean-r --delta 0 --caps 100,1000 --runs 3000 --format json"
                           " --seed 9 --out " +
                    mr + " 2> /dev/null") == 0);
    const nlohmann::json j = nlohmann::json::parse(slurp(mr));
    REQUIRE(j["points"].size() == 2);
    REQUIRE(j["ratio"].get<double>() > 1.5);
    std::remove(mr.c_str());
}

TEST_CASE("diffusion marginal rows are positive values", "[cli]") {
    const std::string out = tmp_path("marg.csv");
    REQUIRE(run_cmd(kCli + " sde --delta 0.5 --mode marginal --sampler exact --t 1"
                           " --runs 200 --seed 13 --out " +
                    out + " 2> /dev/null") == 0);
    std::ifstream in(out);
    std::string line;
    std::size_t rows = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line == "value") {
            header_seen = true;
            continue;
        }
        REQUIRE(std::stod(line) > 0.0);
        ++rows;
    }
    REQUIRE(header_seen);
    REQUIRE(rows == 200);
    std::remove(out.c_str());
}

TEST_CASE("the acceptance gate runs a selected criterion", "[cli]") {
    const std::string out = tmp_path("accept.txt");
    const int rc = run_cmd(kCli + " accept --suite concentration > " + out + " 2>&1");
    const std::string text = slurp(out);
    INFO(text);
    REQUIRE(rc == 0);
    REQUIRE(text.find("[PASS] 07") != std::string::npos);
    REQUIRE(run_cmd(kCli + " accept --suite no-such-criterion > /dev/null 2>&1") == 2);
    std::remove(out.c_str());
}
