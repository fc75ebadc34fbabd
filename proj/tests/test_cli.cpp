#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nestlab/cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "nestlab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return nestlab::run_cli(int(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("nestlab-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

// Every output except the manifests (which carry wall-clock timings).
void check_identical(const fs::path& a, const fs::path& b) {
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        std::string name = e.path().filename().string();
        if (name.rfind("manifest-", 0) == 0) continue;
        REQUIRE(fs::exists(b / name));
        CHECK_MESSAGE(slurp(e.path()) == slurp(b / name), name);
        ++compared;
    }
    CHECK(compared > 0);
}

}  // namespace

TEST_CASE("nest command") {
    auto out = scratch("nest");
    CHECK(run({"nest", "--map", "logistic:3.9", "--depth", "6", "--out", out.string()}) == 0);
    auto j = load(out / "nest.json");
    CHECK(j["schema"] == "nestlab/1");
    CHECK(j["levels"].size() >= 3);
    CHECK(j["seed"] == 1);
    CHECK(fs::exists(out / "nest_levels.csv"));
    auto m = load(out / "manifest-nest.json");
    CHECK(m["schema"] == "nestlab/1");
    CHECK(m["exit_code"] == 0);
    for (const auto& f : m["files"]) CHECK(fs::exists(out / f.get<std::string>()));

    auto shallow = scratch("nest0");
    CHECK(run({"nest", "--map", "logistic:3.9", "--depth", "0", "--out", shallow.string()}) == 0);
    CHECK(load(shallow / "nest.json")["levels"].size() == 1);
}

TEST_CASE("config errors exit 1") {
    auto out = scratch("config");
    CHECK(run({"nest", "--map", "logistic:5.0", "--out", out.string()}) == 1);
    CHECK(run({"nest", "--map", "cubic:2", "--out", out.string()}) == 1);
    CHECK(run({"nest", "--map", "logistic:3.9", "--precision", "f32", "--out", out.string()}) == 1);
    CHECK(run({"verify", "--map", "logistic:3.9", "--samples", "0", "--out", out.string()}) == 1);
    CHECK(run({"bogus"}) == 1);
    CHECK(run({}) == 1);
    auto cfg = out / "bad.json";
    fs::create_directories(out);
    std::ofstream(cfg) << R"({"depth": 3, "no_such_key": 1})";
    CHECK(run({"nest", "--config", cfg.string(), "--out", out.string()}) == 1);
    std::ofstream(cfg) << "{ not json";
    CHECK(run({"nest", "--config", cfg.string(), "--out", out.string()}) == 1);
    CHECK(run({"report", "--out", scratch("empty").string()}) == 1);
}

TEST_CASE("config file and flag precedence") {
    auto out = scratch("precedence");
    fs::create_directories(out);
    auto cfg = out / "cfg.json";
    std::ofstream(cfg) << R"({"map": "logistic:3.9", "depth": 1, "seed": 9})";
    CHECK(run({"nest", "--config", cfg.string(), "--depth", "2", "--out", out.string()}) == 0);
    auto j = load(out / "nest.json");
    CHECK(j["seed"] == 9);
    CHECK(j["levels"].size() == 3);
}

TEST_CASE("precision exhaustion exits 2") {
    auto out = scratch("precision");
    CHECK(run({"cascade", "--map", "logistic:3.8", "--tangency-offset", "1e-12", "--precision", "f64", "--out",
               out.string()}) == 2);
}

TEST_CASE("verdict failure exits 3") {
    auto out = scratch("verdict");
    CHECK(run({"verify", "--map", "logistic:3.9", "--samples", "200", "--test-hook", "corrupt-bound", "--out",
               out.string()}) == 3);
    auto ok = scratch("verdict-ok");
    CHECK(run({"verify", "--map", "logistic:3.9", "--samples", "200", "--out", ok.string()}) == 0);
    CHECK(fs::exists(ok / "summary.csv"));
    CHECK(fs::exists(ok / "reports.jsonl"));
}

TEST_CASE("seeded runs are byte-identical") {
    auto a = scratch("det-a"), b = scratch("det-b");
    for (const auto& out : {a, b}) {
        CHECK(run({"verify", "--map", "logistic:3.9", "--samples", "300", "--seed", "7", "--out", out.string()}) == 0);
        CHECK(run({"sweep", "--map", "logistic:3.8", "--from", "3.8", "--to", "3.9", "--step", "0.02", "--samples", "100", "--seed", "7",
                   "--out", out.string()}) == 0);
        CHECK(run({"cascade", "--map", "logistic:3.8", "--tangency-offset", "1e-4", "--seed", "7", "--out",
                   out.string()}) == 0);
    }
    check_identical(a, b);
    // Different seeds sample different branches.
    auto c = scratch("det-c");
    CHECK(run({"verify", "--map", "logistic:3.9", "--samples", "300", "--seed", "8", "--out", c.string()}) == 0);
    CHECK(slurp(a / "reports.jsonl") != slurp(c / "reports.jsonl"));
}

TEST_CASE("cascade and report outputs") {
    auto out = scratch("cascade");
    CHECK(run({"cascade", "--map", "logistic:3.8", "--tangency-offset", "1e-4", "--svg", "--out", out.string()}) == 0);
    auto j = load(out / "cascade.json");
    CHECK(j["schema"] == "nestlab/1");
    CHECK(j["slope"].is_number());
    CHECK(fs::exists(out / "gaps.csv"));
    CHECK(fs::exists(out / "yoccoz.svg"));
    CHECK(run({"report", "--out", out.string()}) == 0);
    CHECK(load(out / "report.json")["schema"] == "nestlab/1");

    auto none = scratch("cascade-none");
    CHECK(run({"cascade", "--map", "logistic:3.9", "--out", none.string()}) == 0);
}

TEST_CASE("resume skips a completed run") {
    auto out = scratch("resume");
    CHECK(run({"nest", "--map", "logistic:3.9", "--depth", "4", "--out", out.string()}) == 0);
    auto stamp = fs::last_write_time(out / "nest.json");
    CHECK(run({"nest", "--map", "logistic:3.9", "--depth", "4", "--resume", "--out", out.string()}) == 0);
    CHECK(fs::last_write_time(out / "nest.json") == stamp);
}
