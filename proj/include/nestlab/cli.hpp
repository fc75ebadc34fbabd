#pragma once

#include "nestlab/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nestlab {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_precision = 2, exit_verdict = 3 };

struct RunConfig {
    std::string command;
    MapDescriptor map;
    bool precision_given = false;
    std::uint64_t seed = 1;
    std::string out = "nestlab-out";

    std::size_t depth = 12;
    std::size_t cap = 1000000;
    std::size_t scan = 0;
    std::size_t scan_cap = 100000;
    std::size_t grid = 10000;         // Koebe and derivative grids
    std::size_t holder_grid = 1000;
    std::size_t samples = 1000;
    std::size_t n_max = 30;
    std::size_t horizon = 10000;
    std::size_t min_run = 6;
    std::size_t scales = 4;           // halvings of the nice interval
    std::vector<std::string> checks;

    std::optional<std::string> tangency_offset;
    double xi = 0.5;
    std::size_t cascade_depth = 1000000;

    double from = 3.5, to = 4.0, step = 0.01;
    std::vector<std::string> values;

    bool svg = false;
    bool resume = false;
    bool with_domains = false;
    std::string test_hook;

    json to_json() const;
    // FNV-1a over the canonical JSON text.
    std::string hash() const;
    // Throws ConfigError on any invalid field.
    void validate() const;
};

// Fields present in `j` override `base`.
RunConfig merge_config(RunConfig base, const json& j);

struct RunManifest {
    std::string command;
    std::string config_hash;
    json config;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, double>> timings_ms;
    int exit_code = 0;
    json to_json() const;
};

int run_cli(int argc, char** argv);

}  // namespace nestlab
