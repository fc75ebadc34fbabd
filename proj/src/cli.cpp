#include "nestlab/cli.hpp"

#include "nestlab/kernels.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#ifndef NESTLAB_VERSION
#define NESTLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace nestlab {

namespace {

const std::vector<std::string> known_checks = {"schwarzian-expansion", "theorem-mu", "koebe",
                                               "minimum-principle",    "main-theorem", "blocks"};
const std::vector<std::string> default_checks = {"schwarzian-expansion", "theorem-mu", "koebe"};

constexpr double expansion_floor = 1 - 1e-9;
constexpr double block_oracle_tol = 1e-12;
constexpr std::size_t entry_cap = 2000;  // first-entry horizon when sampling branches into V

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Collects outputs of one command and the phase timings for its manifest.
class RunContext {
public:
    RunContext(const RunConfig& cfg) : cfg_(cfg), dir_(cfg.out) {}

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(dir_);
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + (dir_ / name).string());
        out << content;
        if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
    }
    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    void phase(const std::string& name) {
        auto now = std::chrono::steady_clock::now();
        if (!current_.empty()) timings_.emplace_back(current_, elapsed_ms(now));
        current_ = name;
        started_ = now;
    }

    RunManifest finish(int code) {
        phase("");
        RunManifest m;
        m.command = cfg_.command;
        m.config = cfg_.to_json();
        m.config_hash = cfg_.hash();
        m.files = files_;
        m.timings_ms = timings_;
        m.exit_code = code;
        return m;
    }

    const fs::path& dir() const { return dir_; }

private:
    double elapsed_ms(std::chrono::steady_clock::time_point now) const {
        return std::chrono::duration<double, std::milli>(now - started_).count();
    }

    const RunConfig& cfg_;
    fs::path dir_;
    std::vector<std::string> files_;
    std::vector<std::pair<std::string, double>> timings_;
    std::string current_;
    std::chrono::steady_clock::time_point started_;
};

std::string manifest_name(const std::string& command) { return "manifest-" + command + ".json"; }

json record_header(const RunConfig& cfg) {
    return json{{"schema", schema_version}, {"seed", cfg.seed}, {"map", to_json(cfg.map)}};
}

// Prepends a seed column so every CSV row carries the run seed.
std::string with_seed_column(const std::string& csv, std::uint64_t seed) {
    std::istringstream in(csv);
    std::string line, out;
    bool header = true;
    while (std::getline(in, line)) {
        out += (header ? std::string("seed") : std::to_string(seed)) + "," + line + "\n";
        header = false;
    }
    return out;
}

std::string run_lengths(const std::vector<std::string>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size();) {
        std::size_t j = i;
        while (j < labels.size() && labels[j] == labels[i]) ++j;
        if (!out.empty()) out += ' ';
        out += labels[i] + "x" + std::to_string(j - i);
        i = j;
    }
    return out;
}

template <class Real>
std::vector<CascadeResult> list_cascades(const PrincipalNest<Real>& nest) {
    std::vector<CascadeResult> out;
    for (std::size_t i = 0; i < nest.levels.size();) {
        CascadeResult c = detect_cascade(nest, i);
        if (c.m >= 2 && c.kind != CascadeKind::none) {
            out.push_back(c);
            i += c.m;
        } else {
            ++i;
        }
    }
    return out;
}

NestOptions nest_options(const RunConfig& cfg) {
    NestOptions o;
    o.depth = cfg.depth;
    o.cap = cfg.cap;
    o.scan = cfg.scan;
    o.scan_cap = cfg.scan_cap;
    o.niceness_horizon = cfg.horizon;
    return o;
}

// ---- nest ----------------------------------------------------------------

template <class Real>
int nest_with(const RunConfig& cfg, RunContext& ctx) {
    auto map = UnimodalMap<Real>::from_descriptor(cfg.map);
    ctx.phase("build");
    PrincipalNest<Real> nest;
    try {
        nest = build_nest(map, construct_nice_interval(map), nest_options(cfg));
    } catch (const ConstructionError& e) {
        throw ConfigError(e.what());
    }
    ctx.phase("analyse");
    json j = to_json(nest, cfg.with_domains);
    j["seed"] = cfg.seed;
    try {
        j["probe"] = to_json(infinite_cascade_probe(map, nest, cfg.min_run));
    } catch (const Error& e) {
        j["probe"] = json{{"error", e.what()}};
    }
    json cascades = json::array();
    for (const auto& c : list_cascades(nest)) cascades.push_back(to_json(c));
    j["cascades"] = cascades;
    json exceptional = json::array();
    for (std::size_t i = 2; i < nest.levels.size(); ++i) {
        auto e = detect_exceptional(map, nest, i);
        if (e.exceptional) exceptional.push_back(to_json(e));
    }
    j["exceptional"] = exceptional;
    ctx.phase("write");
    ctx.write_json("nest.json", j);
    ctx.write("nest_levels.csv", with_seed_column(nest_csv(nest), cfg.seed));
    std::cerr << "nest: " << nest.levels.size() << " levels, " << termination_name(nest.termination.kind);
    if (!nest.termination.detail.empty()) std::cerr << " (" << nest.termination.detail << ")";
    std::cerr << "\n";
    if (nest.termination.kind == TerminationKind::precision_exhausted) return exit_precision;
    return exit_ok;
}

// ---- verify --------------------------------------------------------------

struct CheckTally {
    explicit CheckTally(std::string id) : check(std::move(id)) {}
    std::string check;
    std::string scale;
    std::size_t evaluated = 0;
    std::size_t failures = 0;
    double measured = std::numeric_limits<double>::quiet_NaN();
    double bound = std::numeric_limits<double>::quiet_NaN();
    bool forced_fail = false;
    std::string note;
    bool pass() const { return !forced_fail && failures == 0; }
};

bool selected(const RunConfig& cfg, const std::string& name) {
    return std::find(cfg.checks.begin(), cfg.checks.end(), name) != cfg.checks.end();
}

void corrupt(DistortionReport& r) {
    // Failure-path hook: a lower bound far above anything measurable.
    r.theorem_mu_lower = r.measured_B * 2 + 1;
    r.mu_pass = r.recompute_mu_pass();
}

template <class Real>
int verify_with(const RunConfig& cfg, RunContext& ctx) {
    auto map = UnimodalMap<Real>::from_descriptor(cfg.map);
    auto dmap = UnimodalMap<double>::from_descriptor(cfg.map);
    const bool hook_corrupt = cfg.test_hook == "corrupt-bound";
    const std::string param = cfg.map.label();

    ctx.phase("holder");
    MeasureSettings settings;
    settings.holder = estimate_holder_constant(dmap, 1.0, cfg.holder_grid);
    settings.koebe = selected(cfg, "koebe");
    settings.koebe_settings.grid = cfg.grid;

    std::string jsonl;
    std::vector<CheckTally> tallies;

    const bool cylinder = selected(cfg, "schwarzian-expansion") || selected(cfg, "theorem-mu") ||
                          selected(cfg, "koebe") || selected(cfg, "minimum-principle") || selected(cfg, "blocks");
    std::vector<BranchSample> samples;
    std::vector<std::optional<DistortionReport>> reports;
    if (cylinder) {
        ctx.phase("sample");
        std::mt19937_64 rng(cfg.seed);
        samples.reserve(cfg.samples);
        for (std::size_t i = 0; i < cfg.samples; ++i) samples.push_back(sample_cylinder_branch(dmap, rng, cfg.n_max));
        ctx.phase("measure");
        reports = measure_resolved(map, dmap, samples, settings);
        if (hook_corrupt)
            for (auto& r : reports)
                if (r) corrupt(*r);
    }

    CheckTally expansion{"schwarzian-expansion"}, mu{"theorem-mu"}, koebe{"koebe"};
    expansion.measured = mu.measured = std::numeric_limits<double>::infinity();
    expansion.bound = expansion_floor;
    mu.bound = -std::numeric_limits<double>::infinity();
    koebe.measured = 0;
    std::size_t certified = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (!reports[i]) continue;
        const DistortionReport& r = *reports[i];
        ++certified;
        json rec = record_header(cfg);
        rec["kind"] = "branch";
        rec["sample"] = i;
        rec["report"] = to_json(r);
        json verdicts;
        if (selected(cfg, "schwarzian-expansion")) {
            bool ok = r.measured_B >= expansion_floor && r.measured_A >= expansion_floor;
            ++expansion.evaluated;
            if (!ok) ++expansion.failures;
            expansion.measured = std::min({expansion.measured, r.measured_B, r.measured_A});
            verdicts["schwarzian-expansion"] = ok;
        }
        if (selected(cfg, "theorem-mu")) {
            bool ok = r.recompute_mu_pass();
            ++mu.evaluated;
            if (!ok) ++mu.failures;
            mu.measured = std::min({mu.measured, r.measured_B, r.measured_A});
            mu.bound = std::max(mu.bound, r.theorem_mu_lower);
            verdicts["theorem-mu"] = ok;
        }
        if (selected(cfg, "koebe") && r.koebe_applicable()) {
            bool ok = r.recompute_koebe_pass();
            ++koebe.evaluated;
            if (!ok) ++koebe.failures;
            koebe.measured = std::max(koebe.measured, r.derivative_ratio_max / r.koebe_bound);
            verdicts["koebe"] = ok;
        }
        rec["verdicts"] = verdicts;
        jsonl += rec.dump() + "\n";
    }
    if (cylinder && certified == 0) {
        for (auto* t : {&expansion, &mu, &koebe}) {
            t->forced_fail = true;
            t->note = "no certified branch";
        }
    }
    koebe.bound = 1;
    koebe.note = "measured = max derivative ratio / Koebe bound";
    if (selected(cfg, "schwarzian-expansion")) tallies.push_back(expansion);
    if (selected(cfg, "theorem-mu")) tallies.push_back(mu);
    if (selected(cfg, "koebe")) tallies.push_back(koebe);

    if (selected(cfg, "minimum-principle")) {
        ctx.phase("minimum-principle");
        CheckTally t{"minimum-principle"};
        t.measured = std::numeric_limits<double>::infinity();
        t.bound = 1;
        t.note = "measured = min |Dg(x)| / (mu^3 min endpoint |Dg|)";
        const std::size_t limit = std::min<std::size_t>(cfg.samples, 500);
        for (std::size_t i = 0; i < reports.size() && t.evaluated < limit; ++i) {
            if (!reports[i]) continue;
            const auto& s = samples[i];
            try {
                auto br = certify_branch(map, Interval<Real>(Real(s.t0), Real(s.t1)), s.n);
                auto res = minimum_principle_check(map, br, 64);
                ++t.evaluated;
                if (!res.pass) ++t.failures;
                t.measured = std::min(t.measured, res.worst_margin);
                json rec = record_header(cfg);
                rec["kind"] = "minimum-principle";
                rec["sample"] = i;
                rec["result"] = to_json(res);
                jsonl += rec.dump() + "\n";
            } catch (const Error&) {
            }
        }
        if (t.evaluated == 0) {
            t.forced_fail = true;
            t.note = "no certified branch";
        }
        tallies.push_back(t);
    }

    if (selected(cfg, "blocks")) {
        ctx.phase("blocks");
        CheckTally t{"blocks"};
        t.measured = 0;
        t.bound = block_oracle_tol;
        t.note = "measured = max relative gap between block total and direct sum";
        NestOptions o = nest_options(cfg);
        auto nest = build_nest(map, construct_nice_interval(map), o);
        const std::size_t limit = std::min<std::size_t>(cfg.samples, 200);
        for (double xi : {0.0, cfg.xi}) {
            std::size_t used = 0;
            for (std::size_t i = 0; i < reports.size() && used < limit; ++i) {
                if (!reports[i]) continue;
                const auto& s = samples[i];
                try {
                    auto br = certify_branch(map, Interval<Real>(Real(s.t0), Real(s.t1)), s.n);
                    auto d = block_decompose(map, br, nest, xi);
                    double direct = direct_orbit_sum(br, xi);
                    double rel = std::abs(d.total() - direct) / std::max(std::abs(direct), 1e-300);
                    ++used;
                    ++t.evaluated;
                    if (!(rel <= block_oracle_tol)) ++t.failures;
                    t.measured = std::max(t.measured, rel);
                    json rec = record_header(cfg);
                    rec["kind"] = "blocks";
                    rec["sample"] = i;
                    rec["decomposition"] = to_json(d);
                    rec["direct_sum"] = direct;
                    json props = json::array();
                    for (const auto& v : proposition_checks(d)) props.push_back(to_json(v));
                    rec["proposition_checks"] = props;
                    jsonl += rec.dump() + "\n";
                } catch (const Error&) {
                }
            }
        }
        if (t.evaluated == 0) {
            t.forced_fail = true;
            t.note = "no decomposable branch";
        }
        tallies.push_back(t);
    }

    std::string trend_csv;
    if (selected(cfg, "main-theorem")) {
        ctx.phase("main-theorem");
        Interval<double> V0 = construct_nice_interval(dmap);
        std::vector<MainTheoremSummary> scales;
        trend_csv = csv_line({"seed", "scale", "v_lo", "v_hi", "v_length", "requested", "certified", "min_B", "min_A",
                              "max_deficit_B"});
        for (std::size_t k = 0; k <= cfg.scales; ++k) {
            Interval<double> V = V0;
            if (k > 0) V = nice_interval_near(dmap, V0.length() / std::ldexp(1.0, static_cast<int>(k)), 64).interval;
            auto sum = verify_main_theorem(map, dmap, V, cfg.samples, entry_cap, cfg.seed + k, settings);
            if (hook_corrupt)
                for (auto& r : sum.reports) corrupt(r);
            CheckTally t{"main-theorem-mu"};
            t.scale = format_number(V.length());
            t.measured = sum.min_B;
            t.bound = 0;
            for (const auto& r : sum.reports) {
                ++t.evaluated;
                if (!r.recompute_mu_pass()) ++t.failures;
                t.bound = std::max(t.bound, r.theorem_mu_lower);
            }
            if (sum.starved) {
                t.forced_fail = true;
                t.note = "fewer than a tenth of the requested branches certified";
            }
            tallies.push_back(t);
            trend_csv += csv_line({std::to_string(cfg.seed), std::to_string(k), format_number(V.lo),
                                   format_number(V.hi), format_number(V.length()), std::to_string(sum.requested),
                                   std::to_string(sum.certified), format_number(sum.min_B), format_number(sum.min_A),
                                   format_number(sum.max_deficit_B)});
            json rec = record_header(cfg);
            rec["kind"] = "main-theorem-scale";
            rec["scale"] = k;
            rec["summary"] = to_json(sum, true);
            jsonl += rec.dump() + "\n";
            scales.push_back(std::move(sum));
        }
        TrendFit fit = fit_main_theorem_trend(scales, 1e-12);
        CheckTally t{"main-theorem-trend"};
        t.scale = format_number(scales.back().v_length);
        t.measured = scales.back().min_B;
        t.bound = 0.99;
        std::vector<std::string> why;
        if (!fit.non_decreasing) why.push_back("min B decreases across scales");
        if (!(scales.back().min_B > 0.99)) why.push_back("min B <= 0.99 at the smallest scale");
        if (!fit.slope) why.push_back("deficit slope undefined (" + std::to_string(fit.fit_points) +
                                      " scales with 1 - min B > 1e-12)");
        else if (!(*fit.slope > 0)) why.push_back("deficit slope " + format_number(*fit.slope) + " <= 0");
        t.forced_fail = !why.empty();
        for (const auto& w : why) t.note += (t.note.empty() ? "" : "; ") + w;
        tallies.push_back(t);
        json rec = record_header(cfg);
        rec["kind"] = "main-theorem-trend";
        rec["fit"] = to_json(fit);
        jsonl += rec.dump() + "\n";
    }

    ctx.phase("write");
    std::string summary = csv_line({"seed", "parameter", "scale", "check_id", "evaluated", "failures", "measured",
                                    "bound", "verdict", "note"});
    int code = exit_ok;
    for (const auto& t : tallies) {
        summary += csv_line({std::to_string(cfg.seed), param, t.scale, t.check, std::to_string(t.evaluated),
                             std::to_string(t.failures), format_number(t.measured), format_number(t.bound),
                             t.pass() ? "pass" : "fail", t.note});
        std::cerr << "verify " << t.check << (t.scale.empty() ? "" : " |V|=" + t.scale) << ": "
                  << (t.pass() ? "pass" : "FAIL") << " (" << t.evaluated << " evaluated, " << t.failures
                  << " failures" << (t.note.empty() ? "" : "; " + t.note) << ")\n";
        if (!t.pass()) code = exit_verdict;
    }
    ctx.write("reports.jsonl", jsonl);
    ctx.write("summary.csv", summary);
    if (!trend_csv.empty()) ctx.write("main_theorem.csv", trend_csv);
    return code;
}

// ---- cascade -------------------------------------------------------------

template <class Real>
std::string tangency_parameter(const std::string& offset_text) {
    Real a = sqrt8_plus_one<Real>() - real_from_string<Real>(offset_text);
    if constexpr (std::is_same_v<Real, double>) {
        return format_number(a);
    } else {
        return a.str(static_cast<std::streamsize>(real_traits<Real>::digits()) + 5);
    }
}

template <class Real>
int cascade_with(RunConfig cfg, RunContext& ctx) {
    if (cfg.tangency_offset) {
        Precision p = cfg.map.precision;
        cfg.map = MapDescriptor::parse("logistic:" + tangency_parameter<Real>(*cfg.tangency_offset));
        cfg.map.precision = p;
    }
    auto map = UnimodalMap<Real>::from_descriptor(cfg.map);
    json j = record_header(cfg);
    if (cfg.tangency_offset) j["tangency_offset"] = *cfg.tangency_offset;
    ctx.phase("build");
    NestOptions o = nest_options(cfg);
    o.depth = cfg.cascade_depth;
    o.stop_after_cascade_exit = true;
    PrincipalNest<Real> nest;
    try {
        nest = build_nest(map, construct_nice_interval(map), o);
    } catch (const ConstructionError& e) {
        throw ConfigError(e.what());
    }
    j["nest_levels"] = nest.levels.size();
    j["termination"] = to_json(nest.termination);
    auto cascades = list_cascades(nest);
    if (cascades.empty()) {
        j["record"] = "no cascade detected";
        j["cascade"] = nullptr;
        ctx.write_json("cascade.json", j);
        std::cerr << "cascade: no cascade detected\n";
        return nest.termination.kind == TerminationKind::precision_exhausted ? exit_precision : exit_ok;
    }
    const CascadeResult& c = cascades.front();
    j["cascade"] = to_json(c);
    std::cerr << "cascade: " << cascade_kind_name(c.kind) << " at level " << c.start << ", m = " << c.m << "\n";
    ctx.phase("fit");
    YoccozFit fit;
    try {
        fit = yoccoz_fit(map, nest, c);
    } catch (const PrecisionError& e) {
        j["error"] = e.what();
        j["guidance"] = "rerun with --precision ext50 (or more digits)";
        ctx.write_json("cascade.json", j);
        std::cerr << "cascade: " << e.what() << "\nrerun with extended precision, e.g. --precision ext50\n";
        return exit_precision;
    } catch (const ParameterError& e) {
        j["record"] = std::string("cascade too short to fit: ") + e.what();
        ctx.write_json("cascade.json", j);
        std::cerr << "cascade: " << e.what() << "\n";
        return exit_ok;
    }
    j["fit"] = to_json(fit);
    j["slope"] = fit.loglog_slope;
    ctx.phase("sums");
    json sums = json::array();
    for (double xi : {0.0, cfg.xi}) {
        try {
            sums.push_back(to_json(cascade_sum_checks(map, nest, c, xi)));
        } catch (const Error& e) {
            sums.push_back(json{{"xi", xi}, {"error", e.what()}});
        }
    }
    j["sums"] = sums;

    ctx.phase("write");
    std::string gaps = csv_line({"seed", "k", "gap_ratio", "min_k"});
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < fit.gap_ratios.size(); ++i) {
        std::size_t k = i + 1;
        std::size_t mk = fit.exited ? std::min(k, fit.m - k) : k;
        gaps += csv_line({std::to_string(cfg.seed), std::to_string(k), format_number(fit.gap_ratios[i]),
                          std::to_string(mk)});
        xs.push_back(static_cast<double>(mk));
        ys.push_back(fit.gap_ratios[i]);
    }
    ctx.write_json("cascade.json", j);
    ctx.write("gaps.csv", gaps);
    if (cfg.svg)
        ctx.write("yoccoz.svg", render_svg("gap ratio, " + cfg.map.label(), "min(k, m-k)", "|I_{k-1} \\ I_k| / |I_0|",
                                           {{"gap ratio", xs, ys, false}}, true, true));
    std::cerr << "cascade: slope " << format_number(fit.loglog_slope) << ", C " << format_number(fit.sandwich_C)
              << (fit.exited ? "" : " (non-exiting run, window " + std::to_string(fit.window) + ")") << "\n";
    return exit_ok;
}

// ---- sweep ---------------------------------------------------------------

std::vector<std::string> sweep_parameters(const RunConfig& cfg) {
    if (!cfg.values.empty()) return cfg.values;
    std::vector<std::string> out;
    const auto count = static_cast<std::size_t>(std::floor((cfg.to - cfg.from) / cfg.step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", cfg.from + static_cast<double>(i) * cfg.step);
        out.emplace_back(buf);
    }
    return out;
}

struct SweepRow {
    std::string a;
    std::size_t levels = 0, return_levels = 0;
    std::string termination, runs, probe;
    double min_B = std::numeric_limits<double>::quiet_NaN();
    double v_length = std::numeric_limits<double>::quiet_NaN();
    std::optional<std::size_t> finest_level;
    std::size_t certified = 0;
    std::string error;
};

template <class Real>
struct SweepNest {
    std::optional<MapDescriptor> map;
    std::vector<Interval<double>> levels;
};

// Nest and probe for one parameter; safe to run concurrently.
template <class Real>
SweepNest<Real> sweep_nest(const RunConfig& cfg, SweepRow& row) {
    SweepNest<Real> out;
    try {
        MapDescriptor d = cfg.map;
        std::string spec = d.family == Family::power ? "power:" + format_number(d.alpha) + "," + row.a
                                                     : "logistic:" + row.a;
        Precision p = d.precision;
        d = MapDescriptor::parse(spec);
        d.precision = p;
        auto map = UnimodalMap<Real>::from_descriptor(d);
        NestOptions o = nest_options(cfg);
        o.parallel = false;
        auto nest = build_nest(map, construct_nice_interval(map), o);
        row.levels = nest.levels.size();
        row.return_levels = nest.return_levels();
        row.termination = termination_name(nest.termination.kind);
        std::vector<std::string> labels;
        for (const auto& lv : nest.levels)
            if (lv.classification) labels.push_back(lv.classification->label());
        row.runs = run_lengths(labels);
        auto probe = infinite_cascade_probe(map, nest, cfg.min_run);
        row.probe = probe.suspected ? "InfiniteSuspected" : "Finite";
        for (const auto& lv : nest.levels)
            out.levels.emplace_back(to_double(lv.interval.lo), to_double(lv.interval.hi));
        out.map = d;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return out;
}

// Minimum measured B over branches entering the deepest nest interval that
// any sampled orbit reaches. Runs
// serially across parameters: measurement is parallel inside and may switch
// the global extended precision.
template <class Real>
void sweep_measure(const RunConfig& cfg, const SweepNest<Real>& sn, SweepRow& row, std::uint64_t seed,
                   const HolderEstimate& holder) {
    if (!sn.map) return;
    try {
        auto map = UnimodalMap<Real>::from_descriptor(*sn.map);
        auto dmap = UnimodalMap<double>::from_descriptor(*sn.map);
        MeasureSettings ms;
        ms.holder = holder;
        ms.koebe = false;
        ms.attempts_per_sample = 10;  // a starved level falls back to the next coarser one
        for (std::size_t k = sn.levels.size(); k-- > 0;) {
            auto sum = verify_main_theorem(map, dmap, sn.levels[k], cfg.samples, entry_cap, seed, ms);
            if (sum.certified == 0) continue;
            row.finest_level = k;
            row.v_length = sn.levels[k].length();
            row.certified = sum.certified;
            row.min_B = sum.min_B;
            break;
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
}

template <class Real>
int sweep_with(const RunConfig& cfg, RunContext& ctx) {
    auto params = sweep_parameters(cfg);
    ctx.phase("holder");
    HolderEstimate holder;
    try {
        holder = estimate_holder_constant(UnimodalMap<double>::from_descriptor(cfg.map), 1.0, cfg.holder_grid);
    } catch (const Error&) {
    }
    ctx.phase("nests");
    std::vector<SweepRow> rows(params.size());
    std::vector<SweepNest<Real>> nests(params.size());
    const auto n = static_cast<long long>(params.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) {
        auto idx = static_cast<std::size_t>(i);
        rows[idx].a = params[idx];
        nests[idx] = sweep_nest<Real>(cfg, rows[idx]);
    }
    ctx.phase("measure");
    for (std::size_t i = 0; i < rows.size(); ++i) sweep_measure(cfg, nests[i], rows[i], cfg.seed + i, holder);
    ctx.phase("write");
    std::string csv = csv_line({"seed", "index", "a", "precision", "levels", "return_levels", "termination",
                                "classification_runs", "probe", "finest_level", "finest_length", "min_B", "certified", "error"});
    std::string jsonl;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!r.error.empty()) ++failures;
        csv += csv_line({std::to_string(cfg.seed), std::to_string(i), r.a, cfg.map.precision.name(),
                         std::to_string(r.levels), std::to_string(r.return_levels), r.termination, r.runs, r.probe,
                         r.finest_level ? std::to_string(*r.finest_level) : "", format_number(r.v_length), format_number(r.min_B), std::to_string(r.certified), r.error});
        json rec{{"schema", schema_version}, {"seed", cfg.seed}, {"index", i}, {"a", r.a},
                 {"precision", cfg.map.precision.name()}, {"levels", r.levels}, {"return_levels", r.return_levels},
                 {"termination", r.termination}, {"classification_runs", r.runs}, {"probe", r.probe},
                 {"finest_level", r.finest_level ? json(*r.finest_level) : json(nullptr)},
                 {"finest_length", std::isfinite(r.v_length) ? json(r.v_length) : json(nullptr)},
                 {"min_B", std::isfinite(r.min_B) ? json(r.min_B) : json(nullptr)}, {"certified", r.certified},
                 {"error", r.error}};
        jsonl += rec.dump() + "\n";
    }
    ctx.write("sweep.csv", csv);
    ctx.write("sweep.jsonl", jsonl);
    std::cerr << "sweep: " << rows.size() << " rows, " << failures << " with errors\n";
    return exit_ok;
}

// ---- report --------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
                else if (ch == '"') quoted = false;
                else cur += ch;
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::vector<double> csv_column(const std::vector<std::vector<std::string>>& rows, const std::string& name) {
    std::vector<double> out;
    if (rows.empty()) return out;
    auto it = std::find(rows[0].begin(), rows[0].end(), name);
    if (it == rows[0].end()) throw ConfigError("CSV lacks column " + name);
    auto col = static_cast<std::size_t>(it - rows[0].begin());
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(col < rows[i].size() ? std::stod(rows[i][col]) : NAN);
    return out;
}

int report_run(const RunConfig& cfg, RunContext& ctx) {
    json j{{"schema", schema_version}, {"seed", cfg.seed}};
    json figures = json::array();
    json manifests = json::array();
    const fs::path dir(cfg.out);
    if (fs::exists(dir / "gaps.csv")) {
        auto rows = read_csv(dir / "gaps.csv");
        auto x = csv_column(rows, "min_k"), y = csv_column(rows, "gap_ratio");
        ctx.write("fig_yoccoz.svg", render_svg("cascade gap ratios", "min(k, m-k)", "gap ratio", {{"gaps", x, y, false}},
                                           true, true));
        figures.push_back("fig_yoccoz.svg");
    }
    if (fs::exists(dir / "main_theorem.csv")) {
        auto rows = read_csv(dir / "main_theorem.csv");
        auto x = csv_column(rows, "v_length"), y = csv_column(rows, "min_B");
        ctx.write("fig_min_b.svg",
                  render_svg("min measured B against |V|", "|V|", "min B", {{"min B", x, y, true}}, true, false));
        figures.push_back("fig_min_b.svg");
    }
    for (const char* cmd : {"nest", "verify", "cascade", "sweep"}) {
        fs::path m = dir / manifest_name(cmd);
        if (!fs::exists(m)) continue;
        json mj = json::parse(read_text(m));
        manifests.push_back(json{{"command", cmd},
                                 {"config_hash", mj.value("config_hash", "")},
                                 {"exit_code", mj.value("exit_code", -1)},
                                 {"files", mj.value("files", json::array())}});
    }
    if (figures.empty() && manifests.empty())
        throw ConfigError("nothing to report in " + dir.string() + ": run nest, verify, cascade or sweep first");
    j["figures"] = figures;
    j["runs"] = manifests;
    ctx.write_json("report.json", j);
    std::cerr << "report: " << figures.size() << " figures, " << manifests.size() << " runs\n";
    return exit_ok;
}

template <template <class> class Cmd>
int dispatch(const RunConfig& cfg, RunContext& ctx) {
    if (cfg.map.precision.is_ext()) {
        PrecisionScope scope(cfg.map.precision.digits);
        return Cmd<ext_real>::run(cfg, ctx);
    }
    return Cmd<double>::run(cfg, ctx);
}

template <class Real>
struct NestCmd {
    static int run(const RunConfig& c, RunContext& x) { return nest_with<Real>(c, x); }
};
template <class Real>
struct VerifyCmd {
    static int run(const RunConfig& c, RunContext& x) { return verify_with<Real>(c, x); }
};
template <class Real>
struct CascadeCmd {
    static int run(const RunConfig& c, RunContext& x) { return cascade_with<Real>(c, x); }
};
template <class Real>
struct SweepCmd {
    static int run(const RunConfig& c, RunContext& x) { return sweep_with<Real>(c, x); }
};

int execute(const RunConfig& cfg) {
    RunContext ctx(cfg);
    const fs::path manifest_path = fs::path(cfg.out) / manifest_name(cfg.command);
    if (cfg.resume && fs::exists(manifest_path)) {
        try {
            json m = json::parse(read_text(manifest_path));
            bool complete = m.value("config_hash", "") == cfg.hash();
            for (const auto& f : m.value("files", json::array()))
                if (!fs::exists(fs::path(cfg.out) / f.get<std::string>())) complete = false;
            if (complete) {
                std::cerr << cfg.command << ": up to date (config " << cfg.hash() << "), skipped\n";
                return m.value("exit_code", 0);
            }
        } catch (const json::exception&) {
        }
    }
    int code = exit_config;
    std::string failure;
    try {
        if (cfg.command == "nest") code = dispatch<NestCmd>(cfg, ctx);
        else if (cfg.command == "verify") code = dispatch<VerifyCmd>(cfg, ctx);
        else if (cfg.command == "cascade") code = dispatch<CascadeCmd>(cfg, ctx);
        else if (cfg.command == "sweep") code = dispatch<SweepCmd>(cfg, ctx);
        else code = report_run(cfg, ctx);
    } catch (const PrecisionError& e) {
        failure = e.what();
        code = exit_precision;
        std::cerr << "error: " << e.what() << "\nrerun with extended precision, e.g. --precision ext50\n";
    } catch (const Error& e) {
        failure = e.what();
        code = exit_config;
        std::cerr << "error: " << e.what() << "\n";
    }
    RunManifest m = ctx.finish(code);
    json mj = m.to_json();
    if (!failure.empty()) mj["error"] = failure;
    try {
        fs::create_directories(cfg.out);
        std::ofstream(manifest_path, std::ios::binary | std::ios::trunc) << mj.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: cannot write manifest: " << e.what() << "\n";
        return exit_config;
    }
    return code;
}

}  // namespace

json RunConfig::to_json() const {
    json j;
    j["command"] = command;
    j["map"] = nestlab::to_json(map);
    j["seed"] = seed;
    j["depth"] = depth;
    j["cap"] = cap;
    j["scan"] = scan;
    j["scan_cap"] = scan_cap;
    j["grid"] = grid;
    j["holder_grid"] = holder_grid;
    j["samples"] = samples;
    j["n_max"] = n_max;
    j["horizon"] = horizon;
    j["min_run"] = min_run;
    j["scales"] = scales;
    j["checks"] = checks;
    j["tangency_offset"] = tangency_offset ? json(*tangency_offset) : json(nullptr);
    j["xi"] = xi;
    j["cascade_depth"] = cascade_depth;
    j["from"] = from;
    j["to"] = to;
    j["step"] = step;
    j["values"] = values;
    j["svg"] = svg;
    j["with_domains"] = with_domains;
    j["test_hook"] = test_hook;
    return j;
}

std::string RunConfig::hash() const { return fnv1a_hex(to_json().dump()); }

void RunConfig::validate() const {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string(name) + " must be positive");
    };
    positive(cap, "cap");
    positive(scan_cap, "scan-cap");
    positive(samples, "samples");
    positive(n_max, "n-max");
    positive(horizon, "horizon");
    positive(min_run, "min-run");
    positive(holder_grid, "holder-grid");
    positive(cascade_depth, "cascade-depth");
    if (grid < 2) throw ConfigError("grid needs at least 2 points");
    if (!(xi >= 0) || !std::isfinite(xi)) throw ConfigError("xi must be a finite non-negative number");
    for (const auto& c : checks)
        if (std::find(known_checks.begin(), known_checks.end(), c) == known_checks.end())
            throw ConfigError("unknown check '" + c + "'");
    try {
        (void)UnimodalMap<double>::from_descriptor(map);
    } catch (const Error& e) {
        throw ConfigError("map " + map.label() + ": " + e.what());
    }
    if (tangency_offset) {
        double d = 0;
        try {
            d = std::stod(*tangency_offset);
        } catch (const std::exception&) {
            throw ConfigError("tangency offset must be a number");
        }
        if (!(d > 0) || !(d < 1)) throw ConfigError("tangency offset must lie in (0, 1)");
    }
    if (command == "sweep") {
        if (values.empty()) {
            if (!(step > 0) || !std::isfinite(step)) throw ConfigError("sweep step must be positive");
            if (!(from <= to)) throw ConfigError("sweep range needs from <= to");
            if (map.family == Family::logistic && (!(from > 1) || !(to <= 4)))
                throw ConfigError("logistic sweep range must lie in (1, 4]");
            if ((to - from) / step > 1e6) throw ConfigError("sweep has more than 10^6 rows");
        }
    }
}

RunConfig merge_config(RunConfig base, const json& j) {
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "schema") {
                if (v.get<std::string>() != schema_version) throw ConfigError("config schema must be nestlab/1");
            } else if (k == "map") {
                base.map = v.is_string() ? MapDescriptor::parse(v.get<std::string>()) : map_from_json(v);
                if (v.is_object() && v.contains("precision")) base.precision_given = true;
            } else if (k == "precision") {
                base.map.precision = Precision::parse(v.get<std::string>());
                base.precision_given = true;
            } else if (k == "seed") base.seed = v.get<std::uint64_t>();
            else if (k == "out") base.out = v.get<std::string>();
            else if (k == "depth") base.depth = v.get<std::size_t>();
            else if (k == "cap") base.cap = v.get<std::size_t>();
            else if (k == "scan") base.scan = v.get<std::size_t>();
            else if (k == "scan_cap") base.scan_cap = v.get<std::size_t>();
            else if (k == "grid") base.grid = v.get<std::size_t>();
            else if (k == "holder_grid") base.holder_grid = v.get<std::size_t>();
            else if (k == "samples") base.samples = v.get<std::size_t>();
            else if (k == "n_max") base.n_max = v.get<std::size_t>();
            else if (k == "horizon") base.horizon = v.get<std::size_t>();
            else if (k == "min_run") base.min_run = v.get<std::size_t>();
            else if (k == "scales") base.scales = v.get<std::size_t>();
            else if (k == "checks") base.checks = v.get<std::vector<std::string>>();
            else if (k == "tangency_offset") {
                if (v.is_null()) base.tangency_offset.reset();
                else base.tangency_offset = v.is_string() ? v.get<std::string>() : format_number(v.get<double>());
            } else if (k == "xi") base.xi = v.get<double>();
            else if (k == "cascade_depth") base.cascade_depth = v.get<std::size_t>();
            else if (k == "from") base.from = v.get<double>();
            else if (k == "to") base.to = v.get<double>();
            else if (k == "step") base.step = v.get<double>();
            else if (k == "values") {
                base.values.clear();
                for (const auto& x : v) base.values.push_back(x.is_string() ? x.get<std::string>() : format_number(x.get<double>()));
            } else if (k == "svg") base.svg = v.get<bool>();
            else if (k == "resume") base.resume = v.get<bool>();
            else if (k == "with_domains") base.with_domains = v.get<bool>();
            else if (k == "command") {
            } else throw ConfigError("unknown config key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config file: ") + e.what());
    }
    return base;
}

json RunManifest::to_json() const {
    json t;
    for (const auto& [name, ms] : timings_ms) t[name] = ms;
    return json{{"schema", schema_version}, {"tool", "nestlab"}, {"version", NESTLAB_VERSION},
                {"command", command},       {"config_hash", config_hash}, {"config", config},
                {"files", files},           {"exit_code", exit_code},     {"timings_ms", t}};
}

int run_cli(int argc, char** argv) {
    CLI::App app{"nestlab: principal nest construction and cross-ratio bound experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", NESTLAB_VERSION);

    std::optional<std::string> map_text, precision_text, config_path, out, offset;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> depth, cap, scan, scan_cap, grid, holder_grid, samples, n_max, horizon, min_run, scales,
        cascade_depth;
    std::optional<double> xi, from, to, step;
    std::vector<std::string> checks, values;
    bool svg = false, resume = false, with_domains = false;
    std::string test_hook;

    app.add_option("--map", map_text, "family:param, e.g. logistic:3.9 or power:4,1");
    app.add_option("--precision", precision_text, "f64 or extN (N decimal digits, N >= 30)");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--config", config_path, "JSON config; explicit flags override it");
    app.add_flag("--resume", resume, "skip the run when its manifest matches the config hash");
    app.add_option("--test-hook", test_hook)->group("");

    auto* nest = app.add_subcommand("nest", "build the principal nest");
    auto* verify = app.add_subcommand("verify", "measure cross-ratio distortion and check bounds");
    auto* cascade = app.add_subcommand("cascade", "fit the scaling of a central cascade");
    auto* sweep = app.add_subcommand("sweep", "summarise a grid of parameters");
    auto* report = app.add_subcommand("report", "render figures from an output directory");
    (void)report;

    for (auto* sc : {nest, verify, cascade, sweep}) {
        sc->add_option("--depth", depth, "nest levels to build");
        sc->add_option("--cap", cap, "return-time cap");
        sc->add_option("--horizon", horizon, "iterates examined when checking niceness");
    }
    for (auto* sc : {nest, sweep}) sc->add_option("--min-run", min_run, "central run required before probing");
    nest->add_option("--scan", scan, "return-domain seeds per level (0 skips)");
    nest->add_option("--scan-cap", scan_cap, "return-time cap of the domain scan");
    nest->add_flag("--with-domains", with_domains, "include every return domain in nest.json");
    for (auto* sc : {verify, sweep}) {
        sc->add_option("--samples", samples, "branches per check (or per scale)");
        sc->add_option("--holder-grid", holder_grid, "grid for the Hoelder constant of D2f");
    }
    verify->add_option("--checks", checks, "comma list: schwarzian-expansion, theorem-mu, koebe, "
                                           "minimum-principle, main-theorem, blocks")
        ->delimiter(',');
    verify->add_option("--grid", grid, "Koebe derivative grid");
    verify->add_option("--n-max", n_max, "longest cylinder branch");
    verify->add_option("--scales", scales, "halvings of the nice interval for main-theorem");
    verify->add_option("--xi", xi, "exponent offset for block sums");
    cascade->add_option("--tangency-offset", offset, "use logistic a = 1 + sqrt(8) - offset");
    cascade->add_option("--xi", xi, "exponent offset for cascade sums");
    cascade->add_option("--cascade-depth", cascade_depth, "level cap while following the cascade");
    cascade->add_flag("--svg", svg, "also write yoccoz.svg");
    sweep->add_option("--from", from, "first parameter");
    sweep->add_option("--to", to, "last parameter");
    sweep->add_option("--step", step, "parameter step");
    sweep->add_option("--values", values, "explicit parameter list")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    RunConfig cfg;
    try {
        for (auto* sc : app.get_subcommands()) cfg.command = sc->get_name();
        if (config_path) {
            json j;
            try {
                j = json::parse(read_text(*config_path));
            } catch (const json::exception& e) {
                throw ConfigError("config file " + *config_path + ": " + e.what());
            }
            cfg = merge_config(cfg, j);
        }
        if (map_text) {
            Precision p = cfg.map.precision;
            cfg.map = MapDescriptor::parse(*map_text);
            cfg.map.precision = p;
        }
        if (precision_text) {
            cfg.map.precision = Precision::parse(*precision_text);
            cfg.precision_given = true;
        }
        if (seed) cfg.seed = *seed;
        if (out) cfg.out = *out;
        if (depth) cfg.depth = *depth;
        if (cap) cfg.cap = *cap;
        if (scan) cfg.scan = *scan;
        if (scan_cap) cfg.scan_cap = *scan_cap;
        if (grid) cfg.grid = *grid;
        if (holder_grid) cfg.holder_grid = *holder_grid;
        if (samples) cfg.samples = *samples;
        if (n_max) cfg.n_max = *n_max;
        if (horizon) cfg.horizon = *horizon;
        if (min_run) cfg.min_run = *min_run;
        if (scales) cfg.scales = *scales;
        if (cascade_depth) cfg.cascade_depth = *cascade_depth;
        if (xi) cfg.xi = *xi;
        if (from) cfg.from = *from;
        if (to) cfg.to = *to;
        if (step) cfg.step = *step;
        if (offset) cfg.tangency_offset = *offset;
        if (!checks.empty()) cfg.checks = checks;
        if (!values.empty()) cfg.values = values;
        if (svg) cfg.svg = true;
        if (resume) cfg.resume = true;
        if (with_domains) cfg.with_domains = true;
        cfg.test_hook = test_hook;
        if (cfg.command == "verify" && cfg.checks.empty()) cfg.checks = default_checks;
        if (cfg.command == "cascade" && cfg.tangency_offset && !cfg.precision_given &&
            std::stod(*cfg.tangency_offset) < 1e-8) {
            cfg.map.precision = Precision::ext(50);
            std::cerr << "cascade: offset below 1e-8, switching to ext50\n";
        }
        if (!cfg.test_hook.empty() && cfg.test_hook != "corrupt-bound")
            throw ConfigError("unknown test hook '" + cfg.test_hook + "'");
        cfg.validate();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::invalid_argument&) {
        std::cerr << "error: tangency offset must be a number\n";
        return exit_config;
    }
    return execute(cfg);
}

}  // namespace nestlab
