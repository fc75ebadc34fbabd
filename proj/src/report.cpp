#include "nestlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace nestlab {

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& xs) {
    json out = json::array();
    for (double x : xs) out.push_back(number_or_null(x));
    return out;
}

}  // namespace

json to_json(const MapDescriptor& desc) {
    json j;
    j["family"] = family_name(desc.family);
    j["a"] = desc.a;
    if (desc.family == Family::power) j["alpha"] = desc.alpha;
    if (desc.a_text) j["a_text"] = *desc.a_text;
    j["precision"] = desc.precision.name();
    return j;
}

MapDescriptor map_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("map descriptor must be a JSON object");
    std::string family = j.value("family", std::string("logistic"));
    std::string param;
    if (j.contains("a_text")) param = j["a_text"].get<std::string>();
    else if (j.contains("a")) param = format_number(j["a"].get<double>());
    else throw ConfigError("map descriptor needs a parameter 'a'");
    std::string spec = family + ":";
    if (family == "power") spec += format_number(j.value("alpha", 2.0)) + "," + param;
    else spec += param;
    MapDescriptor d = MapDescriptor::parse(spec);
    if (j.contains("precision")) d.precision = Precision::parse(j["precision"].get<std::string>());
    return d;
}

json to_json(const Classification& cls) {
    return json{{"label", cls.label()}, {"central", cls.central()},
                {"side", cls.side == Side::high ? "high" : cls.side == Side::low ? "low" : "ambiguous"}};
}

json to_json(const Termination& t) {
    return json{{"kind", termination_name(t.kind)}, {"run_length", t.run_length}, {"detail", t.detail}};
}

json to_json(const CascadeResult& c) {
    return json{{"kind", cascade_kind_name(c.kind)}, {"start", c.start}, {"m", c.m}, {"mixed", c.mixed}};
}

json to_json(const DistortionReport& r) {
    json j;
    j["label"] = r.label;
    j["n"] = r.n;
    j["T"] = json::array({r.t_lo, r.t_hi});
    j["J"] = json::array({r.j_lo, r.j_hi});
    j["max_image_length"] = r.max_image_length;
    j["measured_B"] = r.measured_B;
    j["measured_A"] = r.measured_A;
    j["deficit_B"] = r.deficit_B;
    j["deficit_A"] = r.deficit_A;
    j["rounding_allowance"] = number_or_null(r.rounding_allowance);
    j["digits"] = r.digits;
    if (r.has_mu) {
        j["theorem_mu"] = json{{"eta", r.eta},           {"c_eta", r.c_eta}, {"holder_sum", r.holder_sum},
                               {"lower", r.theorem_mu_lower}, {"pass", r.mu_pass}};
    }
    if (r.has_koebe) {
        j["koebe"] = json{{"delta", r.koebe_delta},
                          {"theta", r.koebe_theta},
                          {"bound", number_or_null(r.koebe_bound)},
                          {"derivative_ratio_max", number_or_null(r.derivative_ratio_max)},
                          {"grid", r.koebe_grid},
                          {"applicable", r.koebe_applicable()},
                          {"pass", r.koebe_pass}};
    }
    return j;
}

json to_json(const MinimumPrincipleResult& r) {
    return json{{"mu", r.mu},
                {"min_probe_B", r.min_probe_B},
                {"probe_allowance", r.probe_allowance},
                {"worst_margin", number_or_null(r.worst_margin)},
                {"samples", r.samples},
                {"pass", r.pass}};
}

json to_json(const BlockDecomposition& d) {
    json j;
    j["label"] = d.label;
    j["n"] = d.n;
    j["xi"] = d.xi;
    j["times"] = d.times;
    j["block_sums"] = numbers(d.block_sums);
    j["total"] = d.total();
    json labels = json::array();
    for (const auto& l : d.case_labels)
        labels.push_back(json{{"kind", block_case_name(l.kind)}, {"m", l.m}, {"run_start", l.run_start}});
    j["case_labels"] = labels;
    j["sigma"] = numbers(d.sigma);
    j["sigma_m"] = numbers(d.sigma_m);
    j["level_lengths"] = numbers(d.level_lengths);
    j["touch_log"] = d.touch_log;
    return j;
}

json to_json(const BlockVerdict& v) {
    return json{{"level", v.level},
                {"kind", block_case_name(v.kind)},
                {"block_sum", v.block_sum},
                {"rhs", number_or_null(v.rhs)},
                {"realized_constant", number_or_null(v.realized_constant)},
                {"skipped", v.skipped},
                {"pass", v.pass},
                {"note", v.note}};
}

json to_json(const MainTheoremSummary& s, bool with_reports) {
    json j{{"v_length", s.v_length}, {"requested", s.requested},         {"certified", s.certified},
           {"min_B", s.min_B},       {"min_A", s.min_A},                 {"max_deficit_B", s.max_deficit_B},
           {"starved", s.starved}};
    if (with_reports) {
        json reps = json::array();
        for (const auto& r : s.reports) reps.push_back(to_json(r));
        j["reports"] = reps;
    }
    return j;
}

json to_json(const TrendFit& t) {
    return json{{"lengths", numbers(t.lengths)},
                {"min_B", numbers(t.min_B)},
                {"non_decreasing", t.non_decreasing},
                {"fit_points", t.fit_points},
                {"slope", t.slope ? json(*t.slope) : json(nullptr)}};
}

json to_json(const YoccozFit& f) {
    json j;
    j["start"] = f.start;
    j["m"] = f.m;
    j["exited"] = f.exited;
    j["window"] = f.window;
    if (!f.exited) j["tail_ratio"] = f.tail_ratio;
    j["slope"] = f.loglog_slope;
    j["sandwich_C"] = f.sandwich_C;
    j["gap_sum"] = f.gap_sum;
    j["im_over_i0"] = f.im_over_i0;
    j["gap_ratios"] = numbers(f.gap_ratios);
    const ParabolicFit& p = f.parabolic;
    j["parabolic"] = json{{"x0", p.x0},
                          {"df_at_x0", p.df_at_x0},
                          {"epsilon", p.epsilon},
                          {"a_coef", number_or_null(p.a_coef)},
                          {"b_coef", number_or_null(p.b_coef)},
                          {"N", p.N},
                          {"N_sqrt_eps", p.N_sqrt_eps},
                          {"non_parabolic", p.non_parabolic}};
    return j;
}

json to_json(const CascadeSumResult& r) {
    return json{{"m", r.m},
                {"M", r.M},
                {"xi", r.xi},
                {"i0_length", r.i0_length},
                {"sum_linear", r.sum_linear},
                {"sum_xi", r.sum_xi},
                {"realized_linear", r.realized_linear},
                {"realized_xi", r.realized_xi}};
}

json to_json(const ExceptionalChecks& e) {
    return json{{"gamma_hat", e.gamma_hat},
                {"C_hat", e.C_hat},
                {"p_multiplier", e.p_multiplier},
                {"min_other_factor", e.min_other_factor},
                {"other_domains", e.other_domains},
                {"grid", e.grid},
                {"gamma_pass", e.gamma_pass},
                {"multiplier_pass", e.multiplier_pass},
                {"C_finite", e.C_finite}};
}

json to_json(const LambdaDecay& l) {
    return json{{"probes", l.probes},
                {"below_one", l.below_one},
                {"fraction_below_one", l.fraction_below_one()},
                {"realized_lambda", l.realized_lambda}};
}

json to_json(const DeltaBoundCheck& d) {
    return json{{"delta", d.delta},
                {"closed_form", d.closed_form},
                {"brute_force", d.brute_force},
                {"domains_checked", d.domains_checked},
                {"violations", d.violations},
                {"worst_B", d.worst_B}};
}

template <class Real>
json to_json(const ReturnDomain<Real>& d) {
    json j{{"domain", to_json(d.domain)},
           {"return_time", d.return_time},
           {"central", d.is_central},
           {"itinerary", itinerary_string(d.itinerary)}};
    if (d.extension) j["extension"] = to_json(*d.extension);
    return j;
}

template <class Real>
json to_json(const NestLevel<Real>& lv, bool with_domains) {
    json j;
    j["interval"] = to_json(lv.interval);
    j["length"] = to_double(lv.interval.length());
    if (lv.classification) {
        j["return_time"] = lv.central->return_time;
        j["central_domain"] = to_json(lv.central->domain);
        j["classification"] = to_json(*lv.classification);
        j["critical_return"] = to_double(lv.critical_return);
        j["maximum_at_c"] = lv.maximum_at_c;
        j["measured_scaling"] = lv.measured_scaling;
        j["central_run"] = lv.central_run;
        j["stationary"] = lv.stationary;
    }
    if (lv.domains_scanned) {
        j["coverage"] = lv.coverage;
        j["domain_count"] = lv.domains.size();
        if (with_domains) {
            json ds = json::array();
            for (const auto& d : lv.domains) ds.push_back(to_json(d));
            j["domains"] = ds;
        }
    }
    return j;
}

template <class Real>
json to_json(const PrincipalNest<Real>& nest, bool with_domains) {
    json j;
    j["schema"] = schema_version;
    j["map"] = to_json(nest.map);
    json levels = json::array();
    for (std::size_t i = 0; i < nest.levels.size(); ++i) {
        json lv = to_json(nest.levels[i], with_domains);
        lv["index"] = i;
        levels.push_back(std::move(lv));
    }
    j["levels"] = levels;
    j["return_levels"] = nest.return_levels();
    j["termination"] = to_json(nest.termination);
    return j;
}

template <class Real>
json to_json(const ProbeResult<Real>& p) {
    json levels = json::array();
    for (const auto& l : p.levels)
        levels.push_back(json{{"I_inf", to_json(l.I_inf)},
                              {"I00", to_json(l.I00)},
                              {"theta", l.theta},
                              {"return_time", l.return_time}});
    return json{{"verdict", p.suspected ? "InfiniteSuspected" : "Finite"},
                {"run", p.run},
                {"precision_exhausted", p.precision_exhausted},
                {"levels", levels},
                {"detail", p.detail}};
}

template <class Real>
json to_json(const ExceptionalResult<Real>& e) {
    json j{{"exceptional", e.exceptional}, {"level", e.level}, {"reason", e.reason}};
    if (e.exceptional) {
        j["left"] = to_json(e.left);
        j["right"] = to_json(e.right);
        j["hull"] = to_json(e.hull);
        j["V"] = to_json(e.V);
        j["p"] = to_double(e.p);
        j["p_prime"] = to_double(e.p_prime);
        j["q"] = to_double(e.q);
        j["q_prime"] = to_double(e.q_prime);
        j["branch_time"] = e.branch_time;
    }
    return j;
}

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out += '"';
            for (char ch : f) {
                if (ch == '"') out += '"';
                out += ch;
            }
            out += '"';
        } else {
            out += f;
        }
    }
    out += '\n';
    return out;
}

template <class Real>
std::string nest_csv(const PrincipalNest<Real>& nest) {
    std::string out = csv_line({"level", "lo", "hi", "length", "return_time", "classification", "central_run",
                                "measured_scaling", "stationary", "coverage", "domains"});
    for (std::size_t i = 0; i < nest.levels.size(); ++i) {
        const auto& lv = nest.levels[i];
        const bool built = lv.classification.has_value();
        out += csv_line({std::to_string(i), format_number(to_double(lv.interval.lo)),
                         format_number(to_double(lv.interval.hi)), format_number(to_double(lv.interval.length())),
                         built ? std::to_string(lv.central->return_time) : "",
                         built ? lv.classification->label() : "", built ? std::to_string(lv.central_run) : "",
                         built ? format_number(lv.measured_scaling) : "", built ? (lv.stationary ? "1" : "0") : "",
                         lv.domains_scanned ? format_number(lv.coverage) : "",
                         lv.domains_scanned ? std::to_string(lv.domains.size()) : ""});
    }
    return out;
}

std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<SvgSeries>& series, bool log_x, bool log_y) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double a = tx(s.x[i]), b = ty(s.y[i]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            x0 = std::min(x0, a);
            x1 = std::max(x1, a);
            y0 = std::min(y0, b);
            y1 = std::max(y1, b);
        }
    if (!(x0 < x1)) {
        x0 -= 1;
        x1 += 1;
    }
    if (!(y0 < y1)) {
        y0 -= 1;
        y1 += 1;
    }
    auto px = [&](double a) { return ml + (a - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double b) { return H - mb - (b - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
       << "\" stroke=\"black\"/>\n";
    auto tick = [&](double v, bool log) { return log ? "1e" + format_number(std::round(v * 100) / 100) : format_number(v); };
    for (int t = 0; t <= 4; ++t) {
        double a = x0 + (x1 - x0) * t / 4, b = y0 + (y1 - y0) * t / 4;
        os << "<text x=\"" << px(a) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << tick(a, log_x) << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(b) + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
           << tick(b, log_y) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
       << H / 2 << ")\">" << ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = colors[k % 4];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double a = tx(s.x[i]), b = ty(s.y[i]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            if (s.line) pts << px(a) << ',' << py(b) << ' ';
            else os << "<circle cx=\"" << px(a) << "\" cy=\"" << py(b) << "\" r=\"2\" fill=\"" << col << "\"/>\n";
        }
        if (s.line) os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"" << pts.str() << "\"/>\n";
        os << "<text x=\"" << W - mr - 4 << "\" y=\"" << mt + 14 * (k + 1) << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << col << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

#define NESTLAB_INSTANTIATE(R)                                        \
    template json to_json(const ReturnDomain<R>&);                    \
    template json to_json(const NestLevel<R>&, bool);                 \
    template json to_json(const PrincipalNest<R>&, bool);             \
    template json to_json(const ProbeResult<R>&);                     \
    template json to_json(const ExceptionalResult<R>&);               \
    template std::string nest_csv(const PrincipalNest<R>&);

NESTLAB_INSTANTIATE(double)
NESTLAB_INSTANTIATE(ext_real)

}  // namespace nestlab
