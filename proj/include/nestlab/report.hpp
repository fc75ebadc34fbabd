#pragma once

#include "nestlab/bound_lab.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace nestlab {

using json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "nestlab/1";

json to_json(const MapDescriptor& desc);
MapDescriptor map_from_json(const json& j);

template <class Real>
json to_json(const Interval<Real>& I) {
    return json::array({to_double(I.lo), to_double(I.hi)});
}

json to_json(const Classification& cls);
json to_json(const Termination& t);
json to_json(const CascadeResult& c);
json to_json(const DistortionReport& r);
json to_json(const MinimumPrincipleResult& r);
json to_json(const BlockDecomposition& d);
json to_json(const BlockVerdict& v);
json to_json(const MainTheoremSummary& s, bool with_reports = false);
json to_json(const TrendFit& t);
json to_json(const YoccozFit& f);
json to_json(const CascadeSumResult& r);
json to_json(const ExceptionalChecks& e);
json to_json(const LambdaDecay& l);
json to_json(const DeltaBoundCheck& d);

template <class Real>
json to_json(const ReturnDomain<Real>& d);
template <class Real>
json to_json(const NestLevel<Real>& level, bool with_domains);
template <class Real>
json to_json(const PrincipalNest<Real>& nest, bool with_domains = false);
template <class Real>
json to_json(const ProbeResult<Real>& p);
template <class Real>
json to_json(const ExceptionalResult<Real>& e);

// Header row plus rows; fields containing separators are quoted.
std::string csv_line(const std::vector<std::string>& fields);
// Shortest round-trip text of a double.
std::string format_number(double x);

template <class Real>
std::string nest_csv(const PrincipalNest<Real>& nest);

struct SvgSeries {
    std::string name;
    std::vector<double> x, y;
    bool line = false;
};

// Static scatter/line plot; axes are log10 when requested.
std::string render_svg(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<SvgSeries>& series, bool log_x, bool log_y);

}  // namespace nestlab
