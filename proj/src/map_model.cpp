#include "nestlab/map_model.hpp"

#include "nestlab/errors.hpp"
#include "nestlab/kernels.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace nestlab {

std::string family_name(Family family) { return family == Family::logistic ? "logistic" : "power"; }

namespace {

double parse_number(const std::string& text, const std::string& spec) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("malformed map parameter in '" + spec + "'");
    }
    if (used != text.size() || !std::isfinite(value)) throw ConfigError("malformed map parameter in '" + spec + "'");
    return value;
}

}  // namespace

MapDescriptor MapDescriptor::parse(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("map must look like family:param, got '" + spec + "'");
    std::string fam = spec.substr(0, colon);
    std::string rest = spec.substr(colon + 1);
    MapDescriptor desc;
    if (fam == "logistic") {
        desc.family = Family::logistic;
        desc.a = parse_number(rest, spec);
        desc.a_text = rest;
    } else if (fam == "power") {
        desc.family = Family::power;
        auto comma = rest.find(',');
        desc.alpha = parse_number(rest.substr(0, comma), spec);
        desc.a = 1.0;
        if (comma != std::string::npos) {
            desc.a = parse_number(rest.substr(comma + 1), spec);
            desc.a_text = rest.substr(comma + 1);
        }
    } else {
        throw ConfigError("unknown map family '" + fam + "'");
    }
    return desc;
}

std::string MapDescriptor::label() const {
    std::ostringstream os;
    os.precision(17);
    if (family == Family::logistic) {
        os << "logistic:";
        if (a_text) os << *a_text; else os << a;
    } else {
        os << "power:" << alpha << ',';
        if (a_text) os << *a_text; else os << a;
    }
    return os.str();
}

template <class Real>
UnimodalMap<Real>::UnimodalMap(Family family, Real a, Real alpha)
    : family_(family), a_(std::move(a)), alpha_(std::move(alpha)), c_(Real(1) / 2) {
    if (family_ == Family::power) {
        double al = to_double(alpha_);
        if (al == 2.0 || al >= 3.0) eta_ = 1.0;
        else if (al > 2.0) eta_ = al - 2.0;
        else eta_ = al - 1.0;
    }
    validate();
}

template <class Real>
UnimodalMap<Real> UnimodalMap<Real>::logistic(const Real& a) {
    if (!(a > 1) || a > 4) throw DomainError("logistic parameter must lie in (1,4]");
    return UnimodalMap(Family::logistic, a, Real(2));
}

template <class Real>
UnimodalMap<Real> UnimodalMap<Real>::power(const Real& alpha, const Real& scale) {
    if (!(alpha > 1)) throw DomainError("power family needs alpha > 1");
    if (!(scale > 0) || scale > 1) throw DomainError("power family scale must lie in (0,1]");
    return UnimodalMap(Family::power, scale, alpha);
}

template <class Real>
UnimodalMap<Real> UnimodalMap<Real>::from_descriptor(const MapDescriptor& desc) {
    Real a = desc.a_text ? real_from_string<Real>(*desc.a_text) : Real(desc.a);
    if (desc.family == Family::logistic) return logistic(a);
    return power(Real(desc.alpha), a);
}

template <class Real>
void UnimodalMap<Real>::validate() const {
    Real tol = real_traits<Real>::root_tolerance();
    auto at_boundary = [&](const Real& v) { return abs_value(v) < tol || abs_value(Real(v - 1)) < tol; };
    if (!at_boundary((*this)(Real(0))) || !at_boundary((*this)(Real(1))))
        throw DomainError("map must send the boundary of [0,1] into itself");
    for (int i = 1; i < 100; ++i) {
        Real x = Real(i) / 100;
        if (i == 50) continue;
        Real d = d1(x);
        if ((i < 50 && !(d > 0)) || (i > 50 && !(d < 0))) throw DomainError("map is not unimodal on [0,1]");
    }
    if (abs_value(d1(c_)) > tol) throw DomainError("derivative at the critical point is not zero");
}

template <class Real>
Real UnimodalMap<Real>::operator()(const Real& x) const {
    if (family_ == Family::logistic) return a_ * x * (1 - x);
    Real u = abs_value(Real(2 * x - 1));
    using std::pow;
    return a_ * (1 - pow(u, alpha_));
}

template <class Real>
Real UnimodalMap<Real>::eval(const Real& x) const {
    if (!(x >= 0) || x > 1) throw DomainError("x must lie in [0,1]");
    return (*this)(x);
}

template <class Real>
Real UnimodalMap<Real>::d1(const Real& x) const {
    if (family_ == Family::logistic) return a_ * (1 - 2 * x);
    Real u = 2 * x - 1;
    if (u == 0) return Real(0);
    using std::pow;
    Real mag = 2 * a_ * alpha_ * pow(abs_value(u), Real(alpha_ - 1));
    return u > 0 ? Real(-mag) : mag;
}

template <class Real>
Real UnimodalMap<Real>::deriv(const Real& x, int order) const {
    if (!(x >= 0) || x > 1) throw DomainError("x must lie in [0,1]");
    if (order < 1 || order > 3) throw UnsupportedOrderError("derivative order must be 1, 2 or 3");
    if (family_ == Family::logistic) {
        if (order == 1) return d1(x);
        if (order == 2) return -2 * a_;
        return Real(0);
    }
    if (order == 1) return d1(x);
    Real u = 2 * x - 1;
    Real au = abs_value(u);
    if (alpha_ < order && au < real_traits<Real>::root_tolerance())
        throw UnsupportedOrderError("power family derivative of this order is singular at the critical point");
    using std::pow;
    if (order == 2) {
        if (alpha_ == 2) return -8 * a_;
        return -4 * a_ * alpha_ * (alpha_ - 1) * pow(au, Real(alpha_ - 2));
    }
    if (alpha_ == 2 || alpha_ == 3) {
        Real mag = 8 * a_ * alpha_ * (alpha_ - 1) * (alpha_ - 2);
        return u > 0 ? Real(-mag) : mag;
    }
    Real mag = 8 * a_ * alpha_ * (alpha_ - 1) * (alpha_ - 2) * pow(au, Real(alpha_ - 3));
    return u > 0 ? Real(-mag) : mag;
}

template <class Real>
Real UnimodalMap<Real>::schwarzian(const Real& x) const {
    Real df = deriv(x, 1);
    if (abs_value(Real(x - c_)) < real_traits<Real>::root_tolerance() || df == 0)
        throw SingularityError("Schwarzian is undefined at the critical point");
    Real r2 = deriv(x, 2) / df;
    return deriv(x, 3) / df - Real(3) / 2 * r2 * r2;
}

template <class Real>
MapDescriptor UnimodalMap<Real>::descriptor() const {
    MapDescriptor d;
    d.family = family_;
    d.a = to_double(a_);
    d.alpha = to_double(alpha_);
    if constexpr (std::is_same_v<Real, ext_real>) {
        d.precision = Precision::ext(real_traits<ext_real>::digits());
        d.a_text = a_.str(0, std::ios_base::fmtflags(0));
    }
    return d;
}

HolderEstimate estimate_holder_constant(const UnimodalMap<double>& map, double eta, std::size_t grid) {
    if (!(eta > 0) || eta > 1) throw ParameterError("eta must lie in (0,1]");
    if (grid < 2) throw ParameterError("Hölder grid needs at least 2 points");
    HolderEstimate out;
    out.eta = eta;
    out.grid_size = grid;
    out.c_eta = holder_sup_parallel(map, eta, grid);
    return out;
}

template class UnimodalMap<double>;
template class UnimodalMap<ext_real>;

}  // namespace nestlab
