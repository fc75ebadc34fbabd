#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <string>
#include <string_view>

namespace nestlab {

using ext_real = boost::multiprecision::mpfr_float;

enum class Backend { f64, ext };

struct Precision {
    Backend backend = Backend::f64;
    unsigned digits = 16;

    static Precision f64() { return {}; }
    static Precision ext(unsigned digits);
    // "f64" or "extN" with N >= 30.
    static Precision parse(std::string_view text);
    std::string name() const;
    bool is_ext() const { return backend == Backend::ext; }
    bool operator==(const Precision&) const = default;
};

// Sets the process-wide working precision of ext_real and restores it on exit.
// mpfr default precision is global: set it before any parallel region.
class PrecisionScope {
public:
    explicit PrecisionScope(unsigned digits);
    ~PrecisionScope();
    PrecisionScope(const PrecisionScope&) = delete;
    PrecisionScope& operator=(const PrecisionScope&) = delete;

private:
    unsigned saved_;
};

template <class Real>
struct real_traits;

template <>
struct real_traits<double> {
    static double epsilon() { return 2.220446049250313e-16; }
    static double root_tolerance() { return 1e-13; }
    static unsigned digits() { return 16; }
};

template <>
struct real_traits<ext_real> {
    static unsigned digits() { return ext_real::default_precision(); }
    static ext_real epsilon() { return pow(ext_real(10), 1 - static_cast<int>(digits())); }
    static ext_real root_tolerance() { return pow(ext_real(10), 3 - static_cast<int>(digits())); }
};

template <class Real>
Real abs_value(const Real& x) {
    return x < 0 ? Real(-x) : x;
}

inline double to_double(double x) { return x; }
inline double to_double(const ext_real& x) { return x.convert_to<double>(); }

template <class Real>
Real real_from_string(const std::string& text);

template <>
inline double real_from_string<double>(const std::string& text) { return std::stod(text); }

template <>
inline ext_real real_from_string<ext_real>(const std::string& text) { return ext_real(text); }

template <class Real>
Real sqrt8_plus_one() {
    using std::sqrt;
    return Real(1) + sqrt(Real(8));
}

}  // namespace nestlab
