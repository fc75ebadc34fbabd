#pragma once

#include "nestlab/precision.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace nestlab {

enum class Family { logistic, power };

std::string family_name(Family family);

// Serializable map identity. `a_text` keeps the literal parameter text so that
// extended precision sees every digit the user typed.
struct MapDescriptor {
    Family family = Family::logistic;
    double a = 4.0;
    double alpha = 2.0;
    std::optional<std::string> a_text;
    Precision precision{};

    // "logistic:3.9" or "power:2.5,1.0" (alpha, scale).
    static MapDescriptor parse(const std::string& spec);
    std::string label() const;
    bool operator==(const MapDescriptor&) const = default;
};

struct HolderEstimate {
    double eta = 1.0;
    double c_eta = 0.0;
    std::size_t grid_size = 0;
};

template <class Real>
class UnimodalMap {
public:
    static UnimodalMap logistic(const Real& a);
    // f(x) = scale * (1 - |2x - 1|^alpha).
    static UnimodalMap power(const Real& alpha, const Real& scale);
    static UnimodalMap from_descriptor(const MapDescriptor& desc);

    Family family() const { return family_; }
    const Real& a() const { return a_; }
    const Real& critical_order() const { return alpha_; }
    const Real& critical_point() const { return c_; }
    double smoothness_eta() const { return eta_; }

    // Unchecked evaluation for hot loops.
    Real operator()(const Real& x) const;
    Real eval(const Real& x) const;
    Real deriv(const Real& x, int order) const;
    // Unchecked first derivative for hot loops.
    Real d1(const Real& x) const;
    Real schwarzian(const Real& x) const;
    Real critical_value() const { return (*this)(c_); }
    MapDescriptor descriptor() const;

private:
    UnimodalMap(Family family, Real a, Real alpha);
    void validate() const;

    Family family_;
    Real a_;
    Real alpha_;
    Real c_;
    double eta_ = 1.0;
};

// Sampled supremum of |D2f(x) - D2f(y)| / |x - y|^eta over all pairs of a
// uniform grid on [0,1]. A lower estimate of the true constant.
HolderEstimate estimate_holder_constant(const UnimodalMap<double>& map, double eta, std::size_t grid);

extern template class UnimodalMap<double>;
extern template class UnimodalMap<ext_real>;

}  // namespace nestlab
