#pragma once

#include "nestlab/interval_core.hpp"
#include "nestlab/map_model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace nestlab {

enum class Lap : char { left = 'L', right = 'R' };
using Itinerary = std::vector<Lap>;

std::string itinerary_string(const Itinerary& itinerary);
Itinerary parse_itinerary(const std::string& text);
// +1 if the composition of the listed laps preserves orientation.
int itinerary_orientation(const Itinerary& itinerary);

template <class Real>
struct MonotoneBranch {
    Interval<Real> T;
    std::size_t n = 0;
    std::vector<Interval<Real>> images;  // f^k(T), k = 0..n
    Itinerary itinerary;                 // lap of images[k], k = 0..n-1

    const Interval<Real>& image() const { return images.back(); }
    // max_{0 <= k < n} |f^k(T)|; zero for the empty composition.
    Real max_image_length() const;
    int orientation() const { return itinerary_orientation(itinerary); }
};

template <class Real>
struct PeriodicPoint {
    Real x{};
    std::size_t period = 1;
    Real multiplier{};
    bool minimal = true;
};

enum class EntryStatus { found, cap_exhausted, escaped };

struct EntryResult {
    EntryStatus status = EntryStatus::cap_exhausted;
    std::size_t time = 0;  // valid when found
    std::size_t cap = 0;
    bool found() const { return status == EntryStatus::found; }
};

std::string entry_status_name(EntryStatus status);

template <class Real>
Lap lap_of(const UnimodalMap<Real>& map, const Real& x) {
    return x < map.critical_point() ? Lap::left : Lap::right;
}

template <class Real>
Real iterate(const UnimodalMap<Real>& map, Real x, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) x = map(x);
    return x;
}

// D f^n (x) by the chain rule.
template <class Real>
Real orbit_derivative(const UnimodalMap<Real>& map, Real x, std::size_t n) {
    Real d(1);
    for (std::size_t i = 0; i < n; ++i) {
        d *= map.d1(x);
        x = map(x);
    }
    return d;
}

// First-order bound on the rounding error of f^n(x) in units of epsilon:
// sum over steps j of |D f^{n-j}(f^j x)|.
template <class Real>
Real forward_noise_factor(const UnimodalMap<Real>& map, Real x, std::size_t n) {
    Real acc(0);
    for (std::size_t i = 0; i < n; ++i) {
        acc = acc * abs_value(map.d1(x)) + Real(1);
        x = map(x);
    }
    return acc;
}

template <class Real>
Itinerary itinerary_of(const UnimodalMap<Real>& map, Real x, std::size_t n) {
    Itinerary out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(lap_of(map, x));
        x = map(x);
    }
    return out;
}

template <class Real>
MonotoneBranch<Real> certify_branch(const UnimodalMap<Real>& map, const Interval<Real>& T, std::size_t n);

// B and A distortion of f^n on branch.T, from the endpoint images.
template <class Real>
CrossRatioPair<Real> branch_distortion(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                       const Interval<Real>& J);

template <class Real>
EntryResult first_entry_time(const UnimodalMap<Real>& map, const Real& x, const Interval<Real>& V, std::size_t cap);

template <class Real>
PeriodicPoint<Real> find_periodic_point(const UnimodalMap<Real>& map, const Interval<Real>& bracket,
                                        std::size_t period);

// Preimage of y under the restriction of f to one lap.
template <class Real>
Real inverse_branch(const UnimodalMap<Real>& map, const Real& y, Lap lap);

// x following `itinerary` (first symbol = lap of x) with f^n(x) = target.
template <class Real>
Real refine_preimage(const UnimodalMap<Real>& map, const Real& target, const Itinerary& itinerary);

// Every root of f^period(x) = x of exact period, by lap-wise sign scan.
template <class Real>
std::vector<PeriodicPoint<Real>> periodic_orbit_points(const UnimodalMap<Real>& map, std::size_t period,
                                                      std::size_t grid);

}  // namespace nestlab
