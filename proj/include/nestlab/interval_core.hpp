#pragma once

#include "nestlab/errors.hpp"
#include "nestlab/precision.hpp"

#include <algorithm>
#include <cmath>

namespace nestlab {

// Open interval (lo, hi) with lo < hi. Geometric operations accept any reals;
// dynamical operations additionally require containment in [0,1].
template <class Real>
struct Interval {
    Real lo{};
    Real hi{};

    Interval() = default;
    Interval(Real l, Real h) : lo(std::move(l)), hi(std::move(h)) {
        if (!(lo < hi)) throw DomainError("interval requires lo < hi");
    }
    // Orders the endpoints; still rejects a point interval.
    static Interval hull(const Real& x, const Real& y) { return x < y ? Interval(x, y) : Interval(y, x); }

    Real length() const { return hi - lo; }
    Real midpoint() const { return (lo + hi) / 2; }
    bool contains(const Real& x) const { return lo < x && x < hi; }
    bool contains_closed(const Real& x) const { return lo <= x && x <= hi; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
    bool strictly_contains(const Interval& other) const { return lo < other.lo && other.hi < hi; }
    bool disjoint(const Interval& other) const { return hi <= other.lo || other.hi <= lo; }
    bool within_unit() const { return lo >= 0 && hi <= 1; }
    bool operator==(const Interval&) const = default;
};

template <class Real>
struct CrossRatioPair {
    Real b{};
    Real a{};
};

// Components below this length (relative to the ambient interval) are empty.
template <class Real>
Real degenerate_tolerance(const Real& ambient_length) {
    return real_traits<Real>::epsilon() * ambient_length / 1000;
}

// Cross-ratios of the configuration t0 < j0 < j1 < t1 given by its endpoints.
template <class Real>
CrossRatioPair<Real> cross_ratio_points(const Real& t0, const Real& j0, const Real& j1, const Real& t1) {
    Real t = t1 - t0;
    Real j = j1 - j0;
    Real l = j0 - t0;
    Real r = t1 - j1;
    Real tol = degenerate_tolerance(t);
    if (!(l > tol) || !(r > tol) || !(j > 0)) throw DegenerateError("J touches the boundary of T");
    Real tj = t * j;
    return {tj / (l * r), tj / ((l + j) * (j + r))};
}

template <class Real>
CrossRatioPair<Real> cross_ratio(const Interval<Real>& T, const Interval<Real>& J) {
    if (!T.contains(J)) throw DomainError("J must lie inside T");
    return cross_ratio_points(T.lo, J.lo, J.hi, T.hi);
}

template <class Real>
Real scaled_neighborhood_factor(const Interval<Real>& T, const Interval<Real>& J) {
    if (!T.contains(J)) throw DomainError("J must lie inside T");
    Real l = J.lo - T.lo;
    Real r = T.hi - J.hi;
    Real side = l < r ? l : r;
    if (side < 0) side = 0;
    return side / J.length();
}

// Distortion of a monotone map g (increasing or decreasing) on T, evaluated
// from the four endpoint images.
template <class Real, class Fn>
CrossRatioPair<Real> distortion_of(Fn&& g, const Interval<Real>& T, const Interval<Real>& J) {
    CrossRatioPair<Real> before = cross_ratio(T, J);
    Real gt0 = g(T.lo), gj0 = g(J.lo), gj1 = g(J.hi), gt1 = g(T.hi);
    CrossRatioPair<Real> after = gt0 < gt1 ? cross_ratio_points(gt0, gj0, gj1, gt1)
                                           : cross_ratio_points(gt1, gj1, gj0, gt0);
    return {after.b / before.b, after.a / before.a};
}

// Worst-case B(T,J) when both side components are at least delta |J|.
inline double delta_bound(double delta) { return (1 + 2 * delta) / (delta * delta); }

}  // namespace nestlab
