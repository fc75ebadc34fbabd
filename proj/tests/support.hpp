#pragma once

#include "nestlab/bound_lab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

namespace nestlab::testing {

inline bool rel_close(double x, double y, double tol) {
    return std::abs(x - y) <= tol * std::max({std::abs(x), std::abs(y), 1e-300});
}

inline double rel_err(double x, double y) { return std::abs(x - y) / std::max(std::abs(y), 1e-300); }

// Random nested configuration t0 < j0 < j1 < t1 inside [0,1] with non-degenerate sides.
inline std::pair<Interval<double>, Interval<double>> random_nested(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (;;) {
        double p[4] = {u(rng), u(rng), u(rng), u(rng)};
        std::sort(p, p + 4);
        if (p[1] - p[0] > 1e-6 && p[2] - p[1] > 1e-6 && p[3] - p[2] > 1e-6)
            return {Interval<double>(p[0], p[3]), Interval<double>(p[1], p[2])};
    }
}

// A fractional-linear map, increasing on [0,1] when the pole is outside.
struct Mobius {
    double a, b, c, d;  // (a x + b) / (c x + d)
    double operator()(double x) const { return (a * x + b) / (c * x + d); }
};

// Random certified cylinder branch of `map`.
template <class Real>
std::optional<std::pair<MonotoneBranch<Real>, Interval<Real>>> random_branch(const UnimodalMap<Real>& map,
                                                                            std::mt19937_64& rng,
                                                                            std::size_t n_max) {
    auto dmap = UnimodalMap<double>::from_descriptor(map.descriptor());
    BranchSample s = sample_cylinder_branch(dmap, rng, n_max);
    try {
        Interval<Real> T{Real(s.t0), Real(s.t1)};
        Interval<Real> J{Real(s.j0), Real(s.j1)};
        if (!T.strictly_contains(J)) return std::nullopt;
        return std::make_pair(certify_branch(map, T, s.n), J);
    } catch (const Error&) {
        return std::nullopt;
    }
}

}  // namespace nestlab::testing
