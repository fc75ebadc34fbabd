#pragma once

// Constructed fixture families shared by the unit tests and the acceptance run.

#include "nestlab/bound_lab.hpp"

#include <cmath>
#include <optional>

namespace nestlab::fixtures {

template <class Real>
struct SaddleNodeFixture {
    UnimodalMap<Real> map;
    PrincipalNest<Real> nest;
    CascadeResult cascade;
};

// Logistic map at a = 1 + sqrt(8) - delta, nested until the first cascade exits.
template <class Real>
SaddleNodeFixture<Real> saddle_node_at(const Real& delta) {
    Real a = sqrt8_plus_one<Real>() - delta;
    auto map = UnimodalMap<Real>::logistic(a);
    NestOptions o;
    o.depth = 1000000;
    o.stop_after_cascade_exit = true;
    auto nest = build_nest(map, construct_nice_interval(map), o);
    CascadeResult c = detect_cascade(nest, 0);
    return {map, std::move(nest), c};
}

// Offset below the tangency whose saddle-node run has length exactly m
// (run length decreases with the offset); bisection on log(delta).
inline std::optional<double> offset_for_length(std::size_t m) {
    double lo = std::log(1e-9), hi = std::log(1e-1);  // m(lo) >= m > m(hi)
    for (int it = 0; it < 80; ++it) {
        double mid = (lo + hi) / 2;
        std::size_t got = saddle_node_at<double>(std::exp(mid)).cascade.m;
        if (got == m) return std::exp(mid);
        if (got > m) lo = mid;
        else hi = mid;
    }
    return std::nullopt;
}

}  // namespace nestlab::fixtures
