#include "nestlab/orbit_engine.hpp"

#include <algorithm>
#include <array>

namespace nestlab {

std::string itinerary_string(const Itinerary& itinerary) {
    std::string s;
    s.reserve(itinerary.size());
    for (Lap l : itinerary) s.push_back(static_cast<char>(l));
    return s;
}

Itinerary parse_itinerary(const std::string& text) {
    Itinerary out;
    for (char ch : text) {
        if (ch == 'L') out.push_back(Lap::left);
        else if (ch == 'R') out.push_back(Lap::right);
        else throw ParameterError("itinerary symbols must be L or R");
    }
    return out;
}

int itinerary_orientation(const Itinerary& itinerary) {
    int sign = 1;
    for (Lap l : itinerary)
        if (l == Lap::right) sign = -sign;
    return sign;
}

std::string entry_status_name(EntryStatus status) {
    switch (status) {
        case EntryStatus::found: return "found";
        case EntryStatus::cap_exhausted: return "cap_exhausted";
        case EntryStatus::escaped: return "escaped";
    }
    return "unknown";
}

template <class Real>
Real MonotoneBranch<Real>::max_image_length() const {
    Real best(0);
    for (std::size_t k = 0; k < n; ++k) {
        Real len = images[k].length();
        if (len > best) best = len;
    }
    return best;
}

template <class Real>
MonotoneBranch<Real> certify_branch(const UnimodalMap<Real>& map, const Interval<Real>& T, std::size_t n) {
    if (!T.within_unit()) throw DomainError("branch domain must lie in [0,1]");
    MonotoneBranch<Real> br;
    br.T = T;
    br.n = n;
    br.images.reserve(n + 1);
    br.itinerary.reserve(n);
    br.images.push_back(T);
    const Real& c = map.critical_point();
    for (std::size_t k = 0; k < n; ++k) {
        const Interval<Real>& cur = br.images.back();
        if (cur.lo < c && c < cur.hi) throw FoldError(k, "critical point inside f^" + std::to_string(k) + "(T)");
        Lap lap = cur.hi <= c ? Lap::left : Lap::right;
        Real y0 = map(cur.lo);
        Real y1 = map(cur.hi);
        if (lap == Lap::right) std::swap(y0, y1);
        if (!(y0 < y1)) throw PrecisionError("branch image collapsed at iterate " + std::to_string(k + 1));
        br.itinerary.push_back(lap);
        br.images.emplace_back(std::move(y0), std::move(y1));
    }
    return br;
}

template <class Real>
CrossRatioPair<Real> branch_distortion(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                       const Interval<Real>& J) {
    if (!branch.T.strictly_contains(J)) throw DegenerateError("J must lie strictly inside the branch domain");
    CrossRatioPair<Real> before = cross_ratio(branch.T, J);
    Real j0 = iterate(map, J.lo, branch.n);
    Real j1 = iterate(map, J.hi, branch.n);
    const Interval<Real>& img = branch.image();
    if (branch.orientation() < 0) std::swap(j0, j1);
    if (!(img.lo <= j0 && j0 < j1 && j1 <= img.hi))
        throw FoldError(branch.n, "image of J is not ordered inside the image of T");
    CrossRatioPair<Real> after = cross_ratio_points(img.lo, j0, j1, img.hi);
    return {after.b / before.b, after.a / before.a};
}

template <class Real>
EntryResult first_entry_time(const UnimodalMap<Real>& map, const Real& x, const Interval<Real>& V, std::size_t cap) {
    if (cap < 1) throw ParameterError("cap must be at least 1");
    EntryResult res;
    res.cap = cap;
    constexpr std::size_t ring_size = 8;
    std::array<Real, ring_size> ring;
    std::size_t filled = 0;
    Real y = x;
    for (std::size_t k = 1; k <= cap; ++k) {
        y = map(y);
        if (V.contains(y)) {
            res.status = EntryStatus::found;
            res.time = k;
            return res;
        }
        // An exact repeat means the computed orbit is periodic and has already
        // been checked against V in full.
        for (std::size_t i = 0; i < std::min(filled, ring_size); ++i) {
            if (ring[i] == y) {
                res.status = EntryStatus::escaped;
                res.time = k;
                return res;
            }
        }
        ring[filled % ring_size] = y;
        ++filled;
    }
    res.status = EntryStatus::cap_exhausted;
    return res;
}

namespace {

// Bisection for a sign change of g on [lo, hi]; runs to the resolution of Real.
template <class Real, class Fn>
Real bisect_root(Fn&& g, Real lo, Real hi, Real glo) {
    for (int it = 0; it < 20000; ++it) {
        Real mid = (lo + hi) / 2;
        if (!(lo < mid && mid < hi)) break;
        Real gm = g(mid);
        if (gm == 0) return mid;
        if ((gm < 0) == (glo < 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return (lo + hi) / 2;
}

}  // namespace

template <class Real>
PeriodicPoint<Real> find_periodic_point(const UnimodalMap<Real>& map, const Interval<Real>& bracket,
                                        std::size_t period) {
    if (period < 1) throw ParameterError("period must be at least 1");
    auto g = [&](const Real& x) { return Real(iterate(map, x, period) - x); };
    Real glo = g(bracket.lo);
    Real ghi = g(bracket.hi);
    PeriodicPoint<Real> pp;
    pp.period = period;
    if (glo == 0) pp.x = bracket.lo;
    else if (ghi == 0) pp.x = bracket.hi;
    else if ((glo < 0) == (ghi < 0)) throw NoSignChangeError("f^p(x) - x has no sign change on the bracket");
    else pp.x = bisect_root(g, bracket.lo, bracket.hi, glo);
    pp.multiplier = orbit_derivative(map, pp.x, period);
    Real tol = real_traits<Real>::root_tolerance() * 10;
    for (std::size_t d = 1; d < period; ++d) {
        if (period % d == 0 && abs_value(Real(iterate(map, pp.x, d) - pp.x)) < tol) {
            pp.minimal = false;
            break;
        }
    }
    return pp;
}

template <class Real>
Real inverse_branch(const UnimodalMap<Real>& map, const Real& y, Lap lap) {
    const Real& c = map.critical_point();
    Real top = map(c);
    Real edge = lap == Lap::left ? map(Real(0)) : map(Real(1));
    Real tol = real_traits<Real>::root_tolerance();
    if (y > top) {
        if (y - top > tol) throw BracketMissError("target above the critical value");
        return c;
    }
    if (y < edge) {
        if (edge - y > tol) throw BracketMissError("target below the lap image");
        return lap == Lap::left ? Real(0) : Real(1);
    }
    Real lo = lap == Lap::left ? Real(0) : c;
    Real hi = lap == Lap::left ? c : Real(1);
    const bool increasing = lap == Lap::left;
    for (int it = 0; it < 20000; ++it) {
        Real mid = (lo + hi) / 2;
        if (!(lo < mid && mid < hi)) break;
        Real fm = map(mid);
        if (fm == y) return mid;
        if ((fm < y) == increasing) lo = mid;
        else hi = mid;
    }
    return (lo + hi) / 2;
}

template <class Real>
Real refine_preimage(const UnimodalMap<Real>& map, const Real& target, const Itinerary& itinerary) {
    if (!(target >= 0) || target > 1) throw BracketMissError("target outside [0,1]");
    Real y = target;
    for (auto it = itinerary.rbegin(); it != itinerary.rend(); ++it) y = inverse_branch(map, y, *it);
    return y;
}

template <class Real>
std::vector<PeriodicPoint<Real>> periodic_orbit_points(const UnimodalMap<Real>& map, std::size_t period,
                                                      std::size_t grid) {
    if (period < 1 || grid < 2) throw ParameterError("period and grid must be positive");
    auto g = [&](const Real& x) { return Real(iterate(map, x, period) - x); };
    std::vector<PeriodicPoint<Real>> out;
    Real prev_x(0);
    Real prev_g = g(prev_x);
    auto accept = [&](const Real& x) {
        PeriodicPoint<Real> pp;
        pp.x = x;
        pp.period = period;
        pp.multiplier = orbit_derivative(map, x, period);
        Real tol = real_traits<Real>::root_tolerance() * 10;
        for (std::size_t d = 1; d < period; ++d)
            if (period % d == 0 && abs_value(Real(iterate(map, x, d) - x)) < tol) pp.minimal = false;
        if (pp.minimal) out.push_back(pp);
    };
    if (prev_g == 0) accept(prev_x);
    for (std::size_t j = 1; j <= grid; ++j) {
        Real x = Real(j) / grid;
        Real gx = g(x);
        if (gx == 0) accept(x);
        else if (prev_g != 0 && (gx < 0) != (prev_g < 0)) accept(bisect_root(g, prev_x, x, prev_g));
        prev_x = x;
        prev_g = gx;
    }
    return out;
}

#define NESTLAB_INSTANTIATE(R)                                                                              \
    template struct MonotoneBranch<R>;                                                                      \
    template MonotoneBranch<R> certify_branch(const UnimodalMap<R>&, const Interval<R>&, std::size_t);      \
    template CrossRatioPair<R> branch_distortion(const UnimodalMap<R>&, const MonotoneBranch<R>&,            \
                                                 const Interval<R>&);                                       \
    template EntryResult first_entry_time(const UnimodalMap<R>&, const R&, const Interval<R>&, std::size_t); \
    template PeriodicPoint<R> find_periodic_point(const UnimodalMap<R>&, const Interval<R>&, std::size_t);   \
    template R inverse_branch(const UnimodalMap<R>&, const R&, Lap);                                        \
    template R refine_preimage(const UnimodalMap<R>&, const R&, const Itinerary&);                          \
    template std::vector<PeriodicPoint<R>> periodic_orbit_points(const UnimodalMap<R>&, std::size_t, std::size_t);

NESTLAB_INSTANTIATE(double)
NESTLAB_INSTANTIATE(ext_real)

}  // namespace nestlab
