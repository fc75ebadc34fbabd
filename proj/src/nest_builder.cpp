#include "nestlab/nest_builder.hpp"

#include "nestlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nestlab {

std::string Classification::label() const {
    std::string s = central() ? "C-" : "NC-";
    switch (side) {
        case Side::high: return s + "high";
        case Side::low: return s + "low";
        case Side::ambiguous: return s + "ambiguous";
    }
    return s;
}

std::string termination_name(TerminationKind kind) {
    switch (kind) {
        case TerminationKind::depth_reached: return "DepthReached";
        case TerminationKind::precision_exhausted: return "PrecisionExhausted";
        case TerminationKind::non_recurrent: return "NonRecurrentOrbit";
        case TerminationKind::infinite_cascade_suspected: return "InfiniteCascadeSuspected";
    }
    return "unknown";
}

std::string cascade_kind_name(CascadeKind kind) {
    switch (kind) {
        case CascadeKind::none: return "None";
        case CascadeKind::saddle_node: return "SaddleNode";
        case CascadeKind::ulam_neumann: return "UlamNeumann";
    }
    return "unknown";
}

template <class Real>
std::size_t PrincipalNest<Real>::return_levels() const {
    std::size_t n = 0;
    for (const auto& lv : levels)
        if (lv.classification) ++n;
    return n;
}

template <class Real>
Interval<Real> construct_nice_interval(const UnimodalMap<Real>& map) {
    const Real& c = map.critical_point();
    if (map.family() == Family::logistic) {
        const Real& a = map.a();
        if (!(a > 2)) throw ConstructionError("no orientation-reversing fixed point (needs a > 2)");
        Real inv = Real(1) / a;
        return Interval<Real>(inv, Real(1 - inv));
    }
    Real top = map(c);
    if (!(top > c)) throw ConstructionError("no fixed point on the decreasing lap");
    PeriodicPoint<Real> p = find_periodic_point(map, Interval<Real>(c, Real(1)), 1);
    if (!(p.multiplier < 0)) throw ConstructionError("fixed point is not orientation reversing");
    Real phat = inverse_branch(map, p.x, Lap::left);
    return Interval<Real>(phat, p.x);
}

template <class Real>
NicenessResult<Real> verify_niceness(const UnimodalMap<Real>& map, const Interval<Real>& V, std::size_t horizon) {
    if (horizon < 1) throw ParameterError("horizon must be at least 1");
    using std::sqrt;
    const Real inner = real_traits<Real>::root_tolerance() * 10;
    const Real snap = sqrt(real_traits<Real>::root_tolerance());
    auto inside = [&](const Real& y) { return y > V.lo + inner && y < V.hi - inner; };
    NicenessResult<Real> res;
    res.verified = true;
    res.horizon = horizon;
    std::size_t first_violation = 0;
    for (const Real& b : {V.lo, V.hi}) {
        Real y = b;
        for (std::size_t k = 1; k <= horizon; ++k) {
            y = map(y);
            if (inside(y)) {
                if (first_violation == 0 || k < first_violation) first_violation = k;
                break;
            }
            // Landing on a short cycle that avoids V ends the search for this point.
            bool settled = false;
            Real z = y;
            for (std::size_t p = 1; p <= 8 && !settled; ++p) {
                z = map(z);
                if (inside(z)) break;
                if (abs_value(Real(z - y)) < snap) settled = true;
            }
            if (settled) break;
        }
    }
    if (first_violation) {
        res.verified = false;
        res.k = first_violation;
    }
    return res;
}

template <class Real>
CentralReturn<Real> central_domain(const UnimodalMap<Real>& map, const Interval<Real>& I, std::size_t cap) {
    const Real& c = map.critical_point();
    if (!I.contains(c)) throw ConstructionError("interval does not contain the critical point");
    EntryResult entry = first_entry_time(map, c, I, cap);
    if (!entry.found())
        throw NotFoundError("critical orbit did not return (" + entry_status_name(entry.status) +
                            ", cap " + std::to_string(entry.cap) + ")");
    const std::size_t s = entry.time;
    Itinerary laps = itinerary_of(map, map(c), s - 1);
    const bool max_at_c = itinerary_orientation(laps) > 0;
    const Real& target = max_at_c ? I.lo : I.hi;
    Real y1, xl, xr;
    try {
        y1 = refine_preimage(map, target, laps);
        xl = inverse_branch(map, y1, Lap::left);
        xr = inverse_branch(map, y1, Lap::right);
    } catch (const BracketMissError& e) {
        throw PrecisionError(std::string("central pullback left its bracket: ") + e.what());
    }
    if (!(xl < c && c < xr)) throw PrecisionError("central pullback collapsed onto the critical point");
    Interval<Real> D(xl, xr);
    // Forward consistency: the boundary must land back on the target.
    Real tol = I.length() / 100;
    if (abs_value(Real(iterate(map, xl, s) - target)) > tol || abs_value(Real(iterate(map, xr, s) - target)) > tol)
        throw PrecisionError("return time " + std::to_string(s) + " exceeds the orbit precision horizon");
    try {
        certify_branch(map, Interval<Real>(xl, c), s);
        certify_branch(map, Interval<Real>(c, xr), s);
    } catch (const FoldError& e) {
        throw PrecisionError(std::string("central branch halves do not certify: ") + e.what());
    }
    CentralReturn<Real> out;
    out.domain.domain = D;
    out.domain.return_time = s;
    out.domain.is_central = true;
    out.domain.itinerary = std::move(laps);
    out.critical_return = iterate(map, c, s);
    out.maximum_at_c = max_at_c;
    return out;
}

template <class Real>
Classification classify_return(const UnimodalMap<Real>& map, const Interval<Real>& next, const Real& critical_return,
                               bool maximum_at_c) {
    Classification cls;
    cls.centrality = next.contains(critical_return) ? Centrality::central : Centrality::non_central;
    Real diff = critical_return - map.critical_point();
    if (abs_value(diff) < real_traits<Real>::root_tolerance() * 10) cls.side = Side::ambiguous;
    else cls.side = ((diff < 0) == maximum_at_c) ? Side::low : Side::high;
    return cls;
}

template <class Real>
ReturnScan<Real> return_domains(const UnimodalMap<Real>& map, const Interval<Real>& I, std::size_t scan,
                                std::size_t cap, bool parallel) {
    if (scan == 0) throw ParameterError("scan must be at least 1");
    if (cap == 0) throw ParameterError("cap must be at least 1");
    ReturnScan<Real> out;
    std::optional<ReturnDomain<Real>> central;
    if (I.contains(map.critical_point())) {
        try {
            central = central_domain(map, I, cap).domain;
        } catch (const Error&) {
        }
    }
    std::vector<Real> seeds(scan);
    for (std::size_t j = 0; j < scan; ++j) seeds[j] = I.lo + I.length() * (Real(2 * j + 1) / Real(2 * scan));
    std::vector<SeedReturn> hits = parallel ? scan_returns_parallel(map, I, seeds, cap)
                                            : scan_returns_serial(map, I, seeds, cap);

    // Contiguous seeds with one (time, itinerary) form a group; groups with a
    // shared itinerary describe the same domain.
    std::map<std::string, std::size_t> first_seed;
    std::vector<std::string> order;
    for (std::size_t j = 0; j < scan; ++j) {
        if (central && central->domain.contains(seeds[j])) continue;
        if (hits[j].status != EntryStatus::found) {
            ++out.unresolved_seeds;
            continue;
        }
        auto [it, inserted] = first_seed.emplace(hits[j].itinerary, j);
        if (inserted) order.push_back(hits[j].itinerary);
    }
    std::vector<std::optional<ReturnDomain<Real>>> found(order.size());
    auto resolve = [&](std::size_t g) {
        const std::string& key = order[g];
        std::size_t j = first_seed[key];
        Itinerary it = parse_itinerary(key);
        try {
            Real a = refine_preimage(map, I.lo, it);
            Real b = refine_preimage(map, I.hi, it);
            if (a == b) return;
            Interval<Real> U = Interval<Real>::hull(a, b);
            if (!U.contains_closed(seeds[j])) return;
            MonotoneBranch<Real> br = certify_branch(map, U, it.size());
            // Domains below the resolution of the orbit come back as noise.
            Real tol = I.length() / 100;
            if (abs_value(Real(br.image().lo - I.lo)) > tol || abs_value(Real(br.image().hi - I.hi)) > tol) return;
            ReturnDomain<Real> rd;
            rd.domain = U;
            rd.return_time = hits[j].time;
            rd.itinerary = std::move(it);
            found[g] = std::move(rd);
        } catch (const Error&) {
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::size_t g = 0; g < order.size(); ++g) resolve(g);
    } else {
        for (std::size_t g = 0; g < order.size(); ++g) resolve(g);
    }
    for (auto& f : found)
        if (f) out.domains.push_back(std::move(*f));
    if (central) out.domains.push_back(*central);
    std::sort(out.domains.begin(), out.domains.end(),
              [](const ReturnDomain<Real>& x, const ReturnDomain<Real>& y) { return x.domain.lo < y.domain.lo; });
    // Overlaps can only come from unresolved rounding; keep the earlier domain.
    std::vector<ReturnDomain<Real>> kept;
    Real covered(0);
    for (auto& d : out.domains) {
        if (!kept.empty() && d.domain.lo < kept.back().domain.hi) continue;
        covered += d.domain.length();
        kept.push_back(std::move(d));
    }
    out.domains = std::move(kept);
    out.coverage = to_double(Real(covered / I.length()));
    return out;
}

namespace {

// f^s(x) = x up to the forward rounding noise of the orbit.
template <class Real>
bool boundary_is_fixed(const UnimodalMap<Real>& map, const Real& x, std::size_t s) {
    Real noise = forward_noise_factor(map, x, s) * real_traits<Real>::epsilon() * 10;
    return abs_value(Real(iterate(map, x, s) - x)) <= noise;
}

}  // namespace

template <class Real>
PrincipalNest<Real> build_nest(const UnimodalMap<Real>& map, const Interval<Real>& I0, const NestOptions& options) {
    PrincipalNest<Real> nest;
    nest.map = map.descriptor();
    if (options.check_niceness) {
        auto nice = verify_niceness(map, I0, options.niceness_horizon);
        if (!nice.verified) throw ConstructionError("I0 is not nice (boundary enters at iterate " +
                                                    std::to_string(nice.k) + ")");
    }
    NestLevel<Real> first;
    first.interval = I0;
    nest.levels.push_back(std::move(first));
    const Real eps = real_traits<Real>::epsilon();
    const Real root_tol = real_traits<Real>::root_tolerance();
    nest.termination.kind = TerminationKind::depth_reached;
    for (std::size_t i = 0; i < options.depth; ++i) {
        NestLevel<Real>& lv = nest.levels[i];
        CentralReturn<Real> cr;
        try {
            cr = central_domain(map, lv.interval, options.cap);
        } catch (const NotFoundError& e) {
            nest.termination = {TerminationKind::non_recurrent, 0, e.what()};
            break;
        } catch (const PrecisionError& e) {
            nest.termination = {TerminationKind::precision_exhausted, 0, e.what()};
            break;
        }
        const Interval<Real>& D = cr.domain.domain;
        Real gap = D.lo - lv.interval.lo;
        Real gap_hi = lv.interval.hi - D.hi;
        if (gap_hi < gap) gap = gap_hi;
        lv.central = cr.domain;
        lv.critical_return = cr.critical_return;
        lv.maximum_at_c = cr.maximum_at_c;
        lv.classification = classify_return(map, D, cr.critical_return, cr.maximum_at_c);
        lv.central_run = lv.classification->central() ? (i > 0 ? nest.levels[i - 1].central_run : 0) + 1 : 0;
        lv.measured_scaling = lv.interval.contains(D) ? to_double(scaled_neighborhood_factor(lv.interval, D)) : 0.0;
        if (options.scan > 0) {
            auto rs = return_domains(map, lv.interval, options.scan, options.scan_cap, options.parallel);
            lv.domains = std::move(rs.domains);
            lv.coverage = rs.coverage;
            lv.domains_scanned = true;
        }
        if ((gap < root_tol * 10 || gap <= eps * lv.interval.length() * 1000) &&
            boundary_is_fixed(map, cr.maximum_at_c ? lv.interval.lo : lv.interval.hi, cr.domain.return_time)) {
            // The first return maps I_i into itself: the nest stops shrinking.
            lv.stationary = true;
            if (lv.classification->side == Side::high && lv.classification->central())
                nest.termination = {TerminationKind::infinite_cascade_suspected, lv.central_run,
                                    "central branch maps I_" + std::to_string(i) + " into itself"};
            else
                nest.termination = {TerminationKind::non_recurrent, 0,
                                    "critical orbit trapped by a stationary central branch"};
            break;
        }
        if (D.length() < eps * 1000 || gap < root_tol * 10) {
            nest.termination = {TerminationKind::precision_exhausted, 0,
                                "central domain at level " + std::to_string(i + 1) +
                                    " is below the resolution of the arithmetic; rerun with extended precision"};
            lv.central.reset();
            lv.classification.reset();
            lv.central_run = 0;
            break;
        }
        if (options.check_niceness) {
            auto nice = verify_niceness(map, D, std::min(options.niceness_horizon, cr.domain.return_time + 1));
            if (!nice.verified) {
                nest.termination = {TerminationKind::precision_exhausted, 0,
                                    "central domain failed the niceness check at iterate " + std::to_string(nice.k)};
                break;
            }
        }
        const bool exit_cascade = i > 0 && !lv.classification->central() && nest.levels[i - 1].classification &&
                                  nest.levels[i - 1].classification->central();
        NestLevel<Real> next;
        next.interval = D;
        nest.levels.push_back(std::move(next));
        if (options.stop_after_cascade_exit && exit_cascade) {
            nest.termination.detail = "stopped after the cascade exit";
            break;
        }
    }
    if (nest.termination.kind == TerminationKind::depth_reached && nest.termination.detail.empty())
        nest.termination.detail = "requested depth built";
    return nest;
}

template <class Real>
CascadeResult detect_cascade(const PrincipalNest<Real>& nest, std::size_t i) {
    if (i >= nest.levels.size()) throw ParameterError("level index out of range");
    CascadeResult res;
    res.start = i;
    std::size_t low = 0, high = 0;
    std::optional<Side> lead;
    for (std::size_t j = i; j < nest.levels.size(); ++j) {
        const auto& cls = nest.levels[j].classification;
        if (!cls || !cls->central()) break;
        ++res.m;
        if (cls->side == Side::low) ++low;
        if (cls->side == Side::high) ++high;
        if (!lead && cls->side != Side::ambiguous) lead = cls->side;
    }
    if (res.m == 0 || (!low && !high)) {
        res.kind = CascadeKind::none;
        return res;
    }
    Side dominant = low > high ? Side::low : high > low ? Side::high : *lead;
    res.kind = dominant == Side::low ? CascadeKind::saddle_node : CascadeKind::ulam_neumann;
    res.mixed = low > 0 && high > 0;
    return res;
}

template <class Real>
ExceptionalResult<Real> detect_exceptional(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                           std::size_t i) {
    ExceptionalResult<Real> res;
    res.level = i;
    if (i < 2 || i >= nest.levels.size()) {
        res.reason = "levels i-2..i are not all present";
        return res;
    }
    const auto& l2 = nest.levels[i - 2];
    const auto& l1 = nest.levels[i - 1];
    if (!l2.classification || !l1.classification) {
        res.reason = "missing classification";
        return res;
    }
    if (!l2.classification->central() || l1.classification->central() || l1.classification->side != Side::high) {
        res.reason = "pattern " + l2.classification->label() + ", " + l1.classification->label() +
                     " is not C, NC-high";
        return res;
    }
    const Interval<Real>& Ii = nest.levels[i].interval;
    const Itinerary& laps = l1.central->itinerary;
    const std::size_t s = l1.central->return_time;
    const Lap inc = l1.maximum_at_c ? Lap::left : Lap::right;
    const Lap dec = inc == Lap::left ? Lap::right : Lap::left;
    auto with = [&](Lap first) {
        Itinerary it;
        it.reserve(laps.size() + 1);
        it.push_back(first);
        it.insert(it.end(), laps.begin(), laps.end());
        return it;
    };
    const Itinerary it_inc = with(inc), it_dec = with(dec);
    try {
        res.left = Interval<Real>::hull(refine_preimage(map, Ii.lo, it_inc), refine_preimage(map, Ii.hi, it_inc));
        res.right = Interval<Real>::hull(refine_preimage(map, Ii.lo, it_dec), refine_preimage(map, Ii.hi, it_dec));
    } catch (const Error& e) {
        res.reason = std::string("central branch of F_{i-1} does not cover I_i twice: ") + e.what();
        return res;
    }
    try {
        res.p = find_periodic_point(map, res.right, s).x;
        res.q = find_periodic_point(map, res.left, s).x;
        res.p_prime = refine_preimage(map, res.p, it_inc);
        res.q_prime = refine_preimage(map, res.q, it_dec);
    } catch (const Error& e) {
        res.reason = std::string("fixed-point search failed on [") + std::to_string(to_double(res.right.lo)) + ", " +
                     std::to_string(to_double(res.right.hi)) + "]: " + e.what();
        return res;
    }
    res.V = Interval<Real>::hull(res.p_prime, res.p);
    Real lo = res.left.lo < res.right.lo ? res.left.lo : res.right.lo;
    Real hi = res.left.hi > res.right.hi ? res.left.hi : res.right.hi;
    res.hull = Interval<Real>(lo, hi);
    res.branch_laps = laps;
    res.branch_time = s;
    res.exceptional = true;
    res.reason = "C, NC-high pattern with both exceptional domains resolved";
    return res;
}

namespace {

template <class Real>
struct CentralBranch {
    Interval<Real> domain;  // I_{i+1}
    Interval<Real> range;   // I_i
    Itinerary laps;
    std::size_t s = 0;
    bool max_at_c = true;
};

// Fixed point of f^s on a half of the central domain, allowing a root at the
// outer endpoint when the nest is stationary.
template <class Real>
std::optional<Real> half_fixed_point(const UnimodalMap<Real>& map, const Real& lo, const Real& hi, std::size_t s) {
    auto g = [&](const Real& x) { return Real(iterate(map, x, s) - x); };
    Real glo = g(lo), ghi = g(hi);
    if ((glo < 0) != (ghi < 0)) return find_periodic_point(map, Interval<Real>(lo, hi), s).x;
    Real tol = real_traits<Real>::root_tolerance() * 1000;
    if (abs_value(glo) < tol) return lo;
    if (abs_value(ghi) < tol) return hi;
    return std::nullopt;
}

}  // namespace

template <class Real>
ProbeResult<Real> infinite_cascade_probe(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                         std::size_t min_run, std::size_t max_steps) {
    ProbeResult<Real> res;
    std::optional<std::size_t> deepest;
    for (std::size_t i = 0; i < nest.levels.size(); ++i) {
        const auto& cls = nest.levels[i].classification;
        if (!cls) continue;
        if (!cls->central() || cls->side != Side::high) {
            res.detail = "level " + std::to_string(i) + " is " + cls->label();
            return res;
        }
        deepest = i;
        ++res.run;
    }
    if (!deepest) {
        res.detail = "no first return was built";
        return res;
    }
    const Real& c = map.critical_point();
    const auto& base = nest.levels[*deepest];
    CentralBranch<Real> br{base.central->domain, base.interval, base.central->itinerary, base.central->return_time,
                           base.maximum_at_c};
    const Real eps = real_traits<Real>::epsilon();
    for (std::size_t step = 0; step < max_steps; ++step) {
        const Lap inc = br.max_at_c ? Lap::left : Lap::right;
        const Lap dec = inc == Lap::left ? Lap::right : Lap::left;
        const Real& inc_lo = inc == Lap::left ? br.domain.lo : c;
        const Real& inc_hi = inc == Lap::left ? c : br.domain.hi;
        const Real& dec_lo = dec == Lap::left ? br.domain.lo : c;
        const Real& dec_hi = dec == Lap::left ? c : br.domain.hi;
        ProbeLevel<Real> pl;
        try {
            auto q0 = half_fixed_point(map, inc_lo, inc_hi, br.s);
            auto p0 = half_fixed_point(map, dec_lo, dec_hi, br.s);
            if (!q0 || !p0) {
                res.detail = "central branch lacks one of its fixed points";
                break;
            }
            Itinerary it_dec{dec}, it_inc{inc};
            it_dec.insert(it_dec.end(), br.laps.begin(), br.laps.end());
            it_inc.insert(it_inc.end(), br.laps.begin(), br.laps.end());
            Real q0p = refine_preimage(map, *q0, it_dec);
            Real p0p = refine_preimage(map, *p0, it_inc);
            pl.I_inf = Interval<Real>::hull(*q0, q0p);
            pl.I00 = Interval<Real>::hull(p0p, *p0);
        } catch (const Error& e) {
            res.precision_exhausted = true;
            res.detail = std::string("fixed-point bracket collapsed: ") + e.what();
            break;
        }
        pl.theta = to_double(Real(pl.I00.length() / pl.I_inf.length()));
        pl.return_time = br.s;
        if (pl.I00.length() < eps * 1000) {
            res.precision_exhausted = true;
            res.detail = "renormalization interval below arithmetic resolution";
            break;
        }
        res.levels.push_back(pl);
        // First return to I00: continue while it is again a central high return.
        NestOptions opts;
        opts.depth = 1;
        opts.check_niceness = false;
        PrincipalNest<Real> sub;
        try {
            sub = build_nest(map, pl.I00, opts);
        } catch (const Error& e) {
            res.detail = e.what();
            break;
        }
        const auto& lv = sub.levels.front();
        if (!lv.classification) {
            if (sub.termination.kind == TerminationKind::precision_exhausted) res.precision_exhausted = true;
            res.detail = "first return to I00 not built: " + sub.termination.detail;
            break;
        }
        if (!lv.classification->central() || lv.classification->side != Side::high) {
            res.detail = "renormalization step " + std::to_string(res.levels.size()) + " is " +
                         lv.classification->label();
            break;
        }
        ++res.run;
        br = {lv.central->domain, lv.interval, lv.central->itinerary, lv.central->return_time, lv.maximum_at_c};
    }
    res.suspected = res.run >= min_run;
    if (res.detail.empty()) res.detail = "probe step limit reached";
    return res;
}

template <class Real>
NiceCandidate<Real> nice_interval_near(const UnimodalMap<Real>& map, double target_length, std::size_t max_period) {
    if (!(target_length > 0)) throw ParameterError("target length must be positive");
    const Real& c = map.critical_point();
    std::optional<NiceCandidate<Real>> best;
    double best_score = 0;
    for (std::size_t p = 1; p <= max_period; ++p) {
        std::size_t grid = std::size_t(1) << std::min<std::size_t>(p + 6, 18);
        for (const auto& pp : periodic_orbit_points(map, p, grid)) {
            Real q = pp.x, y = pp.x;
            for (std::size_t k = 1; k < p; ++k) {
                y = map(y);
                if (abs_value(Real(y - c)) < abs_value(Real(q - c))) q = y;
            }
            Real half = abs_value(Real(q - c));
            if (!(half > real_traits<Real>::root_tolerance())) continue;
            double len = 2 * to_double(half);
            double score = std::abs(std::log(len / target_length));
            if (!best || score < best_score) {
                Interval<Real> V(Real(c - half), Real(c + half));
                if (!verify_niceness(map, V, 200).verified) continue;
                best = NiceCandidate<Real>{V, p, q};
                best_score = score;
            }
        }
    }
    if (!best) throw ConstructionError("no periodic orbit gives a nice interval");
    return *best;
}

#define NESTLAB_INSTANTIATE(R)                                                                                  \
    template struct PrincipalNest<R>;                                                                           \
    template Interval<R> construct_nice_interval(const UnimodalMap<R>&);                                        \
    template NicenessResult<R> verify_niceness(const UnimodalMap<R>&, const Interval<R>&, std::size_t);         \
    template CentralReturn<R> central_domain(const UnimodalMap<R>&, const Interval<R>&, std::size_t);           \
    template ReturnScan<R> return_domains(const UnimodalMap<R>&, const Interval<R>&, std::size_t, std::size_t, \
                                          bool);                                                                \
    template Classification classify_return(const UnimodalMap<R>&, const Interval<R>&, const R&, bool);         \
    template PrincipalNest<R> build_nest(const UnimodalMap<R>&, const Interval<R>&, const NestOptions&);        \
    template CascadeResult detect_cascade(const PrincipalNest<R>&, std::size_t);                                \
    template ExceptionalResult<R> detect_exceptional(const UnimodalMap<R>&, const PrincipalNest<R>&, std::size_t); \
    template ProbeResult<R> infinite_cascade_probe(const UnimodalMap<R>&, const PrincipalNest<R>&, std::size_t,   \
                                                   std::size_t);                                                \
    template NiceCandidate<R> nice_interval_near(const UnimodalMap<R>&, double, std::size_t);

NESTLAB_INSTANTIATE(double)
NESTLAB_INSTANTIATE(ext_real)

}  // namespace nestlab
