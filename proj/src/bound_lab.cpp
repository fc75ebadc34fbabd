#include "nestlab/bound_lab.hpp"

#include "nestlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <type_traits>

#include <omp.h>

namespace nestlab {

namespace {

template <class Real>
Real rpow(const Real& x, double e) {
    using std::pow;
    return pow(x, Real(e));
}

template <class Real>
Real rexp(const Real& x) {
    using std::exp;
    return exp(x);
}

template <class Real>
Real max_abs(const Real& a, const Real& b) {
    Real x = abs_value(a), y = abs_value(b);
    return x < y ? y : x;
}

template <class Real>
Interval<Real> image_of(const UnimodalMap<Real>& map, const Interval<Real>& J, std::size_t n) {
    return Interval<Real>::hull(iterate(map, J.lo, n), iterate(map, J.hi, n));
}

template <class Real>
std::string branch_label(const UnimodalMap<Real>& map, std::size_t n) {
    return map.descriptor().label() + " n=" + std::to_string(n);
}

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

}  // namespace

bool DistortionReport::recompute_mu_pass() const {
    if (!has_mu) return false;
    double floor = theorem_mu_lower * (1 - rounding_allowance);
    return measured_B >= floor && measured_A >= floor;
}

bool DistortionReport::recompute_koebe_pass() const {
    return has_koebe && derivative_ratio_max <= koebe_bound;
}

double BlockDecomposition::total() const {
    return std::accumulate(block_sums.begin(), block_sums.end(), 0.0);
}

std::string block_case_name(BlockCase c) {
    switch (c) {
        case BlockCase::well_bounded: return "WellBounded";
        case BlockCase::cascade: return "Cascade";
        case BlockCase::exceptional: return "Exceptional";
        case BlockCase::infinite_cascade: return "InfiniteCascade";
        case BlockCase::unclassified: return "Unclassified";
    }
    return "unknown";
}

template <class Real>
DistortionReport theorem_mu_bound(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                  const Interval<Real>& J, const HolderEstimate& holder) {
    if (!branch.T.strictly_contains(J)) throw DomainError("J must lie strictly inside the branch domain");
    DistortionReport rep;
    rep.label = branch_label(map, branch.n);
    rep.n = branch.n;
    rep.t_lo = to_double(branch.T.lo);
    rep.t_hi = to_double(branch.T.hi);
    rep.j_lo = to_double(J.lo);
    rep.j_hi = to_double(J.hi);
    rep.max_image_length = to_double(branch.max_image_length());

    Real holder_sum(0);
    for (std::size_t k = 0; k < branch.n; ++k) holder_sum += rpow(branch.images[k].length(), 1 + holder.eta);
    rep.eta = holder.eta;
    rep.c_eta = holder.c_eta;
    rep.holder_sum = to_double(holder_sum);
    rep.theorem_mu_lower = to_double(rexp(Real(-Real(holder.c_eta) * holder_sum)));

    CrossRatioPair<Real> before = cross_ratio(branch.T, J);
    Interval<Real> img_j = image_of(map, J, branch.n);
    const Interval<Real>& img_t = branch.image();
    CrossRatioPair<Real> after = cross_ratio_points(img_t.lo, img_j.lo, img_j.hi, img_t.hi);
    Real b = after.b / before.b;
    Real a = after.a / before.a;
    rep.measured_B = to_double(b);
    rep.measured_A = to_double(a);
    rep.deficit_B = to_double(Real(1 - b));
    rep.deficit_A = to_double(Real(1 - a));

    // Relative error budget: every iterate perturbs the four endpoints by a few
    // units of the backend epsilon, magnified by the smallest gap.
    Real coord = Real(1);
    for (const Real* x : std::initializer_list<const Real*>{&img_t.lo, &img_t.hi, &img_j.lo, &img_j.hi})
        coord = max_abs(coord, *x);
    Real gap = img_j.lo - img_t.lo;
    for (Real g : {Real(img_t.hi - img_j.hi), img_j.length(), Real(J.lo - branch.T.lo), Real(branch.T.hi - J.hi),
                   J.length()})
        if (g < gap) gap = g;
    Real allowance = real_traits<Real>::epsilon() * 1000 * Real(double(branch.n + 1)) * coord / gap;
    rep.rounding_allowance = to_double(allowance);
    rep.has_mu = true;
    rep.mu_pass = rep.recompute_mu_pass();
    return rep;
}

template <class Real>
DistortionReport koebe_check(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch, const Interval<Real>& J,
                             const UnimodalMap<double>& grid_map, const KoebeSettings& settings) {
    if (!branch.T.strictly_contains(J)) throw DomainError("J must lie strictly inside the branch domain");
    if (settings.grid < 2) throw ParameterError("Koebe grid needs at least two points");
    DistortionReport rep;
    rep.label = branch_label(map, branch.n);
    rep.n = branch.n;
    rep.t_lo = to_double(branch.T.lo);
    rep.t_hi = to_double(branch.T.hi);
    rep.j_lo = to_double(J.lo);
    rep.j_hi = to_double(J.hi);
    Interval<Real> img_j = image_of(map, J, branch.n);
    const Interval<Real>& img_t = branch.image();
    Real l = img_j.lo - img_t.lo;
    Real r = img_t.hi - img_j.hi;
    Real side = l < r ? l : r;
    if (!(side > 0)) throw DegenerateError("image of J touches the image of T (delta = 0)");
    double delta = to_double(Real(side / img_j.length()));
    Real j_sum(0);
    Interval<Real> cur = J;
    for (std::size_t k = 0; k < branch.n; ++k) {
        j_sum += cur.length();
        cur = Interval<Real>::hull(map(cur.lo), map(cur.hi));
    }
    rep.koebe_delta = delta;
    rep.koebe_theta = settings.nu_hat * to_double(j_sum);
    double geom = (1 + delta) / delta;
    rep.koebe_bound = std::exp(rep.koebe_theta) * geom * geom;

    const double a = to_double(J.lo), b = to_double(J.hi);
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
    for (std::size_t g = 0; g <= settings.grid; ++g) {
        double x = g == settings.grid ? b : a + (b - a) * double(g) / double(settings.grid);
        double d = std::abs(orbit_derivative(grid_map, x, branch.n));
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    rep.derivative_ratio_max = dmin > 0 ? dmax / dmin : std::numeric_limits<double>::infinity();
    rep.koebe_grid = settings.grid;
    rep.has_koebe = true;
    rep.koebe_pass = rep.recompute_koebe_pass();
    return rep;
}

template <class Real>
MinimumPrincipleResult minimum_principle_check(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                               std::size_t samples) {
    if (branch.images.size() != branch.n + 1) throw ParameterError("branch is not certified");
    if (samples == 0) throw ParameterError("samples must be positive");
    MinimumPrincipleResult res;
    res.samples = samples;
    const Interval<Real>& T = branch.T;
    // Probe family: sub-intervals between grid points of T, J* their middle third.
    constexpr int probe_grid = 8;
    Real min_b(1);
    for (int i = 0; i < probe_grid; ++i) {
        for (int j = i + 1; j <= probe_grid; ++j) {
            Real t0 = T.lo + T.length() * Real(i) / Real(probe_grid);
            Real t1 = T.lo + T.length() * Real(j) / Real(probe_grid);
            Real w = (t1 - t0) / 3;
            MonotoneBranch<Real> sub = certify_branch(map, Interval<Real>(t0, t1), branch.n);
            DistortionReport probe = theorem_mu_bound(map, sub, Interval<Real>(Real(t0 + w), Real(t1 - w)), {});
            Real b(probe.measured_B);
            if (b < min_b) min_b = b;
            res.probe_allowance = std::max(res.probe_allowance, probe.rounding_allowance);
        }
    }
    res.min_probe_B = to_double(min_b);
    res.mu = std::min(1.0, res.min_probe_B);
    Real da = abs_value(orbit_derivative(map, T.lo, branch.n));
    Real db = abs_value(orbit_derivative(map, T.hi, branch.n));
    Real floor = (da < db ? da : db) * Real(res.mu * res.mu * res.mu);
    // Relative rounding budget of an n-fold derivative product.
    Real slack = Real(1) - real_traits<Real>::epsilon() * 1000 * Real(branch.n + 1);
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (std::size_t s = 0; s < samples; ++s) {
        Real x = T.lo + T.length() * Real(2 * s + 1) / Real(2 * samples);
        Real d = abs_value(orbit_derivative(map, x, branch.n));
        if (floor > 0) worst = std::min(worst, to_double(Real(d / floor)));
        if (!(d >= floor * slack)) ok = false;
    }
    res.worst_margin = worst;
    res.pass = ok;
    return res;
}

template <class Real>
void compute_sigmas(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest, std::vector<double>& sigma,
                    std::vector<double>& sigma_m, const SigmaOptions& options) {
    const std::size_t L = nest.levels.size();
    sigma.assign(L, nan_value);
    sigma_m.assign(L, nan_value);
    const Real& c = map.critical_point();
    for (std::size_t i = 0; i < L; ++i) {
        const auto& lv = nest.levels[i];
        if (!lv.domains_scanned) continue;
        double best = 0;
        for (const auto& d : lv.domains) {
            const Interval<Real>& V = d.domain;
            Interval<Real> cur = V;
            Real sum(0);
            for (std::size_t k = 1; k <= d.return_time; ++k) {
                if (k == 1 && V.contains(c)) {
                    Real top = map(c);
                    Real lo = map(V.lo), hi = map(V.hi);
                    Real low = lo < hi ? lo : hi;
                    cur = Interval<Real>::hull(low, top);
                } else {
                    cur = Interval<Real>::hull(map(cur.lo), map(cur.hi));
                }
                sum += cur.length();
            }
            best = std::max(best, to_double(sum));
        }
        sigma[i] = best;
        double best_m = best;
        // Cascade variant: entries from the components of I_i \ I_{i+1} into I_{i+1}.
        if (lv.central && options.gap_seeds > 0) {
            const Interval<Real>& inner = lv.central->domain;
            for (const Interval<Real>& G : {Interval<Real>(lv.interval.lo, inner.lo), Interval<Real>(inner.hi, lv.interval.hi)}) {
                for (std::size_t j = 0; j < options.gap_seeds; ++j) {
                    Real x = G.lo + G.length() * Real(2 * j + 1) / Real(2 * options.gap_seeds);
                    EntryResult e = first_entry_time(map, x, inner, options.cap);
                    if (!e.found()) continue;
                    Itinerary it = itinerary_of(map, x, e.time);
                    try {
                        Real a = refine_preimage(map, inner.lo, it);
                        Real b = refine_preimage(map, inner.hi, it);
                        MonotoneBranch<Real> br = certify_branch(map, Interval<Real>::hull(a, b), e.time);
                        Real sum(0);
                        for (std::size_t k = 1; k <= br.n; ++k) sum += br.images[k].length();
                        best_m = std::max(best_m, to_double(sum));
                    } catch (const Error&) {
                    }
                }
            }
        }
        sigma_m[i] = best_m;
    }
}

namespace {

template <class Real>
std::vector<BlockLabel> label_levels(const PrincipalNest<Real>& nest) {
    const std::size_t L = nest.levels.size();
    std::vector<BlockLabel> labels(L);
    auto central = [&](long i) {
        if (i < 0) return false;  // levels before I_0 count as non-central
        const auto& cls = nest.levels[std::size_t(i)].classification;
        return cls && cls->central();
    };
    auto run_of = [&](std::size_t i, BlockLabel& out) {
        std::size_t a = i, b = i;
        while (a > 0 && central(long(a) - 1)) --a;
        while (b + 1 < L && central(long(b) + 1)) ++b;
        out.run_start = a;
        out.m = b - a + 1;
    };
    bool all_central = nest.termination.kind == TerminationKind::infinite_cascade_suspected;
    for (std::size_t i = 0; i < L; ++i)
        if (nest.levels[i].classification && !nest.levels[i].classification->central()) all_central = false;
    for (std::size_t i = 0; i < L; ++i) {
        BlockLabel& lb = labels[i];
        const auto& cls = nest.levels[i].classification;
        if (!cls) continue;
        long li = long(i);
        if (all_central) {
            lb.kind = BlockCase::infinite_cascade;
        } else if (central(li)) {
            lb.kind = BlockCase::cascade;
            run_of(i, lb);
        } else if (central(li - 1)) {
            lb.kind = BlockCase::cascade;
            run_of(i - 1, lb);
        } else if (central(li - 2) && nest.levels[i - 1].classification &&
                   nest.levels[i - 1].classification->side == Side::high) {
            lb.kind = BlockCase::exceptional;
        } else {
            lb.kind = BlockCase::well_bounded;
        }
    }
    return labels;
}

}  // namespace

template <class Real>
BlockDecomposition block_decompose(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                   const PrincipalNest<Real>& nest, double xi, const std::vector<double>& sigma,
                                   const std::vector<double>& sigma_m) {
    if (nest.levels.empty()) throw ParameterError("nest has no levels");
    if (xi < 0) throw ParameterError("xi must be non-negative");
    const Real tol = real_traits<Real>::epsilon() * 1000;
    auto inside = [&](const Interval<Real>& img, const Interval<Real>& I) {
        return img.lo >= I.lo - tol && img.hi <= I.hi + tol;
    };
    if (!inside(branch.image(), nest.levels[0].interval)) throw DomainError("f^n(T) must lie in I_0");
    BlockDecomposition dec;
    dec.label = branch_label(map, branch.n);
    dec.n = branch.n;
    dec.xi = xi;
    dec.image_lengths.reserve(branch.n + 1);
    for (const auto& img : branch.images) dec.image_lengths.push_back(to_double(img.length()));
    const std::size_t L = nest.levels.size();
    for (const auto& lv : nest.levels) dec.level_lengths.push_back(to_double(lv.interval.length()));

    dec.times.push_back(branch.n);
    for (std::size_t i = 1; i < L; ++i) {
        const Interval<Real>& I = nest.levels[i].interval;
        std::size_t prev = dec.times.back();
        std::size_t ni = prev;
        for (std::size_t j = prev + 1; j-- > 0;) {
            const Interval<Real>& img = branch.images[j];
            if (inside(img, I)) {
                ni = j;
                if (img.lo < I.lo || img.hi > I.hi)
                    dec.touch_log.push_back("f^" + std::to_string(j) + "(T) touches the boundary of I_" +
                                            std::to_string(i));
                break;
            }
        }
        dec.times.push_back(ni);
    }
    auto term = [&](std::size_t k) { return std::pow(dec.image_lengths[k], 1 + xi); };
    for (std::size_t i = 0; i + 1 < dec.times.size(); ++i) {
        double s = 0;
        for (std::size_t k = dec.times[i + 1]; k < dec.times[i]; ++k) s += term(k);
        dec.block_sums.push_back(s);
    }
    double deepest = 0;
    for (std::size_t k = 0; k < dec.times.back(); ++k) deepest += term(k);
    dec.block_sums.push_back(deepest);

    dec.inside_times.resize(L);
    for (std::size_t i = 0; i + 1 < dec.times.size(); ++i) {
        const Interval<Real>& I = nest.levels[i].interval;
        auto& list = dec.inside_times[i];
        for (std::size_t k = dec.times[i + 1] + 1; k < dec.times[i]; ++k)
            if (inside(branch.images[k], I)) list.push_back(k);
        std::sort(list.begin(), list.end(),
                  [&](std::size_t x, std::size_t y) { return dec.image_lengths[x] > dec.image_lengths[y]; });
    }
    dec.case_labels = label_levels(nest);
    dec.sigma = sigma.size() == L ? sigma : std::vector<double>(L, nan_value);
    dec.sigma_m = sigma_m.size() == L ? sigma_m : std::vector<double>(L, nan_value);
    return dec;
}

template <class Real>
double direct_orbit_sum(const MonotoneBranch<Real>& branch, double xi) {
    double s = 0;
    for (std::size_t k = 0; k < branch.n; ++k) s += std::pow(to_double(branch.images[k].length()), 1 + xi);
    return s;
}

std::vector<BlockVerdict> proposition_checks(const BlockDecomposition& dec) {
    std::vector<BlockVerdict> out;
    const double xi = dec.xi;
    for (std::size_t i = 0; i + 1 < dec.times.size(); ++i) {
        BlockVerdict v;
        v.level = i;
        v.kind = i < dec.case_labels.size() ? dec.case_labels[i].kind : BlockCase::unclassified;
        const std::size_t hi = dec.times[i], lo = dec.times[i + 1];
        // Block sum over k in (n_{i+1}, n_i].
        double s = 0, peak = 0;
        for (std::size_t k = lo + 1; k <= hi; ++k) {
            s += std::pow(dec.image_lengths[k], 1 + xi);
            peak = std::max(peak, std::pow(dec.image_lengths[k], xi));
        }
        v.block_sum = s;
        if (hi == lo) {
            v.realized_constant = 0;
            v.pass = true;
            v.note = "empty block";
            out.push_back(v);
            continue;
        }
        if (v.kind == BlockCase::unclassified) {
            v.skipped = true;
            v.note = "level has no classification";
            out.push_back(v);
            continue;
        }
        const double Ii = dec.level_lengths[i];
        const double sig = dec.sigma[i];
        const double sig_m = dec.sigma_m[i];
        const double landing = dec.image_lengths[hi] / Ii;
        switch (v.kind) {
            case BlockCase::well_bounded: v.rhs = sig * landing; break;
            case BlockCase::cascade: v.rhs = sig_m * peak; break;
            case BlockCase::exceptional: {
                double extra = 0;
                const auto& inside = dec.inside_times[i];
                for (std::size_t t = 0; t < std::min<std::size_t>(2, inside.size()); ++t)
                    extra += dec.image_lengths[inside[t]] / Ii;
                v.rhs = sig * (landing + extra);
                break;
            }
            case BlockCase::infinite_cascade: v.rhs = sig_m * peak; break;
            case BlockCase::unclassified: break;
        }
        if (std::isnan(v.rhs)) {
            v.skipped = true;
            v.note = "return domains of I_" + std::to_string(i) + " not scanned";
        } else if (v.rhs <= 0) {
            v.realized_constant = std::numeric_limits<double>::infinity();
            v.note = "right-hand side vanishes";
        } else {
            v.realized_constant = s / v.rhs;
            v.pass = std::isfinite(v.realized_constant);
        }
        out.push_back(v);
    }
    return out;
}

BranchSample sample_cylinder_branch(const UnimodalMap<double>& map, std::mt19937_64& rng, std::size_t n_max) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> steps(0, n_max);
    const double c = map.critical_point();
    BranchSample s;
    double x = unit(rng);
    s.n = steps(rng);
    Itinerary laps;
    // Z: image of the cylinder of x under f^k.
    double zlo = 0, zhi = 1, y = x;
    for (std::size_t k = 0; k < s.n; ++k) {
        Lap lap = y < c ? Lap::left : Lap::right;
        laps.push_back(lap);
        if (lap == Lap::left) zhi = std::min(zhi, c);
        else zlo = std::max(zlo, c);
        double a = map(zlo), b = map(zhi);
        zlo = std::min(a, b);
        zhi = std::max(a, b);
        y = map(y);
    }
    double w0 = zlo + (zhi - zlo) * unit(rng);
    double w1 = zlo + (zhi - zlo) * unit(rng);
    if (w0 > w1) std::swap(w0, w1);
    double t0 = w0, t1 = w1;
    try {
        t0 = refine_preimage(map, w0, laps);
        t1 = refine_preimage(map, w1, laps);
    } catch (const Error&) {
    }
    if (t0 > t1) std::swap(t0, t1);
    s.t0 = t0;
    s.t1 = t1;
    std::uniform_real_distribution<double> inner(1e-9, 1 - 1e-9);
    double u0 = inner(rng), u1 = inner(rng);
    if (u0 > u1) std::swap(u0, u1);
    s.j0 = t0 + (t1 - t0) * u0;
    s.j1 = t0 + (t1 - t0) * u1;
    return s;
}

std::optional<BranchSample> sample_entry_branch(const UnimodalMap<double>& map, const Interval<double>& V,
                                                std::mt19937_64& rng, std::size_t n_max) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double c = map.critical_point();
    double x = unit(rng);
    EntryResult e = first_entry_time(map, x, V, std::max<std::size_t>(n_max, 1));
    if (!e.found()) return std::nullopt;
    Itinerary laps = itinerary_of(map, x, e.time);
    double zlo = 0, zhi = 1;
    for (Lap lap : laps) {
        if (lap == Lap::left) zhi = std::min(zhi, c);
        else zlo = std::max(zlo, c);
        double a = map(zlo), b = map(zhi);
        zlo = std::min(a, b);
        zhi = std::max(a, b);
    }
    double lo = std::max(zlo, V.lo), hi = std::min(zhi, V.hi);
    if (!(lo < hi)) return std::nullopt;
    double margin = 0.05 * (hi - lo);
    lo += margin;
    hi -= margin;
    double w0 = lo + (hi - lo) * unit(rng);
    double w1 = lo + (hi - lo) * unit(rng);
    if (w0 > w1) std::swap(w0, w1);
    if (!(w0 < w1)) return std::nullopt;
    BranchSample s;
    s.n = e.time;
    try {
        s.t0 = refine_preimage(map, w0, laps);
        s.t1 = refine_preimage(map, w1, laps);
    } catch (const Error&) {
        return std::nullopt;
    }
    if (s.t0 > s.t1) std::swap(s.t0, s.t1);
    std::uniform_real_distribution<double> inner(1e-9, 1 - 1e-9);
    double u0 = inner(rng), u1 = inner(rng);
    if (u0 > u1) std::swap(u0, u1);
    s.j0 = s.t0 + (s.t1 - s.t0) * u0;
    s.j1 = s.t0 + (s.t1 - s.t0) * u1;
    return s;
}

template <class Real>
std::optional<DistortionReport> measure_sample(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map,
                                               const BranchSample& sample, const MeasureSettings& settings) {
    try {
        Interval<Real> T{Real(sample.t0), Real(sample.t1)};
        Interval<Real> J{Real(sample.j0), Real(sample.j1)};
        if (!T.strictly_contains(J)) return std::nullopt;
        MonotoneBranch<Real> br = certify_branch(map, T, sample.n);
        if (settings.require_image_in) {
            const Interval<double>& W = *settings.require_image_in;
            if (!(to_double(br.image().lo) >= W.lo && to_double(br.image().hi) <= W.hi)) return std::nullopt;
        }
        DistortionReport rep = theorem_mu_bound(map, br, J, settings.holder);
        rep.digits = real_traits<Real>::digits();
        if (settings.koebe) {
            KoebeSettings ks = settings.koebe_settings;
            if (ks.nu_hat <= 0) ks.nu_hat = settings.holder.c_eta;
            try {
                DistortionReport k = koebe_check(map, br, J, grid_map, ks);
                rep.has_koebe = true;
                rep.koebe_delta = k.koebe_delta;
                rep.koebe_theta = k.koebe_theta;
                rep.koebe_bound = k.koebe_bound;
                rep.derivative_ratio_max = k.derivative_ratio_max;
                rep.koebe_grid = k.koebe_grid;
                rep.koebe_pass = k.koebe_pass;
            } catch (const DegenerateError&) {
            }
        }
        return rep;
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::size_t escalate_unresolved(const UnimodalMap<double>& map, const std::vector<BranchSample>& samples,
                                std::vector<std::optional<DistortionReport>>& reports, const MeasureSettings& settings) {
    if (settings.escalate_digits == 0 || omp_in_parallel()) return 0;
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < reports.size(); ++i)
        if (reports[i] && !(reports[i]->rounding_allowance <= settings.resolve_tolerance)) pending.push_back(i);
    if (pending.empty()) return 0;
    PrecisionScope scope(settings.escalate_digits);
    auto exact = map.family() == Family::logistic
                     ? UnimodalMap<ext_real>::logistic(ext_real(map.a()))
                     : UnimodalMap<ext_real>::power(ext_real(map.critical_order()), ext_real(map.a()));
    std::vector<BranchSample> subset;
    for (std::size_t i : pending) subset.push_back(samples[i]);
    auto redone = measure_branches_parallel(exact, map, subset, settings);
    for (std::size_t k = 0; k < pending.size(); ++k) reports[pending[k]] = std::move(redone[k]);
    return pending.size();
}

template <class Real>
std::vector<std::optional<DistortionReport>> measure_resolved(const UnimodalMap<Real>& map,
                                                              const UnimodalMap<double>& grid_map,
                                                              const std::vector<BranchSample>& samples,
                                                              const MeasureSettings& settings) {
    auto reports = measure_branches_parallel(map, grid_map, samples, settings);
    if constexpr (std::is_same_v<Real, double>) escalate_unresolved(map, samples, reports, settings);
    return reports;
}

template <class Real>
MainTheoremSummary verify_main_theorem(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map,
                                       const Interval<double>& V, std::size_t branch_samples, std::size_t n_max,
                                       std::uint64_t seed, const MeasureSettings& settings) {
    MainTheoremSummary sum;
    sum.v_length = V.length();
    sum.requested = branch_samples;
    sum.min_B = sum.min_A = std::numeric_limits<double>::infinity();
    sum.max_deficit_B = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    MeasureSettings ms = settings;
    ms.require_image_in = V;
    // Draw in rounds until enough branches certify; the attempt budget is fixed.
    std::size_t attempts = branch_samples * settings.attempts_per_sample;
    while (sum.certified < branch_samples && attempts > 0) {
        std::vector<BranchSample> samples;
        const std::size_t want = branch_samples - sum.certified;
        while (attempts > 0 && samples.size() < want) {
            --attempts;
            if (auto s = sample_entry_branch(grid_map, V, rng, n_max)) samples.push_back(*s);
        }
        for (auto& r : measure_resolved(map, grid_map, samples, ms)) {
            if (!r) continue;
            ++sum.certified;
            sum.min_B = std::min(sum.min_B, r->measured_B);
            sum.min_A = std::min(sum.min_A, r->measured_A);
            sum.max_deficit_B = std::max(sum.max_deficit_B, r->deficit_B);
            sum.reports.push_back(std::move(*r));
        }
    }
    if (sum.certified == 0) {
        sum.min_B = sum.min_A = std::numeric_limits<double>::quiet_NaN();
        sum.max_deficit_B = 0;
    }
    sum.starved = branch_samples > 0 && sum.certified * 10 < branch_samples;
    return sum;
}

TrendFit fit_main_theorem_trend(const std::vector<MainTheoremSummary>& scales, double deficit_floor) {
    TrendFit fit;
    std::vector<double> lx, ly;
    for (const auto& s : scales) {
        fit.lengths.push_back(s.v_length);
        fit.min_B.push_back(s.min_B);
        double deficit = 1 - s.min_B;
        if (deficit > deficit_floor) {
            lx.push_back(std::log(s.v_length));
            ly.push_back(std::log(deficit));
        }
    }
    fit.non_decreasing = true;
    for (std::size_t j = 1; j < fit.min_B.size(); ++j)
        if (fit.min_B[j] < fit.min_B[j - 1]) fit.non_decreasing = false;
    fit.fit_points = lx.size();
    if (lx.size() >= 2) fit.slope = ols_slope(lx, ly);
    return fit;
}

namespace {

template <class Real>
struct CascadeGeometry {
    std::size_t start = 0, m = 0, s = 0;
    bool max_at_c = true;
    std::vector<Real> a;  // a_0..a_m on the increasing side
};

template <class Real>
CascadeGeometry<Real> cascade_geometry(const PrincipalNest<Real>& nest, const CascadeResult& cascade) {
    if (cascade.m == 0) throw ParameterError("no cascade");
    if (cascade.start + cascade.m >= nest.levels.size()) throw ParameterError("cascade exceeds the built nest");
    CascadeGeometry<Real> g;
    g.start = cascade.start;
    g.m = cascade.m;
    const auto& base = nest.levels[cascade.start];
    g.s = base.central->return_time;
    g.max_at_c = base.maximum_at_c;
    for (std::size_t k = 0; k <= g.m; ++k) {
        const auto& I = nest.levels[g.start + k].interval;
        g.a.push_back(g.max_at_c ? I.lo : I.hi);
    }
    return g;
}

}  // namespace

template <class Real>
YoccozFit yoccoz_fit(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest, const CascadeResult& cascade,
                     std::size_t sandwich_grid) {
    if (cascade.kind != CascadeKind::saddle_node) throw ParameterError("yoccoz fit needs a saddle-node cascade");
    if (cascade.m < 8) throw ParameterError("yoccoz fit needs m >= 8");
    if (sandwich_grid < 3) throw ParameterError("sandwich grid too small");
    CascadeGeometry<Real> g = cascade_geometry(nest, cascade);
    const std::size_t m = g.m;
    const Real eps = real_traits<Real>::epsilon();
    const Real I0 = nest.levels[g.start].interval.length();
    const Real Im = nest.levels[g.start + m].interval.length();
    const Real resolvable = eps * Real(1e6) * I0;
    const char* guidance = "cascade gaps fall below the arithmetic resolution; rerun with extended precision "
                           "(for example --precision ext50)";
    auto gap_at = [&](std::size_t k) {
        return Real(nest.levels[g.start + k - 1].interval.length() - nest.levels[g.start + k].interval.length());
    };
    const auto& after = nest.levels[g.start + m].classification;
    YoccozFit fit;
    fit.start = g.start;
    fit.m = m;
    fit.exited = after && !after->central();
    std::size_t window = m - 1;
    if (fit.exited) {
        for (std::size_t k = 1; k <= m; ++k)
            if (gap_at(k) < resolvable) throw PrecisionError(guidance);
        if (Im < eps * Real(1e6)) throw PrecisionError(guidance);
    } else {
        std::size_t resolved = 0;
        while (resolved < m && !(gap_at(resolved + 1) < resolvable)) ++resolved;
        if (resolved < 16) throw PrecisionError(guidance);
        std::vector<double> tail;
        for (std::size_t k = resolved - 10; k < resolved; ++k) tail.push_back(to_double(Real(gap_at(k + 1) / gap_at(k))));
        std::nth_element(tail.begin(), tail.begin() + 5, tail.end());
        fit.tail_ratio = tail[5];
        if (!(fit.tail_ratio < 1)) throw PrecisionError("central run neither exits nor converges within the built nest");
        double theta = -0.5 * std::log(fit.tail_ratio);
        window = std::size_t(1 / (2 * theta));
        if (window > resolved) throw PrecisionError(guidance);
        if (window < 8) throw ParameterError("parabolic passage shorter than 8 levels");
    }
    fit.window = window;
    auto abscissa = [&](std::size_t k) { return double(fit.exited ? std::min(k, m - k) : k); };

    std::vector<double> lx, ly;
    for (std::size_t k = 1; k <= window; ++k) {
        double ratio = to_double(Real(gap_at(k) / I0));
        fit.gap_ratios.push_back(ratio);
        fit.gap_sum += ratio;
        lx.push_back(std::log(abscissa(k)));
        ly.push_back(std::log(ratio));
    }
    fit.loglog_slope = ols_slope(lx, ly);
    double vmax = 0, vmin = std::numeric_limits<double>::infinity();
    const std::size_t last = fit.exited ? m - 2 : window;
    for (std::size_t k = 2; k <= last; ++k) {
        double q = abscissa(k);
        double v = fit.gap_ratios[k - 1] * q * q;
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    fit.sandwich_C = std::max(vmax, 1 / vmin);
    fit.im_over_i0 = to_double(Real(Im / I0));

    // Parabolic normal form on psi([a_m, a_1]) = [0, 1].
    ParabolicFit& pf = fit.parabolic;
    const Real& a1 = g.a[1];
    const Real& am = g.a[m];
    const Real scale = a1 - am;
    auto psi = [&](const Real& x) { return Real((x - am) / scale); };
    auto psi_inv = [&](const Real& u) { return Real(am + u * scale); };
    auto G = [&](const Real& u) { return psi(iterate(map, psi_inv(u), g.s)); };
    auto dfm1 = [&](const Real& x) { return Real(orbit_derivative(map, x, g.s) - 1); };
    Real lo = a1 < am ? a1 : am;
    Real hi = a1 < am ? am : a1;
    Real flo = dfm1(lo), fhi = dfm1(hi);
    Real x0;
    if ((flo < 0) == (fhi < 0)) {
        pf.non_parabolic = true;
        x0 = abs_value(flo) < abs_value(fhi) ? lo : hi;
    } else {
        for (int it = 0; it < 20000; ++it) {
            Real mid = (lo + hi) / 2;
            if (!(lo < mid && mid < hi)) break;
            Real fm = dfm1(mid);
            if ((fm < 0) == (flo < 0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        x0 = (lo + hi) / 2;
    }
    const Real u0 = psi(x0);
    const Real epsilon = G(u0) - u0;
    pf.x0 = to_double(x0);
    pf.df_at_x0 = to_double(orbit_derivative(map, x0, g.s));
    pf.epsilon = to_double(epsilon);
    double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
    for (std::size_t j = 0; j < sandwich_grid; ++j) {
        Real u = Real(j) / Real(sandwich_grid - 1);
        Real du = u - u0;
        if (abs_value(du) > Real(0.5) || abs_value(du) < Real(1e-6)) continue;
        double r = to_double(Real((G(u) - u - epsilon) / (du * du)));
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    pf.a_coef = rmin;
    pf.b_coef = rmax;
    if (!(rmin > 0) || rmax > 100 * rmin) pf.non_parabolic = true;
    std::size_t N = 0;
    for (std::size_t k = 1; k <= m; ++k)
        if (psi(g.a[k]) > u0) N = k;
    pf.N = N;
    pf.N_sqrt_eps = double(N) * std::sqrt(std::max(0.0, pf.epsilon));
    // Past the tangency F has fixed points and no parabolic passage exists.
    if (!fit.exited) pf.non_parabolic = true;
    return fit;
}

template <class Real>
CascadeSumResult cascade_sum_checks(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                    const CascadeResult& cascade, double xi) {
    CascadeGeometry<Real> g = cascade_geometry(nest, cascade);
    CascadeSumResult res;
    res.m = g.m;
    res.M = g.m / 2;
    res.xi = xi;
    const Real I0 = nest.levels[g.start].interval.length();
    res.i0_length = to_double(I0);
    Real x = g.a[res.M], y = g.a[g.m];
    if (res.M == g.m) {
        res.lengths.push_back(0);
        return res;
    }
    for (std::size_t k = 0; k <= res.M; ++k) {
        double len = to_double(abs_value(Real(y - x)));
        res.lengths.push_back(len);
        res.sum_linear += len;
        res.sum_xi += std::pow(len, 1 + xi);
        x = iterate(map, x, g.s);
        y = iterate(map, y, g.s);
    }
    res.realized_linear = res.sum_linear / res.i0_length;
    res.realized_xi = res.sum_xi / std::pow(res.i0_length, 1 + xi);
    return res;
}

template <class Real>
ExceptionalChecks exceptional_checks(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                     const ExceptionalResult<Real>& exc, std::size_t grid, std::size_t scan,
                                     std::size_t cap) {
    if (!exc.exceptional) throw ParameterError("no exceptional configuration: " + exc.reason);
    if (grid < 2) throw ParameterError("grid too small");
    ExceptionalChecks out;
    out.grid = grid;
    const std::size_t s = exc.branch_time;
    auto dF = [&](const Real& x) { return to_double(abs_value(orbit_derivative(map, x, s))); };
    double gmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= grid; ++j) {
        Real x = j == grid ? exc.hull.hi : Real(exc.hull.lo + exc.hull.length() * Real(j) / Real(grid));
        if (exc.V.contains(x)) continue;
        gmin = std::min(gmin, dF(x));
    }
    for (const Real& x : {exc.p, exc.p_prime}) gmin = std::min(gmin, dF(x));
    out.gamma_hat = gmin;
    double cmax = 0;
    for (const Interval<Real>& D : {exc.left, exc.right})
        for (std::size_t j = 0; j <= grid; ++j) {
            Real x = j == grid ? D.hi : Real(D.lo + D.length() * Real(j) / Real(grid));
            cmax = std::max(cmax, dF(x));
        }
    out.C_hat = cmax;
    out.p_multiplier = dF(exc.p);

    const auto& level = nest.levels.at(exc.level);
    std::vector<ReturnDomain<Real>> domains;
    if (level.domains_scanned) domains = level.domains;
    else domains = return_domains(map, level.interval, scan, cap).domains;
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& d : domains) {
        if (d.is_central || !d.domain.disjoint(exc.left) || !d.domain.disjoint(exc.right)) continue;
        if (!level.interval.contains(d.domain)) continue;
        ++out.other_domains;
        fmin = std::min(fmin, to_double(scaled_neighborhood_factor(level.interval, d.domain)));
    }
    out.min_other_factor = out.other_domains ? fmin : 0;
    out.gamma_pass = out.gamma_hat > 1;
    out.multiplier_pass = out.p_multiplier > 1;
    out.C_finite = std::isfinite(out.C_hat);
    return out;
}

template <class Real>
LambdaDecay lambda_decay(const UnimodalMap<Real>& map, const NestLevel<Real>& level, std::size_t probes,
                         std::uint64_t seed) {
    if (!level.domains_scanned) throw ParameterError("level domains were not scanned");
    std::vector<const ReturnDomain<Real>*> pool;
    for (const auto& d : level.domains)
        if (!d.is_central) pool.push_back(&d);
    LambdaDecay out;
    if (pool.empty()) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_real_distribution<double> inner(0.01, 0.99);
    const Interval<Real>& I = level.interval;
    for (std::size_t p = 0; p < probes; ++p) {
        const ReturnDomain<Real>& d = *pool[pick(rng)];
        double u0 = inner(rng), u1 = inner(rng);
        if (u0 > u1) std::swap(u0, u1);
        if (!(u0 < u1)) continue;
        Real j0 = d.domain.lo + d.domain.length() * Real(u0);
        Real j1 = d.domain.lo + d.domain.length() * Real(u1);
        if (!(j0 < j1)) continue;  // below the resolution of a tiny domain
        try {
            Interval<Real> J(j0, j1);
            Interval<Real> FJ = image_of(map, J, d.return_time);
            if (!I.strictly_contains(J) || !I.strictly_contains(FJ)) continue;
            double ratio = to_double(Real(cross_ratio(I, J).b / cross_ratio(I, FJ).b));
            ++out.probes;
            if (ratio < 1) ++out.below_one;
            out.realized_lambda = std::max(out.realized_lambda, ratio);
        } catch (const Error&) {
        }
    }
    return out;
}

double delta_bound_bruteforce(double delta, std::size_t grid) {
    if (!(delta > 0)) throw ParameterError("delta must be positive");
    if (grid < 2) throw ParameterError("grid too small");
    // |J| = 1; |L|, |R| range log-uniformly over [delta, 1e4 delta].
    double best = 0;
    for (std::size_t i = 0; i < grid; ++i) {
        double l = delta * std::pow(1e4, double(i) / double(grid - 1));
        for (std::size_t j = 0; j < grid; ++j) {
            double r = delta * std::pow(1e4, double(j) / double(grid - 1));
            best = std::max(best, (l + 1 + r) / (l * r));
        }
    }
    return best;
}

template <class Real>
DeltaBoundCheck delta_bound_check(const PrincipalNest<Real>& nest, double delta) {
    DeltaBoundCheck out;
    out.delta = delta;
    out.closed_form = delta_bound(delta);
    out.brute_force = delta_bound_bruteforce(delta, 200);
    for (const auto& lv : nest.levels) {
        if (!lv.domains_scanned) continue;
        for (const auto& d : lv.domains) {
            if (!lv.interval.strictly_contains(d.domain)) continue;
            if (!(to_double(scaled_neighborhood_factor(lv.interval, d.domain)) > delta)) continue;
            double b = to_double(cross_ratio(lv.interval, d.domain).b);
            ++out.domains_checked;
            out.worst_B = std::max(out.worst_B, b);
            if (b > out.closed_form) ++out.violations;
        }
    }
    return out;
}

template <class Real>
GammaDecay gamma_decay(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest) {
    GammaDecay out;
    auto labels = label_levels(nest);
    std::optional<std::size_t> prev;
    double prev_max = 0;
    for (std::size_t i = 0; i < nest.levels.size(); ++i) {
        const auto& lv = nest.levels[i];
        if (!lv.domains_scanned) continue;
        double best = 0;
        for (const auto& d : lv.domains) {
            if (d.is_central) continue;
            Interval<Real> cur = d.domain;
            for (std::size_t k = 0; k < d.return_time; ++k) {
                best = std::max(best, to_double(cur.length()));
                cur = Interval<Real>::hull(map(cur.lo), map(cur.hi));
            }
        }
        out.level_maxima.push_back(best);
        const bool wb = labels[i].kind == BlockCase::well_bounded;
        if (wb && prev && *prev + 1 == i && prev_max > 0) out.ratios.push_back(best / prev_max);
        if (wb) {
            prev = i;
            prev_max = best;
        } else {
            prev.reset();
        }
    }
    if (!out.ratios.empty()) out.realized_gamma = *std::max_element(out.ratios.begin(), out.ratios.end());
    return out;
}

template <class Real>
TauTrend tau_trend(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map, const Interval<double>& V,
                   std::size_t samples, std::size_t n_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> peak, landing;
    for (std::size_t a = 0; a < samples * 200 && peak.size() < samples; ++a) {
        auto s = sample_entry_branch(grid_map, V, rng, n_max);
        if (!s || s->n == 0) continue;
        try {
            MonotoneBranch<Real> br = certify_branch(map, Interval<Real>(Real(s->t0), Real(s->t1)), s->n);
            peak.push_back(to_double(br.max_image_length()));
            landing.push_back(to_double(br.image().length()));
        } catch (const Error&) {
        }
    }
    TauTrend out;
    out.samples = peak.size();
    if (peak.size() >= 3) out.spearman = spearman_rank(landing, peak);
    return out;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("regression needs two or more points");
    const double n = double(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0) throw ParameterError("regression abscissae are constant");
    return sxy / sxx;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = (double(i) + double(j)) / 2 + 1;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_rank(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("rank correlation needs two or more points");
    std::vector<double> rx = ranks(x), ry = ranks(y);
    const double n = double(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0;
    return sxy / std::sqrt(sxx * syy);
}

#define NESTLAB_INSTANTIATE(R)                                                                                     \
    template DistortionReport theorem_mu_bound(const UnimodalMap<R>&, const MonotoneBranch<R>&, const Interval<R>&, \
                                               const HolderEstimate&);                                             \
    template DistortionReport koebe_check(const UnimodalMap<R>&, const MonotoneBranch<R>&, const Interval<R>&,      \
                                          const UnimodalMap<double>&, const KoebeSettings&);                       \
    template MinimumPrincipleResult minimum_principle_check(const UnimodalMap<R>&, const MonotoneBranch<R>&,        \
                                                            std::size_t);                                          \
    template void compute_sigmas(const UnimodalMap<R>&, const PrincipalNest<R>&, std::vector<double>&,              \
                                 std::vector<double>&, const SigmaOptions&);                                       \
    template BlockDecomposition block_decompose(const UnimodalMap<R>&, const MonotoneBranch<R>&,                    \
                                                const PrincipalNest<R>&, double, const std::vector<double>&,        \
                                                const std::vector<double>&);                                       \
    template double direct_orbit_sum(const MonotoneBranch<R>&, double);                                             \
    template std::optional<DistortionReport> measure_sample(const UnimodalMap<R>&, const UnimodalMap<double>&,      \
                                                            const BranchSample&, const MeasureSettings&);          \
    template std::vector<std::optional<DistortionReport>> measure_resolved(                                         \
        const UnimodalMap<R>&, const UnimodalMap<double>&, const std::vector<BranchSample>&, const MeasureSettings&); \
    template MainTheoremSummary verify_main_theorem(const UnimodalMap<R>&, const UnimodalMap<double>&,              \
                                                    const Interval<double>&, std::size_t, std::size_t,              \
                                                    std::uint64_t, const MeasureSettings&);                        \
    template YoccozFit yoccoz_fit(const UnimodalMap<R>&, const PrincipalNest<R>&, const CascadeResult&,             \
                                  std::size_t);                                                                    \
    template CascadeSumResult cascade_sum_checks(const UnimodalMap<R>&, const PrincipalNest<R>&,                    \
                                                 const CascadeResult&, double);                                    \
    template ExceptionalChecks exceptional_checks(const UnimodalMap<R>&, const PrincipalNest<R>&,                   \
                                                  const ExceptionalResult<R>&, std::size_t, std::size_t,            \
                                                  std::size_t);                                                    \
    template LambdaDecay lambda_decay(const UnimodalMap<R>&, const NestLevel<R>&, std::size_t, std::uint64_t);      \
    template DeltaBoundCheck delta_bound_check(const PrincipalNest<R>&, double);                                    \
    template GammaDecay gamma_decay(const UnimodalMap<R>&, const PrincipalNest<R>&);                                \
    template TauTrend tau_trend(const UnimodalMap<R>&, const UnimodalMap<double>&, const Interval<double>&,         \
                                std::size_t, std::size_t, std::uint64_t);

NESTLAB_INSTANTIATE(double)
NESTLAB_INSTANTIATE(ext_real)

}  // namespace nestlab
