#include "nestlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nestlab {

namespace {

double holder_row(const std::vector<double>& xs, const std::vector<double>& ds, double eta, std::size_t i) {
    double best = 0;
    if (std::isnan(ds[i])) return best;
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
        if (std::isnan(ds[j])) continue;
        double q = std::abs(ds[i] - ds[j]) / std::pow(xs[j] - xs[i], eta);
        if (q > best) best = q;
    }
    return best;
}

void holder_grid(const UnimodalMap<double>& map, std::size_t grid, std::vector<double>& xs, std::vector<double>& ds) {
    if (grid < 2) throw ParameterError("grid must have at least two points");
    xs.resize(grid);
    ds.resize(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        xs[i] = double(i) / double(grid - 1);
        // Second derivative; grid points where it is singular are skipped.
        try {
            ds[i] = map.deriv(xs[i], 2);
        } catch (const Error&) {
            ds[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

template <class Real>
SeedReturn scan_one(const UnimodalMap<Real>& map, const Interval<Real>& I, const Real& seed, std::size_t cap) {
    SeedReturn out;
    EntryResult e = first_entry_time(map, seed, I, cap);
    out.status = e.status;
    if (e.found()) {
        out.time = e.time;
        Itinerary it = itinerary_of(map, seed, out.time);
        out.itinerary = itinerary_string(it);
    }
    return out;
}

}  // namespace

double holder_sup_serial(const UnimodalMap<double>& map, double eta, std::size_t grid) {
    std::vector<double> xs, ds;
    holder_grid(map, grid, xs, ds);
    double best = 0;
    for (std::size_t i = 0; i < grid; ++i) best = std::max(best, holder_row(xs, ds, eta, i));
    return best;
}

double holder_sup_parallel(const UnimodalMap<double>& map, double eta, std::size_t grid) {
    std::vector<double> xs, ds;
    holder_grid(map, grid, xs, ds);
    double best = 0;
    const long n = long(grid);
#pragma omp parallel for schedule(dynamic, 16) reduction(max : best)
    for (long i = 0; i < n; ++i) best = std::max(best, holder_row(xs, ds, eta, std::size_t(i)));
    return best;
}

template <class Real>
std::vector<SeedReturn> scan_returns_serial(const UnimodalMap<Real>& map, const Interval<Real>& I,
                                            const std::vector<Real>& seeds, std::size_t cap) {
    std::vector<SeedReturn> out(seeds.size());
    for (std::size_t j = 0; j < seeds.size(); ++j) out[j] = scan_one(map, I, seeds[j], cap);
    return out;
}

template <class Real>
std::vector<SeedReturn> scan_returns_parallel(const UnimodalMap<Real>& map, const Interval<Real>& I,
                                              const std::vector<Real>& seeds, std::size_t cap) {
    std::vector<SeedReturn> out(seeds.size());
    const long n = long(seeds.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long j = 0; j < n; ++j) out[std::size_t(j)] = scan_one(map, I, seeds[std::size_t(j)], cap);
    return out;
}

template <class Real>
std::vector<std::optional<DistortionReport>> measure_branches_serial(const UnimodalMap<Real>& map,
                                                                     const UnimodalMap<double>& grid_map,
                                                                     const std::vector<BranchSample>& samples,
                                                                     const MeasureSettings& settings) {
    std::vector<std::optional<DistortionReport>> out(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) out[j] = measure_sample(map, grid_map, samples[j], settings);
    return out;
}

template <class Real>
std::vector<std::optional<DistortionReport>> measure_branches_parallel(const UnimodalMap<Real>& map,
                                                                       const UnimodalMap<double>& grid_map,
                                                                       const std::vector<BranchSample>& samples,
                                                                       const MeasureSettings& settings) {
    std::vector<std::optional<DistortionReport>> out(samples.size());
    const long n = long(samples.size());
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < n; ++j)
        out[std::size_t(j)] = measure_sample(map, grid_map, samples[std::size_t(j)], settings);
    return out;
}

#define NESTLAB_INSTANTIATE(R)                                                                                      \
    template std::vector<SeedReturn> scan_returns_serial(const UnimodalMap<R>&, const Interval<R>&,                 \
                                                         const std::vector<R>&, std::size_t);                       \
    template std::vector<SeedReturn> scan_returns_parallel(const UnimodalMap<R>&, const Interval<R>&,               \
                                                           const std::vector<R>&, std::size_t);                     \
    template std::vector<std::optional<DistortionReport>> measure_branches_serial(                                  \
        const UnimodalMap<R>&, const UnimodalMap<double>&, const std::vector<BranchSample>&, const MeasureSettings&); \
    template std::vector<std::optional<DistortionReport>> measure_branches_parallel(                                \
        const UnimodalMap<R>&, const UnimodalMap<double>&, const std::vector<BranchSample>&, const MeasureSettings&);

NESTLAB_INSTANTIATE(double)
NESTLAB_INSTANTIATE(ext_real)

}  // namespace nestlab
