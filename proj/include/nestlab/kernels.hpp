#pragma once

// Hot loops in two forms: a serial reference and an OpenMP version. Both
// return identical results; tests compare them and the benchmark times them.

#include "nestlab/bound_lab.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nestlab {

// sup |D2f(x) - D2f(y)| / |x - y|^eta over grid pairs.
double holder_sup_serial(const UnimodalMap<double>& map, double eta, std::size_t grid);
double holder_sup_parallel(const UnimodalMap<double>& map, double eta, std::size_t grid);

struct SeedReturn {
    EntryStatus status = EntryStatus::cap_exhausted;
    std::size_t time = 0;
    std::string itinerary;  // laps of x, ..., f^{time-1}(x)
};

template <class Real>
std::vector<SeedReturn> scan_returns_serial(const UnimodalMap<Real>& map, const Interval<Real>& I,
                                            const std::vector<Real>& seeds, std::size_t cap);
template <class Real>
std::vector<SeedReturn> scan_returns_parallel(const UnimodalMap<Real>& map, const Interval<Real>& I,
                                              const std::vector<Real>& seeds, std::size_t cap);

template <class Real>
std::vector<std::optional<DistortionReport>> measure_branches_serial(const UnimodalMap<Real>& map,
                                                                     const UnimodalMap<double>& grid_map,
                                                                     const std::vector<BranchSample>& samples,
                                                                     const MeasureSettings& settings);
template <class Real>
std::vector<std::optional<DistortionReport>> measure_branches_parallel(const UnimodalMap<Real>& map,
                                                                       const UnimodalMap<double>& grid_map,
                                                                       const std::vector<BranchSample>& samples,
                                                                       const MeasureSettings& settings);

}  // namespace nestlab
