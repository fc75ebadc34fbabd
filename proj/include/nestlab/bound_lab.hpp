#pragma once

#include "nestlab/nest_builder.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace nestlab {

// Branch data generated in binary64 and measured in any backend.
struct BranchSample {
    double t0 = 0, t1 = 1, j0 = 0.25, j1 = 0.75;
    std::size_t n = 0;
};

struct DistortionReport {
    std::string label;
    std::size_t n = 0;
    double t_lo = 0, t_hi = 0, j_lo = 0, j_hi = 0;
    double max_image_length = 0;  // S(n,T)
    double measured_B = 1, measured_A = 1;
    double deficit_B = 0, deficit_A = 0;  // 1 - B, 1 - A evaluated before rounding to binary64
    double rounding_allowance = 0;        // relative error budget of the measurement
    unsigned digits = 16;                 // working precision of the measurement
    // theorem-mu
    bool has_mu = false;
    double eta = 1, c_eta = 0, holder_sum = 0, theorem_mu_lower = 1;
    bool mu_pass = false;
    // Koebe
    bool has_koebe = false;
    double koebe_delta = 0, koebe_theta = 0, koebe_bound = 0, derivative_ratio_max = 1;
    std::size_t koebe_grid = 0;
    bool koebe_pass = false;

    bool koebe_applicable(double delta_floor = 0.05) const { return has_koebe && koebe_delta > delta_floor; }
    bool recompute_mu_pass() const;
    bool recompute_koebe_pass() const;
};

struct KoebeSettings {
    double nu_hat = 0;           // theta surrogate constant; defaults to c_eta
    std::size_t grid = 10000;
};

template <class Real>
DistortionReport theorem_mu_bound(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                  const Interval<Real>& J, const HolderEstimate& holder);

// Derivatives are sampled with `grid_map` (binary64) on grid points of J.
template <class Real>
DistortionReport koebe_check(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch, const Interval<Real>& J,
                             const UnimodalMap<double>& grid_map, const KoebeSettings& settings);

struct MinimumPrincipleResult {
    double mu = 1;            // min(1, min probe B)
    double min_probe_B = 1;
    double probe_allowance = 0;  // largest relative rounding budget among the probes
    double worst_margin = 0;  // min over samples of |Dg(x)| / (mu^3 min(|Dg(a)|,|Dg(b)|))
    std::size_t samples = 0;
    bool pass = false;
};

template <class Real>
MinimumPrincipleResult minimum_principle_check(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                               std::size_t samples);

enum class BlockCase { well_bounded, cascade, exceptional, infinite_cascade, unclassified };
std::string block_case_name(BlockCase c);

struct BlockLabel {
    BlockCase kind = BlockCase::unclassified;
    std::size_t m = 0;          // cascade length
    std::size_t run_start = 0;  // first level of the cascade run
};

struct BlockDecomposition {
    std::string label;
    std::size_t n = 0;
    double xi = 0;
    std::vector<std::size_t> times;      // n_0 = n >= n_1 >= ...
    std::vector<double> block_sums;      // sum over k in [n_{i+1}, n_i) of |f^k T|^{1+xi}; last entry is [0, n_D)
    std::vector<double> image_lengths;   // |f^k T|, k = 0..n
    std::vector<BlockLabel> case_labels; // per level
    std::vector<double> sigma;           // per level, NaN when domains were not scanned
    std::vector<double> sigma_m;         // per level, cascade variant
    std::vector<double> level_lengths;   // |I_i|
    std::vector<std::string> touch_log;  // boundary touches within tolerance
    // Per level i: times k in (n_{i+1}, n_i) with f^k(T) inside I_i, largest image first.
    std::vector<std::vector<std::size_t>> inside_times;
    double total() const;
};

struct SigmaOptions {
    std::size_t gap_seeds = 200;
    std::size_t cap = 100000;
};

// sigma_i and sigma_{i,m} for every scanned level of the nest.
template <class Real>
void compute_sigmas(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest, std::vector<double>& sigma,
                    std::vector<double>& sigma_m, const SigmaOptions& options = {});

template <class Real>
BlockDecomposition block_decompose(const UnimodalMap<Real>& map, const MonotoneBranch<Real>& branch,
                                   const PrincipalNest<Real>& nest, double xi, const std::vector<double>& sigma = {},
                                   const std::vector<double>& sigma_m = {});

// Direct single-loop oracle for the decomposition total.
template <class Real>
double direct_orbit_sum(const MonotoneBranch<Real>& branch, double xi);

struct BlockVerdict {
    std::size_t level = 0;
    BlockCase kind = BlockCase::unclassified;
    double block_sum = 0;
    double rhs = 0;
    double realized_constant = 0;
    bool skipped = false;
    bool pass = false;
    std::string note;
};

std::vector<BlockVerdict> proposition_checks(const BlockDecomposition& decomp);

struct MainTheoremSummary {
    double v_length = 0;
    std::size_t requested = 0;
    std::size_t certified = 0;
    double min_B = 1, min_A = 1;
    double max_deficit_B = 0;  // max(1 - B) over the sample; <= 0 when every B >= 1
    bool starved = false;
    std::vector<DistortionReport> reports;
};

struct TrendFit {
    std::vector<double> lengths;
    std::vector<double> min_B;
    bool non_decreasing = false;
    std::size_t fit_points = 0;  // scales with a resolvable deficit
    std::optional<double> slope;  // log(1 - min B) against log|V|
};

// Sampling in binary64.
BranchSample sample_cylinder_branch(const UnimodalMap<double>& map, std::mt19937_64& rng, std::size_t n_max);
std::optional<BranchSample> sample_entry_branch(const UnimodalMap<double>& map, const Interval<double>& V,
                                                std::mt19937_64& rng, std::size_t n_max);

struct MeasureSettings {
    HolderEstimate holder;
    bool koebe = true;
    KoebeSettings koebe_settings;
    std::optional<Interval<double>> require_image_in;  // reject branches whose image leaves this interval
    // binary64 reports with a larger rounding allowance are re-measured with
    // escalate_digits (0 disables).
    double resolve_tolerance = 1e-10;
    unsigned escalate_digits = 40;
    // verify_main_theorem draws at most this many entry samples per requested branch.
    std::size_t attempts_per_sample = 200;
};

// Certification plus theorem-mu and Koebe measurement of one sample; nullopt
// when the sample does not certify in the measuring backend.
template <class Real>
std::optional<DistortionReport> measure_sample(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map,
                                               const BranchSample& sample, const MeasureSettings& settings);

// Re-measures unresolved binary64 reports in extended precision on the same
// (exactly represented) map. Returns the number re-measured. Changes the global
// ext_real precision, so it does nothing inside a parallel region.
std::size_t escalate_unresolved(const UnimodalMap<double>& map, const std::vector<BranchSample>& samples,
                                std::vector<std::optional<DistortionReport>>& reports, const MeasureSettings& settings);

// Parallel measurement followed by escalation of unresolved binary64 reports.
template <class Real>
std::vector<std::optional<DistortionReport>> measure_resolved(const UnimodalMap<Real>& map,
                                                              const UnimodalMap<double>& grid_map,
                                                              const std::vector<BranchSample>& samples,
                                                              const MeasureSettings& settings);

template <class Real>
MainTheoremSummary verify_main_theorem(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map,
                                       const Interval<double>& V, std::size_t branch_samples, std::size_t n_max,
                                       std::uint64_t seed, const MeasureSettings& settings);

TrendFit fit_main_theorem_trend(const std::vector<MainTheoremSummary>& scales, double deficit_floor);

struct ParabolicFit {
    double x0 = 0;
    double df_at_x0 = 0;
    double epsilon = 0;
    double a_coef = 0, b_coef = 0;
    std::size_t N = 0;
    double N_sqrt_eps = 0;
    bool non_parabolic = false;
};

struct YoccozFit {
    std::size_t start = 0, m = 0;
    // False when the central run never exits: the nest converges onto the
    // basin of a cycle born at the tangency. The fit then covers the
    // parabolic passage k <= window and uses k as abscissa.
    bool exited = true;
    std::size_t window = 0;
    double tail_ratio = 0;           // geometric gap ratio of a non-exiting run
    std::vector<double> gap_ratios;  // k = 1..m-1 (k = 1..window without exit)
    double loglog_slope = 0;
    double sandwich_C = 0;
    double gap_sum = 0;
    double im_over_i0 = 0;
    ParabolicFit parabolic;
};

template <class Real>
YoccozFit yoccoz_fit(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest, const CascadeResult& cascade,
                     std::size_t sandwich_grid = 1001);

struct CascadeSumResult {
    std::size_t m = 0;
    std::size_t M = 0;
    double xi = 0;
    double i0_length = 0;
    double sum_linear = 0;     // sum |F^k T|
    double sum_xi = 0;         // sum |F^k T|^{1+xi}
    double realized_linear = 0;  // sum_linear / |I_0|
    double realized_xi = 0;      // sum_xi / |I_0|^{1+xi}
    std::vector<double> lengths;
};

template <class Real>
CascadeSumResult cascade_sum_checks(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                    const CascadeResult& cascade, double xi);

struct ExceptionalChecks {
    double gamma_hat = 0;        // inf |DF| on I'_i \ V
    double C_hat = 0;            // sup |DF| on I_i^L u I_i^R
    double p_multiplier = 0;     // |DF(p)|
    double min_other_factor = 0; // min scaled factor of I_i around non-exceptional domains
    std::size_t other_domains = 0;
    std::size_t grid = 0;
    bool gamma_pass = false, multiplier_pass = false, C_finite = false;
};

template <class Real>
ExceptionalChecks exceptional_checks(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                     const ExceptionalResult<Real>& exc, std::size_t grid = 10000,
                                     std::size_t scan = 4000, std::size_t cap = 100000);

struct LambdaDecay {
    std::size_t probes = 0;
    std::size_t below_one = 0;
    double realized_lambda = 0;  // sampled supremum of B(I,J)/B(I,F(J))
    double fraction_below_one() const { return probes ? double(below_one) / double(probes) : 0.0; }
};

template <class Real>
LambdaDecay lambda_decay(const UnimodalMap<Real>& map, const NestLevel<Real>& level, std::size_t probes,
                         std::uint64_t seed);

struct DeltaBoundCheck {
    double delta = 0;
    double closed_form = 0;
    double brute_force = 0;
    std::size_t domains_checked = 0;
    std::size_t violations = 0;
    double worst_B = 0;
};

// Maximum of B(T,J) over |L|,|R| >= delta |J| found by grid search.
double delta_bound_bruteforce(double delta, std::size_t grid);

template <class Real>
DeltaBoundCheck delta_bound_check(const PrincipalNest<Real>& nest, double delta);

struct GammaDecay {
    std::vector<double> level_maxima;  // S_i per scanned level
    std::vector<double> ratios;        // S_i / S_{i-1} over consecutive well-bounded levels
    std::optional<double> realized_gamma;
};

template <class Real>
GammaDecay gamma_decay(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest);

struct TauTrend {
    std::size_t samples = 0;
    double spearman = 0;  // rank correlation of S(n,V') against |f^n V'|
};

template <class Real>
TauTrend tau_trend(const UnimodalMap<Real>& map, const UnimodalMap<double>& grid_map, const Interval<double>& V,
                   std::size_t samples, std::size_t n_max, std::uint64_t seed);

// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);
double spearman_rank(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nestlab
