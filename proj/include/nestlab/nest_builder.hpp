#pragma once

#include "nestlab/orbit_engine.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nestlab {

enum class Centrality { central, non_central };
enum class Side { high, low, ambiguous };

struct Classification {
    Centrality centrality = Centrality::non_central;
    Side side = Side::ambiguous;
    bool central() const { return centrality == Centrality::central; }
    // "C-low", "NC-high", ...
    std::string label() const;
};

template <class Real>
struct ReturnDomain {
    Interval<Real> domain;
    std::size_t return_time = 0;
    bool is_central = false;
    // Non-central: laps of x, f(x), ..., f^{t-1}(x). Central: laps of f(c), ..., f^{t-1}(c).
    Itinerary itinerary;
    std::optional<Interval<Real>> extension;
};

template <class Real>
struct NestLevel {
    Interval<Real> interval;
    // The rest is filled when the first return to `interval` has been built.
    std::optional<ReturnDomain<Real>> central;
    std::optional<Classification> classification;
    Real critical_return{};      // F_i(c)
    bool maximum_at_c = true;    // orientation of the central branch
    double measured_scaling = 0; // scaled_neighborhood_factor(I_i, I_{i+1})
    std::size_t central_run = 0; // consecutive central returns ending at this level
    bool stationary = false;     // central domain equals I_i
    std::vector<ReturnDomain<Real>> domains;
    double coverage = 0;
    bool domains_scanned = false;
};

enum class TerminationKind { depth_reached, precision_exhausted, non_recurrent, infinite_cascade_suspected };
std::string termination_name(TerminationKind kind);

struct Termination {
    TerminationKind kind = TerminationKind::depth_reached;
    std::size_t run_length = 0;
    std::string detail;
};

template <class Real>
struct PrincipalNest {
    MapDescriptor map;
    std::vector<NestLevel<Real>> levels;
    Termination termination;
    // Levels carrying a built first return (all but possibly the last).
    std::size_t return_levels() const;
};

struct NestOptions {
    std::size_t depth = 12;
    std::size_t cap = 1000000;
    std::size_t scan = 0;  // return-domain seeds per level; 0 skips the scan
    std::size_t scan_cap = 100000;
    std::size_t niceness_horizon = 10000;
    bool check_niceness = true;
    bool parallel = true;
    bool stop_after_cascade_exit = false;  // stop at the first non-central level after a central run
};

template <class Real>
struct NicenessResult {
    bool verified = false;
    std::size_t k = 0;        // first entering iterate when violated
    std::size_t horizon = 0;  // iterates actually examined
};

template <class Real>
struct ReturnScan {
    std::vector<ReturnDomain<Real>> domains;
    double coverage = 0;
    std::size_t unresolved_seeds = 0;
};

enum class CascadeKind { none, saddle_node, ulam_neumann };
std::string cascade_kind_name(CascadeKind kind);

struct CascadeResult {
    CascadeKind kind = CascadeKind::none;
    std::size_t start = 0;
    std::size_t m = 0;
    bool mixed = false;
};

template <class Real>
struct ExceptionalResult {
    bool exceptional = false;
    std::string reason;
    std::size_t level = 0;
    Interval<Real> left;   // I_i^L, increasing side of the central branch of F_{i-1}
    Interval<Real> right;  // I_i^R, decreasing side
    Interval<Real> hull;   // I'_i
    Interval<Real> V;      // (p', p)
    Real p{}, p_prime{}, q{}, q_prime{};
    Itinerary branch_laps; // laps of the F_{i-1} central branch after the critical step
    std::size_t branch_time = 0;
};

template <class Real>
struct ProbeLevel {
    Interval<Real> I_inf;
    Interval<Real> I00;
    double theta = 0;
    std::size_t return_time = 0;
};

template <class Real>
struct ProbeResult {
    bool suspected = false;
    bool precision_exhausted = false;
    std::size_t run = 0;
    std::vector<ProbeLevel<Real>> levels;  // renormalization steps found
    std::string detail;
};

// Orientation-reversing fixed point and its other preimage: (1/a, 1 - 1/a) for logistic.
template <class Real>
Interval<Real> construct_nice_interval(const UnimodalMap<Real>& map);

template <class Real>
NicenessResult<Real> verify_niceness(const UnimodalMap<Real>& map, const Interval<Real>& V, std::size_t horizon);

template <class Real>
struct CentralReturn {
    ReturnDomain<Real> domain;
    Real critical_return{};
    bool maximum_at_c = true;
};

// Throws NotFoundError when c does not return within cap, PrecisionError when
// the pullback cannot be resolved.
template <class Real>
CentralReturn<Real> central_domain(const UnimodalMap<Real>& map, const Interval<Real>& I, std::size_t cap);

template <class Real>
ReturnScan<Real> return_domains(const UnimodalMap<Real>& map, const Interval<Real>& I, std::size_t scan,
                                std::size_t cap, bool parallel = true);

template <class Real>
Classification classify_return(const UnimodalMap<Real>& map, const Interval<Real>& next, const Real& critical_return,
                               bool maximum_at_c);

template <class Real>
PrincipalNest<Real> build_nest(const UnimodalMap<Real>& map, const Interval<Real>& I0, const NestOptions& options);

template <class Real>
CascadeResult detect_cascade(const PrincipalNest<Real>& nest, std::size_t i);

template <class Real>
ExceptionalResult<Real> detect_exceptional(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                           std::size_t i);

template <class Real>
ProbeResult<Real> infinite_cascade_probe(const UnimodalMap<Real>& map, const PrincipalNest<Real>& nest,
                                         std::size_t min_run = 6, std::size_t max_steps = 64);

template <class Real>
struct NiceCandidate {
    Interval<Real> interval;
    std::size_t period = 0;
    Real orbit_point{};
};

// Nice interval (q, 2c - q) bounded by the periodic point q closest to c on
// its orbit, with length nearest to target_length among periods up to
// max_period. Symmetric maps only.
template <class Real>
NiceCandidate<Real> nice_interval_near(const UnimodalMap<Real>& map, double target_length, std::size_t max_period);

}  // namespace nestlab
