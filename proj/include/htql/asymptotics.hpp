// asymptotics.hpp - Tail asymptotes for workloads fed by heavy-tailed flows.
//
// Covers the single-flow and instantaneous-input closed forms, the
// reduced-system integral P_J0(x) with two independent evaluation routes
// (direct integration of the defining integral, and the kappa-prefactor
// asymptote), the kappa constants themselves, non-asymptotic/asymptotic
// bounds, and the reduced-load composition for a full system.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "htql/dominance.hpp"
#include "htql/model.hpp"

namespace htql {

enum class EstimateMethod : std::uint8_t { closed_form, quadrature, monte_carlo };

// A value with an uncertainty tag. std_error is zero exactly when the value
// is a closed form; quadrature reports its refinement delta, Monte Carlo a
// sample standard error.
struct ValueEstimate {
    double value = 0.0;
    double std_error = 0.0;
    EstimateMethod method = EstimateMethod::closed_form;
    std::uint64_t samples = 0;
};

struct EstimatorOptions {
    std::uint64_t seed = 0;              // mandatory input; no global RNG state anywhere
    std::uint64_t samples = 1'000'000;
    std::size_t threads = 0;             // 0 = auto, capped by HTQL_THREADS
    int quadrature_dim_cutoff = 3;       // |J_1| above this switches to Monte Carlo
    double quadrature_rel_tol = 1e-9;
};

// Theorem-2.1 asymptote (1-p) rho/(c-rho) P{A^r > x/(r-c)} for an On-Off
// flow alone against capacity c in (rho, r). Throws RateOrder otherwise.
double single_flow_tail(const OnOffFlow& flow, double c, double x);

// Instantaneous renewal input: rho/(c-rho) P{B^r > x} for c > rho.
double instantaneous_flow_tail(const InstantFlow& flow, double c, double x);

enum class PJ0Method : std::uint8_t { automatic, quadrature, monte_carlo };

// The reduced-system integral P_J0(x). j0_mask selects which flows started
// their long On period before time 0 (bit i = flow i). Closed forms for
// J_0 = J and for the single-flow J_0 = {}; otherwise deterministic
// quadrature up to the dimension cutoff, importance-sampled Monte Carlo
// beyond (or as requested). Throws BadPartition for mask bits outside J.
ValueEstimate p_j0_value(const ReducedSystem& rs, std::uint32_t j0_mask, double x,
                         PJ0Method method = PJ0Method::automatic,
                         const EstimatorOptions& opts = {});

// Prefactor kappa_J0 of the P_J0 asymptote: 1 for J_0 = J, 1/(eg-1) for
// J_0 = {}, otherwise (1/(eg-1)) P{Z_i >= g.Z_{J_1}/(eg-1), i in J_0}
// estimated over independent inverse-CDF samples of the limit variables Z.
ValueEstimate kappa_j0(const ReducedSystem& rs, std::uint32_t j0_mask,
                       const EstimatorOptions& opts = {});

// kappa = sum of kappa_J0 over all 2^N partitions, under common random
// numbers; exchangeable flows collapse symmetric partitions.
ValueEstimate kappa_total(const ReducedSystem& rs, const EstimatorOptions& opts = {});

// prod_i p_i P{A_i^r > x/(r-c)}: the product the kappa constants multiply.
double reduced_tail_prefactor(const ReducedSystem& rs, double x);

// Theorem-6.4 asymptote kappa * prefactor, with kappa's error propagated.
ValueEstimate reduced_system_tail(const ReducedSystem& rs, double x,
                                  const EstimatorOptions& opts = {});
ValueEstimate reduced_system_tail(const ReducedSystem& rs, double x,
                                  const ValueEstimate& kappa);

// Lemma 4.1 / 4.2 sandwich for flows S against capacity c:
//   lower = prod p_j P{A_j^r > x/(r_S-c)}   (valid at every finite x)
//   upper = K * lower                       (asymptotic only)
// The upper bound and its constant are present only when
// c > r_S - min_j (r_j - rho_j); lower needs just c < r_S.
struct TailBoundsResult {
    double lower = 0.0;
    std::optional<double> upper;
    std::optional<double> amplification;  // K_S^c > 1
};
TailBoundsResult tail_bounds(std::span<const OnOffFlow> flows, double c, double x);

struct TailTerm {
    bool instantaneous = false;
    std::vector<int> flows;        // heavy-flow indices, or {instant index}
    double reduced_capacity = 0.0;
    ValueEstimate kappa;           // meaningful for reduced-system terms
    double value = 0.0;
};

struct WorkloadTailResult {
    double value = 0.0;
    double std_error = 0.0;
    double exponent = 0.0;  // mu*
    std::vector<TailTerm> terms;
};

// Validates a system once, selects the dominant sets, and caches the kappa
// estimate of every dominant reduced system so that tail curves over many
// levels reuse one Monte Carlo run per set. Levels are in the original
// system's units.
class WorkloadAnalysis {
public:
    WorkloadAnalysis(const SystemSpec& sys, const EstimatorOptions& opts = {});

    WorkloadTailResult tail(double x) const;
    TailBoundsResult bounds(double x) const;

    const ValidationReport& validation() const { return validation_; }
    const DominanceReport& report() const { return report_; }
    double exponent() const { return report_.exponent; }

private:
    ValidationReport validation_;
    DominanceReport report_;
    EstimatorOptions opts_;
    std::vector<ReducedSystem> reduced_;     // one per dominant set
    std::vector<ValueEstimate> kappas_;
};

// Convenience single-shot evaluation (Theorem 3.2 / 5.3 composition).
WorkloadTailResult workload_tail(const SystemSpec& sys, double x,
                                 const EstimatorOptions& opts = {});

struct TailCurvePoint {
    double x = 0.0;
    double value = 0.0;
};

struct TailCurve {
    std::vector<TailCurvePoint> points;
    std::string system_digest;
    std::string theorem;   // which composition produced the curve
    double exponent = 0.0;  // mu*: the regular-variation index of value(x)
};

// Samples the asymptote over an increasing grid. digest labels the system
// in the curve metadata (callers usually pass a config or system hash).
TailCurve make_tail_curve(const WorkloadAnalysis& analysis, std::span<const double> levels,
                          std::string digest);

} // namespace htql
