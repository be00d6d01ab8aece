// model.hpp - Domain types for flows and multiplexing systems.
//
// All types are immutable values after construction and validate their
// standing assumptions eagerly. Rates are traffic/time, On periods and Off
// means are time, burst sizes are traffic.
#pragma once

#include <utility>
#include <vector>

#include "htql/distribution.hpp"
#include "htql/errors.hpp"

namespace htql {

// Absolute tolerance for equality comparisons on (normalized) rates.
inline constexpr double kRateTolerance = 1e-12;

// Tolerance below which a drift counts as exactly zero (critical case),
// and the realization of the knapsack epsilon.
inline constexpr double kDriftTolerance = 1e-9;

// An On-Off source: emits at peak_rate while On, silent while Off.
// The Off-period law is deliberately not part of the type - the tail
// asymptotics depend on the Off period only through its mean, so the
// simulator picks the Off law at simulation time.
class OnOffFlow {
public:
    OnOffFlow(double peak_rate, HeavyTailDist on, double off_mean);

    double peak_rate() const { return peak_rate_; }
    const HeavyTailDist& on() const { return on_; }
    double off_mean() const { return off_mean_; }

    double on_fraction() const { return p_; }  // p = lambda*alpha / (1 + lambda*alpha)
    double mean_rate() const { return rho_; }  // rho = p * r
    double peak_minus_mean() const { return peak_rate_ - rho_; }
    double tail_index() const { return on_.index(); }

    // Rescales traffic units by k (time untouched).
    OnOffFlow scaled(double k) const { return OnOffFlow(peak_rate_ * k, on_, off_mean_); }

    bool operator==(const OnOffFlow&) const = default;

private:
    double peak_rate_;
    HeavyTailDist on_;
    double off_mean_;
    double p_;
    double rho_;
};

// Instantaneous renewal input: point bursts of heavy-tailed size.
class InstantFlow {
public:
    InstantFlow(HeavyTailDist burst, double interarrival_mean);

    const HeavyTailDist& burst() const { return burst_; }
    double interarrival_mean() const { return interarrival_mean_; }
    double mean_rate() const { return rho_; }  // rho = beta / interarrival mean
    double tail_index() const { return burst_.index(); }

    InstantFlow scaled(double k) const {
        return InstantFlow(burst_.scaled(k), interarrival_mean_);
    }

    bool operator==(const InstantFlow&) const = default;

private:
    HeavyTailDist burst_;
    double interarrival_mean_;
    double rho_;
};

// (p, rho) of a flow.
std::pair<double, double> flow_rates(const OnOffFlow& flow);

// Residual-lifetime tail of a distribution at x >= 0.
double residual_tail(const HeavyTailDist& dist, double x);

// A full multiplexing system: capacity, the light-tailed aggregate
// collapsed to its mean rate, heavy On-Off flows, instantaneous flows.
struct SystemSpec {
    double capacity = 1.0;
    double light_rate = 0.0;
    std::vector<OnOffFlow> heavy_flows;
    std::vector<InstantFlow> instant_flows;

    double heavy_mean_rate() const;
    double heavy_peak_rate() const;
    double instant_mean_rate() const;
    double total_mean_rate() const;
};

struct ValidationReport {
    bool stable = false;
    bool heavy_regime = false;
    double utilization = 0.0;     // total mean rate / capacity
    double peak_load = 0.0;       // (light + heavy peaks + instant means) / capacity
    double scale = 1.0;           // original capacity
    SystemSpec normalized;        // capacity 1, all rates and burst sizes / scale
};

// Checks stability and the heavy-regime dichotomy and rescales the system
// to unit capacity. Throws UnstableSystem / LightRegime.
ValidationReport validate_system(const SystemSpec& sys);

// A reduced system: every flow of J against capacity c, with the defining
// property that all flows must be On for the drift to be positive, i.e.
// c in (r - min_j(r_j - rho_j), r).
class ReducedSystem {
public:
    ReducedSystem(std::vector<OnOffFlow> flows, double capacity);

    const std::vector<OnOffFlow>& flows() const { return flows_; }
    double capacity() const { return capacity_; }
    std::size_t size() const { return flows_.size(); }

    double total_peak() const { return total_peak_; }
    double total_mean() const { return total_mean_; }
    double drift() const { return total_peak_ - capacity_; }  // r - c > 0

private:
    std::vector<OnOffFlow> flows_;
    double capacity_;
    double total_peak_;
    double total_mean_;
};

} // namespace htql
