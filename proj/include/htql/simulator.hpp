// simulator.hpp - Event-driven fluid queue fed by On-Off flows.
//
// Between toggles the workload moves linearly at (sum of On peak rates +
// background - capacity) and is reflected at zero, with the interior
// zero-hitting instant computed in closed form, so trajectories are exact
// piecewise-linear paths and occupation times have no discretization error.
// Flows start in the stationary alternating-renewal state (On with
// probability p, residual first period) unless warmup mode is chosen.
//
// Randomness: one counter substream per (seed, flow, replication), so event
// interleaving cannot perturb stream alignment and replications can run on
// any number of workers with bit-identical aggregate results.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "htql/model.hpp"

namespace htql {

enum class OffLaw : std::uint8_t { exponential, deterministic, lomax };
enum class InitMode : std::uint8_t { stationary, warmup };

struct SimConfig {
    double horizon = 0.0;
    long replications = 1;
    std::uint64_t seed = 0;
    InitMode init = InitMode::stationary;
    double warmup_fraction = 0.1;  // discarded prefix in warmup mode
    OffLaw off_law = OffLaw::exponential;
    double off_shape = 2.5;        // Lomax Off only (> 1); scale matches the mean
    std::vector<double> levels;
    std::size_t threads = 0;
    std::string event_log;         // optional record file; forces sequential reps

    bool operator==(const SimConfig&) const = default;
};

// What gets simulated: heavy On-Off flows plus constant background fluid
// (the light-tailed aggregate collapsed to its mean) against capacity.
struct SimSystem {
    double capacity = 1.0;
    double background = 0.0;
    std::vector<OnOffFlow> flows;
};

// One linear piece of the workload path.
struct Segment {
    double start = 0.0;
    double duration = 0.0;
    double w0 = 0.0;
    double w1 = 0.0;
};

struct Trajectory {
    std::vector<Segment> segments;
    double horizon = 0.0;
    double count_from = 0.0;  // occupation accounting starts here (warmup)
};

// Stationary initial state of one flow: whether it is On at time 0 and
// when the current period ends.
struct FlowInitState {
    bool on = false;
    double first_toggle = 0.0;
};

// Spells out the stationary construction: On with probability p_i, residual
// current period; an Off start is followed by a full On period when the
// residual Off ends. `rep` selects the replication substream.
std::vector<FlowInitState> init_stationary(std::span<const OnOffFlow> flows, std::uint64_t seed,
                                           long rep = 0, OffLaw off_law = OffLaw::exponential,
                                           double off_shape = 2.5);

// Full per-replication trajectories. Intended for small horizons (tests,
// debugging, the event log); the segment count grows linearly with T.
std::vector<Trajectory> simulate_workload(const SimSystem& sys, const SimConfig& cfg);

struct LevelEstimate {
    double level = 0.0;
    double mean = 0.0;        // occupation fraction estimate of P{V > x}
    double std_error = 0.0;   // across replications
    std::vector<double> per_replication;
};

struct EmpiricalTail {
    std::vector<LevelEstimate> levels;
    long replications = 0;
    double total_time = 0.0;      // counted (post-warmup) simulated time
    double mean_workload = 0.0;   // time-average of W, counted window
};

// Exact occupation fractions from piecewise-linear trajectories. Levels
// are sorted and deduplicated; they must be positive.
EmpiricalTail estimate_tail(const std::vector<Trajectory>& trajectories,
                            std::vector<double> levels);

// Streaming end-to-end run: replications in parallel, occupation times
// accumulated on the fly, nothing stored per event.
EmpiricalTail simulate_tail(const SimSystem& sys, const SimConfig& cfg);

} // namespace htql
