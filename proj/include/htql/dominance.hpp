// dominance.hpp - Criticality classification and dominant-set selection.
//
// A subset S of the heavy flows is critical when the drift with all of S On
// and everything else at its mean rate is nonnegative; dominant sets are the
// strictly critical sets of minimal cost mu_S = sum (nu_j - 1). Selection is
// run twice, as direct cost minimization and as the complementary knapsack,
// and the two routes are asserted identical.
#pragma once

#include <vector>

#include "htql/model.hpp"

namespace htql {

// Exhaustive subset enumeration is intentional (real-valued weights, small
// flow counts); refuse anything bigger than this.
inline constexpr int kMaxEnumerationFlows = 20;

enum class Criticality {
    noncritical,       // d_S < 0
    boundary,          // |d_S| within tolerance: the excluded "critical case"
    strictly_critical, // d_S > 0
};

struct SetMetrics {
    std::vector<int> subset;        // sorted indices into heavy_flows
    double peak = 0.0;              // r_S
    double mean = 0.0;              // rho_S
    double reduced_capacity = 0.0;  // c_S = capacity - rho_{I \ S}
    double drift = 0.0;             // d_S = r_S - c_S
    double cost = 0.0;              // mu_S
    Criticality criticality = Criticality::noncritical;
    bool minimally_critical = false;

    bool critical() const { return criticality != Criticality::noncritical; }
};

struct DominanceReport {
    std::vector<SetMetrics> subsets;                  // all 2^n, lexicographic
    std::vector<std::vector<int>> minimally_critical;
    std::vector<std::vector<int>> dominant;           // Upsilon; emptied when an
                                                      // instantaneous flow strictly dominates
    double set_cost = 0.0;                            // mu* over critical sets
    std::vector<int> dominant_instants;               // K: indices into instant_flows
    double exponent = 0.0;                            // overall tail exponent mu*
};

// Drift metrics of one subset (indices must be valid and strictly increasing).
SetMetrics drift(const std::vector<int>& subset, const SystemSpec& sys);

// All minimally critical subsets, lexicographic. Validates the system.
std::vector<std::vector<int>> minimally_critical_sets(const SystemSpec& sys);

// Full classification plus dominant-set selection via both routes.
// Throws CriticalCase when any critical set has |d_S| within tolerance,
// TooManyFlows beyond the enumeration limit.
DominanceReport dominant_sets(const SystemSpec& sys);

} // namespace htql
