// manysources.hpp - K-class many-sources regime.
//
// n scaled flows against capacity n: the index rule solving the continuous
// knapsack relaxation, the piecewise-linear limiting cumulant, the limiting
// rate function, and the exact finite-n integer knapsack optimum with its
// sandwich around n*mu.
#pragma once

#include <vector>

#include "htql/errors.hpp"

namespace htql {

struct ClassSpec {
    double fraction = 0.0;   // a_k, sum to 1
    double peak = 0.0;       // r_k
    double mean_rate = 0.0;  // rho_k
    double index = 0.0;      // nu_k > 1

    double gamma() const { return (index - 1.0) / (peak - mean_rate); }
    bool operator==(const ClassSpec&) const = default;
};

// Classes stored in nondecreasing gamma order (stable w.r.t. input order).
class ClassMix {
public:
    explicit ClassMix(std::vector<ClassSpec> classes);

    const std::vector<ClassSpec>& classes() const { return classes_; }
    const std::vector<int>& original_indices() const { return original_; }
    std::size_t size() const { return classes_.size(); }

    double mean_load() const;  // sum a_k rho_k
    double peak_load() const;  // sum a_k r_k

private:
    std::vector<ClassSpec> classes_;
    std::vector<int> original_;
};

struct IndexRuleResult {
    std::vector<int> ordering;       // original class index per sorted position
    std::vector<double> sigma;       // sigma_1..sigma_{K+1}: k-1 classes at peak, rest at mean
    int level = 0;                   // l: 1-based sorted position of the partially-on class
    std::vector<double> fractional;  // n_k*/n per sorted class
    double exponent = 0.0;           // mu
    double gamma_level = 0.0;        // gamma_l
};

// Continuous-relaxation optimum via the greedy index rule. Throws
// InfeasibleMix when sum a_k r_k <= 1 (light regime) or sum a_k rho_k >= 1.
IndexRuleResult index_rule(const ClassMix& mix);

// sum_k a_k max{theta rho_k, theta r_k - nu_k + 1} for theta >= 0.
double limiting_cumulant(const ClassMix& mix, double theta);

// The t -> inf rate function at x in (sum a rho, sum a r), right-closed at
// internal segment boundaries. Throws OutOfDomain outside the interval.
double limiting_rate_function(const ClassMix& mix, double x);

struct FiniteNResult {
    double value = 0.0;               // mu^(n), exact integer optimum
    std::vector<long> counts;         // optimal n_k, original class order
    std::vector<long> populations;    // floor(n a_k), original class order
    double sandwich_low = 0.0;        // n mu
    double sandwich_high = 0.0;       // n mu + gamma_l
};

// Exact optimum of the integer knapsack with populations floor(n a_k),
// by depth-first search with the continuous-relaxation bound.
FiniteNResult finite_n_exponent(const ClassMix& mix, long n);

} // namespace htql
