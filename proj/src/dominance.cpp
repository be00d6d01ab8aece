#include "htql/dominance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace htql {

namespace {

bool near_relative(double a, double b, double tol = kDriftTolerance) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string set_label(const std::vector<int>& s) {
    std::ostringstream os;
    os << '{';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << '}';
    return os.str();
}

// Emits subsets of {0..n-1} in lexicographic order of the index sequence.
template <typename Fn>
void enumerate_lexicographic(int n, Fn&& fn) {
    std::vector<int> current;
    auto rec = [&](auto&& self, int next) -> void {
        fn(current);
        for (int i = next; i < n; ++i) {
            current.push_back(i);
            self(self, i + 1);
            current.pop_back();
        }
    };
    rec(rec, 0);
}

SetMetrics metrics_for(const std::vector<int>& subset, const SystemSpec& sys,
                       double total_mean) {
    SetMetrics m;
    m.subset = subset;
    double min_theta = std::numeric_limits<double>::infinity();
    for (int idx : subset) {
        const auto& f = sys.heavy_flows.at(static_cast<std::size_t>(idx));
        m.peak += f.peak_rate();
        m.mean += f.mean_rate();
        m.cost += f.tail_index() - 1.0;
        min_theta = std::min(min_theta, f.peak_minus_mean());
    }
    m.reduced_capacity = sys.capacity - (total_mean - m.mean);
    m.drift = m.peak - m.reduced_capacity;
    // Classification tolerance lives on normalized rates.
    double d = m.drift / sys.capacity;
    if (d > kDriftTolerance)
        m.criticality = Criticality::strictly_critical;
    else if (d >= -kDriftTolerance)
        m.criticality = Criticality::boundary;
    else
        m.criticality = Criticality::noncritical;
    // Critical with no critical proper subset <=> d_S < min theta_j.
    m.minimally_critical = m.critical() && !subset.empty() && m.drift < min_theta;
    return m;
}

void check_enumerable(const SystemSpec& sys) {
    if (sys.heavy_flows.size() > static_cast<std::size_t>(kMaxEnumerationFlows)) {
        std::ostringstream os;
        os << sys.heavy_flows.size() << " heavy flows exceed the exhaustive enumeration limit of "
           << kMaxEnumerationFlows;
        throw TooManyFlows(os.str());
    }
}

// Knapsack route: max over U of sum (nu_j - 1) subject to
// sum_U theta_j <= budget - epsilon, with U the complement of S. The
// epsilon only excludes the boundary and is realized through the drift
// tolerance. Returns every optimal S (ties within relative tolerance).
std::vector<std::vector<int>> knapsack_dominant(const SystemSpec& sys) {
    int n = static_cast<int>(sys.heavy_flows.size());
    double budget = sys.light_rate + sys.instant_mean_rate() - sys.capacity;
    for (const auto& f : sys.heavy_flows) budget += f.peak_rate();

    double best = 0.0;
    bool have_best = false;
    std::vector<std::vector<int>> winners;
    enumerate_lexicographic(n, [&](const std::vector<int>& u) {
        double weight = 0.0, value = 0.0;
        for (int idx : u) {
            const auto& f = sys.heavy_flows[static_cast<std::size_t>(idx)];
            weight += f.peak_minus_mean();
            value += f.tail_index() - 1.0;
        }
        if (!(weight < budget - kDriftTolerance * sys.capacity)) return;
        if (!have_best || (value > best && !near_relative(value, best))) {
            best = value;
            have_best = true;
            winners.clear();
        }
        if (near_relative(value, best)) {
            // Map U back to S = I_2 \ U.
            std::vector<int> s;
            auto it = u.begin();
            for (int i = 0; i < n; ++i) {
                if (it != u.end() && *it == i)
                    ++it;
                else
                    s.push_back(i);
            }
            winners.push_back(std::move(s));
        }
    });
    std::sort(winners.begin(), winners.end());
    return winners;
}

} // namespace

SetMetrics drift(const std::vector<int>& subset, const SystemSpec& sys) {
    std::vector<int> sorted = subset;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("subset contains duplicate flow indices");
    if (!sorted.empty() &&
        (sorted.front() < 0 || sorted.back() >= static_cast<int>(sys.heavy_flows.size())))
        throw std::invalid_argument("subset index out of range");
    return metrics_for(sorted, sys, sys.total_mean_rate());
}

std::vector<std::vector<int>> minimally_critical_sets(const SystemSpec& sys) {
    validate_system(sys);
    check_enumerable(sys);
    double total_mean = sys.total_mean_rate();
    std::vector<std::vector<int>> result;
    enumerate_lexicographic(static_cast<int>(sys.heavy_flows.size()),
                            [&](const std::vector<int>& s) {
                                auto m = metrics_for(s, sys, total_mean);
                                if (m.minimally_critical) result.push_back(s);
                            });
    return result;
}

DominanceReport dominant_sets(const SystemSpec& sys) {
    validate_system(sys);
    check_enumerable(sys);

    DominanceReport report;
    double total_mean = sys.total_mean_rate();
    enumerate_lexicographic(static_cast<int>(sys.heavy_flows.size()),
                            [&](const std::vector<int>& s) {
                                report.subsets.push_back(metrics_for(s, sys, total_mean));
                            });

    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& m : report.subsets) {
        if (m.criticality == Criticality::boundary)
            throw CriticalCase("set " + set_label(m.subset) + " has zero drift");
        if (m.minimally_critical) report.minimally_critical.push_back(m.subset);
        if (m.critical()) best_cost = std::min(best_cost, m.cost);
    }
    if (!std::isfinite(best_cost))
        throw std::logic_error("heavy regime holds but no critical set found");

    report.set_cost = best_cost;
    for (const auto& m : report.subsets)
        if (m.critical() && near_relative(m.cost, best_cost))
            report.dominant.push_back(m.subset);

    // A dominant set is necessarily minimally critical.
    for (const auto& s : report.dominant) {
        auto it = std::find(report.minimally_critical.begin(), report.minimally_critical.end(), s);
        if (it == report.minimally_critical.end())
            throw std::logic_error("dominant set " + set_label(s) + " is not minimally critical");
    }

    auto knapsack = knapsack_dominant(sys);
    if (knapsack != report.dominant)
        throw std::logic_error("knapsack route disagrees with direct cost minimization");

    // Instantaneous flows compete on nu_i - 1 against mu*.
    report.exponent = best_cost;
    if (!sys.instant_flows.empty()) {
        double min_instant = std::numeric_limits<double>::infinity();
        for (const auto& f : sys.instant_flows)
            min_instant = std::min(min_instant, f.tail_index() - 1.0);
        if (min_instant <= best_cost + kDriftTolerance ||
            near_relative(min_instant, best_cost)) {
            for (int i = 0; i < static_cast<int>(sys.instant_flows.size()); ++i)
                if (near_relative(sys.instant_flows[static_cast<std::size_t>(i)].tail_index() - 1.0,
                                  min_instant))
                    report.dominant_instants.push_back(i);
        }
        if (min_instant < best_cost && !near_relative(min_instant, best_cost)) {
            report.dominant.clear();  // flows strictly dominate every set
            report.exponent = min_instant;
        }
    }
    return report;
}

} // namespace htql
