#include "htql/manysources.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace htql {

namespace {

constexpr double kBoundaryTolerance = 1e-12;

// Cumulative rate with the first j sorted classes at peak, the rest at
// their means. sigma_k of the index rule is boundary(k-1).
std::vector<double> peak_boundaries(const ClassMix& mix) {
    std::vector<double> t;
    t.reserve(mix.size() + 1);
    t.push_back(mix.mean_load());
    for (const auto& c : mix.classes())
        t.push_back(t.back() + c.fraction * (c.peak - c.mean_rate));
    return t;
}

void require_feasible(const std::vector<double>& t) {
    if (t.front() >= 1.0 - kBoundaryTolerance)
        throw InfeasibleMix("aggregate mean rate reaches capacity (unstable at scale n)");
    if (t.back() <= 1.0 + kBoundaryTolerance)
        throw InfeasibleMix("aggregate peak rate does not exceed capacity (light regime)");
}

} // namespace

ClassMix::ClassMix(std::vector<ClassSpec> classes) : classes_(std::move(classes)) {
    if (classes_.empty()) throw std::invalid_argument("class mix needs at least one class");
    double total_fraction = 0.0;
    for (const auto& c : classes_) {
        if (!(c.fraction > 0.0) || !(c.fraction <= 1.0))
            throw std::invalid_argument("class fractions must lie in (0, 1]");
        if (!(c.peak > c.mean_rate) || !(c.mean_rate >= 0.0))
            throw std::invalid_argument("class rates must satisfy 0 <= rho < r");
        if (!(c.index > 1.0))
            throw std::invalid_argument("class tail index must exceed 1");
        total_fraction += c.fraction;
    }
    if (std::abs(total_fraction - 1.0) > 1e-9)
        throw std::invalid_argument("class fractions must sum to 1");

    original_.resize(classes_.size());
    std::iota(original_.begin(), original_.end(), 0);
    std::stable_sort(original_.begin(), original_.end(), [&](int a, int b) {
        return classes_[static_cast<std::size_t>(a)].gamma() <
               classes_[static_cast<std::size_t>(b)].gamma();
    });
    std::vector<ClassSpec> sorted;
    sorted.reserve(classes_.size());
    for (int idx : original_) sorted.push_back(classes_[static_cast<std::size_t>(idx)]);
    classes_ = std::move(sorted);
}

double ClassMix::mean_load() const {
    double s = 0.0;
    for (const auto& c : classes_) s += c.fraction * c.mean_rate;
    return s;
}

double ClassMix::peak_load() const {
    double s = 0.0;
    for (const auto& c : classes_) s += c.fraction * c.peak;
    return s;
}

IndexRuleResult index_rule(const ClassMix& mix) {
    auto t = peak_boundaries(mix);
    require_feasible(t);

    IndexRuleResult out;
    out.ordering = mix.original_indices();
    out.sigma = t;

    // Partial class: first sorted position whose full activation crosses 1
    // (right-closed, so landing exactly on a boundary keeps that class).
    std::size_t l = 1;
    while (t[l] < 1.0) ++l;
    out.level = static_cast<int>(l);
    out.gamma_level = mix.classes()[l - 1].gamma();

    out.fractional.assign(mix.size(), 0.0);
    double mu = 0.0;
    for (std::size_t k = 0; k + 1 < l; ++k) {
        const auto& c = mix.classes()[k];
        out.fractional[k] = c.fraction;
        mu += c.fraction * (c.index - 1.0);
    }
    const auto& partial = mix.classes()[l - 1];
    double residual = 1.0 - t[l - 1];
    out.fractional[l - 1] = residual / (partial.peak - partial.mean_rate);
    mu += residual * partial.gamma();
    out.exponent = mu;
    return out;
}

double limiting_cumulant(const ClassMix& mix, double theta) {
    if (!(theta >= 0.0)) throw std::invalid_argument("cumulant argument must be nonnegative");
    double v = 0.0;
    for (const auto& c : mix.classes())
        v += c.fraction * std::max(theta * c.mean_rate, theta * c.peak - c.index + 1.0);
    return v;
}

double limiting_rate_function(const ClassMix& mix, double x) {
    auto t = peak_boundaries(mix);
    if (!(x > t.front()) || !(x < t.back())) {
        std::ostringstream os;
        os << "x = " << x << " outside (" << t.front() << ", " << t.back() << ")";
        throw OutOfDomain(os.str());
    }
    std::size_t l = 1;
    while (t[l] < x) ++l;
    double gamma_l = mix.classes()[l - 1].gamma();
    double v = gamma_l * x;
    for (std::size_t k = 0; k < mix.size(); ++k) {
        const auto& c = mix.classes()[k];
        if (k + 1 < l)
            v -= c.fraction * (gamma_l * c.peak - c.index + 1.0);
        else
            v -= c.fraction * gamma_l * c.mean_rate;
    }
    return v;
}

FiniteNResult finite_n_exponent(const ClassMix& mix, long n) {
    if (n < 1) throw std::invalid_argument("population scale n must be positive");
    const auto& cls = mix.classes();
    const std::size_t k_count = cls.size();

    FiniteNResult out;
    std::vector<long> pop(k_count);
    std::vector<double> theta(k_count), cost(k_count), gamma(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
        pop[k] = static_cast<long>(std::floor(static_cast<double>(n) * cls[k].fraction + 1e-9));
        theta[k] = cls[k].peak - cls[k].mean_rate;
        cost[k] = cls[k].index - 1.0;
        gamma[k] = cls[k].gamma();
    }

    double need = static_cast<double>(n);
    for (std::size_t k = 0; k < k_count; ++k)
        need -= static_cast<double>(pop[k]) * cls[k].mean_rate;
    double tol = 1e-9 * std::max(1.0, std::abs(need));

    double all_peak = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) all_peak += static_cast<double>(pop[k]) * theta[k];
    if (!(all_peak > need + tol))
        throw InfeasibleMix("even all flows at peak cannot exceed capacity n");

    // DFS in gamma order with the fractional-relaxation lower bound;
    // descending counts reach the greedy solution first.
    double best = std::numeric_limits<double>::infinity();
    std::vector<long> best_counts(k_count, 0), current(k_count, 0);
    auto rec = [&](auto&& self, std::size_t k, double slack, double acc) -> void {
        if (slack > tol) {
            if (acc < best) {
                best = acc;
                best_counts = current;
                std::fill(best_counts.begin() + static_cast<long>(k), best_counts.end(), 0L);
            }
            return;  // adding flows only raises the cost
        }
        if (k == k_count) return;
        double deficit = -slack;
        if (acc + deficit * gamma[k] >= best) return;  // relaxation bound
        long max_count = std::min(pop[k], static_cast<long>(std::floor(deficit / theta[k])) + 1);
        for (long c = max_count; c >= 0; --c) {
            current[k] = c;
            self(self, k + 1, slack + static_cast<double>(c) * theta[k],
                 acc + static_cast<double>(c) * cost[k]);
        }
        current[k] = 0;
    };
    rec(rec, 0, -need, 0.0);

    out.value = best;
    // Report counts and populations in the caller's original class order.
    out.counts.assign(k_count, 0);
    out.populations.assign(k_count, 0);
    for (std::size_t k = 0; k < k_count; ++k) {
        auto orig = static_cast<std::size_t>(mix.original_indices()[k]);
        out.counts[orig] = best_counts[k];
        out.populations[orig] = pop[k];
    }
    auto rule = index_rule(mix);
    out.sandwich_low = static_cast<double>(n) * rule.exponent;
    out.sandwich_high = out.sandwich_low + rule.gamma_level;
    return out;
}

} // namespace htql
