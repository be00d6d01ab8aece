// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, in code.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "htql/asymptotics.hpp"
#include "htql/dominance.hpp"
#include "htql/manysources.hpp"
#include "htql/reports.hpp"
#include "htql/rng.hpp"
#include "htql/simulator.hpp"

using namespace htql;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s  criterion %2d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run(int number, const std::string& name,
         const std::function<std::pair<bool, std::string>()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
        auto [ok, msg] = fn();
        pass = ok;
        detail = msg;
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(number, name, pass, detail, seconds);
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

OnOffFlow flow_with(double peak, double mean_rate, double nu) {
    HeavyTailDist on = HeavyTailDist::pareto(1.0, nu);
    double p = mean_rate / peak;
    return OnOffFlow(peak, on, on.mean() * (1.0 - p) / p);
}

OnOffFlow flow_e4() { return OnOffFlow(1.0, HeavyTailDist::pareto(1.0, 2.0), 4.0); }

ReducedSystem reduced_e1() { return ReducedSystem({flow_e4(), flow_e4()}, 1.5); }

SystemSpec system_e2() {
    SystemSpec sys;
    sys.light_rate = 0.25;
    sys.heavy_flows = {flow_with(0.3, 0.1, 2.0), flow_with(0.3, 0.1, 2.2),
                       flow_with(0.4, 0.1, 1.8)};
    return sys;
}

SystemSpec system_e3() {
    SystemSpec sys = system_e2();
    sys.heavy_flows[1] = flow_with(0.3, 0.1, 2.0);
    return sys;
}

ClassMix mix_e5() {
    return ClassMix({ClassSpec{0.6, 1.5, 0.3, 1.6}, ClassSpec{0.4, 1.2, 0.2, 2.4}});
}

// ---- criterion 1 ------------------------------------------------------

std::pair<bool, std::string> single_flow_kappa_identity() {
    CounterRng rng(811, 0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        double r = 0.4 + 1.2 * rng.next_unit();
        double rho = r * (0.1 + 0.6 * rng.next_unit());
        double nu = 1.2 + 2.5 * rng.next_unit();
        double c = rho + (r - rho) * (0.15 + 0.7 * rng.next_unit());
        ReducedSystem rs({flow_with(r, rho, nu)}, c);
        auto k = kappa_total(rs);
        if (k.method != EstimateMethod::closed_form || k.std_error != 0.0)
            return {false, "expected a closed form"};
        worst = std::max(worst, std::abs(k.value - (1.0 + (r - c) / (c - rho))));
    }
    return {worst <= 1e-9, fmt("100 systems, worst |kappa - (1+(r-c)/(c-rho))| = %.2e", worst)};
}

// ---- criterion 2 ------------------------------------------------------

struct DominanceOracle {
    std::vector<std::vector<int>> dominant;
    bool critical_case = false;
};

DominanceOracle oracle_dominant(const SystemSpec& sys) {
    const int n = static_cast<int>(sys.heavy_flows.size());
    const unsigned count = 1u << n;
    double total_mean = sys.total_mean_rate();
    std::vector<double> d(count), cost(count);
    for (unsigned m = 0; m < count; ++m) {
        double peak = 0.0, mean = 0.0, mu = 0.0;
        for (int i = 0; i < n; ++i)
            if (m & (1u << i)) {
                const auto& f = sys.heavy_flows[static_cast<std::size_t>(i)];
                peak += f.peak_rate();
                mean += f.mean_rate();
                mu += f.tail_index() - 1.0;
            }
        d[m] = peak + (total_mean - mean) - sys.capacity;
        cost[m] = mu;
    }
    DominanceOracle out;
    double tol = kDriftTolerance * sys.capacity;
    double best = 1e300;
    for (unsigned m = 0; m < count; ++m) {
        if (d[m] >= -tol && std::abs(d[m]) <= tol) out.critical_case = true;
        if (d[m] >= -tol) best = std::min(best, cost[m]);
    }
    for (unsigned m = 0; m < count; ++m)
        if (d[m] > tol && std::abs(cost[m] - best) <= 1e-9 * std::max(1.0, best)) {
            std::vector<int> s;
            for (int i = 0; i < n; ++i)
                if (m & (1u << i)) s.push_back(i);
            out.dominant.push_back(std::move(s));
        }
    std::sort(out.dominant.begin(), out.dominant.end());
    return out;
}

std::pair<bool, std::string> dominance_oracle_equivalence() {
    // Deterministic zero-drift instances first: rejection must be exercised
    // even though random rate draws never land on the boundary.
    int rejected = 0;
    {
        SystemSpec a;
        a.light_rate = 0.1;
        a.heavy_flows = {flow_with(0.5, 0.2, 2.0), flow_with(0.5, 0.2, 2.0),
                         flow_with(0.7, 0.2, 2.0)};
        SystemSpec b;
        b.light_rate = 0.2;
        b.heavy_flows = {flow_with(0.4, 0.1, 2.0), flow_with(0.7, 0.25, 1.7)};
        for (const auto& sys : {a, b}) {
            if (!oracle_dominant(sys).critical_case)
                return {false, "constructed instance is not a critical case"};
            try {
                dominant_sets(sys);
                return {false, "constructed critical case not rejected"};
            } catch (const CriticalCase&) {
                ++rejected;
            }
        }
    }

    CounterRng rng(812, 0);
    int tested = 0;
    while (tested < 500) {
        SystemSpec sys;
        sys.light_rate = 0.05 + 0.2 * rng.next_unit();
        int n = 2 + static_cast<int>(rng.next_unit() * 9.0);
        double mean_total = sys.light_rate;
        for (int i = 0; i < n; ++i) {
            double peak = 0.05 + 0.6 * rng.next_unit();
            double rho = peak * (0.1 + 0.6 * rng.next_unit());
            double nu = 1.2 + 2.8 * rng.next_unit();
            sys.heavy_flows.push_back(flow_with(peak, rho, nu));
            mean_total += rho;
        }
        if (mean_total >= 0.95) continue;
        double peak_total = sys.light_rate;
        for (const auto& f : sys.heavy_flows) peak_total += f.peak_rate();
        if (peak_total <= 1.05) continue;

        auto expected = oracle_dominant(sys);
        if (expected.critical_case) {
            try {
                dominant_sets(sys);
                return {false, "critical-case instance not rejected"};
            } catch (const CriticalCase&) {
                ++rejected;
                ++tested;
                continue;
            }
        }
        auto rep = dominant_sets(sys);
        auto got = rep.dominant;
        std::sort(got.begin(), got.end());
        if (got != expected.dominant)
            return {false, fmt("mismatch on instance %d (n=%d)", tested, n)};
        ++tested;
    }
    return {true, fmt("500 systems exact match (knapsack route asserted inside), "
                      "%d critical cases rejected",
                      rejected)};
}

// ---- criterion 3 ------------------------------------------------------

std::pair<bool, std::string> theorem_63_convergence() {
    auto e1 = reduced_e1();
    EstimatorOptions opts;
    opts.seed = 63;
    opts.samples = 10'000'000;
    auto kappa = kappa_j0(e1, 0b01, opts);
    double rel_se = kappa.std_error / kappa.value;
    if (!(rel_se < 0.01)) return {false, fmt("kappa stderr %.3f%% too large", 100.0 * rel_se)};

    double deviations[3];
    double xs[3] = {1e2, 1e3, 1e4};
    for (int i = 0; i < 3; ++i) {
        double denom = kappa.value * std::pow(flow_e4().on().residual_tail(xs[i] / 0.5), 2.0);
        double ratio = p_j0_value(e1, 0b01, xs[i]).value / denom;
        deviations[i] = std::abs(ratio - 1.0);
    }
    bool within = deviations[2] <= 0.10;
    // Pareto inputs converge exactly past the scale knee, so consecutive
    // deviations may tie at the numeric noise floor.
    bool monotone = deviations[1] <= deviations[0] + 1e-7 &&
                    deviations[2] <= deviations[1] + 1e-7;
    return {within && monotone,
            fmt("deviations %.2e -> %.2e -> %.2e over x = 1e2,1e3,1e4; kappa rel. se %.4f%%",
                deviations[0], deviations[1], deviations[2], 100.0 * rel_se)};
}

// ---- criterion 4 ------------------------------------------------------

std::pair<bool, std::string> dual_evaluator_agreement() {
    ReducedSystem n1({flow_e4()}, 0.6);
    auto e1 = reduced_e1();
    ReducedSystem n3({flow_with(1.0, 1.0 / 3.0, 2.0), flow_with(1.0, 1.0 / 3.0, 2.2),
                      flow_with(1.0, 1.0 / 3.0, 1.8)},
                     2.5);

    struct Case {
        const ReducedSystem* rs;
        std::uint32_t mask;
        double x;
    };
    std::vector<Case> battery = {
        {&n1, 0, 10.0},   {&n1, 0, 100.0},  {&e1, 0, 5.0},     {&e1, 0, 50.0},
        {&e1, 1, 5.0},    {&e1, 1, 50.0},   {&n3, 0, 10.0},    {&n3, 0, 100.0},
        {&n3, 1, 10.0},   {&n3, 1, 100.0},  {&n3, 5, 10.0},    {&n3, 6, 100.0}};

    double worst_pull = 0.0;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        const auto& cs = battery[i];
        EstimatorOptions opts;
        opts.seed = 400 + i;
        opts.samples = 1'000'000;
        opts.quadrature_rel_tol = 1e-7;
        auto quad = p_j0_value(*cs.rs, cs.mask, cs.x, PJ0Method::quadrature, opts);
        auto mc = p_j0_value(*cs.rs, cs.mask, cs.x, PJ0Method::monte_carlo, opts);
        double combined = std::sqrt(quad.std_error * quad.std_error +
                                    mc.std_error * mc.std_error);
        double pull = std::abs(quad.value - mc.value) / combined;
        worst_pull = std::max(worst_pull, pull);
        if (pull > 3.0)
            return {false, fmt("case %zu: |quad-mc| = %.1f combined sigma", i, pull)};
    }
    return {true, fmt("12 cases (N in {1,2,3}), worst |quad-mc| = %.2f combined sigma",
                      worst_pull)};
}

// ---- criteria 5 and 6 -------------------------------------------------

std::pair<bool, std::string> theory_vs_simulation() {
    SimSystem sys{0.6, 0.0, {flow_e4()}};
    SimConfig cfg;
    // Far beyond the required 1e7 of simulated time: the deep-tail
    // occupancy at x = 100 needs ~8e9 before its noise stops masking the
    // few-percent systematic gap this criterion is about.
    cfg.horizon = 1e7;
    cfg.replications = 800;
    cfg.seed = 777;
    cfg.levels = {20.0, 50.0, 100.0};
    auto tail = simulate_tail(sys, cfg);
    if (tail.total_time < 1e7) return {false, "simulated time below 1e7"};
    double ratios[3];
    for (int i = 0; i < 3; ++i) {
        double asym = 1.0 / (6.0 * tail.levels[static_cast<std::size_t>(i)].level);
        ratios[i] = tail.levels[static_cast<std::size_t>(i)].mean / asym;
        if (!(ratios[i] >= 0.6 && ratios[i] <= 1.6))
            return {false, fmt("ratio at x=%g is %.3f, outside [0.6, 1.6]",
                               tail.levels[static_cast<std::size_t>(i)].level, ratios[i])};
    }
    bool closer = std::abs(ratios[2] - 1.0) < std::abs(ratios[0] - 1.0);
    return {closer, fmt("empirical/asymptote = %.3f, %.3f, %.3f at x = 20, 50, 100",
                        ratios[0], ratios[1], ratios[2])};
}

std::pair<bool, std::string> lemma_41_lower_bound() {
    SimSystem sys{1.5, 0.0, {flow_e4(), flow_e4()}};
    SimConfig cfg;
    cfg.horizon = 1e6;
    cfg.replications = 10;
    cfg.seed = 206;
    cfg.levels = {2.0, 5.0, 10.0, 20.0};
    auto tail = simulate_tail(sys, cfg);
    std::string detail;
    for (const auto& lv : tail.levels) {
        auto bounds = tail_bounds(std::span<const OnOffFlow>(sys.flows), 1.5, lv.level);
        double slack = lv.mean - (bounds.lower - 3.0 * lv.std_error);
        detail += fmt("x=%g: %.2e>=%.2e; ", lv.level, lv.mean, bounds.lower);
        if (slack < 0.0)
            return {false, detail + fmt("bound violated by %.2e", -slack)};
    }
    return {true, detail + fmt("total time %.1e", tail.total_time)};
}

// ---- criteria 7, 8, 9 -------------------------------------------------

std::pair<bool, std::string> regular_variation_of_outputs() {
    for (auto [name, sys] : {std::pair{"E2", system_e2()}, std::pair{"E3", system_e3()}}) {
        EstimatorOptions opts;
        opts.seed = 207;
        opts.samples = 1'000'000;
        WorkloadAnalysis analysis(sys, opts);
        double x = 1e6;
        double ratio = analysis.tail(2.0 * x).value / analysis.tail(x).value;
        double target = std::pow(2.0, -analysis.exponent());
        if (std::abs(ratio / target - 1.0) > 0.05)
            return {false, fmt("%s: ratio %.5f vs 2^-mu* = %.5f", name, ratio, target)};
        if (std::abs(analysis.exponent() - 1.8) > 1e-9)
            return {false, fmt("%s: mu* = %.6f, expected 1.8", name, analysis.exponent())};
    }
    return {true, "E2 and E3: tail(2x)/tail(x) within 5% of 2^-1.8 at x = 1e6"};
}

std::pair<bool, std::string> weakly_dominant_additivity() {
    EstimatorOptions opts;
    opts.seed = 208;
    opts.samples = 2'000'000;
    WorkloadAnalysis analysis(system_e3(), opts);
    double x = 50.0;
    auto combined = analysis.tail(x);

    // Same two reduced systems, independent seeds.
    ReducedSystem a({flow_with(0.3, 0.1, 2.0), flow_with(0.4, 0.1, 1.8)}, 0.65);
    ReducedSystem b({flow_with(0.3, 0.1, 2.0), flow_with(0.4, 0.1, 1.8)}, 0.65);
    EstimatorOptions oa = opts, ob = opts;
    oa.seed = 1208;
    ob.seed = 2208;
    auto ta = reduced_system_tail(a, x, oa);
    auto tb = reduced_system_tail(b, x, ob);
    double sum = ta.value + tb.value;
    double err = std::sqrt(combined.std_error * combined.std_error +
                           ta.std_error * ta.std_error + tb.std_error * tb.std_error);
    double pull = std::abs(combined.value - sum) / err;
    return {pull <= 3.0, fmt("workload %.4e vs independent sum %.4e (%.2f sigma)",
                             combined.value, sum, pull)};
}

std::pair<bool, std::string> homogeneous_consistency() {
    SystemSpec sys;
    sys.light_rate = 0.2;
    for (int i = 0; i < 5; ++i) sys.heavy_flows.push_back(flow_with(0.3, 0.1, 2.0));
    EstimatorOptions opts;
    opts.seed = 209;
    opts.samples = 2'000'000;
    WorkloadAnalysis analysis(sys, opts);
    if (analysis.report().dominant.size() != 10) return {false, "expected C(5,2) dominant sets"};
    double x = 100.0;
    auto combined = analysis.tail(x);

    ReducedSystem pair_sys({flow_with(0.3, 0.1, 2.0), flow_with(0.3, 0.1, 2.0)}, 0.5);
    EstimatorOptions od = opts;
    od.seed = 1209;
    auto direct = reduced_system_tail(pair_sys, x, od);
    double expected = 10.0 * direct.value;
    double err = std::sqrt(combined.std_error * combined.std_error +
                           100.0 * direct.std_error * direct.std_error);
    double pull = std::abs(combined.value - expected) / err;
    return {pull <= 3.0, fmt("workload %.4e vs C(5,2) x pair tail %.4e (%.2f sigma)",
                             combined.value, expected, pull)};
}

// ---- criterion 10 -----------------------------------------------------

std::pair<bool, std::string> many_sources_block() {
    auto mix = mix_e5();
    auto rule = index_rule(mix);
    if (std::abs(rule.exponent - 0.388) > 1e-12)
        return {false, fmt("mu = %.15f, expected 0.388", rule.exponent)};
    if (rule.level != 2) return {false, "partial class should be 2"};
    double rate_at_1 = limiting_rate_function(mix, 1.0);
    if (std::abs(rate_at_1 - rule.exponent) > 1e-12)
        return {false, fmt("rate function at 1 = %.15f != mu", rate_at_1)};

    // Exhaustive verification at n = 100.
    double best = 1e300;
    for (long a = 0; a <= 60; ++a)
        for (long b = 0; b <= 40; ++b) {
            double gain = 1.2 * a + 1.0 * b;
            if (gain > 74.0 + 1e-9) best = std::min(best, 0.6 * a + 1.4 * b);
        }
    auto r100 = finite_n_exponent(mix, 100);
    if (std::abs(r100.value - best) > 1e-9)
        return {false, fmt("mu^(100) = %.6f vs exhaustive %.6f", r100.value, best)};

    for (long n : {10L, 100L, 1000L}) {
        auto r = finite_n_exponent(mix, n);
        double lo = n * rule.exponent, hi = lo + rule.gamma_level;
        if (!(r.value >= lo - 1e-9 && r.value <= hi + 1e-9))
            return {false, fmt("n=%ld: mu^(n)=%.6f outside [%.6f, %.6f]", n, r.value, lo, hi)};
    }
    return {true, fmt("mu = 0.388 exact; mu^(100) = %.1f matches exhaustive search; sandwich "
                      "holds for n = 10, 100, 1000",
                      r100.value)};
}

// ---- criterion 11 -----------------------------------------------------

std::pair<bool, std::string> reproducibility() {
    RunConfig cfg = parse_config(R"json({
      "capacity": 0.6,
      "flows": [{"peak": 1.0, "on": {"kind": "pareto", "scale": 1.0, "index": 2.0},
                 "off_mean": 4.0}],
      "sim": {"horizon": 100000, "replications": 8, "seed": 42, "levels": [5, 10, 20, 50, 100]}
    })json");
    auto a = run_simulate(cfg);
    auto b = run_simulate(cfg);
    if (a[0].content != b[0].content) return {false, "run_simulate rerun differs"};
    cfg.sim->threads = 1;
    auto c = run_simulate(cfg);
    cfg.sim->threads = 3;
    auto d = run_simulate(cfg);
    if (c[0].content != d[0].content) return {false, "run_simulate differs across worker counts"};
    if (a[0].content != c[0].content) return {false, "run_simulate differs with explicit workers"};

    auto e1 = reduced_e1();
    EstimatorOptions o1;
    o1.seed = 11;
    o1.samples = 1'000'000;
    EstimatorOptions o3 = o1;
    o3.threads = 3;
    EstimatorOptions o5 = o1;
    o5.threads = 5;
    auto k1 = kappa_total(e1, o1);
    auto k3 = kappa_total(e1, o3);
    auto k5 = kappa_total(e1, o5);
    auto k1b = kappa_total(e1, o1);
    if (k1.value != k3.value || k1.value != k5.value || k1.std_error != k3.std_error)
        return {false, "kappa_total differs across worker counts"};
    if (k1.value != k1b.value || k1.std_error != k1b.std_error)
        return {false, "kappa_total rerun differs"};
    return {true, "empirical CSV and kappa_total byte-identical across reruns and 1/3/5 workers"};
}

} // namespace

int main() {
    std::printf("htql acceptance suite\n");
    run(1, "single-flow kappa identity", single_flow_kappa_identity);
    run(2, "dominance oracle equivalence", dominance_oracle_equivalence);
    run(3, "P_J0 prefactor convergence", theorem_63_convergence);
    run(4, "dual-evaluator agreement", dual_evaluator_agreement);
    run(5, "theory vs simulation, single flow", theory_vs_simulation);
    run(6, "non-asymptotic lower bound", lemma_41_lower_bound);
    run(7, "regular variation of outputs", regular_variation_of_outputs);
    run(8, "weakly dominant additivity", weakly_dominant_additivity);
    run(9, "homogeneous consistency", homogeneous_consistency);
    run(10, "many-sources index rule and sandwich", many_sources_block);
    run(11, "reproducibility", reproducibility);
    if (failures != 0) std::printf("%d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
