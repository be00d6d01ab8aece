#include "doctest.h"

#include <cmath>

#include "htql/model.hpp"
#include "test_support.hpp"

using namespace htql;
using htql::testing::flow_with;

namespace {

// Independent oracle for the residual tail: trapezoid integration of the
// defining integral (1/E X) * integral_x^inf P{X > y} dy over the
// compactifying substitution y = x + s (t/(1-t))^2, under which the
// integrand vanishes at both ends for every tail index above 1.5.
double residual_tail_by_integration(const HeavyTailDist& d, double x, long steps) {
    double s = std::max(1.0, x);
    auto f = [&](double t) {
        double u = t / (1.0 - t);
        double y = x + s * u * u;
        double jac = s * 2.0 * u / ((1.0 - t) * (1.0 - t));
        return d.tail(y) * jac;
    };
    double h = 1.0 / static_cast<double>(steps);
    double acc = 0.0;  // integrand is zero at t = 0 and t -> 1
    for (long i = 1; i < steps; ++i) acc += f(h * static_cast<double>(i));
    return acc * h / d.mean();
}

} // namespace

TEST_CASE("residual tail closed forms match the defining integral") {
    auto pareto = HeavyTailDist::pareto(1.0, 2.0);
    CHECK(pareto.residual_tail(0.0) == 1.0);
    CHECK(pareto.residual_tail(4.0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(pareto.residual_tail(0.5) == doctest::Approx(0.75).epsilon(1e-12));

    for (double x : {1.0, 2.5, 10.0, 100.0}) {
        double oracle = residual_tail_by_integration(pareto, x, 400000);
        CHECK(pareto.residual_tail(x) == doctest::Approx(oracle).epsilon(1e-6));
    }

    auto lomax = HeavyTailDist::lomax(0.8, 2.6);
    for (double x : {0.0, 0.3, 2.0, 25.0}) {
        double oracle = residual_tail_by_integration(lomax, x, 400000);
        CHECK(lomax.residual_tail(x) == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("residual tail inherits regular variation with index 1 - nu") {
    auto d = HeavyTailDist::pareto(1.0, 2.0);
    double x = 1e6;
    CHECK(d.residual_tail(2.0 * x) / d.residual_tail(x) ==
          doctest::Approx(std::pow(2.0, 1.0 - 2.0)).epsilon(0.01));
    auto l = HeavyTailDist::lomax(2.0, 1.7);
    CHECK(l.residual_tail(2.0 * x) / l.residual_tail(x) ==
          doctest::Approx(std::pow(2.0, 1.0 - 1.7)).epsilon(0.01));
}

TEST_CASE("tail regular variation on a grid") {
    for (double nu : {1.5, 2.0, 3.2}) {
        auto d = HeavyTailDist::pareto(0.7, nu);
        auto l = HeavyTailDist::lomax(1.3, nu);
        for (double a : {2.0, 5.0}) {
            CHECK(d.tail(a * 1e7) / d.tail(1e7) ==
                  doctest::Approx(std::pow(a, -nu)).epsilon(1e-6));
            CHECK(l.tail(a * 1e7) / l.tail(1e7) ==
                  doctest::Approx(std::pow(a, -nu)).epsilon(1e-4));
        }
    }
}

TEST_CASE("inverse CDF sampling inverts the tails") {
    auto d = HeavyTailDist::pareto(1.4, 2.3);
    auto l = HeavyTailDist::lomax(0.9, 1.9);
    for (double u : {0.9, 0.5, 0.1, 1e-3, 1e-8}) {
        CHECK(d.tail(d.sample(u)) == doctest::Approx(u).epsilon(1e-10));
        CHECK(l.tail(l.sample(u)) == doctest::Approx(u).epsilon(1e-10));
        CHECK(d.residual_tail(d.residual_sample(u)) == doctest::Approx(u).epsilon(1e-10));
        CHECK(l.residual_tail(l.residual_sample(u)) == doctest::Approx(u).epsilon(1e-10));
    }
}

TEST_CASE("distribution construction rejects degenerate parameters") {
    CHECK_THROWS_AS(HeavyTailDist::pareto(0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(HeavyTailDist::pareto(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(HeavyTailDist::lomax(-1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(HeavyTailDist::lomax(1.0, 0.5), std::invalid_argument);
}

TEST_CASE("flow rates follow the On-fraction formula") {
    OnOffFlow f(1.0, HeavyTailDist::pareto(1.0, 2.0), 4.0);  // alpha=2, lambda=1/4
    auto [p, rho] = flow_rates(f);
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(rho == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    OnOffFlow g(0.4, HeavyTailDist::pareto(0.5, 2.0), 1.0);  // alpha=1, lambda=1
    auto [pg, rg] = flow_rates(g);
    CHECK(pg == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(rg == doctest::Approx(0.2).epsilon(1e-14));

    // Saturation: lambda*alpha -> infinity pushes p -> 1.
    OnOffFlow h(1.0, HeavyTailDist::pareto(1e9, 2.0), 1.0);
    CHECK(h.on_fraction() == doctest::Approx(1.0).epsilon(1e-8));

    CHECK(0.0 < f.mean_rate());
    CHECK(f.mean_rate() < f.peak_rate());
}

TEST_CASE("validate_system classifies stability and regime") {
    SystemSpec e2 = htql::testing::system_e2();
    auto report = validate_system(e2);
    CHECK(report.stable);
    CHECK(report.heavy_regime);
    CHECK(report.utilization == doctest::Approx(0.55));
    CHECK(report.normalized.capacity == 1.0);

    SystemSpec unstable;
    unstable.capacity = 1.0;
    unstable.heavy_flows = {flow_with(1.5, 1.2, 2.0)};
    CHECK_THROWS_AS(validate_system(unstable), UnstableSystem);

    SystemSpec light;
    light.capacity = 1.0;
    light.light_rate = 0.1;
    light.heavy_flows = {flow_with(0.5, 0.2, 2.0)};
    CHECK_THROWS_AS(validate_system(light), LightRegime);
}

TEST_CASE("capacity normalization leaves dimensionless quantities intact") {
    SystemSpec raw = htql::testing::system_e2();
    raw.capacity = 3.7;
    raw.light_rate *= 3.7;
    for (auto& f : raw.heavy_flows) f = f.scaled(3.7);
    auto report = validate_system(raw);
    SystemSpec unit = htql::testing::system_e2();
    for (std::size_t i = 0; i < unit.heavy_flows.size(); ++i) {
        CHECK(report.normalized.heavy_flows[i].on_fraction() ==
              doctest::Approx(unit.heavy_flows[i].on_fraction()).epsilon(1e-12));
        CHECK(report.normalized.heavy_flows[i].peak_rate() ==
              doctest::Approx(unit.heavy_flows[i].peak_rate()).epsilon(1e-12));
        CHECK(report.normalized.heavy_flows[i].mean_rate() ==
              doctest::Approx(unit.heavy_flows[i].mean_rate()).epsilon(1e-12));
    }
    CHECK(report.normalized.light_rate == doctest::Approx(unit.light_rate).epsilon(1e-12));
}

TEST_CASE("reduced system enforces the all-flows-On band") {
    auto f = htql::testing::flow_e4();
    CHECK_NOTHROW(ReducedSystem({f, f}, 1.5));
    CHECK_THROWS_AS(ReducedSystem({f, f}, 1.2), RateOrder);  // below r - min theta = 4/3
    CHECK_THROWS_AS(ReducedSystem({f, f}, 2.0), RateOrder);  // at r
    CHECK_THROWS_AS(ReducedSystem({f, f}, 2.5), RateOrder);
}

TEST_CASE("instant flow derived rate") {
    InstantFlow f(HeavyTailDist::pareto(0.6, 2.5), 1.0 / 0.3);
    CHECK(f.burst().mean() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.mean_rate() == doctest::Approx(0.3).epsilon(1e-12));
}
