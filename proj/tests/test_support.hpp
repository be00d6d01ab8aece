// Shared fixtures: the reference systems used across the test suites.
#pragma once

#include <vector>

#include "htql/model.hpp"

namespace htql::testing {

// Flow with a unit-scale Pareto On period, chosen Off mean hitting the
// requested long-run rate.
inline OnOffFlow flow_with(double peak, double mean_rate, double nu, double on_scale = 1.0) {
    HeavyTailDist on = HeavyTailDist::pareto(on_scale, nu);
    double p = mean_rate / peak;
    return OnOffFlow(peak, on, on.mean() * (1.0 - p) / p);
}

// r=1, Pareto(1, 2) On, lambda=1/4: p = 1/3, rho = 1/3.
inline OnOffFlow flow_e4() { return OnOffFlow(1.0, HeavyTailDist::pareto(1.0, 2.0), 4.0); }

// Two copies of the E4 flow against capacity 1.5 (r - c = 0.5).
inline ReducedSystem reduced_e1() {
    return ReducedSystem({flow_e4(), flow_e4()}, 1.5);
}

// capacity 1, light 0.25, r=(.3,.3,.4), rho=(.1,.1,.1), nu=(2.0, 2.2, 1.8).
inline SystemSpec system_e2() {
    SystemSpec sys;
    sys.capacity = 1.0;
    sys.light_rate = 0.25;
    sys.heavy_flows = {flow_with(0.3, 0.1, 2.0), flow_with(0.3, 0.1, 2.2),
                       flow_with(0.4, 0.1, 1.8)};
    return sys;
}

// E2 with nu = (2.0, 2.0, 1.8): two weakly dominant sets.
inline SystemSpec system_e3() {
    SystemSpec sys = system_e2();
    sys.heavy_flows[1] = flow_with(0.3, 0.1, 2.0);
    return sys;
}

} // namespace htql::testing
