#include "htql/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace htql {

OnOffFlow::OnOffFlow(double peak_rate, HeavyTailDist on, double off_mean)
    : peak_rate_(peak_rate), on_(std::move(on)), off_mean_(off_mean) {
    if (!(peak_rate > 0.0) || !std::isfinite(peak_rate))
        throw std::invalid_argument("flow peak rate must be positive and finite");
    if (!(off_mean > 0.0) || !std::isfinite(off_mean))
        throw std::invalid_argument("flow Off mean must be positive and finite");
    double lambda_alpha = on_.mean() / off_mean_;
    p_ = lambda_alpha / (1.0 + lambda_alpha);
    rho_ = p_ * peak_rate_;
    if (!(p_ > 0.0 && p_ < 1.0) || !(rho_ > 0.0 && rho_ < peak_rate_))
        throw std::invalid_argument("flow rates degenerate: need 0 < p < 1 and 0 < rho < r");
}

InstantFlow::InstantFlow(HeavyTailDist burst, double interarrival_mean)
    : burst_(std::move(burst)), interarrival_mean_(interarrival_mean) {
    if (!(interarrival_mean > 0.0) || !std::isfinite(interarrival_mean))
        throw std::invalid_argument("burst interarrival mean must be positive and finite");
    rho_ = burst_.mean() / interarrival_mean_;
    if (!(rho_ > 0.0) || !std::isfinite(rho_))
        throw std::invalid_argument("instantaneous flow mean rate degenerate");
}

std::pair<double, double> flow_rates(const OnOffFlow& flow) {
    return {flow.on_fraction(), flow.mean_rate()};
}

double residual_tail(const HeavyTailDist& dist, double x) {
    if (x < 0.0) throw std::invalid_argument("residual_tail needs x >= 0");
    return dist.residual_tail(x);
}

double SystemSpec::heavy_mean_rate() const {
    double s = 0.0;
    for (const auto& f : heavy_flows) s += f.mean_rate();
    return s;
}

double SystemSpec::heavy_peak_rate() const {
    double s = 0.0;
    for (const auto& f : heavy_flows) s += f.peak_rate();
    return s;
}

double SystemSpec::instant_mean_rate() const {
    double s = 0.0;
    for (const auto& f : instant_flows) s += f.mean_rate();
    return s;
}

double SystemSpec::total_mean_rate() const {
    return light_rate + heavy_mean_rate() + instant_mean_rate();
}

ValidationReport validate_system(const SystemSpec& sys) {
    if (!(sys.capacity > 0.0) || !std::isfinite(sys.capacity))
        throw ConfigError("capacity must be positive and finite");
    if (sys.light_rate < 0.0 || !std::isfinite(sys.light_rate))
        throw ConfigError("light-tailed aggregate rate must be nonnegative");

    ValidationReport report;
    report.scale = sys.capacity;
    double rho = sys.total_mean_rate();
    double peak = sys.light_rate + sys.heavy_peak_rate() + sys.instant_mean_rate();
    report.utilization = rho / sys.capacity;
    report.peak_load = peak / sys.capacity;
    report.stable = rho < sys.capacity - kRateTolerance;
    report.heavy_regime = peak > sys.capacity + kRateTolerance;

    if (!report.stable) {
        std::ostringstream os;
        os << "mean input rate " << rho << " >= capacity " << sys.capacity;
        throw UnstableSystem(os.str());
    }
    if (!report.heavy_regime) {
        std::ostringstream os;
        os << "light rate + heavy peak rates + instantaneous mean rates = " << peak
           << " <= capacity " << sys.capacity
           << "; workload tail is not dominated by heavy-tailed activity";
        throw LightRegime(os.str());
    }

    double k = 1.0 / sys.capacity;
    report.normalized.capacity = 1.0;
    report.normalized.light_rate = sys.light_rate * k;
    report.normalized.heavy_flows.reserve(sys.heavy_flows.size());
    for (const auto& f : sys.heavy_flows) report.normalized.heavy_flows.push_back(f.scaled(k));
    report.normalized.instant_flows.reserve(sys.instant_flows.size());
    for (const auto& f : sys.instant_flows)
        report.normalized.instant_flows.push_back(f.scaled(k));
    return report;
}

ReducedSystem::ReducedSystem(std::vector<OnOffFlow> flows, double capacity)
    : flows_(std::move(flows)), capacity_(capacity) {
    if (flows_.empty()) throw std::invalid_argument("reduced system needs at least one flow");
    total_peak_ = 0.0;
    total_mean_ = 0.0;
    double min_theta = std::numeric_limits<double>::infinity();
    for (const auto& f : flows_) {
        total_peak_ += f.peak_rate();
        total_mean_ += f.mean_rate();
        min_theta = std::min(min_theta, f.peak_minus_mean());
    }
    if (!(capacity_ > total_peak_ - min_theta + kRateTolerance) ||
        !(capacity_ < total_peak_ - kRateTolerance)) {
        std::ostringstream os;
        os << "reduced-system capacity " << capacity_ << " outside ("
           << total_peak_ - min_theta << ", " << total_peak_
           << "): all flows must be On for positive drift";
        throw RateOrder(os.str());
    }
}

} // namespace htql
