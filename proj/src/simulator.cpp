#include "htql/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "htql/parallel.hpp"
#include "htql/rng.hpp"

namespace htql {

namespace {

constexpr std::uint64_t kStreamFlow = 0x51D0F10F00000001ULL;

struct OffSampler {
    OffLaw law;
    double mean;
    double shape;  // lomax only

    double full(double u) const {
        switch (law) {
        case OffLaw::exponential: return -mean * std::log(u);
        case OffLaw::deterministic: return mean;
        case OffLaw::lomax:
            return HeavyTailDist::lomax(mean * (shape - 1.0), shape).sample(u);
        }
        return 0.0;
    }

    double residual(double u) const {
        switch (law) {
        case OffLaw::exponential: return -mean * std::log(u);  // memoryless
        case OffLaw::deterministic: return mean * (1.0 - u);   // uniform over the period
        case OffLaw::lomax:
            return HeavyTailDist::lomax(mean * (shape - 1.0), shape).residual_sample(u);
        }
        return 0.0;
    }
};

struct FlowRuntime {
    const OnOffFlow* flow;
    OffSampler off;
    CounterRng rng;
    bool on = false;
    double next_toggle = 0.0;

    // Starts the stationary construction: On w.p. p with a residual On
    // period; otherwise a residual Off period, then a full On period.
    void init_stationary_state() {
        on = rng.next_unit() < flow->on_fraction();
        next_toggle = on ? flow->on().residual_sample(rng.next_unit())
                         : off.residual(rng.next_unit());
    }

    void init_cycle_start() {
        on = false;
        next_toggle = off.full(rng.next_unit());
    }

    void toggle() {
        on = !on;
        double len = on ? flow->on().sample(rng.next_unit()) : off.full(rng.next_unit());
        next_toggle += len;
    }
};

void validate_config(const SimSystem& sys, const SimConfig& cfg) {
    if (!(sys.capacity > 0.0) || !std::isfinite(sys.capacity))
        throw ConfigError("simulated capacity must be positive and finite");
    if (sys.background < 0.0 || !std::isfinite(sys.background))
        throw ConfigError("background rate must be nonnegative");
    if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
        throw ConfigError("simulation horizon must be positive");
    if (cfg.replications < 1) throw ConfigError("need at least one replication");
    if (cfg.init == InitMode::warmup &&
        !(cfg.warmup_fraction >= 0.0 && cfg.warmup_fraction < 1.0))
        throw ConfigError("warmup fraction must lie in [0, 1)");
    if (cfg.off_law == OffLaw::lomax && !(cfg.off_shape > 1.0))
        throw ConfigError("Lomax Off shape must exceed 1");
    double mean_input = sys.background;
    for (const auto& f : sys.flows) mean_input += f.mean_rate();
    if (mean_input >= sys.capacity * (1.0 - kRateTolerance)) {
        std::ostringstream os;
        os << "mean input " << mean_input << " >= capacity " << sys.capacity;
        throw UnstableSim(os.str());
    }
}

std::vector<double> normalize_levels(std::vector<double> levels) {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    if (!levels.empty() && !(levels.front() > 0.0))
        throw ConfigError("levels must be positive");
    for (double x : levels)
        if (!std::isfinite(x)) throw ConfigError("levels must be finite");
    return levels;
}

struct EventRecord {
    std::ofstream out;
    explicit EventRecord(const std::string& path) : out(path) {
        if (!out) throw ConfigError("cannot open event log '" + path + "'");
        out.precision(17);
        out << "rep,time,net_rate,workload\n";
    }
};

// Advances one replication, handing every linear piece to the sink.
template <typename Sink>
void run_replication(const SimSystem& sys, const SimConfig& cfg, long rep, Sink&& sink,
                     EventRecord* record) {
    std::vector<FlowRuntime> flows;
    flows.reserve(sys.flows.size());
    for (std::size_t i = 0; i < sys.flows.size(); ++i) {
        FlowRuntime fr{&sys.flows[i],
                       OffSampler{cfg.off_law, sys.flows[i].off_mean(), cfg.off_shape},
                       CounterRng(rng_key(cfg.seed, kStreamFlow + i,
                                          static_cast<std::uint64_t>(rep))),
                       false, 0.0};
        if (cfg.init == InitMode::stationary)
            fr.init_stationary_state();
        else
            fr.init_cycle_start();
        flows.push_back(std::move(fr));
    }

    auto net_rate = [&] {
        double r = sys.background - sys.capacity;
        for (const auto& f : flows)
            if (f.on) r += f.flow->peak_rate();
        return r;
    };

    double t = 0.0;
    double w = 0.0;
    double rate = net_rate();
    if (record) record->out << rep << ",0," << rate << ",0\n";
    while (t < cfg.horizon) {
        double t_next = cfg.horizon;
        for (const auto& f : flows) t_next = std::min(t_next, f.next_toggle);
        if (t_next > cfg.horizon) t_next = cfg.horizon;
        double dt = t_next - t;
        if (dt > 0.0) {
            double w_end = w + rate * dt;
            if (w_end < 0.0) {
                // Exact zero hit inside the interval, flat at zero after.
                double tau = std::min(dt, w / -rate);
                sink(Segment{t, tau, w, 0.0});
                sink(Segment{t + tau, dt - tau, 0.0, 0.0});
                w = 0.0;
            } else {
                sink(Segment{t, dt, w, w_end});
                w = w_end;
            }
        }
        t = t_next;
        if (t >= cfg.horizon) break;
        for (auto& f : flows)
            if (f.next_toggle <= t) f.toggle();
        rate = net_rate();
        if (record) record->out << rep << ',' << t << ',' << rate << ',' << w << '\n';
    }
}

struct OccupationSink {
    const std::vector<double>& levels;
    double count_from;
    std::vector<double> time_above;
    double counted_time = 0.0;
    double workload_integral = 0.0;

    explicit OccupationSink(const std::vector<double>& lv, double from)
        : levels(lv), count_from(from), time_above(lv.size(), 0.0) {}

    void operator()(const Segment& s) {
        double w0 = s.w0, w1 = s.w1, dt = s.duration;
        if (dt <= 0.0) return;
        if (s.start < count_from) {
            double cut = count_from - s.start;
            if (cut >= dt) return;
            w0 = w0 + (w1 - w0) * (cut / dt);
            dt -= cut;
        }
        counted_time += dt;
        workload_integral += 0.5 * (w0 + w1) * dt;
        double hi = std::max(w0, w1), lo = std::min(w0, w1);
        for (std::size_t i = 0; i < levels.size(); ++i) {
            double x = levels[i];
            if (x >= hi) break;  // levels sorted ascending
            if (x < lo) {
                time_above[i] += dt;
            } else {
                // Single crossing in a linear piece.
                double frac = (x - w0) / (w1 - w0);
                time_above[i] += w1 > w0 ? dt * (1.0 - frac) : dt * frac;
            }
        }
    }
};

EmpiricalTail aggregate(std::vector<OccupationSink>& reps, const std::vector<double>& levels) {
    EmpiricalTail tail;
    tail.replications = static_cast<long>(reps.size());
    double integral = 0.0;
    for (const auto& r : reps) {
        tail.total_time += r.counted_time;
        integral += r.workload_integral;
    }
    tail.mean_workload = tail.total_time > 0.0 ? integral / tail.total_time : 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        LevelEstimate est;
        est.level = levels[i];
        for (const auto& r : reps)
            est.per_replication.push_back(r.counted_time > 0.0 ? r.time_above[i] / r.counted_time
                                                               : 0.0);
        double mean = 0.0;
        for (double v : est.per_replication) mean += v;
        mean /= static_cast<double>(est.per_replication.size());
        est.mean = mean;
        if (est.per_replication.size() > 1) {
            double ss = 0.0;
            for (double v : est.per_replication) ss += (v - mean) * (v - mean);
            est.std_error = std::sqrt(ss / static_cast<double>(est.per_replication.size() - 1) /
                                      static_cast<double>(est.per_replication.size()));
        }
        tail.levels.push_back(std::move(est));
    }
    return tail;
}

} // namespace

std::vector<FlowInitState> init_stationary(std::span<const OnOffFlow> flows, std::uint64_t seed,
                                           long rep, OffLaw off_law, double off_shape) {
    std::vector<FlowInitState> out;
    out.reserve(flows.size());
    for (std::size_t i = 0; i < flows.size(); ++i) {
        FlowRuntime fr{&flows[i], OffSampler{off_law, flows[i].off_mean(), off_shape},
                       CounterRng(rng_key(seed, kStreamFlow + i, static_cast<std::uint64_t>(rep))),
                       false, 0.0};
        fr.init_stationary_state();
        out.push_back(FlowInitState{fr.on, fr.next_toggle});
    }
    return out;
}

std::vector<Trajectory> simulate_workload(const SimSystem& sys, const SimConfig& cfg) {
    validate_config(sys, cfg);
    std::unique_ptr<EventRecord> record;
    if (!cfg.event_log.empty()) record = std::make_unique<EventRecord>(cfg.event_log);

    double count_from =
        cfg.init == InitMode::warmup ? cfg.warmup_fraction * cfg.horizon : 0.0;
    std::vector<Trajectory> out(static_cast<std::size_t>(cfg.replications));
    for (long rep = 0; rep < cfg.replications; ++rep) {
        auto& traj = out[static_cast<std::size_t>(rep)];
        traj.horizon = cfg.horizon;
        traj.count_from = count_from;
        run_replication(
            sys, cfg, rep, [&traj](const Segment& s) { traj.segments.push_back(s); },
            record.get());
    }
    return out;
}

EmpiricalTail estimate_tail(const std::vector<Trajectory>& trajectories,
                            std::vector<double> levels) {
    if (trajectories.empty()) throw ConfigError("no trajectories to estimate from");
    auto sorted = normalize_levels(std::move(levels));
    std::vector<OccupationSink> sinks;
    sinks.reserve(trajectories.size());
    for (const auto& traj : trajectories) {
        OccupationSink sink(sorted, traj.count_from);
        for (const auto& s : traj.segments) sink(s);
        sinks.push_back(std::move(sink));
    }
    if (sinks.front().counted_time <= 0.0) throw ConfigError("no simulated time past warmup");
    return aggregate(sinks, sorted);
}

EmpiricalTail simulate_tail(const SimSystem& sys, const SimConfig& cfg) {
    validate_config(sys, cfg);
    auto levels = normalize_levels(cfg.levels);
    double count_from =
        cfg.init == InitMode::warmup ? cfg.warmup_fraction * cfg.horizon : 0.0;

    std::vector<OccupationSink> sinks(static_cast<std::size_t>(cfg.replications),
                                      OccupationSink(levels, count_from));
    if (!cfg.event_log.empty()) {
        // Shared record stream: run replications in order on one thread.
        EventRecord record(cfg.event_log);
        for (long rep = 0; rep < cfg.replications; ++rep)
            run_replication(sys, cfg, rep, sinks[static_cast<std::size_t>(rep)], &record);
    } else {
        auto grid = chunk_grid(static_cast<std::uint64_t>(cfg.replications), 1);
        for_each_chunk(
            grid,
            [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
                for (std::uint64_t rep = begin; rep < end; ++rep)
                    run_replication(sys, cfg, static_cast<long>(rep),
                                    sinks[static_cast<std::size_t>(rep)], nullptr);
            },
            cfg.threads);
    }
    return aggregate(sinks, levels);
}

} // namespace htql
