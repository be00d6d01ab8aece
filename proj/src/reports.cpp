#include "htql/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "htql/asymptotics.hpp"
#include "htql/dominance.hpp"
#include "htql/manysources.hpp"
#include "htql/simulator.hpp"

namespace htql {

namespace {

using nlohmann::json;

constexpr std::size_t kSubsetTableLimit = 12;  // 2^12 rows max in the JSON report

std::string format_count(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_label(const std::vector<int>& idx, const std::vector<std::string>& ids) {
    std::string s;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) s += '+';
        s += ids[static_cast<std::size_t>(idx[i])];
    }
    return s.empty() ? "none" : s;
}

json subset_json(const SetMetrics& m, const std::vector<std::string>& ids) {
    json j;
    j["flows"] = json::array();
    for (int i : m.subset) j["flows"].push_back(ids[static_cast<std::size_t>(i)]);
    j["peak_rate"] = m.peak;
    j["mean_rate"] = m.mean;
    j["reduced_capacity"] = m.reduced_capacity;
    j["drift"] = m.drift;
    j["cost"] = m.cost;
    j["critical"] = m.critical();
    j["strictly_critical"] = m.criticality == Criticality::strictly_critical;
    j["minimally_critical"] = m.minimally_critical;
    return j;
}

struct CsvBuilder {
    std::ostringstream out;

    CsvBuilder(const RunConfig& cfg, std::uint64_t seed) {
        out << "# config=" << config_digest(cfg) << " seed=" << seed << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
    }

    std::string str() const { return out.str(); }
};

AnalyzeConfig analyze_or_default(const RunConfig& cfg) {
    AnalyzeConfig a = cfg.analyze.value_or(AnalyzeConfig{});
    if (a.levels.empty()) a.levels = {10.0, 100.0, 1000.0, 10000.0};
    return a;
}

EstimatorOptions estimator_options(const AnalyzeConfig& a) {
    EstimatorOptions opts;
    opts.seed = a.seed;
    opts.samples = a.samples;
    opts.quadrature_dim_cutoff = a.quadrature_dim_cutoff;
    return opts;
}

void require_flows(const RunConfig& cfg) {
    if (cfg.system.heavy_flows.empty() && cfg.system.instant_flows.empty())
        throw ConfigError("config describes no flows");
}

json dominance_json(const RunConfig& cfg, const WorkloadAnalysis& analysis) {
    const auto& report = analysis.report();
    json j;
    j["config"] = config_digest(cfg);
    j["system"] = system_digest(cfg.system);
    j["capacity_scale"] = analysis.validation().scale;
    j["utilization"] = analysis.validation().utilization;
    j["peak_load"] = analysis.validation().peak_load;
    j["stable"] = analysis.validation().stable;
    j["heavy_regime"] = analysis.validation().heavy_regime;
    j["exponent"] = report.exponent;
    j["set_cost"] = report.set_cost;
    j["dominant_sets"] = json::array();
    for (const auto& s : report.dominant) j["dominant_sets"].push_back(join_label(s, cfg.flow_ids));
    j["minimally_critical_sets"] = json::array();
    for (const auto& s : report.minimally_critical)
        j["minimally_critical_sets"].push_back(join_label(s, cfg.flow_ids));
    j["dominant_instant_flows"] = json::array();
    for (int i : report.dominant_instants)
        j["dominant_instant_flows"].push_back(cfg.instant_ids[static_cast<std::size_t>(i)]);
    if (cfg.system.heavy_flows.size() <= kSubsetTableLimit) {
        j["subsets"] = json::array();
        for (const auto& m : report.subsets) j["subsets"].push_back(subset_json(m, cfg.flow_ids));
    } else {
        j["subsets_omitted"] = "full table suppressed beyond 12 flows; critical sets follow";
        j["critical_subsets"] = json::array();
        for (const auto& m : report.subsets)
            if (m.critical()) j["critical_subsets"].push_back(subset_json(m, cfg.flow_ids));
    }
    return j;
}

std::string tail_csv(const RunConfig& cfg, const WorkloadAnalysis& analysis,
                     const AnalyzeConfig& a) {
    auto levels = a.levels;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    TailCurve curve = make_tail_curve(analysis, levels, config_digest(cfg));
    std::vector<WorkloadTailResult> rows;
    rows.reserve(levels.size());
    for (double x : levels) rows.push_back(analysis.tail(x));

    const auto& terms = rows.front().terms;
    bool single_set = terms.size() == 1 && !terms[0].instantaneous;
    bool have_bounds = !analysis.report().dominant.empty();
    CsvBuilder csv(cfg, a.seed);
    csv.out << "# theorem=" << curve.theorem << " exponent=" << format_csv_value(curve.exponent)
            << " system=" << system_digest(cfg.system) << "\n";
    std::vector<std::string> header{"x", "asymptote"};
    for (const auto& t : terms)
        header.push_back((t.instantaneous ? "iterm_" : "term_") +
                         join_label(t.flows, t.instantaneous ? cfg.instant_ids : cfg.flow_ids));
    header.push_back("lower_bound");
    header.push_back("upper_bound");
    for (const auto& t : terms) {
        if (t.instantaneous) continue;
        std::string suffix = single_set ? "" : "_" + join_label(t.flows, cfg.flow_ids);
        header.push_back("kappa" + suffix);
        header.push_back("kappa_stderr" + suffix);
    }
    csv.row(header);

    for (std::size_t r = 0; r < levels.size(); ++r) {
        std::vector<std::string> cells{format_csv_value(curve.points[r].x),
                                       format_csv_value(curve.points[r].value)};
        for (const auto& t : rows[r].terms) cells.push_back(format_csv_value(t.value));
        if (have_bounds) {
            auto bounds = analysis.bounds(levels[r]);
            cells.push_back(format_csv_value(bounds.lower));
            cells.push_back(bounds.upper ? format_csv_value(*bounds.upper) : "");
        } else {
            cells.push_back("");
            cells.push_back("");
        }
        for (const auto& t : rows[r].terms) {
            if (t.instantaneous) continue;
            cells.push_back(format_csv_value(t.kappa.value));
            cells.push_back(format_csv_value(t.kappa.std_error));
        }
        csv.row(cells);
    }
    return csv.str();
}

SimSystem sim_system(const RunConfig& cfg) {
    if (!cfg.system.instant_flows.empty())
        throw ConfigError("the simulator covers On-Off flows only; remove instant_flows");
    if (cfg.system.heavy_flows.empty()) throw ConfigError("config describes no flows");
    SimSystem sys;
    sys.capacity = cfg.system.capacity;
    sys.background = cfg.system.light_rate;
    sys.flows = cfg.system.heavy_flows;
    return sys;
}

SimConfig sim_or_fail(const RunConfig& cfg) {
    if (!cfg.sim) throw ConfigError("command needs a 'sim' block");
    SimConfig sc = *cfg.sim;
    if (sc.levels.empty()) sc.levels = {10.0, 100.0, 1000.0, 10000.0};
    return sc;
}

} // namespace

std::string format_csv_value(double v) {
    char buf[40];
    if (v != 0.0 && std::abs(v) < 1e-4)
        std::snprintf(buf, sizeof buf, "%.10e", v);
    else
        std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<OutputFile> run_analyze(const RunConfig& cfg) {
    require_flows(cfg);
    AnalyzeConfig a = analyze_or_default(cfg);
    WorkloadAnalysis analysis(cfg.system, estimator_options(a));
    json report = dominance_json(cfg, analysis);
    return {OutputFile{"dominance_report.json", report.dump(2) + "\n"},
            OutputFile{"tail.csv", tail_csv(cfg, analysis, a)}};
}

std::vector<OutputFile> run_simulate(const RunConfig& cfg) {
    SimConfig sc = sim_or_fail(cfg);
    EmpiricalTail tail = simulate_tail(sim_system(cfg), sc);
    CsvBuilder csv(cfg, sc.seed);
    csv.row({"x", "empirical_tail", "stderr", "replications", "total_time"});
    for (const auto& lv : tail.levels)
        csv.row({format_csv_value(lv.level), format_csv_value(lv.mean),
                 format_csv_value(lv.std_error), std::to_string(tail.replications),
                 format_count(tail.total_time)});
    return {OutputFile{"empirical.csv", csv.str()}};
}

std::vector<OutputFile> run_compare(const RunConfig& cfg) {
    SimConfig sc = sim_or_fail(cfg);
    AnalyzeConfig a = analyze_or_default(cfg);
    WorkloadAnalysis analysis(cfg.system, estimator_options(a));
    EmpiricalTail tail = simulate_tail(sim_system(cfg), sc);

    CsvBuilder csv(cfg, sc.seed);
    csv.row({"x", "empirical", "empirical_stderr", "asymptote", "ratio", "lower_bound",
             "within_bounds"});
    for (const auto& lv : tail.levels) {
        auto asym = analysis.tail(lv.level);
        auto bounds = analysis.bounds(lv.level);
        double ratio = asym.value > 0.0 ? lv.mean / asym.value : 0.0;
        bool within = lv.mean >= bounds.lower - 3.0 * lv.std_error;
        csv.row({format_csv_value(lv.level), format_csv_value(lv.mean),
                 format_csv_value(lv.std_error), format_csv_value(asym.value),
                 format_csv_value(ratio), format_csv_value(bounds.lower),
                 within ? "true" : "false"});
    }
    return {OutputFile{"compare.csv", csv.str()}};
}

std::vector<OutputFile> run_manysources(const RunConfig& cfg) {
    if (!cfg.manysources) throw ConfigError("command needs a 'manysources' block");
    ClassMix mix(cfg.manysources->classes);
    IndexRuleResult rule = index_rule(mix);

    json j;
    j["config"] = config_digest(cfg);
    j["ordering"] = rule.ordering;
    j["sigma"] = rule.sigma;
    j["level"] = rule.level;
    j["gamma_level"] = rule.gamma_level;
    j["fractional_populations"] = rule.fractional;
    j["exponent"] = rule.exponent;
    j["rate_function_at_1"] = limiting_rate_function(mix, 1.0);
    j["finite_n"] = json::array();
    for (long n : cfg.manysources->populations) {
        FiniteNResult fn = finite_n_exponent(mix, n);
        j["finite_n"].push_back(json{{"n", n},
                                     {"exponent", fn.value},
                                     {"counts", fn.counts},
                                     {"populations", fn.populations},
                                     {"sandwich_low", fn.sandwich_low},
                                     {"sandwich_high", fn.sandwich_high}});
    }
    return {OutputFile{"manysources_report.json", j.dump(2) + "\n"}};
}

} // namespace htql
