// config.hpp - JSON run configuration for the command-line driver.
//
// Schema (all top-level keys optional except the flow description):
//   capacity        number, default 1
//   light_rate      number, default 0
//   flows           [{id?, peak, on:{kind,scale,index}, off_mean | mean_rate}]
//   instant_flows   [{id?, burst:{kind,scale,index}, interarrival_mean | mean_rate}]
//   analyze         {levels[], samples, seed, quadrature_dim_cutoff}
//   sim             {horizon, replications, seed, levels[], init, warmup_fraction,
//                    off_law, off_shape, event_log}
//   manysources     {classes:[{fraction,peak,mean_rate,index}], n:[...]}
// Unknown keys are rejected. "mean_rate" on a flow derives the Off mean
// (or burst interarrival mean) from the requested long-run rate.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htql/manysources.hpp"
#include "htql/model.hpp"
#include "htql/simulator.hpp"

namespace htql {

struct AnalyzeConfig {
    std::vector<double> levels;
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    int quadrature_dim_cutoff = 3;

    bool operator==(const AnalyzeConfig&) const = default;
};

struct ManySourcesConfig {
    std::vector<ClassSpec> classes;
    std::vector<long> populations;

    bool operator==(const ManySourcesConfig&) const = default;
};

struct RunConfig {
    SystemSpec system;
    std::vector<std::string> flow_ids;
    std::vector<std::string> instant_ids;
    std::optional<AnalyzeConfig> analyze;
    std::optional<SimConfig> sim;
    std::optional<ManySourcesConfig> manysources;

    bool operator==(const RunConfig& other) const;
};

// Parses and validates. Throws ConfigError on malformed or contradictory
// input (including model-type invariant violations).
RunConfig parse_config(const std::string& json_text);

// Canonical serialization; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

// FNV-1a over the canonical serialization; stamped into every output file.
std::string config_digest(const RunConfig& config);

// FNV-1a over a canonical description of a system (tail-curve metadata).
std::string system_digest(const SystemSpec& sys);

} // namespace htql
