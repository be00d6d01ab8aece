// reports.hpp - Command implementations and file emission.
//
// Each run_* function executes one CLI command against a parsed RunConfig
// and returns the output files as (name, content) pairs; the binary writes
// them under --out. Keeping the content in memory makes the commands
// directly testable and reruns byte-comparable.
#pragma once

#include <string>
#include <vector>

#include "htql/config.hpp"

namespace htql {

struct OutputFile {
    std::string name;
    std::string content;
};

// CSV cell formatting: '.' decimal separator, scientific notation below 1e-4.
std::string format_csv_value(double v);

// Dominance report (JSON) + tail curve CSV with per-dominant-set terms,
// bounds and kappa columns.
std::vector<OutputFile> run_analyze(const RunConfig& cfg);

// Occupation-time tail estimates CSV.
std::vector<OutputFile> run_simulate(const RunConfig& cfg);

// Joined empirical/asymptote CSV with bound check column.
std::vector<OutputFile> run_compare(const RunConfig& cfg);

// Index rule, sigma table and finite-n exponents (JSON).
std::vector<OutputFile> run_manysources(const RunConfig& cfg);

} // namespace htql
