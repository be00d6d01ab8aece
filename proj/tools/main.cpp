// htql - tail asymptotics and simulation for fluid queues fed by
// heavy-tailed On-Off flows.
//
// Commands: analyze, simulate, compare, manysources. Exit codes:
// 0 success, 2 invalid input, 3 domain refusal (the refusing error's
// name is printed on stderr).
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "htql/reports.hpp"

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> samples;
    std::optional<std::vector<double>> levels;
    std::optional<double> horizon;
    std::optional<long> reps;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw htql::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void apply_overrides(htql::RunConfig& cfg, const Overrides& ov, const std::string& command) {
    bool wants_sim = command == "simulate" || command == "compare";
    bool wants_analyze = command == "analyze" || command == "compare";
    if (wants_sim && !cfg.sim && (ov.horizon || ov.reps || ov.seed || ov.levels))
        cfg.sim.emplace();
    if (wants_analyze && !cfg.analyze) cfg.analyze.emplace();
    if (ov.seed) {
        if (cfg.analyze) cfg.analyze->seed = *ov.seed;
        if (cfg.sim) cfg.sim->seed = *ov.seed;
    }
    if (ov.samples && cfg.analyze) cfg.analyze->samples = *ov.samples;
    if (ov.levels) {
        for (double x : *ov.levels)
            if (!(x > 0.0)) throw htql::ConfigError("--levels entries must be positive");
        if (cfg.analyze) cfg.analyze->levels = *ov.levels;
        if (cfg.sim) cfg.sim->levels = *ov.levels;
    }
    if (ov.horizon) {
        if (!(*ov.horizon > 0.0)) throw htql::ConfigError("--horizon must be positive");
        if (cfg.sim) cfg.sim->horizon = *ov.horizon;
    }
    if (ov.reps) {
        if (*ov.reps < 1) throw htql::ConfigError("--reps must be at least 1");
        if (cfg.sim) cfg.sim->replications = *ov.reps;
    }
}

void write_outputs(const std::vector<htql::OutputFile>& files, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& f : files) {
        auto path = std::filesystem::path(out_dir) / f.name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw htql::ConfigError("cannot write '" + path.string() + "'");
        out << f.content;
        std::cout << path.string() << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tail asymptotics and simulation for fluid queues fed by heavy-tailed "
                 "On-Off flows"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    Overrides ov;
    std::vector<double> level_list;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON run configuration")->required();
        cmd->add_option("--out", out_dir, "output directory (default .)");
        cmd->add_option("--seed", [&ov](const std::vector<std::string>& v) {
            ov.seed = std::stoull(v.front());
            return true;
        }, "override analyze/sim seed");
        cmd->add_option("--samples", [&ov](const std::vector<std::string>& v) {
            ov.samples = std::stoull(v.front());
            return true;
        }, "override Monte Carlo sample count");
        cmd->add_option("--levels", [&ov](const std::vector<std::string>& v) {
            std::vector<double> xs;
            std::stringstream ss(v.front());
            std::string tok;
            while (std::getline(ss, tok, ',')) xs.push_back(std::stod(tok));
            ov.levels = std::move(xs);
            return true;
        }, "override workload levels (comma separated)");
        cmd->add_option("--horizon", [&ov](const std::vector<std::string>& v) {
            ov.horizon = std::stod(v.front());
            return true;
        }, "override simulation horizon");
        cmd->add_option("--reps", [&ov](const std::vector<std::string>& v) {
            ov.reps = std::stol(v.front());
            return true;
        }, "override replication count");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "dominance report and tail asymptote CSV");
    CLI::App* simulate = app.add_subcommand("simulate", "occupation-time tail estimates");
    CLI::App* compare = app.add_subcommand("compare", "joined empirical vs asymptote CSV");
    CLI::App* manysources = app.add_subcommand("manysources", "index rule and finite-n exponents");
    for (CLI::App* cmd : {analyze, simulate, compare, manysources}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        htql::RunConfig cfg = htql::parse_config(read_file(config_path));
        std::string command = app.get_subcommands().front()->get_name();
        apply_overrides(cfg, ov, command);

        std::vector<htql::OutputFile> files;
        if (command == "analyze")
            files = htql::run_analyze(cfg);
        else if (command == "simulate")
            files = htql::run_simulate(cfg);
        else if (command == "compare")
            files = htql::run_compare(cfg);
        else
            files = htql::run_manysources(cfg);
        write_outputs(files, out_dir);
        return 0;
    } catch (const htql::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const htql::DomainError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ConfigError: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
