#include "htql/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"

namespace htql {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

void check_keys(const json& obj, const char* where, std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) fail(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

double get_number(const json& obj, const char* key) {
    if (!obj.contains(key)) fail(std::string("missing key '") + key + "'");
    if (!obj[key].is_number()) fail(std::string("'") + key + "' must be a number");
    return obj[key].get<double>();
}

double get_number_or(const json& obj, const char* key, double fallback) {
    return obj.contains(key) ? get_number(obj, key) : fallback;
}

// Seeds and counts must survive as full-width integers.
std::uint64_t get_uint_or(const json& obj, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float() && v.get<double>() >= 0.0 &&
        v.get<double>() <= 9.007199254740992e15)
        return static_cast<std::uint64_t>(v.get<double>());
    fail(std::string("'") + key + "' must be a nonnegative integer");
}

HeavyTailDist parse_dist(const json& obj, const char* where) {
    if (!obj.is_object()) fail(std::string(where) + " must be an object");
    check_keys(obj, where, {"kind", "scale", "index"});
    if (!obj.contains("kind") || !obj["kind"].is_string())
        fail(std::string(where) + " needs a string 'kind'");
    std::string kind = obj["kind"].get<std::string>();
    double scale = get_number(obj, "scale");
    double index = get_number(obj, "index");
    try {
        if (kind == "pareto") return HeavyTailDist::pareto(scale, index);
        if (kind == "lomax") return HeavyTailDist::lomax(scale, index);
    } catch (const std::invalid_argument& e) {
        fail(std::string(where) + ": " + e.what());
    }
    fail(std::string(where) + ": kind must be 'pareto' or 'lomax'");
}

std::vector<double> parse_levels(const json& arr, const char* where) {
    if (!arr.is_array()) fail(std::string(where) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : arr) {
        if (!v.is_number()) fail(std::string(where) + " must contain numbers only");
        double x = v.get<double>();
        if (!(x > 0.0) || !std::isfinite(x)) fail(std::string(where) + " entries must be positive");
        out.push_back(x);
    }
    return out;
}

json dist_to_json(const HeavyTailDist& d) {
    return json{{"kind", d.kind() == TailKind::pareto ? "pareto" : "lomax"},
                {"scale", d.scale()},
                {"index", d.index()}};
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

} // namespace

bool RunConfig::operator==(const RunConfig& other) const {
    return system.capacity == other.system.capacity &&
           system.light_rate == other.system.light_rate &&
           system.heavy_flows == other.system.heavy_flows &&
           system.instant_flows == other.system.instant_flows && flow_ids == other.flow_ids &&
           instant_ids == other.instant_ids && analyze == other.analyze && sim == other.sim &&
           manysources == other.manysources;
}

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("top-level config must be an object");
    check_keys(root, "config",
               {"capacity", "light_rate", "flows", "instant_flows", "analyze", "sim",
                "manysources"});

    RunConfig cfg;
    cfg.system.capacity = get_number_or(root, "capacity", 1.0);
    cfg.system.light_rate = get_number_or(root, "light_rate", 0.0);

    std::set<std::string> seen_ids;
    auto claim_id = [&](const json& obj, const std::string& fallback) {
        std::string id = fallback;
        if (obj.contains("id")) {
            if (!obj["id"].is_string()) fail("flow 'id' must be a string");
            id = obj["id"].get<std::string>();
        }
        if (!seen_ids.insert(id).second) fail("duplicate flow id '" + id + "'");
        return id;
    };

    if (root.contains("flows")) {
        if (!root["flows"].is_array()) fail("'flows' must be an array");
        for (const auto& f : root["flows"]) {
            check_keys(f, "flow", {"id", "peak", "on", "off_mean", "mean_rate"});
            double peak = get_number(f, "peak");
            HeavyTailDist on = parse_dist(f.contains("on") ? f["on"] : json(), "flow 'on'");
            if (f.contains("off_mean") == f.contains("mean_rate"))
                fail("each flow needs exactly one of 'off_mean' or 'mean_rate'");
            double off_mean;
            if (f.contains("off_mean")) {
                off_mean = get_number(f, "off_mean");
            } else {
                double rho = get_number(f, "mean_rate");
                if (!(rho > 0.0 && rho < peak))
                    fail("flow 'mean_rate' must lie strictly between 0 and 'peak'");
                double p = rho / peak;
                off_mean = on.mean() * (1.0 - p) / p;
            }
            try {
                cfg.system.heavy_flows.emplace_back(peak, on, off_mean);
            } catch (const std::invalid_argument& e) {
                fail(std::string("flow: ") + e.what());
            }
            cfg.flow_ids.push_back(
                claim_id(f, "f" + std::to_string(cfg.system.heavy_flows.size() - 1)));
        }
    }

    if (root.contains("instant_flows")) {
        if (!root["instant_flows"].is_array()) fail("'instant_flows' must be an array");
        for (const auto& f : root["instant_flows"]) {
            check_keys(f, "instant flow", {"id", "burst", "interarrival_mean", "mean_rate"});
            HeavyTailDist burst =
                parse_dist(f.contains("burst") ? f["burst"] : json(), "'burst'");
            if (f.contains("interarrival_mean") == f.contains("mean_rate"))
                fail("each instant flow needs exactly one of 'interarrival_mean' or 'mean_rate'");
            double interarrival;
            if (f.contains("interarrival_mean")) {
                interarrival = get_number(f, "interarrival_mean");
            } else {
                double rho = get_number(f, "mean_rate");
                if (!(rho > 0.0)) fail("instant flow 'mean_rate' must be positive");
                interarrival = burst.mean() / rho;
            }
            try {
                cfg.system.instant_flows.emplace_back(burst, interarrival);
            } catch (const std::invalid_argument& e) {
                fail(std::string("instant flow: ") + e.what());
            }
            cfg.instant_ids.push_back(
                claim_id(f, "b" + std::to_string(cfg.system.instant_flows.size() - 1)));
        }
    }

    if (root.contains("analyze")) {
        const json& a = root["analyze"];
        check_keys(a, "analyze", {"levels", "samples", "seed", "quadrature_dim_cutoff"});
        AnalyzeConfig ac;
        if (a.contains("levels")) ac.levels = parse_levels(a["levels"], "analyze levels");
        ac.samples = get_uint_or(a, "samples", 1'000'000);
        if (ac.samples == 0) fail("analyze 'samples' must be positive");
        ac.seed = get_uint_or(a, "seed", 1);
        ac.quadrature_dim_cutoff =
            static_cast<int>(get_number_or(a, "quadrature_dim_cutoff", 3.0));
        if (ac.quadrature_dim_cutoff < 0 || ac.quadrature_dim_cutoff > 3)
            fail("quadrature_dim_cutoff must lie in [0, 3]");
        cfg.analyze = std::move(ac);
    }

    if (root.contains("sim")) {
        const json& s = root["sim"];
        check_keys(s, "sim",
                   {"horizon", "replications", "seed", "levels", "init", "warmup_fraction",
                    "off_law", "off_shape", "event_log"});
        SimConfig sc;
        sc.horizon = get_number(s, "horizon");
        if (!(sc.horizon > 0.0)) fail("sim 'horizon' must be positive");
        sc.replications = static_cast<long>(get_uint_or(s, "replications", 1));
        if (sc.replications < 1) fail("sim 'replications' must be at least 1");
        sc.seed = get_uint_or(s, "seed", 0);
        if (s.contains("levels")) sc.levels = parse_levels(s["levels"], "sim levels");
        if (s.contains("init")) {
            std::string mode = s["init"].is_string() ? s["init"].get<std::string>() : "";
            if (mode == "stationary")
                sc.init = InitMode::stationary;
            else if (mode == "warmup")
                sc.init = InitMode::warmup;
            else
                fail("sim 'init' must be 'stationary' or 'warmup'");
        }
        sc.warmup_fraction = get_number_or(s, "warmup_fraction", 0.1);
        if (!(sc.warmup_fraction >= 0.0 && sc.warmup_fraction < 1.0))
            fail("sim 'warmup_fraction' must lie in [0, 1)");
        if (s.contains("off_law")) {
            std::string law = s["off_law"].is_string() ? s["off_law"].get<std::string>() : "";
            if (law == "exponential")
                sc.off_law = OffLaw::exponential;
            else if (law == "deterministic")
                sc.off_law = OffLaw::deterministic;
            else if (law == "lomax")
                sc.off_law = OffLaw::lomax;
            else
                fail("sim 'off_law' must be 'exponential', 'deterministic' or 'lomax'");
        }
        sc.off_shape = get_number_or(s, "off_shape", 2.5);
        if (sc.off_law == OffLaw::lomax && !(sc.off_shape > 1.0))
            fail("sim 'off_shape' must exceed 1");
        if (s.contains("event_log")) {
            if (!s["event_log"].is_string()) fail("sim 'event_log' must be a path string");
            sc.event_log = s["event_log"].get<std::string>();
        }
        cfg.sim = std::move(sc);
    }

    if (root.contains("manysources")) {
        const json& m = root["manysources"];
        check_keys(m, "manysources", {"classes", "n"});
        ManySourcesConfig mc;
        if (!m.contains("classes") || !m["classes"].is_array() || m["classes"].empty())
            fail("manysources needs a nonempty 'classes' array");
        for (const auto& c : m["classes"]) {
            check_keys(c, "class", {"fraction", "peak", "mean_rate", "index"});
            ClassSpec spec;
            spec.fraction = get_number(c, "fraction");
            spec.peak = get_number(c, "peak");
            spec.mean_rate = get_number(c, "mean_rate");
            spec.index = get_number(c, "index");
            mc.classes.push_back(spec);
        }
        if (m.contains("n")) {
            if (!m["n"].is_array()) fail("manysources 'n' must be an array");
            for (const auto& v : m["n"]) {
                if (!v.is_number()) fail("manysources 'n' must contain numbers");
                long n = v.get<long>();
                if (n < 1) fail("manysources 'n' entries must be positive");
                mc.populations.push_back(n);
            }
        }
        try {
            (void)ClassMix(mc.classes);  // surface validation errors at parse time
        } catch (const std::invalid_argument& e) {
            fail(std::string("manysources classes: ") + e.what());
        }
        cfg.manysources = std::move(mc);
    }

    return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
    json root;
    root["capacity"] = cfg.system.capacity;
    root["light_rate"] = cfg.system.light_rate;
    root["flows"] = json::array();
    for (std::size_t i = 0; i < cfg.system.heavy_flows.size(); ++i) {
        const auto& f = cfg.system.heavy_flows[i];
        root["flows"].push_back(json{{"id", cfg.flow_ids[i]},
                                     {"peak", f.peak_rate()},
                                     {"on", dist_to_json(f.on())},
                                     {"off_mean", f.off_mean()}});
    }
    root["instant_flows"] = json::array();
    for (std::size_t i = 0; i < cfg.system.instant_flows.size(); ++i) {
        const auto& f = cfg.system.instant_flows[i];
        root["instant_flows"].push_back(json{{"id", cfg.instant_ids[i]},
                                             {"burst", dist_to_json(f.burst())},
                                             {"interarrival_mean", f.interarrival_mean()}});
    }
    if (cfg.analyze) {
        root["analyze"] = json{{"levels", cfg.analyze->levels},
                               {"samples", cfg.analyze->samples},
                               {"seed", cfg.analyze->seed},
                               {"quadrature_dim_cutoff", cfg.analyze->quadrature_dim_cutoff}};
    }
    if (cfg.sim) {
        const auto& s = *cfg.sim;
        json sj{{"horizon", s.horizon},
                {"replications", s.replications},
                {"seed", s.seed},
                {"levels", s.levels},
                {"init", s.init == InitMode::stationary ? "stationary" : "warmup"},
                {"warmup_fraction", s.warmup_fraction},
                {"off_shape", s.off_shape}};
        sj["off_law"] = s.off_law == OffLaw::exponential     ? "exponential"
                        : s.off_law == OffLaw::deterministic ? "deterministic"
                                                             : "lomax";
        if (!s.event_log.empty()) sj["event_log"] = s.event_log;
        root["sim"] = std::move(sj);
    }
    if (cfg.manysources) {
        json classes = json::array();
        for (const auto& c : cfg.manysources->classes)
            classes.push_back(json{{"fraction", c.fraction},
                                   {"peak", c.peak},
                                   {"mean_rate", c.mean_rate},
                                   {"index", c.index}});
        root["manysources"] = json{{"classes", std::move(classes)},
                                   {"n", cfg.manysources->populations}};
    }
    return root.dump(2);
}

std::string config_digest(const RunConfig& cfg) { return hex64(fnv1a(serialize_config(cfg))); }

std::string system_digest(const SystemSpec& sys) {
    std::ostringstream os;
    os.precision(17);
    os << "c=" << sys.capacity << ";l=" << sys.light_rate;
    for (const auto& f : sys.heavy_flows)
        os << ";f(" << f.peak_rate() << "," << f.on().describe() << "," << f.off_mean() << ")";
    for (const auto& f : sys.instant_flows)
        os << ";b(" << f.burst().describe() << "," << f.interarrival_mean() << ")";
    return hex64(fnv1a(os.str()));
}

} // namespace htql
