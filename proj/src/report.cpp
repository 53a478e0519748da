#include "msk/report.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace msk::harness {

using nlohmann::json;

Suite suite_from_string(const std::string& s) {
    if (s == "identities") return Suite::identities;
    if (s == "cones") return Suite::cones;
    if (s == "geometry") return Suite::geometry;
    if (s == "functionals") return Suite::functionals;
    if (s == "inequalities") return Suite::inequalities;
    if (s == "all") return Suite::all;
    throw config_error("suite", "unknown suite '" + s + "'");
}

std::string to_string(Suite s) {
    switch (s) {
        case Suite::identities: return "identities";
        case Suite::cones: return "cones";
        case Suite::geometry: return "geometry";
        case Suite::functionals: return "functionals";
        case Suite::inequalities: return "inequalities";
        case Suite::all: return "all";
    }
    return "?";
}

void apply_config_line(SuiteConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "suite")
            cfg.suite = suite_from_string(value);
        else if (key == "n" || key == "n_max")
            cfg.n_max = std::stoi(value);
        else if (key == "n_min")
            cfg.n_min = std::stoi(value);
        else if (key == "k" || key == "k_max")
            cfg.k_max = std::stoi(value);
        else if (key == "k_min")
            cfg.k_min = std::stoi(value);
        else if (key == "l")
            cfg.l = std::stoi(value);
        else if (key == "a") {
            cfg.a_values.clear();
            std::istringstream ss(value);
            std::string part;
            while (std::getline(ss, part, ',')) cfg.a_values.push_back(std::stod(part));
        } else if (key == "surface")
            cfg.surface = value;
        else if (key == "potential")
            cfg.potential = value;
        else if (key == "grid") {
            cfg.grid.clear();
            std::istringstream ss(value);
            std::string part;
            while (std::getline(ss, part, 'x')) cfg.grid.push_back(std::stoi(part));
        } else if (key == "seed")
            cfg.seed = std::stoull(value);
        else if (key == "trials")
            cfg.trials = std::stoi(value);
        else if (key == "workers")
            cfg.workers = std::stoi(value);
        else if (key == "out")
            cfg.out_path = value;
        else if (key == "format")
            cfg.format = value;
        else if (key.rfind("tol.", 0) == 0)
            cfg.tolerance_overrides[key.substr(4)] = std::stod(value);
        else
            throw config_error(key, "unknown config key '" + key + "'");
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error(key, "cannot parse value '" + value + "' for '" + key + "'");
    }
}

SuiteConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config", "cannot open config file '" + path + "'");
    SuiteConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) apply_config_line(cfg, key, value);
    }
    return cfg;
}

void validate_config(const SuiteConfig& cfg) {
    if (cfg.n_min < 1 || cfg.n_max < cfg.n_min)
        throw config_error("n", "need 1 <= n_min <= n_max");
    if (cfg.k_min < 1) throw config_error("k", "need k_min >= 1");
    if (cfg.k_max != 0 && cfg.k_max < cfg.k_min) throw config_error("k", "need k_max >= k_min");
    if (cfg.trials < 1) throw config_error("trials", "need at least one trial");
    if (cfg.workers < 1) throw config_error("workers", "need at least one worker");
    if (cfg.format != "json" && cfg.format != "csv")
        throw config_error("format", "format must be json or csv");
    for (double a : cfg.a_values)
        if (!(a > 1.0)) throw config_error("a", "every a must exceed 1");
    for (int g : cfg.grid)
        if (g < 1) throw config_error("grid", "grid counts must be positive");
}

void SuiteResult::add_residual(const std::string& name, double value, double tol,
                               std::map<std::string, std::string> inputs) {
    CheckRecord r;
    r.name = name;
    r.inputs = std::move(inputs);
    r.value = value;
    r.tolerance = tol;
    r.pass = std::isfinite(value) && value <= tol;
    add(std::move(r));
}

void SuiteResult::add_count(const std::string& name, int count,
                            std::map<std::string, std::string> inputs) {
    CheckRecord r;
    r.name = name;
    r.inputs = std::move(inputs);
    r.value = count;
    r.tolerance = 0.0;
    r.pass = count == 0;
    add(std::move(r));
}

namespace {

std::string now_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json report_to_json(const functionals::InequalityReport& rep) {
    json terms = json::array();
    for (const auto& t : rep.rhs_terms) terms.push_back({{"m", t.m}, {"value", t.value}});
    json j{{"surface", rep.surface}, {"potential", rep.potential}, {"family", rep.family},
           {"k", rep.k},             {"l", rep.l},                 {"a", rep.a},
           {"grid", rep.grid},       {"lhs", rep.lhs},             {"rhs_terms", terms},
           {"c_star", rep.c_star},   {"pass", rep.pass},           {"budget", rep.budget}};
    if (!rep.metadata.empty()) j["metadata"] = rep.metadata;
    return j;
}

json config_to_json(const SuiteConfig& cfg) {
    json j{{"suite", to_string(cfg.suite)},
           {"n_min", cfg.n_min},
           {"n_max", cfg.n_max},
           {"k_min", cfg.k_min},
           {"k_max", cfg.k_max},
           {"l", cfg.l},
           {"a", cfg.a_values},
           {"seed", cfg.seed},
           {"trials", cfg.trials},
           {"workers", cfg.workers},
           {"format", cfg.format}};
    if (!cfg.surface.empty()) j["surface"] = cfg.surface;
    if (!cfg.potential.empty()) j["potential"] = cfg.potential;
    if (!cfg.grid.empty()) j["grid"] = cfg.grid;
    return j;
}

}  // namespace

std::string report_json(const SuiteResult& result, const SuiteConfig& cfg,
                        const std::string& timestamp) {
    json records = json::array();
    for (const auto& r : result.records) {
        json jr{{"name", r.name},   {"value", r.value}, {"tolerance", r.tolerance},
                {"pass", r.pass}};
        if (!r.inputs.empty()) jr["inputs"] = r.inputs;
        if (!r.message.empty()) jr["message"] = r.message;
        if (r.report) jr["report"] = report_to_json(*r.report);
        records.push_back(std::move(jr));
    }
    const json doc{{"suite", result.suite},
                   {"generated_at", timestamp.empty() ? now_utc() : timestamp},
                   {"config", config_to_json(cfg)},
                   {"aggregate_pass", result.aggregate_pass},
                   {"wall_time_s", result.wall_time_s},
                   {"records", records}};
    return doc.dump(2) + "\n";
}

std::string report_csv(const SuiteResult& result, const SuiteConfig& cfg,
                       const std::string& timestamp) {
    constexpr int kMaxRhs = 7;
    std::ostringstream os;
    os << "# suite=" << result.suite << " generated_at="
       << (timestamp.empty() ? now_utc() : timestamp) << "\n";
    os << "name,value,tolerance,pass,message,surface,potential,family,k,l,a,grid,lhs,c_star,"
          "budget";
    for (int i = 0; i < kMaxRhs; ++i) os << ",rhs_" << i;
    os << "\n";
    auto csv_escape = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    };
    (void)cfg;
    for (const auto& r : result.records) {
        os << csv_escape(r.name) << "," << r.value << "," << r.tolerance << ","
           << (r.pass ? "true" : "false") << "," << csv_escape(r.message);
        if (r.report) {
            const auto& rep = *r.report;
            os << "," << rep.surface << "," << rep.potential << "," << rep.family << "," << rep.k
               << "," << rep.l << "," << rep.a << "," << rep.grid << "," << rep.lhs << ","
               << rep.c_star << "," << rep.budget;
            for (int i = 0; i < kMaxRhs; ++i) {
                os << ",";
                if (i < static_cast<int>(rep.rhs_terms.size())) os << rep.rhs_terms[i].value;
            }
        } else {
            for (int i = 0; i < 10 + kMaxRhs; ++i) os << ",";
        }
        os << "\n";
    }
    return os.str();
}

void emit_report(const SuiteResult& result, const SuiteConfig& cfg, const std::string& path,
                 const std::string& format, const std::string& timestamp) {
    const std::string body =
        format == "csv" ? report_csv(result, cfg, timestamp) : report_json(result, cfg, timestamp);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write report to '" + tmp + "'");
        out << body;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot move report into place at '" + path + "'");
}

}  // namespace msk::harness
