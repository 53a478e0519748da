#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msk/functionals.hpp"

namespace msk::harness {

enum class Suite { identities, cones, geometry, functionals, inequalities, all };

Suite suite_from_string(const std::string& s);
std::string to_string(Suite s);

struct SuiteConfig {
    Suite suite = Suite::all;
    int n_min = 2, n_max = 4;
    int k_min = 1, k_max = 0;          // 0: derive from n
    int l = -1;                        // -1: derive from k
    std::vector<double> a_values = {1.5, 2.0, 4.0};
    std::string surface;               // empty: suite default catalog
    std::string potential;             // empty: suite default catalog
    std::vector<int> grid;             // empty: per-surface default
    std::uint64_t seed = 20250809;
    int trials = 1000;
    int workers = 1;
    std::map<std::string, double> tolerance_overrides;
    std::string out_path;              // empty: stdout summary only
    std::string format = "json";       // json | csv

    double tolerance(const std::string& key, double fallback) const {
        const auto it = tolerance_overrides.find(key);
        return it == tolerance_overrides.end() ? fallback : it->second;
    }
};

// Flat key=value file mirroring the CLI flags; CLI flags override file values.
SuiteConfig load_config_file(const std::string& path);
void apply_config_line(SuiteConfig& cfg, const std::string& key, const std::string& value);
void validate_config(const SuiteConfig& cfg);

struct CheckRecord {
    std::string name;
    std::map<std::string, std::string> inputs;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string message;
    std::optional<functionals::InequalityReport> report;
};

struct SuiteResult {
    std::string suite;
    bool aggregate_pass = true;
    double wall_time_s = 0.0;
    std::vector<CheckRecord> records;

    void add(CheckRecord r) {
        aggregate_pass = aggregate_pass && r.pass;
        records.push_back(std::move(r));
    }
    // value <= tolerance checks
    void add_residual(const std::string& name, double value, double tol,
                      std::map<std::string, std::string> inputs = {});
    // exact-count checks (violations == 0)
    void add_count(const std::string& name, int count,
                   std::map<std::string, std::string> inputs = {});
};

// JSON per the report schema; CSV flattens rhs_terms into numbered columns.
// Writes atomically (tmp file + rename). `timestamp` overrides the generated_at
// field so byte-identical emission can be tested.
void emit_report(const SuiteResult& result, const SuiteConfig& cfg, const std::string& path,
                 const std::string& format, const std::string& timestamp = "");

std::string report_json(const SuiteResult& result, const SuiteConfig& cfg,
                        const std::string& timestamp);
std::string report_csv(const SuiteResult& result, const SuiteConfig& cfg,
                       const std::string& timestamp);

}  // namespace msk::harness
