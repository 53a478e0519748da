#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msk/suites.hpp"

namespace {

using msk::harness::SuiteConfig;

void print_summary(const msk::harness::SuiteResult& result) {
    int failed = 0;
    for (const auto& r : result.records) {
        if (r.pass) continue;
        ++failed;
        std::cout << "[FAIL] " << r.name << "  value=" << r.value;
        if (r.tolerance > 0.0) std::cout << " tolerance=" << r.tolerance;
        if (!r.message.empty()) std::cout << "  (" << r.message << ")";
        std::cout << "\n";
    }
    std::cout << result.suite << ": " << (result.records.size() - failed) << "/"
              << result.records.size() << " checks passed in " << result.wall_time_s << "s -> "
              << (result.aggregate_pass ? "PASS" : "FAIL") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"msk: symmetric-function curvature calculus checks"};
    app.require_subcommand(1);

    CLI::App* list = app.add_subcommand("list", "print the surface/potential/test-fn catalog");

    CLI::App* run = app.add_subcommand("run", "run a verification suite");
    std::string suite = "all", surface, potential, grid, out_path, format = "json", config_path;
    std::string a_csv;
    int n = 0, k = 0, l = -2, trials = 0, workers = 0;
    long long seed = -1;
    std::vector<std::string> tol_kv;
    run->add_option("--suite", suite, "identities|cones|geometry|functionals|inequalities|all");
    run->add_option("--n", n, "max dimension (n_max; n_min stays at its default)");
    run->add_option("--k", k, "max symmetric-function order");
    run->add_option("--l", l, "slot count / lower index where applicable");
    run->add_option("--a", a_csv, "comma-separated list of a values (each > 1)");
    run->add_option("--surface", surface, "surface id, e.g. sphere:r=2:n=3");
    run->add_option("--potential", potential, "potential id, e.g. linear:c=0.5");
    run->add_option("--grid", grid, "per-axis node counts, e.g. 200x400");
    run->add_option("--seed", seed, "RNG seed");
    run->add_option("--trials", trials, "probe trial count");
    run->add_option("--workers", workers, "parallel node workers");
    run->add_option("--out", out_path, "report output path");
    run->add_option("--format", format, "json|csv");
    run->add_option("--config", config_path, "flat key=value config file (flags override)");
    run->add_option("--tol", tol_kv, "tolerance override key=value (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (list->parsed()) {
        std::cout << msk::harness::catalog_listing();
        return 0;
    }

    try {
        SuiteConfig cfg;
        if (!config_path.empty()) cfg = msk::harness::load_config_file(config_path);
        using msk::harness::apply_config_line;
        if (run->count("--suite") || config_path.empty()) apply_config_line(cfg, "suite", suite);
        if (run->count("--n")) apply_config_line(cfg, "n", std::to_string(n));
        if (run->count("--k")) apply_config_line(cfg, "k", std::to_string(k));
        if (run->count("--l")) apply_config_line(cfg, "l", std::to_string(l));
        if (run->count("--a")) apply_config_line(cfg, "a", a_csv);
        if (run->count("--surface")) cfg.surface = surface;
        if (run->count("--potential")) cfg.potential = potential;
        if (run->count("--grid")) apply_config_line(cfg, "grid", grid);
        if (run->count("--seed")) apply_config_line(cfg, "seed", std::to_string(seed));
        if (run->count("--trials")) apply_config_line(cfg, "trials", std::to_string(trials));
        if (run->count("--workers")) apply_config_line(cfg, "workers", std::to_string(workers));
        if (run->count("--format")) apply_config_line(cfg, "format", format);
        if (run->count("--out")) cfg.out_path = out_path;
        for (const std::string& kv : tol_kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos)
                throw msk::config_error("tol", "expected key=value, got '" + kv + "'");
            apply_config_line(cfg, "tol." + kv.substr(0, eq), kv.substr(eq + 1));
        }
        msk::harness::validate_config(cfg);

        const msk::harness::SuiteResult result = msk::harness::run_suite(cfg);
        if (!cfg.out_path.empty())
            msk::harness::emit_report(result, cfg, cfg.out_path, cfg.format);
        print_summary(result);
        return msk::harness::exit_code(result);
    } catch (const msk::config_error& e) {
        std::cerr << "config error (" << e.field << "): " << e.what() << "\n";
        return 2;
    } catch (const msk::validation_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const msk::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
