#pragma once

#include "msk/report.hpp"

namespace msk::harness {

// Catalog listing for `msk list`: surfaces, potentials, test-function presets
// with parameter schemas, in a stable order.
std::string catalog_listing();

SuiteResult run_identities(const SuiteConfig& cfg);
SuiteResult run_cones(const SuiteConfig& cfg);
SuiteResult run_geometry(const SuiteConfig& cfg);
SuiteResult run_functionals(const SuiteConfig& cfg);
SuiteResult run_inequalities(const SuiteConfig& cfg);

// Dispatches on cfg.suite; `all` concatenates every suite and ANDs the flags.
SuiteResult run_suite(const SuiteConfig& cfg);

// 0 pass, 1 check failure; config errors throw before any result exists.
int exit_code(const SuiteResult& result);

}  // namespace msk::harness
