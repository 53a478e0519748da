#pragma once

#include <stdexcept>
#include <string>

namespace msk {

// Bad argument ranges (k out of [0,n], empty spectra, ...).
struct domain_error : std::invalid_argument {
    explicit domain_error(const std::string& what) : std::invalid_argument(what) {}
};

// Structurally invalid inputs (asymmetric matrices, mismatched dims, missing callbacks).
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Chart fails the immersion requirement at a point.
struct immersion_error : std::runtime_error {
    explicit immersion_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite integrand or broken quadrature setup.
struct integration_error : std::runtime_error {
    explicit integration_error(const std::string& what) : std::runtime_error(what) {}
};

// A stated hypothesis (cone membership, gradient bound) fails on the input data.
struct precondition_error : std::runtime_error {
    std::string record_name;
    precondition_error(std::string record, const std::string& what)
        : std::runtime_error(what), record_name(std::move(record)) {}
};

// Invalid harness configuration; carries the offending field name.
struct config_error : std::runtime_error {
    std::string field;
    config_error(std::string f, const std::string& what)
        : std::runtime_error(what), field(std::move(f)) {}
};

}  // namespace msk
