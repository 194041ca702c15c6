#pragma once

#include <stdexcept>
#include <string>

namespace sps {

// Inputs outside the regime where the closed-form model is defined
// (e.g. vehicles outnumbering resource blocks).
class model_error : public std::domain_error {
public:
    explicit model_error(const std::string& what) : std::domain_error(what) {}
};

// Fixed-point solver terminated above the requested residual.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, double last_iterate, double residual)
        : std::runtime_error(what), last_iterate(last_iterate), residual(residual) {}

    double last_iterate;
    double residual;
};

// Scenario / configuration file errors.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sps
