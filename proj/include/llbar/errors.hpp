#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace llbar {

// Invalid user input: bad config keys/values, inconsistent mesh or study setup.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A linear or nonlinear solve failed to reach its tolerance.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, std::vector<double> residual_history)
        : std::runtime_error(what), residuals(std::move(residual_history)) {}

    // Residual norms observed before giving up; last entry is the final residual.
    std::vector<double> residuals;

    double final_residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
};

// Filesystem failures, annotated with the offending path.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace llbar
