#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/// Requested rate target exceeds the channel capacity.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& msg, double rbar_, double r_max_)
        : std::runtime_error(msg), rbar(rbar_), r_max(r_max_) {}
    double rbar;
    double r_max;
};

/// Iterative solve failed to reach its tolerance; carries the last residual.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& msg, double residual_)
        : std::runtime_error(msg), residual(residual_) {}
    double residual;
};

}  // namespace isac
