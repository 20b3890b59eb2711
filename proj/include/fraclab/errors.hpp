#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fraclab {

// Bad input: maps to CLI exit code 2.
struct validation_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Enumeration guard exceeded; carries the work size and a memory estimate.
struct guard_error : std::runtime_error {
    double work = 0;
    double bytes = 0;
    guard_error(const std::string& what, double work_, double bytes_ = 0)
        : std::runtime_error(what), work(work_), bytes(bytes_) {}
};

// Quadrature refinement ran out of panels before reaching its target.
struct budget_error : std::runtime_error {
    double estimate = 0;
    double error = 0;
    budget_error(const std::string& what, double estimate_, double error_)
        : std::runtime_error(what), estimate(estimate_), error(error_) {}
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw validation_error(msg);
}

}  // namespace fraclab
