#pragma once

#include <stdexcept>
#include <string>

namespace fxlv {

// Invalid inputs, bad configs, contract violations. CLI maps these to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures: non-convergence, mass drift, degenerate nodes. CLI exit code 1.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when the call-price convexity denominator falls below the floor.
struct DegenerateConvexityError : NumericError {
    double strike;
    double maturity;
    DegenerateConvexityError(double K, double T)
        : NumericError("degenerate convexity at K=" + std::to_string(K) +
                       ", T=" + std::to_string(T)),
          strike(K), maturity(T) {}
};

}  // namespace fxlv
