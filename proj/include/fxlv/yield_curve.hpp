#pragma once

#include <vector>

#include "fxlv/errors.hpp"

namespace fxlv {

// Continuously-compounded zero curve, piecewise-linear in the zero rate with
// flat extrapolation beyond the last pillar.
class YieldCurve {
public:
    YieldCurve(std::vector<double> pillar_times, std::vector<double> zero_rates);

    static YieldCurve flat(double rate) { return YieldCurve({1.0, 30.0}, {rate, rate}); }

    double zero_rate(double T) const;
    double discount_factor(double T) const;  // exp(-z(T) * T)

    // f(0,t) = -d ln P(0,t) / dt by central finite difference, h = min(1e-4, t/2);
    // one-sided at t = 0.
    double instantaneous_forward(double t) const;

    const std::vector<double>& pillar_times() const { return times_; }
    const std::vector<double>& zero_rates() const { return zeros_; }

private:
    std::vector<double> times_, zeros_;
};

}  // namespace fxlv
