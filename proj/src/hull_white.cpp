#include "fxlv/hull_white.hpp"

#include <algorithm>
#include <cmath>

namespace fxlv {

PiecewiseConstant::PiecewiseConstant(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.empty() || times_.size() != values_.size())
        throw InputError("schedule needs matching non-empty knot and value vectors");
    if (times_.front() != 0.0) throw InputError("schedule must start at t=0");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw InputError("schedule knots must be strictly increasing");
}

double PiecewiseConstant::operator()(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    return values_[i == 0 ? 0 : i - 1];
}

void HullWhiteParams::validate() const {
    if (!(alpha > 0.0)) throw InputError("alpha must be positive");
    for (double v : sigma.values())
        if (v < 0.0) throw InputError("sigma schedule must be nonnegative");
    if (!std::isfinite(r0)) throw InputError("r0 must be finite");
}

double b_factor(double alpha, double t, double T) {
    if (T < t) throw InputError("b_factor requires T >= t");
    const double dt = T - t;
    if (std::abs(alpha) < 1e-12) return dt;
    return -std::expm1(-alpha * dt) / alpha;
}

double bond_volatility(const HullWhiteParams& hw, double t, double T) {
    if (T < t) throw InputError("bond_volatility requires T >= t");
    return hw.sigma(t) * b_factor(hw.alpha, t, T);
}

namespace {

// integral_a^b exp(-2 alpha (t-u)) du
double decay_integral(double alpha, double t, double a, double b) {
    if (std::abs(alpha) < 1e-12) return b - a;
    return (std::exp(-2.0 * alpha * (t - b)) - std::exp(-2.0 * alpha * (t - a))) / (2.0 * alpha);
}

}  // namespace

double short_rate_variance(const HullWhiteParams& hw, double t) {
    if (t < 0.0) throw InputError("negative time");
    const auto& knots = hw.sigma.times();
    const auto& vals = hw.sigma.values();
    double var = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i) {
        const double a = knots[i];
        if (a >= t) break;
        const double b = (i + 1 < knots.size()) ? std::min(knots[i + 1], t) : t;
        var += vals[i] * vals[i] * decay_integral(hw.alpha, t, a, b);
    }
    return var;
}

double zero_coupon_bond(const HullWhiteParams& hw, const YieldCurve& curve,
                        double t, double T, double r) {
    if (t < 0.0 || t > T) throw InputError("zero_coupon_bond requires 0 <= t <= T");
    if (t == T) return 1.0;
    const double B = b_factor(hw.alpha, t, T);
    const double f0t = (t == 0.0) ? hw.r0 : curve.instantaneous_forward(t);
    const double lnA = std::log(curve.discount_factor(T) / curve.discount_factor(t)) +
                       B * f0t - 0.5 * B * B * short_rate_variance(hw, t);
    return std::exp(lnA - B * r);
}

std::function<double(double)> fit_theta(const HullWhiteParams& hw, const YieldCurve& curve) {
    hw.validate();
    return [hw, curve](double t) {
        const double h = std::min(1e-4, std::max(t / 2.0, 1e-6));
        double dfdt;
        if (t < h) {
            dfdt = (curve.instantaneous_forward(t + h) - curve.instantaneous_forward(t)) / h;
        } else {
            dfdt = (curve.instantaneous_forward(t + h) - curve.instantaneous_forward(t - h)) /
                   (2.0 * h);
        }
        return dfdt + hw.alpha * curve.instantaneous_forward(t) + short_rate_variance(hw, t);
    };
}

}  // namespace fxlv
