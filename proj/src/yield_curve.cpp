#include "fxlv/yield_curve.hpp"

#include <algorithm>
#include <cmath>

namespace fxlv {

YieldCurve::YieldCurve(std::vector<double> pillar_times, std::vector<double> zero_rates)
    : times_(std::move(pillar_times)), zeros_(std::move(zero_rates)) {
    if (times_.empty() || times_.size() != zeros_.size())
        throw InputError("curve needs matching non-empty pillar and rate vectors");
    if (times_.front() < 0.0) throw InputError("curve pillars must be nonnegative");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw InputError("curve pillars must be strictly increasing");
    for (double T : times_)
        if (!std::isfinite(T)) throw InputError("non-finite curve pillar");
    for (double z : zeros_)
        if (!std::isfinite(z)) throw InputError("non-finite zero rate");
}

double YieldCurve::zero_rate(double T) const {
    if (T < 0.0) throw InputError("negative maturity");
    if (T <= times_.front()) return zeros_.front();
    if (T >= times_.back()) return zeros_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), T);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double w = (T - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return zeros_[i - 1] + w * (zeros_[i] - zeros_[i - 1]);
}

double YieldCurve::discount_factor(double T) const {
    if (T < 0.0) throw InputError("negative maturity");
    return std::exp(-zero_rate(T) * T);
}

double YieldCurve::instantaneous_forward(double t) const {
    if (t < 0.0) throw InputError("negative time");
    auto lnp = [this](double u) { return -zero_rate(u) * u; };
    if (t == 0.0) {
        const double h = 1e-6;
        return -(lnp(h) - lnp(0.0)) / h;
    }
    const double h = std::min(1e-4, t / 2.0);
    return -(lnp(t + h) - lnp(t - h)) / (2.0 * h);
}

}  // namespace fxlv
