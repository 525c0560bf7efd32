#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fxlv/errors.hpp"
#include "fxlv/yield_curve.hpp"

namespace fxlv {

// Right-continuous step function: value of the last knot at or before t.
// First knot must sit at t = 0.
class PiecewiseConstant {
public:
    PiecewiseConstant() : times_{0.0}, values_{0.0} {}
    explicit PiecewiseConstant(double v) : times_{0.0}, values_{v} {}
    PiecewiseConstant(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> times_, values_;
};

enum class Currency { Domestic, Foreign };

struct HullWhiteParams {
    double alpha = 0.05;            // mean-reversion speed, constant
    PiecewiseConstant sigma;        // short-rate volatility sigma_i(t)
    double r0 = 0.0;
    Currency currency_tag = Currency::Domestic;

    void validate() const;
};

// b(t,T) = (1 - exp(-alpha (T-t))) / alpha, the limit T-t for small alpha.
double b_factor(double alpha, double t, double T);

// Zero-coupon bond volatility sigma_i(t) * b(t, T) for constant alpha.
double bond_volatility(const HullWhiteParams& hw, double t, double T);

// Var[r(t)] = integral_0^t sigma(u)^2 exp(-2 alpha (t-u)) du, closed form over
// the piecewise-constant sigma schedule.
double short_rate_variance(const HullWhiteParams& hw, double t);

// Affine bond price A(t,T) exp(-B(t,T) r) fitted to the initial curve.
double zero_coupon_bond(const HullWhiteParams& hw, const YieldCurve& curve,
                        double t, double T, double r);

// theta(t) = df/dt(0,t) + alpha f(0,t) + Var[r(t)], so that model bond prices
// reprice the input curve.
std::function<double(double)> fit_theta(const HullWhiteParams& hw, const YieldCurve& curve);

}  // namespace fxlv
