#pragma once

#include <memory>
#include <vector>

#include "fxlv/black_scholes.hpp"
#include "fxlv/math_utils.hpp"
#include "fxlv/yield_curve.hpp"

namespace fxlv {

struct SmilePoint {
    double vol;
    double d_dK;
    double d2_dK2;
    double d_dT;
};

// Implied-vol quotes on a strike x maturity grid. Cubic spline in strike,
// linear in total variance sigma^2 T across maturities, flat vol beyond the
// grid edges in both directions.
class ImpliedVolSurface {
public:
    ImpliedVolSurface(std::vector<double> strikes, std::vector<double> maturities,
                      std::vector<std::vector<double>> vols,  // vols[j][i]: maturity j, strike i
                      double spot);

    double vol(double K, double T) const;
    double total_variance(double K, double T) const;
    SmilePoint partials(double K, double T) const;

    double spot() const { return spot_; }
    const std::vector<double>& strikes() const { return strikes_; }
    const std::vector<double>& maturities() const { return maturities_; }
    double node_vol(std::size_t j, std::size_t i) const { return vols_[j][i]; }

private:
    struct VarSlice {
        double w, dK, dKK;  // total variance and strike derivatives at fixed T
    };
    VarSlice var_slice(double K, double T) const;

    std::vector<double> strikes_, maturities_;
    std::vector<std::vector<double>> vols_;
    std::vector<CubicSpline> smiles_;  // one per maturity, vol vs strike
    double spot_;
};

// Call prices C(K,T) derived from an implied surface with discounting curves
// attached. Grid convexity and price bounds are validated at construction.
class CallPriceSurface {
public:
    CallPriceSurface(std::shared_ptr<const ImpliedVolSurface> vols,
                     YieldCurve domestic, YieldCurve foreign);

    double price(double K, double T) const;
    double forward_price(double K, double T) const;  // C / P_d(0,T)
    CallPartials partials(double K, double T) const;

    double spot() const { return vols_->spot(); }
    const ImpliedVolSurface& implied() const { return *vols_; }
    const YieldCurve& domestic_curve() const { return dom_; }
    const YieldCurve& foreign_curve() const { return fgn_; }

    double convexity_floor() const;  // 1e-12 / S0^2

private:
    std::shared_ptr<const ImpliedVolSurface> vols_;
    YieldCurve dom_, fgn_;
};

// One-factor (deterministic-rate) Dupire local variance from call prices:
// [dC/dt + (r_d - r_f) K dC/dK + r_f C] / [K^2/2 d2C/dK2], with
// r_d = f_d(0,T), r_f = f_f(0,T). Throws DegenerateConvexityError when the
// denominator is at or below the floor.
double dupire_local_vol_prices(const CallPriceSurface& surface, double K, double T);

// Implied-vol form of the deterministic-rate Dupire formula; assumes flat
// rates r_d(0), r_f(0) as printed.
double dupire_local_vol_implied(const ImpliedVolSurface& surface, double K, double T,
                                double rd0, double rf0);

}  // namespace fxlv
