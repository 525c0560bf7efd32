#pragma once

#include <string>
#include <vector>

#include "fxlv/hull_white.hpp"
#include "fxlv/surfaces.hpp"
#include "fxlv/yield_curve.hpp"

namespace fxlv {

enum class TimeInterp { Bilinear, LeftConstant };

// sigma(t, K) on a time x spot mesh. Bilinear interpolation, flat extrapolation.
// LeftConstant time lookup is used while a calibration is filling columns
// forward in time.
class LocalVolGrid {
public:
    LocalVolGrid(std::vector<double> time_nodes, std::vector<double> spot_nodes,
                 std::vector<std::vector<double>> values,  // values[it][is]
                 TimeInterp time_interp = TimeInterp::Bilinear);

    static LocalVolGrid constant(double sigma);

    double value(double t, double S) const;
    void set_column(std::size_t it, const std::vector<double>& sigmas);

    const std::vector<double>& time_nodes() const { return times_; }
    const std::vector<double>& spot_nodes() const { return spots_; }
    const std::vector<std::vector<double>>& values() const { return values_; }
    TimeInterp time_interp() const { return interp_; }

private:
    std::vector<double> times_, spots_;
    std::vector<std::vector<double>> values_;
    TimeInterp interp_;
};

struct Correlations {
    double rho_Sd = 0.0;
    double rho_Sf = 0.0;
    double rho_df = 0.0;
};

struct ThreeFactorModel {
    HullWhiteParams hw_d, hw_f;
    YieldCurve curve_d, curve_f;
    double spot = 1.0;
    Correlations corr;
    LocalVolGrid local_vol = LocalVolGrid::constant(0.0);

    void validate() const;                  // PSD correlation matrix, positive spot
    std::vector<double> cholesky() const;   // 3x3 lower factor, order (S, r_d, r_f)
};

enum class Provenance { Mc, Pde };

// E^{Q_T}[(r_d(T) K - r_f(T) S(T)) 1_{S(T)>K}] per (T, K) node, plus the MC
// standard error (zero for PDE provenance).
struct ExpectationTerm {
    std::vector<double> times;
    std::vector<double> strikes;
    std::vector<std::vector<double>> values;  // [it][ik]
    std::vector<std::vector<double>> se;
    Provenance provenance = Provenance::Mc;

    double at(std::size_t it, std::size_t ik) const { return values[it][ik]; }
    double lookup(double T, double K) const;  // bilinear on the (T, K) grid
};

// sigma^2(T,K) = [dC/dt - P_d(0,T) exp_term] / [K^2/2 d2C/dK2]
double extended_local_vol_prices(const CallPriceSurface& surface, double exp_term,
                                 double K, double T);

// Implied-vol form with E = P_d(0,t) exp_term; flat rates rd0, rf0 as printed.
double extended_local_vol_implied(const ImpliedVolSurface& surface, double exp_term,
                                  double Pd0t, double rd0, double rf0,
                                  double K, double T);

// sigma_3f^2 = sigma_1f^2
//   + K P_d [Cov(r_f - r_d, 1_{S>K}) + Cov(r_f, (S-K)^+)/K] / [K^2/2 d2C/dK2]
double covariance_correction(double sigma1f_sq, double cov_indicator,
                             double cov_payoff, double d2C_dK2, double Pd0t,
                             double K, double convexity_floor);

// Variance -> vol with the rounding/arbitrage split: values in [-1e-10, 0)
// clamp to zero, anything below throws.
double sigma_from_variance(double var_value);

}  // namespace fxlv
