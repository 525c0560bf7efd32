#pragma once

#include <utility>

#include "fxlv/errors.hpp"
#include "fxlv/math_utils.hpp"

namespace fxlv {

// d_{+/-} = [ln(S0/K) + (r_d - r_f +/- sigma^2/2) T] / (sigma sqrt(T))
std::pair<double, double> d_plus_minus(double S0, double K, double r_d, double r_f,
                                       double sigma, double T);

// Garman-Kohlhagen call, flat continuously-compounded rates. sigma = 0 is the
// deterministic limit (discounted intrinsic on the forward).
double black_scholes_call(double S0, double K, double r_d, double r_f,
                          double sigma, double T);

// Same value written with discount factors P_d(0,T), P_f(0,T).
double gk_call_df(double S0, double K, double Pd, double Pf, double sigma, double T);

// Inverts black_scholes_call to 1e-10 price accuracy. Prices at the lower
// no-arbitrage bound return 0 by convention; prices outside bounds throw.
double implied_vol(double price, double S0, double K, double r_d, double r_f, double T);
double implied_vol_df(double price, double S0, double K, double Pd, double Pf, double T);

// Analytic partials of C(K,T) = GK(K, T, sigma(K,T)) under term discount
// factors, chained through the implied-vol smile derivatives. Inputs fd, ff
// are the instantaneous forward rates at T.
struct CallPartialsInput {
    double S0, K, T;
    double Pd, Pf;
    double fd, ff;
    double sigma, dsigma_dK, d2sigma_dK2, dsigma_dT;
};

struct CallPartials {
    double price;
    double d_dT;
    double d_dK;
    double d2_dK2;
};

CallPartials call_partials(const CallPartialsInput& in);

}  // namespace fxlv
