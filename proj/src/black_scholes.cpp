#include "fxlv/black_scholes.hpp"

#include <algorithm>
#include <cmath>

namespace fxlv {

std::pair<double, double> d_plus_minus(double S0, double K, double r_d, double r_f,
                                       double sigma, double T) {
    if (!(S0 > 0.0) || !(K > 0.0) || !(T > 0.0) || !(sigma > 0.0))
        throw InputError("d_plus_minus requires positive S0, K, T, sigma");
    const double sq = sigma * std::sqrt(T);
    const double dp = (std::log(S0 / K) + (r_d - r_f + 0.5 * sigma * sigma) * T) / sq;
    return {dp, dp - sq};
}

double gk_call_df(double S0, double K, double Pd, double Pf, double sigma, double T) {
    if (!(S0 > 0.0) || !(K > 0.0) || !(T > 0.0))
        throw InputError("call price requires positive S0, K, T");
    if (sigma < 0.0) throw InputError("negative volatility");
    const double F = S0 * Pf / Pd;
    if (sigma == 0.0) return Pd * std::max(F - K, 0.0);
    const double sq = sigma * std::sqrt(T);
    const double dp = (std::log(F / K) + 0.5 * sigma * sigma * T) / sq;
    const double dm = dp - sq;
    return Pd * (F * norm_cdf(dp) - K * norm_cdf(dm));
}

double black_scholes_call(double S0, double K, double r_d, double r_f,
                          double sigma, double T) {
    return gk_call_df(S0, K, std::exp(-r_d * T), std::exp(-r_f * T), sigma, T);
}

double implied_vol_df(double price, double S0, double K, double Pd, double Pf, double T) {
    if (!(S0 > 0.0) || !(K > 0.0) || !(T > 0.0))
        throw InputError("implied_vol requires positive S0, K, T");
    const double lower = std::max(S0 * Pf - K * Pd, 0.0);
    const double upper = S0 * Pf;
    const double tol = 1e-10;
    if (price < lower - tol || price > upper + tol)
        throw InputError("price outside no-arbitrage bounds");
    if (price <= lower + tol * std::max(1.0, lower)) {
        if (price <= lower + 1e-14) return 0.0;
    }

    // Bracket, then bisection with Newton acceleration.
    double lo = 1e-8, hi = 1.0;
    while (gk_call_df(S0, K, Pd, Pf, hi, T) < price && hi < 20.0) hi *= 2.0;
    double sigma = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double c = gk_call_df(S0, K, Pd, Pf, sigma, T);
        const double diff = c - price;
        if (std::abs(diff) < 1e-13 * std::max(1.0, price)) return sigma;
        if (diff > 0.0) hi = sigma; else lo = sigma;
        const double sq = sigma * std::sqrt(T);
        const double F = S0 * Pf / Pd;
        const double dp = (std::log(F / K) + 0.5 * sigma * sigma * T) / sq;
        const double vega = Pd * F * norm_pdf(dp) * std::sqrt(T);
        double next = sigma - diff / std::max(vega, 1e-300);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        sigma = next;
    }
    const double c = gk_call_df(S0, K, Pd, Pf, sigma, T);
    if (std::abs(c - price) < 1e-8) return sigma;
    throw NumericError("implied_vol did not converge");
}

double implied_vol(double price, double S0, double K, double r_d, double r_f, double T) {
    return implied_vol_df(price, S0, K, std::exp(-r_d * T), std::exp(-r_f * T), T);
}

CallPartials call_partials(const CallPartialsInput& in) {
    const double F = in.S0 * in.Pf / in.Pd;
    const double sqT = std::sqrt(in.T);
    const double sq = in.sigma * sqT;
    const double dp = (std::log(F / in.K) + 0.5 * in.sigma * in.sigma * in.T) / sq;
    const double dm = dp - sq;
    const double Np = norm_cdf(dp), Nm = norm_cdf(dm);
    const double np = norm_pdf(dp), nm = norm_pdf(dm);

    const double price = in.Pd * (F * Np - in.K * Nm);

    // Black-Scholes partials at fixed sigma
    const double C_K = -in.Pd * Nm;
    const double C_KK = in.Pd * nm / (in.K * sq);
    const double C_s = in.Pd * F * np * sqT;             // vega
    const double C_ss = C_s * dp * dm / in.sigma;
    const double C_Ks = C_s * dp / (in.K * sq);
    const double C_T = -in.ff * in.Pf * in.S0 * Np + in.fd * in.Pd * in.K * Nm +
                       in.Pf * in.S0 * np * in.sigma / (2.0 * sqT);

    CallPartials out;
    out.price = price;
    out.d_dK = C_K + C_s * in.dsigma_dK;
    out.d2_dK2 = C_KK + 2.0 * C_Ks * in.dsigma_dK +
                 C_ss * in.dsigma_dK * in.dsigma_dK + C_s * in.d2sigma_dK2;
    out.d_dT = C_T + C_s * in.dsigma_dT;
    return out;
}

}  // namespace fxlv
