#include "fxlv/local_vol.hpp"

#include <algorithm>
#include <cmath>

#include "fxlv/math_utils.hpp"

namespace fxlv {

LocalVolGrid::LocalVolGrid(std::vector<double> time_nodes, std::vector<double> spot_nodes,
                           std::vector<std::vector<double>> values, TimeInterp time_interp)
    : times_(std::move(time_nodes)), spots_(std::move(spot_nodes)),
      values_(std::move(values)), interp_(time_interp) {
    if (times_.empty() || spots_.empty()) throw InputError("empty local vol grid");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw InputError("local vol time nodes must be strictly increasing");
    for (std::size_t i = 0; i < spots_.size(); ++i) {
        if (!(spots_[i] > 0.0)) throw InputError("local vol spot nodes must be positive");
        if (i > 0 && !(spots_[i] > spots_[i - 1]))
            throw InputError("local vol spot nodes must be strictly increasing");
    }
    if (values_.size() != times_.size())
        throw InputError("local vol grid: one row per time node required");
    for (const auto& row : values_) {
        if (row.size() != spots_.size())
            throw InputError("local vol grid: one value per spot node required");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw InputError("local vol values must be finite and nonnegative");
    }
}

LocalVolGrid LocalVolGrid::constant(double sigma) {
    return LocalVolGrid({1.0}, {1.0}, {{sigma}});
}

namespace {

// index of the interval [nodes[i], nodes[i+1]) containing q, clamped
std::size_t bracket(const std::vector<double>& nodes, double q) {
    if (nodes.size() < 2 || q <= nodes.front()) return 0;
    if (q >= nodes.back()) return nodes.size() - 2;
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), q);
    return static_cast<std::size_t>(it - nodes.begin()) - 1;
}

}  // namespace

double LocalVolGrid::value(double t, double S) const {
    auto row_value = [&](std::size_t it) {
        if (spots_.size() == 1) return values_[it][0];
        const std::size_t is = bracket(spots_, S);
        const double Sc = std::clamp(S, spots_.front(), spots_.back());
        const double w = (Sc - spots_[is]) / (spots_[is + 1] - spots_[is]);
        return values_[it][is] + w * (values_[it][is + 1] - values_[it][is]);
    };
    if (times_.size() == 1) return row_value(0);
    if (interp_ == TimeInterp::LeftConstant) {
        // column at times_[j] applies on [times_[j], times_[j+1]); the first
        // column also covers t < times_[0]
        std::size_t j = (t < times_.front()) ? 0 : bracket(times_, t);
        if (t >= times_.back()) j = times_.size() - 1;
        else if (t >= times_[j + 1]) ++j;
        return row_value(j);
    }
    const std::size_t it = bracket(times_, t);
    const double tc = std::clamp(t, times_.front(), times_.back());
    const double w = (tc - times_[it]) / (times_[it + 1] - times_[it]);
    return row_value(it) + w * (row_value(it + 1) - row_value(it));
}

void LocalVolGrid::set_column(std::size_t it, const std::vector<double>& sigmas) {
    if (it >= times_.size() || sigmas.size() != spots_.size())
        throw InputError("set_column shape mismatch");
    for (double v : sigmas)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw InputError("local vol values must be finite and nonnegative");
    values_[it] = sigmas;
}

void ThreeFactorModel::validate() const {
    hw_d.validate();
    hw_f.validate();
    if (!(spot > 0.0)) throw InputError("spot must be positive");
    cholesky();  // throws if not PSD
}

std::vector<double> ThreeFactorModel::cholesky() const {
    const std::vector<double> m = {1.0,         corr.rho_Sd, corr.rho_Sf,
                                   corr.rho_Sd, 1.0,         corr.rho_df,
                                   corr.rho_Sf, corr.rho_df, 1.0};
    return cholesky_psd(m, 3);
}

double ExpectationTerm::lookup(double T, double K) const {
    const std::size_t it = bracket(times, T);
    const std::size_t ik = bracket(strikes, K);
    auto val = [&](std::size_t a, std::size_t b) { return values[a][b]; };
    if (times.size() == 1 && strikes.size() == 1) return val(0, 0);
    const double Tc = std::clamp(T, times.front(), times.back());
    const double Kc = std::clamp(K, strikes.front(), strikes.back());
    const double wt = (times.size() == 1)
                          ? 0.0
                          : (Tc - times[it]) / (times[it + 1] - times[it]);
    const double wk = (strikes.size() == 1)
                          ? 0.0
                          : (Kc - strikes[ik]) / (strikes[ik + 1] - strikes[ik]);
    const std::size_t it1 = std::min(it + 1, times.size() - 1);
    const std::size_t ik1 = std::min(ik + 1, strikes.size() - 1);
    const double a = val(it, ik) + wk * (val(it, ik1) - val(it, ik));
    const double b = val(it1, ik) + wk * (val(it1, ik1) - val(it1, ik));
    return a + wt * (b - a);
}

double extended_local_vol_prices(const CallPriceSurface& surface, double exp_term,
                                 double K, double T) {
    const CallPartials p = surface.partials(K, T);
    if (p.d2_dK2 <= surface.convexity_floor())
        throw DegenerateConvexityError(K, T);
    const double Pd = surface.domestic_curve().discount_factor(T);
    return (p.d_dT - Pd * exp_term) / (0.5 * K * K * p.d2_dK2);
}

double extended_local_vol_implied(const ImpliedVolSurface& surface, double exp_term,
                                  double Pd0t, double rd0, double rf0,
                                  double K, double T) {
    const SmilePoint sp = surface.partials(K, T);
    const double s = sp.vol;
    const double S0 = surface.spot();
    const double sqT = std::sqrt(T);
    const auto [dp, dm] = d_plus_minus(S0, K, rd0, rf0, s, T);
    const double E = Pd0t * exp_term;
    const double dfF = std::exp(-rf0 * T);
    const double dfD = std::exp(-rd0 * T);
    const double num =
        dfF * S0 * (norm_pdf(dp) * (s + 2.0 * T * sp.d_dT) - 2.0 * sqT * rf0 * norm_cdf(dp)) +
        2.0 * sqT * (rd0 * K * dfD * norm_cdf(dm) - E);
    const double a = 1.0 + K * dp * sqT * sp.d_dK;
    const double den =
        dfF * S0 * norm_pdf(dp) *
        (a * a + K * K * T * s * (sp.d2_dK2 - dp * sp.d_dK * sp.d_dK * sqT));
    if (den <= 1e-300) throw DegenerateConvexityError(K, T);
    return s * num / den;
}

double covariance_correction(double sigma1f_sq, double cov_indicator, double cov_payoff,
                             double d2C_dK2, double Pd0t, double K,
                             double convexity_floor) {
    if (d2C_dK2 <= convexity_floor) throw DegenerateConvexityError(K, 0.0);
    const double corr = K * Pd0t * (cov_indicator + cov_payoff / K) /
                        (0.5 * K * K * d2C_dK2);
    return sigma1f_sq + corr;
}

double sigma_from_variance(double var_value) {
    if (var_value < -1e-10)
        throw NumericError("negative local variance beyond rounding tolerance: " +
                           std::to_string(var_value));
    return std::sqrt(std::max(var_value, 0.0));
}

}  // namespace fxlv
