#include "fxlv/surfaces.hpp"

#include <algorithm>
#include <cmath>

namespace fxlv {

ImpliedVolSurface::ImpliedVolSurface(std::vector<double> strikes,
                                     std::vector<double> maturities,
                                     std::vector<std::vector<double>> vols, double spot)
    : strikes_(std::move(strikes)), maturities_(std::move(maturities)),
      vols_(std::move(vols)), spot_(spot) {
    if (!(spot_ > 0.0)) throw InputError("spot must be positive");
    if (strikes_.size() < 2 || maturities_.empty())
        throw InputError("surface needs at least two strikes and one maturity");
    for (std::size_t i = 0; i < strikes_.size(); ++i) {
        if (!(strikes_[i] > 0.0)) throw InputError("strikes must be positive");
        if (i > 0 && !(strikes_[i] > strikes_[i - 1]))
            throw InputError("strikes must be strictly increasing");
    }
    for (std::size_t j = 0; j < maturities_.size(); ++j) {
        if (!(maturities_[j] > 0.0)) throw InputError("maturities must be positive");
        if (j > 0 && !(maturities_[j] > maturities_[j - 1]))
            throw InputError("maturities must be strictly increasing");
    }
    if (vols_.size() != maturities_.size())
        throw InputError("vol grid incomplete: one row per maturity required");
    for (const auto& row : vols_) {
        if (row.size() != strikes_.size())
            throw InputError("vol grid incomplete: one vol per strike required");
        for (double v : row)
            if (!(v > 0.0) || !std::isfinite(v)) throw InputError("vols must be positive");
    }
    smiles_.reserve(vols_.size());
    for (const auto& row : vols_) smiles_.emplace_back(strikes_, row);
}

ImpliedVolSurface::VarSlice ImpliedVolSurface::var_slice(double K, double T) const {
    auto pillar = [&](std::size_t j) {
        const double s = smiles_[j].value(K);
        const double s1 = smiles_[j].deriv(K);
        const double s2 = smiles_[j].deriv2(K);
        const double Tj = maturities_[j];
        return VarSlice{s * s * Tj, 2.0 * s * s1 * Tj, 2.0 * (s1 * s1 + s * s2) * Tj};
    };
    const std::size_t nm = maturities_.size();
    if (nm == 1 || T <= maturities_.front()) {
        // flat vol at the short end: variance linear from zero
        const VarSlice p = pillar(0);
        const double r = T / maturities_.front();
        return {p.w * r, p.dK * r, p.dKK * r};
    }
    if (T >= maturities_.back()) {
        // flat vol beyond the last pillar
        const VarSlice p = pillar(nm - 1);
        const double r = T / maturities_.back();
        return {p.w * r, p.dK * r, p.dKK * r};
    }
    const auto it = std::upper_bound(maturities_.begin(), maturities_.end(), T);
    const std::size_t j = static_cast<std::size_t>(it - maturities_.begin());
    const VarSlice a = pillar(j - 1), b = pillar(j);
    const double lam = (T - maturities_[j - 1]) / (maturities_[j] - maturities_[j - 1]);
    return {a.w + lam * (b.w - a.w), a.dK + lam * (b.dK - a.dK),
            a.dKK + lam * (b.dKK - a.dKK)};
}

double ImpliedVolSurface::total_variance(double K, double T) const {
    if (!(T > 0.0)) throw InputError("maturity must be positive");
    return var_slice(K, T).w;
}

double ImpliedVolSurface::vol(double K, double T) const {
    return std::sqrt(total_variance(K, T) / T);
}

SmilePoint ImpliedVolSurface::partials(double K, double T) const {
    if (!(T > 0.0)) throw InputError("maturity must be positive");
    const VarSlice s = var_slice(K, T);
    const double sigma = std::sqrt(s.w / T);
    const double denom = 2.0 * sigma * T;
    SmilePoint out;
    out.vol = sigma;
    out.d_dK = s.dK / denom;
    out.d2_dK2 = (s.dKK - 2.0 * T * out.d_dK * out.d_dK) / denom;
    const double h = std::min(1e-4, T / 2.0);
    const double wT = (var_slice(K, T + h).w - var_slice(K, T - h).w) / (2.0 * h);
    out.d_dT = (wT - sigma * sigma) / denom;
    return out;
}

CallPriceSurface::CallPriceSurface(std::shared_ptr<const ImpliedVolSurface> vols,
                                   YieldCurve domestic, YieldCurve foreign)
    : vols_(std::move(vols)), dom_(std::move(domestic)), fgn_(std::move(foreign)) {
    if (!vols_) throw InputError("null implied surface");
    const double tol = 1e-10;
    const double S0 = vols_->spot();
    for (double T : vols_->maturities()) {
        const double Pd = dom_.discount_factor(T);
        const double Pf = fgn_.discount_factor(T);
        std::vector<double> c;
        c.reserve(vols_->strikes().size());
        for (double K : vols_->strikes())
            c.push_back(gk_call_df(S0, K, Pd, Pf, vols_->vol(K, T), T));
        for (std::size_t i = 0; i < c.size(); ++i) {
            const double K = vols_->strikes()[i];
            const double lower = std::max(0.0, S0 * Pf - K * Pd);
            if (c[i] < lower - tol || c[i] > S0 * Pf + tol)
                throw InputError("call price violates no-arbitrage bounds");
            if (i > 0 && c[i] > c[i - 1] + tol)
                throw InputError("call prices not decreasing in strike");
            if (i > 0 && i + 1 < c.size() &&
                c[i - 1] - 2.0 * c[i] + c[i + 1] < -tol)
                throw InputError("call prices not convex in strike");
        }
    }
}

double CallPriceSurface::price(double K, double T) const {
    return gk_call_df(spot(), K, dom_.discount_factor(T), fgn_.discount_factor(T),
                      vols_->vol(K, T), T);
}

double CallPriceSurface::forward_price(double K, double T) const {
    return price(K, T) / dom_.discount_factor(T);
}

CallPartials CallPriceSurface::partials(double K, double T) const {
    const SmilePoint sp = vols_->partials(K, T);
    CallPartialsInput in;
    in.S0 = spot();
    in.K = K;
    in.T = T;
    in.Pd = dom_.discount_factor(T);
    in.Pf = fgn_.discount_factor(T);
    in.fd = dom_.instantaneous_forward(T);
    in.ff = fgn_.instantaneous_forward(T);
    in.sigma = sp.vol;
    in.dsigma_dK = sp.d_dK;
    in.d2sigma_dK2 = sp.d2_dK2;
    in.dsigma_dT = sp.d_dT;
    return call_partials(in);
}

double CallPriceSurface::convexity_floor() const {
    return 1e-12 / (spot() * spot());
}

double dupire_local_vol_prices(const CallPriceSurface& surface, double K, double T) {
    const CallPartials p = surface.partials(K, T);
    const double denom = 0.5 * K * K * p.d2_dK2;
    if (p.d2_dK2 <= surface.convexity_floor())
        throw DegenerateConvexityError(K, T);
    const double rd = surface.domestic_curve().instantaneous_forward(T);
    const double rf = surface.foreign_curve().instantaneous_forward(T);
    return (p.d_dT + (rd - rf) * K * p.d_dK + rf * p.price) / denom;
}

double dupire_local_vol_implied(const ImpliedVolSurface& surface, double K, double T,
                                double rd0, double rf0) {
    const SmilePoint sp = surface.partials(K, T);
    const double s = sp.vol;
    const double sqT = std::sqrt(T);
    const auto [dp, dm] = d_plus_minus(surface.spot(), K, rd0, rf0, s, T);
    (void)dm;
    const double num = s * s + 2.0 * T * s * sp.d_dT + 2.0 * (rd0 - rf0) * K * T * s * sp.d_dK;
    const double a = 1.0 + K * dp * sqT * sp.d_dK;
    const double den = a * a + K * K * T * s * (sp.d2_dK2 - dp * sp.d_dK * sp.d_dK * sqT);
    if (den <= 1e-12) throw DegenerateConvexityError(K, T);
    return num / den;
}

}  // namespace fxlv
