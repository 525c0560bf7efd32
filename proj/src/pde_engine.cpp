#include "fxlv/pde_engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fxlv/errors.hpp"
#include "fxlv/math_utils.hpp"

namespace fxlv {

void PdeSpec::validate() const {
    if (nx < 8 || ny < 8 || nz < 8) throw InputError("mesh needs at least 8 nodes per axis");
    if (!(n_stdev > 1.0)) throw InputError("n_stdev must exceed 1");
    if (!(dt > 0.0)) throw InputError("dt must be positive");
    if (!(mollifier_cells >= 1.0)) throw InputError("mollifier width must be at least one cell");
}

double DensityGrid3::mass() const {
    return pairwise_sum(v) * cell();
}

double DensityGrid3::mean_rd() const {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < y.n; ++j)
            for (int k = 0; k < z.n; ++k) {
                const double w = v[idx(i, j, k)];
                num += y.at(j) * w;
                den += w;
            }
    return num / den;
}

double DensityGrid3::mean_rf() const {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < y.n; ++j)
            for (int k = 0; k < z.n; ++k) {
                const double w = v[idx(i, j, k)];
                num += z.at(k) * w;
                den += w;
            }
    return num / den;
}

double DensityGrid3::mean_spot() const {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < x.n; ++i) {
        const double S = std::exp(x.at(i));
        double slab = 0.0;
        for (int j = 0; j < y.n; ++j)
            for (int k = 0; k < z.n; ++k) slab += v[idx(i, j, k)];
        num += S * slab;
        den += slab;
    }
    return num / den;
}

int DensityGrid3::negative_nodes(double* worst) const {
    int count = 0;
    double w = 0.0;
    for (double q : v)
        if (q < 0.0) {
            ++count;
            w = std::min(w, q);
        }
    if (worst) *worst = w;
    return count;
}

ReducedDensity reduce_density(const DensityGrid3& d) {
    ReducedDensity r;
    r.x = d.x;
    r.z = d.z;
    r.q.assign(static_cast<std::size_t>(d.x.n) * d.z.n, 0.0);
    r.p.assign(d.x.n, 0.0);
    for (int i = 0; i < d.x.n; ++i) {
        for (int k = 0; k < d.z.n; ++k) {
            double s = 0.0;
            for (int j = 0; j < d.y.n; ++j) s += d.v[d.idx(i, j, k)];
            r.q[static_cast<std::size_t>(i) * d.z.n + k] = s * d.y.step;
        }
        double s = 0.0;
        for (int k = 0; k < d.z.n; ++k) s += r.q[static_cast<std::size_t>(i) * d.z.n + k];
        r.p[i] = s * d.z.step;
    }
    return r;
}

double expectation_term_pde(const DensityGrid3& d, double K) {
    if (!(K > 0.0)) throw InputError("strike must be positive");
    const double xk = std::log(K);
    if (xk <= d.x.lo || xk >= d.x.hi())
        throw InputError("strike outside the density mesh");
    double total = 0.0;
    for (int i = 0; i < d.x.n; ++i) {
        // node i owns [x_i - dx/2, x_i + dx/2); weight it by the part above ln K
        const double w =
            std::clamp((d.x.at(i) + 0.5 * d.x.step - xk) / d.x.step, 0.0, 1.0);
        if (w == 0.0) continue;
        const double S = std::exp(d.x.at(i));
        double rd_slab = 0.0, rf_slab = 0.0;
        for (int j = 0; j < d.y.n; ++j) {
            const double yj = d.y.at(j);
            for (int k = 0; k < d.z.n; ++k) {
                const double q = d.v[d.idx(i, j, k)];
                rd_slab += yj * q;
                rf_slab += d.z.at(k) * q;
            }
        }
        total += w * (K * rd_slab - S * rf_slab);
    }
    return total * d.cell();
}

namespace {

double sigma_max(const PiecewiseConstant& s, double T) {
    double m = 0.0;
    for (std::size_t i = 0; i < s.values().size(); ++i)
        if (s.times()[i] <= T || i == 0) m = std::max(m, std::abs(s.values()[i]));
    return m;
}

// Thomas solve for (diag, sub, sup) in place; rhs becomes the solution.
void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
            std::vector<double>& rhs, int n) {
    for (int i = 1; i < n; ++i) {
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (int i = n - 2; i >= 0; --i) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

}  // namespace

ForwardPdeSolver::ForwardPdeSolver(const ThreeFactorModel& model, const PdeSpec& spec,
                                   double horizon, const LocalVolGrid* vol_override)
    : model_(model), spec_(spec), vol_(vol_override ? vol_override : &model.local_vol) {
    spec.validate();
    model.validate();
    if (!(horizon > 0.0)) throw InputError("horizon must be positive");
    theta_d_ = fit_theta(model.hw_d, model.curve_d);
    theta_f_ = fit_theta(model.hw_f, model.curve_f);

    // reference vol scale for the spot axis
    double sbar = 0.05;
    for (int s = 0; s <= 20; ++s)
        sbar = std::max(sbar, vol_->value(horizon * s / 20.0, model.spot));

    const double x0 = std::log(model.spot);
    const double carry = std::log(model.curve_f.discount_factor(horizon) /
                                  model.curve_d.discount_factor(horizon));
    const double mean_shift = carry - 0.5 * sbar * sbar * horizon;
    const double wx = spec.n_stdev * sbar * std::sqrt(horizon);
    d_.x.lo = x0 + std::min(0.0, mean_shift) - wx;
    const double x_hi = x0 + std::max(0.0, mean_shift) + wx;
    d_.x.n = spec.nx;
    d_.x.step = (x_hi - d_.x.lo) / (spec.nx - 1);

    auto rate_axis = [&](const HullWhiteParams& hw, const YieldCurve& curve, double pad,
                         Axis& ax, int n) {
        double flo = hw.r0, fhi = hw.r0;
        for (int s = 0; s <= 50; ++s) {
            const double f = curve.instantaneous_forward(horizon * s / 50.0);
            flo = std::min(flo, f);
            fhi = std::max(fhi, f);
        }
        const double w = spec.n_stdev * std::sqrt(short_rate_variance(hw, horizon)) +
                         0.002 + pad;
        ax.lo = flo - w;
        ax.n = n;
        ax.step = (fhi + w - ax.lo) / (n - 1);
    };
    rate_axis(model.hw_d, model.curve_d, 0.0, d_.y, spec.ny);
    // extra margin for the quanto drift of r_f
    const double quanto_pad =
        std::abs(model.corr.rho_Sf) * sigma_max(model.hw_f.sigma, horizon) * sbar * horizon;
    rate_axis(model.hw_f, model.curve_f, quanto_pad, d_.z, spec.nz);

    // mollified Dirac: product of discrete Gaussians, two cells wide by
    // default. The x center is shifted by -w^2/2 so that E[exp(x)] = S0.
    const double wxm = spec.mollifier_cells * d_.x.step;
    const double wym = spec.mollifier_cells * d_.y.step;
    const double wzm = spec.mollifier_cells * d_.z.step;
    const double xc = x0 - 0.5 * wxm * wxm;
    auto gauss1d = [](const Axis& ax, double c, double w) {
        std::vector<double> g(ax.n, 0.0);
        double s = 0.0;
        // boundary nodes are pinned to zero, so they stay out of the
        // normalization or coarse meshes would start short of mass one
        for (int i = 1; i + 1 < ax.n; ++i) {
            const double u = (ax.at(i) - c) / w;
            g[i] = std::exp(-0.5 * u * u);
            s += g[i];
        }
        for (double& q : g) q /= s * ax.step;
        return g;
    };
    const auto gx = gauss1d(d_.x, xc, wxm);
    const auto gy = gauss1d(d_.y, model.hw_d.r0, wym);
    const auto gz = gauss1d(d_.z, model.hw_f.r0, wzm);
    d_.v.assign(static_cast<std::size_t>(spec.nx) * spec.ny * spec.nz, 0.0);
    for (int i = 0; i < spec.nx; ++i)
        for (int j = 0; j < spec.ny; ++j)
            for (int k = 0; k < spec.nz; ++k) d_.v[d_.idx(i, j, k)] = gx[i] * gy[j] * gz[k];
    d_.t = 0.0;
}

void ForwardPdeSolver::refresh_coeffs(double t) const {
    if (coeff_t_ == t && !sig2_.empty()) return;
    const int nx = d_.x.n;
    sig2_.resize(nx);
    quanto_.resize(nx);
    cxy_.resize(nx);
    cxz_.resize(nx);
    const double sd = model_.hw_d.sigma(t), sf = model_.hw_f.sigma(t);
    for (int i = 0; i < nx; ++i) {
        const double sig = vol_->value(t, std::exp(d_.x.at(i)));
        sig2_[i] = sig * sig;
        quanto_[i] = model_.corr.rho_Sf * sf * sig;
        cxy_[i] = model_.corr.rho_Sd * sd * sig;
        cxz_[i] = model_.corr.rho_Sf * sf * sig;
    }
    cyz_ = model_.corr.rho_df * sd * sf;
    dy_ = sd * sd;
    dz_ = sf * sf;
    thd_ = theta_d_(t);
    thf_ = theta_f_(t);
    fd_ = model_.curve_d.instantaneous_forward(t);
    coeff_t_ = t;
}

void ForwardPdeSolver::apply_ax(double t, const std::vector<double>& in,
                                std::vector<double>& out) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idx2 = 1.0 / (2.0 * d_.x.step), idxx = 1.0 / (2.0 * d_.x.step * d_.x.step);
    const std::size_t sx = static_cast<std::size_t>(ny) * nz;
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 1; j < ny - 1; ++j)
        for (int k = 1; k < nz - 1; ++k) {
            const double yz = d_.y.at(j) - d_.z.at(k);
            std::size_t id = d_.idx(1, j, k);
            for (int i = 1; i < nx - 1; ++i, id += sx) {
                const double mup = yz - 0.5 * sig2_[i + 1];
                const double mum = yz - 0.5 * sig2_[i - 1];
                out[id] = -(mup * in[id + sx] - mum * in[id - sx]) * idx2 +
                          (sig2_[i + 1] * in[id + sx] - 2.0 * sig2_[i] * in[id] +
                           sig2_[i - 1] * in[id - sx]) * idxx;
            }
        }
}

void ForwardPdeSolver::apply_ay(double t, const std::vector<double>& in,
                                std::vector<double>& out) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idy2 = 1.0 / (2.0 * d_.y.step), idyy = dy_ / (2.0 * d_.y.step * d_.y.step);
    const std::size_t sy = nz;
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            const double mup = thd_ - model_.hw_d.alpha * d_.y.at(j + 1);
            const double mum = thd_ - model_.hw_d.alpha * d_.y.at(j - 1);
            const double src = d_.y.at(j) - fd_;
            std::size_t id = d_.idx(i, j, 1);
            for (int k = 1; k < nz - 1; ++k, ++id)
                out[id] = -(mup * in[id + sy] - mum * in[id - sy]) * idy2 +
                          (in[id + sy] - 2.0 * in[id] + in[id - sy]) * idyy - src * in[id];
        }
}

void ForwardPdeSolver::apply_az(double t, const std::vector<double>& in,
                                std::vector<double>& out) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idz2 = 1.0 / (2.0 * d_.z.step), idzz = dz_ / (2.0 * d_.z.step * d_.z.step);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            std::size_t id = d_.idx(i, j, 1);
            for (int k = 1; k < nz - 1; ++k, ++id) {
                const double mup = thf_ - model_.hw_f.alpha * d_.z.at(k + 1) - quanto_[i];
                const double mum = thf_ - model_.hw_f.alpha * d_.z.at(k - 1) - quanto_[i];
                out[id] = -(mup * in[id + 1] - mum * in[id - 1]) * idz2 +
                          (in[id + 1] - 2.0 * in[id] + in[id - 1]) * idzz;
            }
        }
}

void ForwardPdeSolver::apply_mixed(double t, const std::vector<double>& in,
                                   std::vector<double>& out) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const std::size_t sx = static_cast<std::size_t>(ny) * nz, sy = nz;
    const double ixy = 1.0 / (4.0 * d_.x.step * d_.y.step);
    const double ixz = 1.0 / (4.0 * d_.x.step * d_.z.step);
    const double iyz = cyz_ / (4.0 * d_.y.step * d_.z.step);
    std::fill(out.begin(), out.end(), 0.0);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            std::size_t id = d_.idx(i, j, 1);
            for (int k = 1; k < nz - 1; ++k, ++id) {
                const double txy =
                    cxy_[i + 1] * (in[id + sx + sy] - in[id + sx - sy]) -
                    cxy_[i - 1] * (in[id - sx + sy] - in[id - sx - sy]);
                const double txz =
                    cxz_[i + 1] * (in[id + sx + 1] - in[id + sx - 1]) -
                    cxz_[i - 1] * (in[id - sx + 1] - in[id - sx - 1]);
                const double tyz = (in[id + sy + 1] - in[id + sy - 1]) -
                                   (in[id - sy + 1] - in[id - sy - 1]);
                out[id] = txy * ixy + txz * ixz + tyz * iyz;
            }
        }
}

void ForwardPdeSolver::solve_x(double t, double w, std::vector<double>& rhs) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idx2 = 1.0 / (2.0 * d_.x.step), idxx = 1.0 / (2.0 * d_.x.step * d_.x.step);
    const std::size_t sx = static_cast<std::size_t>(ny) * nz;
    const int m = nx - 2;
    std::vector<double> sub(m), diag(m), sup(m), b(m);
    for (int j = 1; j < ny - 1; ++j)
        for (int k = 1; k < nz - 1; ++k) {
            const double yz = d_.y.at(j) - d_.z.at(k);
            for (int i = 1; i < nx - 1; ++i) {
                const double mup = yz - 0.5 * sig2_[i + 1];
                const double mum = yz - 0.5 * sig2_[i - 1];
                const double cm = mum * idx2 + sig2_[i - 1] * idxx;
                const double cc = -2.0 * sig2_[i] * idxx;
                const double cp = -mup * idx2 + sig2_[i + 1] * idxx;
                sub[i - 1] = -w * cm;
                diag[i - 1] = 1.0 - w * cc;
                sup[i - 1] = -w * cp;
                b[i - 1] = rhs[d_.idx(i, j, k)];
            }
            thomas(sub, diag, sup, b, m);
            for (int i = 1; i < nx - 1; ++i) rhs[d_.idx(i, j, k)] = b[i - 1];
        }
}

void ForwardPdeSolver::solve_y(double t, double w, std::vector<double>& rhs) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idy2 = 1.0 / (2.0 * d_.y.step), idyy = dy_ / (2.0 * d_.y.step * d_.y.step);
    const int m = ny - 2;
    std::vector<double> sub(m), diag(m), sup(m), b(m);
    for (int i = 1; i < nx - 1; ++i)
        for (int k = 1; k < nz - 1; ++k) {
            for (int j = 1; j < ny - 1; ++j) {
                const double mup = thd_ - model_.hw_d.alpha * d_.y.at(j + 1);
                const double mum = thd_ - model_.hw_d.alpha * d_.y.at(j - 1);
                const double cm = mum * idy2 + idyy;
                const double cc = -2.0 * idyy - (d_.y.at(j) - fd_);
                const double cp = -mup * idy2 + idyy;
                sub[j - 1] = -w * cm;
                diag[j - 1] = 1.0 - w * cc;
                sup[j - 1] = -w * cp;
                b[j - 1] = rhs[d_.idx(i, j, k)];
            }
            thomas(sub, diag, sup, b, m);
            for (int j = 1; j < ny - 1; ++j) rhs[d_.idx(i, j, k)] = b[j - 1];
        }
}

void ForwardPdeSolver::solve_z(double t, double w, std::vector<double>& rhs) const {
    refresh_coeffs(t);
    const int nx = d_.x.n, ny = d_.y.n, nz = d_.z.n;
    const double idz2 = 1.0 / (2.0 * d_.z.step), idzz = dz_ / (2.0 * d_.z.step * d_.z.step);
    const int m = nz - 2;
    std::vector<double> sub(m), diag(m), sup(m), b(m);
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            for (int k = 1; k < nz - 1; ++k) {
                const double mup = thf_ - model_.hw_f.alpha * d_.z.at(k + 1) - quanto_[i];
                const double mum = thf_ - model_.hw_f.alpha * d_.z.at(k - 1) - quanto_[i];
                const double cm = mum * idz2 + idzz;
                const double cc = -2.0 * idzz;
                const double cp = -mup * idz2 + idzz;
                sub[k - 1] = -w * cm;
                diag[k - 1] = 1.0 - w * cc;
                sup[k - 1] = -w * cp;
                b[k - 1] = rhs[d_.idx(i, j, k)];
            }
            thomas(sub, diag, sup, b, m);
            for (int k = 1; k < nz - 1; ++k) rhs[d_.idx(i, j, k)] = b[k - 1];
        }
}

void ForwardPdeSolver::step(double dt) {
    if (!(dt > 0.0)) throw InputError("dt must be positive");
    const double tm = d_.t + 0.5 * dt;  // coefficients frozen at the midpoint
    refresh_coeffs(tm);

    // sanity bound on the explicit mixed-derivative part
    double cmax_xy = 0.0, cmax_xz = 0.0;
    for (int i = 0; i < d_.x.n; ++i) {
        cmax_xy = std::max(cmax_xy, std::abs(cxy_[i]));
        cmax_xz = std::max(cmax_xz, std::abs(cxz_[i]));
    }
    const double cfl = dt * (cmax_xy / (d_.x.step * d_.y.step) +
                             cmax_xz / (d_.x.step * d_.z.step) +
                             std::abs(cyz_) / (d_.y.step * d_.z.step));
    if (cfl > 1.0)
        throw NumericError("time step too large for the explicit mixed terms (ratio " +
                           std::to_string(cfl) + ")");

    const std::size_t n = d_.v.size();
    std::vector<double> ax(n), ay(n), az(n), am(n), next(n);
    apply_ax(tm, d_.v, ax);
    apply_ay(tm, d_.v, ay);
    apply_az(tm, d_.v, az);
    apply_mixed(tm, d_.v, am);
    for (std::size_t q = 0; q < n; ++q)
        next[q] = d_.v[q] + dt * (ax[q] + ay[q] + az[q] + am[q]);

    const double w = 0.5 * dt;
    for (std::size_t q = 0; q < n; ++q) next[q] -= w * ax[q];
    solve_x(tm, w, next);
    for (std::size_t q = 0; q < n; ++q) next[q] -= w * ay[q];
    solve_y(tm, w, next);
    for (std::size_t q = 0; q < n; ++q) next[q] -= w * az[q];
    solve_z(tm, w, next);

    // zero out roundoff-scale negatives, keep the rest visible in diagnostics
    for (double& q : next) {
        if (q < 0.0) {
            if (q > -1e-12) q = 0.0;
            else worst_negative_ = std::min(worst_negative_, q);
        }
    }
    d_.v.swap(next);
    d_.t += dt;

    const double m = d_.mass();
    if (std::abs(m - 1.0) > 5e-3)
        throw NumericError("density mass drifted to " + std::to_string(m) + " at t=" +
                           std::to_string(d_.t));
}

void ForwardPdeSolver::reset_density(DensityGrid3 d) {
    if (d.v.size() != static_cast<std::size_t>(d.x.n) * d.y.n * d.z.n)
        throw InputError("density buffer does not match its axes");
    d_ = std::move(d);
    coeff_t_ = -1.0;
}

void ForwardPdeSolver::advance_to(double t_target) {
    if (t_target < d_.t - 1e-12) throw InputError("cannot step backwards");
    while (d_.t < t_target - 1e-12) {
        const double remaining = t_target - d_.t;
        const int nsub = std::max(1, static_cast<int>(std::ceil(remaining / spec_.dt - 1e-9)));
        step(remaining / nsub);
    }
}

DensityGrid3 fokker_planck_step(const DensityGrid3& density, const ThreeFactorModel& model,
                                double dt, const LocalVolGrid* vol_override) {
    PdeSpec spec;
    spec.nx = density.x.n;
    spec.ny = density.y.n;
    spec.nz = density.z.n;
    spec.dt = dt;
    ForwardPdeSolver solver(model, spec, std::max(density.t + dt, dt), vol_override);
    solver.reset_density(density);
    solver.step(dt);
    return solver.density();
}

CalibrationResult calibrate_pde(const CallPriceSurface& surface, const ThreeFactorModel& model,
                                const std::vector<double>& time_grid,
                                const std::vector<double>& strike_grid, const PdeSpec& spec) {
    spec.validate();
    model.validate();
    if (time_grid.empty() || strike_grid.empty())
        throw InputError("empty calibration grid");
    if (!(time_grid.front() > 0.0)) throw InputError("time grid must start after 0");

    const std::size_t nt = time_grid.size(), nk = strike_grid.size();
    std::vector<double> det_col(nk);
    for (std::size_t i = 0; i < nk; ++i)
        det_col[i] = sigma_from_variance(
            dupire_local_vol_prices(surface, strike_grid[i], time_grid.front()));
    LocalVolGrid work(time_grid, strike_grid,
                      std::vector<std::vector<double>>(nt, det_col),
                      TimeInterp::LeftConstant);

    CalibrationResult result{work, {}, {}};
    result.exp_term.times = time_grid;
    result.exp_term.strikes = strike_grid;
    result.exp_term.provenance = Provenance::Pde;

    ForwardPdeSolver solver(model, spec, time_grid.back(), &work);

    for (std::size_t k = 0; k < nt; ++k) {
        const double Tk = time_grid[k];
        solver.advance_to(Tk);

        std::vector<double> col(nk), evals(nk), ses(nk, 0.0);
        std::vector<bool> bad(nk, false);
        for (std::size_t i = 0; i < nk; ++i) {
            const double K = strike_grid[i];
            const double e = expectation_term_pde(solver.density(), K);
            evals[i] = e;
            ColumnDiag d{Tk, K, e, 0.0, 0.0, 0.0, false};
            try {
                d.d2C_dK2 = surface.partials(K, Tk).d2_dK2;
                col[i] = sigma_from_variance(extended_local_vol_prices(surface, e, K, Tk));
                d.sigma = col[i];
            } catch (const NumericError&) {
                bad[i] = true;
                d.degenerate = true;
            }
            result.diagnostics.push_back(d);
        }
        for (std::size_t i = 0; i < nk; ++i) {
            if (!bad[i]) continue;
            std::size_t best = nk;
            for (std::size_t j = 0; j < nk; ++j) {
                if (bad[j]) continue;
                if (best == nk || std::abs(strike_grid[j] - strike_grid[i]) <
                                      std::abs(strike_grid[best] - strike_grid[i]))
                    best = j;
            }
            if (best == nk)
                throw NumericError("all strikes degenerate at T=" + std::to_string(Tk));
            col[i] = col[best];
            result.diagnostics[result.diagnostics.size() - nk + i].sigma = col[i];
        }
        work.set_column(k, col);
        result.exp_term.values.push_back(evals);
        result.exp_term.se.push_back(ses);
    }

    result.grid = LocalVolGrid(time_grid, strike_grid, work.values(), TimeInterp::Bilinear);
    return result;
}

}  // namespace fxlv
