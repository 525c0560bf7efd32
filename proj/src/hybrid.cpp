#include "fxlv/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "fxlv/math_utils.hpp"
#include "fxlv/rng.hpp"

namespace fxlv {

void SchobelZhuParams::validate() const {
    if (!(k > 0.0)) throw InputError("SZ mean reversion k must be positive");
    if (xi < 0.0) throw InputError("vol-of-vol must be nonnegative");
    if (std::abs(rho_S_nu) > 1.0 || std::abs(rho_d_nu) > 1.0)
        throw InputError("correlation outside [-1, 1]");
}

double GammaSpec::operator()(double nu) const {
    switch (kind) {
        case GammaKind::Nu:
            return nu;
        case GammaKind::SqrtNu:
            if (nu < 0.0) throw NumericError("sqrt gamma hit negative nu");
            return std::sqrt(nu);
        case GammaKind::ExpSqrtNu:
            if (nu < 0.0) throw NumericError("exp-sqrt gamma hit negative nu");
            return std::exp(std::sqrt(nu));
    }
    throw InputError("unknown gamma form");
}

void HybridModel::validate() const {
    base.validate();
    sz.validate();
    if (std::abs(rho_f_nu) > 1.0) throw InputError("correlation outside [-1, 1]");
    if (gamma.needs_nonnegative())
        throw InputError("sqrt-based gamma forms need nonnegative vol dynamics; "
                         "the OU factor admits negative values");
    cholesky();  // PSD check
}

std::vector<double> HybridModel::cholesky() const {
    const auto& c = base.corr;
    std::vector<double> m = {1.0,        c.rho_Sd,   c.rho_Sf,   sz.rho_S_nu,
                             c.rho_Sd,   1.0,        c.rho_df,   sz.rho_d_nu,
                             c.rho_Sf,   c.rho_df,   1.0,        rho_f_nu,
                             sz.rho_S_nu, sz.rho_d_nu, rho_f_nu, 1.0};
    return cholesky_psd(m, 4);
}

SzMoments sz_tforward_moments(const SchobelZhuParams& params, const HullWhiteParams& hw_d,
                              double t, double T) {
    params.validate();
    if (T < t) throw InputError("need T >= t");
    // sigma_d only enters through the measure-change drift, so the single-knot
    // restriction matters only when that drift is active
    if (hw_d.sigma.values().size() != 1 && params.rho_d_nu != 0.0 && params.xi != 0.0)
        throw InputError("closed form needs a constant sigma_d when rho_d_nu != 0");
    const double sd = hw_d.sigma.values().front();
    const double ad = hw_d.alpha;
    const double k = params.k, xi = params.xi, rho = params.rho_d_nu;
    const double dtau = T - t;
    const double ek = std::exp(-k * dtau);

    double cross_level = 0.0, cross_decay = 0.0;
    if (rho != 0.0 && sd != 0.0 && xi != 0.0) {
        if (!(ad > 0.0))
            throw InputError("closed form needs alpha_d > 0 when rho_d_nu != 0");
        cross_level = rho * sd * xi / (ad * k);
        cross_decay = rho * sd * xi / (ad * (ad + k)) *
                      (1.0 - std::exp(-(ad + k) * dtau));
    }
    // nu(t) enters through its spot-measure value; callers pass nu0 via params.
    const double mean = params.nu0 * ek + (params.lambda - cross_level) * (1.0 - ek) +
                        cross_decay;
    const double variance = xi == 0.0 ? 0.0 : xi * xi * (1.0 - std::exp(-2.0 * k * dtau)) /
                                                  (2.0 * k);
    return {mean, variance};
}

double mimic_local_vol_closed_form(const SchobelZhuParams& params,
                                   const HullWhiteParams& hw_d, double T) {
    const SzMoments m = sz_tforward_moments(params, hw_d, 0.0, T);
    return m.mean * m.mean + m.variance;
}

namespace {

void parallel_for(std::int64_t n, int n_threads, const auto& body) {
    int workers = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, 64));
    if (workers == 1 || n < 1024) {
        body(std::int64_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { body(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

struct HybridStep {
    double t, dt, sqdt;
    double theta_d, theta_f;
    double sig_d, sig_f;
    double bd;
    double lambda_fwd;  // Lambda(t) = lambda - rho_dnu sigma_d b_d xi / k
};

std::vector<HybridStep> plan(const HybridModel& model,
                             const std::function<double(double)>& theta_d,
                             const std::function<double(double)>& theta_f, double t0,
                             double t1, double T_measure, int steps_per_year) {
    const int n = std::max(1, static_cast<int>(std::lround((t1 - t0) * steps_per_year)));
    const double dt = (t1 - t0) / n;
    std::vector<HybridStep> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        HybridStep c;
        c.t = t0 + i * dt;
        c.dt = dt;
        c.sqdt = std::sqrt(dt);
        c.theta_d = theta_d(c.t);
        c.theta_f = theta_f(c.t);
        c.sig_d = model.base.hw_d.sigma(c.t);
        c.sig_f = model.base.hw_f.sigma(c.t);
        c.bd = b_factor(model.base.hw_d.alpha, c.t, T_measure);
        c.lambda_fwd = model.sz.lambda -
                       model.sz.rho_d_nu * c.sig_d * c.bd * model.sz.xi / model.sz.k;
        out.push_back(c);
    }
    return out;
}

struct HybridState {
    double x, r_d, r_f, nu;
};

void run_hybrid_segment(const HybridModel& model, const LocalVolGrid& vol,
                        const std::vector<HybridStep>& steps, const SimSpec& spec,
                        std::vector<HybridState>& states) {
    const auto L = model.cholesky();
    const double alpha_d = model.base.hw_d.alpha, alpha_f = model.base.hw_f.alpha;
    const double rho_Sd = model.base.corr.rho_Sd, rho_fS = model.base.corr.rho_Sf;
    const double rho_df = model.base.corr.rho_df;
    const double k_nu = model.sz.k, xi = model.sz.xi;
    const GammaSpec gamma = model.gamma;
    const bool log_scheme = spec.scheme == Scheme::EulerLogSpot;

    parallel_for(spec.n_paths, spec.n_threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            const std::uint64_t stream = spec.antithetic ? p / 2 : p;
            const double sign = (spec.antithetic && (p % 2 == 1)) ? -1.0 : 1.0;
            HybridState st = states[p];
            for (std::size_t i = 0; i < steps.size(); ++i) {
                const HybridStep& c = steps[i];
                const auto z = rng::normal4(spec.seed, 1, stream, i);
                const double zS = sign * L[0] * z[0];
                const double zd = sign * (L[4] * z[0] + L[5] * z[1]);
                const double zf = sign * (L[8] * z[0] + L[9] * z[1] + L[10] * z[2]);
                const double zn = sign * (L[12] * z[0] + L[13] * z[1] + L[14] * z[2] +
                                          L[15] * z[3]);

                const double S = log_scheme ? std::exp(st.x) : st.x;
                const double sig = vol.value(c.t, S) * gamma(st.nu);
                const double drift_common = st.r_d - st.r_f - sig * c.sig_d * c.bd * rho_Sd;
                double x_new;
                if (log_scheme) {
                    x_new = st.x + (drift_common - 0.5 * sig * sig) * c.dt +
                            sig * c.sqdt * zS;
                } else {
                    x_new = st.x * (1.0 + drift_common * c.dt + sig * c.sqdt * zS);
                    x_new = std::max(x_new, 1e-12);
                }
                const double rd_new =
                    st.r_d + (c.theta_d - alpha_d * st.r_d - c.sig_d * c.sig_d * c.bd) * c.dt +
                    c.sig_d * c.sqdt * zd;
                const double rf_new =
                    st.r_f +
                    (c.theta_f - alpha_f * st.r_f - rho_fS * c.sig_f * sig -
                     rho_df * c.sig_f * c.sig_d * c.bd) * c.dt +
                    c.sig_f * c.sqdt * zf;
                const double nu_new =
                    st.nu + k_nu * (c.lambda_fwd - st.nu) * c.dt + xi * c.sqdt * zn;
                st = {x_new, rd_new, rf_new, nu_new};
            }
            states[p] = st;
        }
    });
}

}  // namespace

std::vector<HybridSample> simulate_hybrid_tforward(const HybridModel& model, double T,
                                                   const SimSpec& spec,
                                                   const LocalVolGrid* vol_override) {
    spec.validate();
    model.validate();
    if (!(T > 0.0)) throw InputError("horizon must be positive");
    const auto theta_d = fit_theta(model.base.hw_d, model.base.curve_d);
    const auto theta_f = fit_theta(model.base.hw_f, model.base.curve_f);
    const auto steps = plan(model, theta_d, theta_f, 0.0, T, T, spec.steps_per_year);
    const double x0 = spec.scheme == Scheme::EulerLogSpot ? std::log(model.base.spot)
                                                          : model.base.spot;
    std::vector<HybridState> states(
        spec.n_paths, {x0, model.base.hw_d.r0, model.base.hw_f.r0, model.sz.nu0});
    run_hybrid_segment(model, vol_override ? *vol_override : model.base.local_vol, steps,
                       spec, states);
    std::vector<HybridSample> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double S = spec.scheme == Scheme::EulerLogSpot ? std::exp(states[i].x)
                                                             : states[i].x;
        out[i] = {S, states[i].r_d, states[i].r_f, states[i].nu};
    }
    return out;
}

ConditionalEstimate conditional_gamma2(std::span<const HybridSample> samples,
                                       const GammaSpec& gamma,
                                       const std::vector<double>& strike_grid) {
    if (samples.empty()) throw InputError("empty sample set");
    if (strike_grid.empty()) throw InputError("empty strike grid");
    const std::size_t nk = strike_grid.size();
    constexpr int max_widenings = 10;

    ConditionalEstimate est;
    est.values.resize(nk);
    est.bin_counts.resize(nk);
    est.widenings.resize(nk);
    for (std::size_t i = 0; i < nk; ++i) {
        const double K = strike_grid[i];
        double h;
        if (nk == 1) {
            h = 0.1 * K;
        } else if (i == 0) {
            h = strike_grid[1] - strike_grid[0];
        } else if (i == nk - 1) {
            h = strike_grid[nk - 1] - strike_grid[nk - 2];
        } else {
            h = 0.5 * (strike_grid[i + 1] - strike_grid[i - 1]);
        }
        int widen = 0;
        for (;; ++widen) {
            double sum = 0.0;
            int count = 0;
            const double half = 0.5 * h;
            for (const auto& s : samples) {
                if (std::abs(s.S - K) <= half) {
                    const double g = gamma(s.nu);
                    sum += g * g;
                    ++count;
                }
            }
            if (count > 0) {
                est.values[i] = sum / count;
                est.bin_counts[i] = count;
                est.widenings[i] = widen;
                break;
            }
            if (widen >= max_widenings)
                throw NumericError("empty bin at K=" + std::to_string(K) +
                                   " after bandwidth cap");
            h *= 2.0;
        }
    }
    return est;
}

std::vector<double> conditional_gamma2_density(const DensitySlice2& slice,
                                               const GammaSpec& gamma,
                                               const std::vector<double>& strike_grid) {
    const std::size_t ns = slice.S_nodes.size(), nn = slice.nu_nodes.size();
    if (ns < 2 || nn < 2) throw InputError("density slice needs at least 2x2 nodes");
    if (slice.phi.size() != ns) throw InputError("density slice shape mismatch");
    for (const auto& row : slice.phi)
        if (row.size() != nn) throw InputError("density slice shape mismatch");

    // trapezoid over nu of g(nu) phi(S_i, nu) for g = gamma^2 and g = 1
    auto integrals = [&](std::size_t is, double& num, double& den) {
        num = den = 0.0;
        for (std::size_t j = 0; j + 1 < nn; ++j) {
            const double dnu = slice.nu_nodes[j + 1] - slice.nu_nodes[j];
            const double g0 = gamma(slice.nu_nodes[j]), g1 = gamma(slice.nu_nodes[j + 1]);
            const double p0 = slice.phi[is][j], p1 = slice.phi[is][j + 1];
            num += 0.5 * dnu * (g0 * g0 * p0 + g1 * g1 * p1);
            den += 0.5 * dnu * (p0 + p1);
        }
    };

    std::vector<double> out(strike_grid.size());
    for (std::size_t q = 0; q < strike_grid.size(); ++q) {
        const double K = strike_grid[q];
        if (K < slice.S_nodes.front() || K > slice.S_nodes.back())
            throw InputError("strike outside the density slice");
        const auto it = std::upper_bound(slice.S_nodes.begin(), slice.S_nodes.end(), K);
        const std::size_t hi = std::min<std::size_t>(ns - 1, it - slice.S_nodes.begin());
        const std::size_t lo = hi == 0 ? 0 : hi - 1;
        const double w = hi == lo ? 0.0
                                  : (K - slice.S_nodes[lo]) /
                                        (slice.S_nodes[hi] - slice.S_nodes[lo]);
        double num_lo, den_lo, num_hi, den_hi;
        integrals(lo, num_lo, den_lo);
        integrals(hi, num_hi, den_hi);
        const double num = (1.0 - w) * num_lo + w * num_hi;
        const double den = (1.0 - w) * den_lo + w * den_hi;
        if (!(den > 1e-300)) throw NumericError("vanishing marginal density at the strike");
        out[q] = num / den;
    }
    return out;
}

HybridCalibrationResult calibrate_hybrid_loc2(const LocalVolGrid& loc1, const HybridModel& model,
                                              const std::vector<double>& time_grid,
                                              const std::vector<double>& strike_grid,
                                              const SimSpec& spec) {
    spec.validate();
    model.validate();
    if (time_grid.empty() || strike_grid.empty())
        throw InputError("empty calibration grid");
    if (!(time_grid.front() > 0.0)) throw InputError("time grid must start after 0");
    if (time_grid.back() > loc1.time_nodes().back() + 1e-9)
        throw InputError("time grid extends past the loc1 calibration range");

    const std::size_t nt = time_grid.size(), nk = strike_grid.size();
    const double g0 = model.gamma(model.sz.nu0);
    if (!(std::abs(g0) > 1e-10)) throw NumericError("gamma(nu0) vanishes");

    // work grid nodes: t=0 boundary plus the calibration dates
    std::vector<double> work_times(nt + 1);
    work_times[0] = 0.0;
    std::copy(time_grid.begin(), time_grid.end(), work_times.begin() + 1);
    std::vector<double> col0(nk);
    for (std::size_t i = 0; i < nk; ++i) col0[i] = loc1.value(0.0, strike_grid[i]) / g0;
    LocalVolGrid work(work_times, strike_grid,
                      std::vector<std::vector<double>>(nt + 1, col0),
                      TimeInterp::LeftConstant);

    HybridCalibrationResult result{work, {}};

    for (std::size_t c = 0; c < nt; ++c) {
        const double Tk = time_grid[c];
        const auto samples = simulate_hybrid_tforward(model, Tk, spec, &work);
        const auto cond = conditional_gamma2(samples, model.gamma, strike_grid);
        std::vector<double> col(nk);
        for (std::size_t i = 0; i < nk; ++i) {
            if (cond.values[i] < 1e-10)
                throw NumericError("degenerate conditional expectation at T=" +
                                   std::to_string(Tk) + " K=" +
                                   std::to_string(strike_grid[i]));
            col[i] = loc1.value(Tk, strike_grid[i]) / std::sqrt(cond.values[i]);
            result.diagnostics.push_back(
                {Tk, strike_grid[i], cond.values[i], cond.bin_counts[i], cond.widenings[i]});
        }
        work.set_column(c + 1, col);
    }

    result.grid = LocalVolGrid(work_times, strike_grid, work.values(), TimeInterp::Bilinear);
    return result;
}

}  // namespace fxlv
