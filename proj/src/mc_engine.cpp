#include "fxlv/mc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fxlv/math_utils.hpp"
#include "fxlv/rng.hpp"

namespace fxlv {

void SimSpec::validate() const {
    if (n_paths < 2) throw InputError("n_paths must be at least 2");
    if (steps_per_year < 1) throw InputError("steps_per_year must be at least 1");
    if (antithetic && n_paths % 2 != 0)
        throw InputError("antithetic sampling needs an even path count");
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

struct StepCoeffs {
    double t, dt, sqdt;
    double theta_d, theta_f;
    double sig_d, sig_f;
    double bd, bf;  // b factors towards the measure horizon
};

struct SegmentPlan {
    std::vector<StepCoeffs> steps;
    std::uint64_t step_offset;  // absolute step index of the first step
};

SegmentPlan plan_segment(const ThreeFactorModel& model,
                         const std::function<double(double)>& theta_d,
                         const std::function<double(double)>& theta_f, double t0,
                         double t1, double T_measure, int steps_per_year,
                         std::uint64_t step_offset) {
    const int n = std::max(1, static_cast<int>(std::lround((t1 - t0) * steps_per_year)));
    const double dt = (t1 - t0) / n;
    SegmentPlan plan;
    plan.step_offset = step_offset;
    plan.steps.reserve(n);
    for (int k = 0; k < n; ++k) {
        StepCoeffs c;
        c.t = t0 + k * dt;
        c.dt = dt;
        c.sqdt = std::sqrt(dt);
        c.theta_d = theta_d(c.t);
        c.theta_f = theta_f(c.t);
        c.sig_d = model.hw_d.sigma(c.t);
        c.sig_f = model.hw_f.sigma(c.t);
        c.bd = b_factor(model.hw_d.alpha, c.t, T_measure);
        c.bf = b_factor(model.hw_f.alpha, c.t, T_measure);
        plan.steps.push_back(c);
    }
    return plan;
}

struct PathState {
    double x;  // ln S (EulerLogSpot) or S (EulerSpot)
    double r_d, r_f;
};

// Advance all paths through one segment under the Q_T drifts encoded in plan.
void run_segment(const ThreeFactorModel& model, const LocalVolGrid& vol,
                 const SegmentPlan& plan, const SimSpec& spec,
                 std::vector<PathState>& states) {
    const auto L = model.cholesky();
    const double alpha_d = model.hw_d.alpha, alpha_f = model.hw_f.alpha;
    const double rho_Sd = model.corr.rho_Sd, rho_fS = model.corr.rho_Sf;
    const double rho_df = model.corr.rho_df;
    const bool log_scheme = spec.scheme == Scheme::EulerLogSpot;

    parallel_for(spec.n_paths, spec.n_threads, [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t p = lo; p < hi; ++p) {
            const std::uint64_t stream = spec.antithetic ? p / 2 : p;
            const double sign = (spec.antithetic && (p % 2 == 1)) ? -1.0 : 1.0;
            PathState st = states[p];
            for (std::size_t k = 0; k < plan.steps.size(); ++k) {
                const StepCoeffs& c = plan.steps[k];
                const auto z = rng::normal4(spec.seed, 0, stream, plan.step_offset + k);
                const double zS = sign * L[0] * z[0];
                const double zd = sign * (L[3] * z[0] + L[4] * z[1]);
                const double zf = sign * (L[6] * z[0] + L[7] * z[1] + L[8] * z[2]);

                const double S = log_scheme ? std::exp(st.x) : st.x;
                const double sig = vol.value(c.t, S);
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
                st = {x_new, rd_new, rf_new};
            }
            states[p] = st;
        }
    });
}

std::vector<PathState> initial_states(const ThreeFactorModel& model, const SimSpec& spec) {
    const double x0 = spec.scheme == Scheme::EulerLogSpot ? std::log(model.spot) : model.spot;
    return std::vector<PathState>(spec.n_paths, {x0, model.hw_d.r0, model.hw_f.r0});
}

std::vector<StateSample> to_samples(const std::vector<PathState>& states, Scheme scheme) {
    std::vector<StateSample> out(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double S = scheme == Scheme::EulerLogSpot ? std::exp(states[i].x) : states[i].x;
        out[i] = {S, states[i].r_d, states[i].r_f};
    }
    return out;
}

McEstimate mean_and_se(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = pairwise_sum(v) / n;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
    const double var = pairwise_sum(sq) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

}  // namespace

std::vector<StateSample> simulate_tforward(const ThreeFactorModel& model, double T,
                                           const SimSpec& spec,
                                           const LocalVolGrid* vol_override) {
    spec.validate();
    model.validate();
    if (!(T > 0.0)) throw InputError("horizon must be positive");
    const auto theta_d = fit_theta(model.hw_d, model.curve_d);
    const auto theta_f = fit_theta(model.hw_f, model.curve_f);
    const auto plan =
        plan_segment(model, theta_d, theta_f, 0.0, T, T, spec.steps_per_year, 0);
    auto states = initial_states(model, spec);
    run_segment(model, vol_override ? *vol_override : model.local_vol, plan, spec, states);
    return to_samples(states, spec.scheme);
}

McEstimate expectation_term_mc(std::span<const StateSample> samples, double K) {
    if (samples.empty()) throw InputError("empty sample set");
    std::vector<double> g(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        g[i] = s.S > K ? s.r_d * K - s.r_f * s.S : 0.0;
    }
    return mean_and_se(g);
}

McEstimate price_call_mc(const ThreeFactorModel& model, double K, double T,
                         const SimSpec& spec, const LocalVolGrid* vol_override) {
    const auto samples = simulate_tforward(model, T, spec, vol_override);
    std::vector<double> payoff(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        payoff[i] = std::max(samples[i].S - K, 0.0);
    McEstimate est = mean_and_se(payoff);
    const double Pd = model.curve_d.discount_factor(T);
    return {Pd * est.value, Pd * est.se};
}

CalibrationResult calibrate_mc(const CallPriceSurface& surface, const ThreeFactorModel& model,
                               const std::vector<double>& time_grid,
                               const std::vector<double>& strike_grid, const SimSpec& spec,
                               BootstrapMode mode) {
    spec.validate();
    model.validate();
    if (time_grid.empty() || strike_grid.empty())
        throw InputError("empty calibration grid");
    if (!(time_grid.front() > 0.0)) throw InputError("time grid must start after 0");

    const std::size_t nt = time_grid.size(), nk = strike_grid.size();

    // Seed every column with the deterministic-rate Dupire vol at T_1; only the
    // first column is ever read before being overwritten.
    std::vector<double> det_col(nk);
    for (std::size_t i = 0; i < nk; ++i)
        det_col[i] = sigma_from_variance(
            dupire_local_vol_prices(surface, strike_grid[i], time_grid.front()));
    LocalVolGrid work(time_grid, strike_grid,
                      std::vector<std::vector<double>>(nt, det_col),
                      TimeInterp::LeftConstant);

    const auto theta_d = fit_theta(model.hw_d, model.curve_d);
    const auto theta_f = fit_theta(model.hw_f, model.curve_f);

    CalibrationResult result{work, {}, {}};
    result.exp_term.times = time_grid;
    result.exp_term.strikes = strike_grid;
    result.exp_term.provenance = Provenance::Mc;

    auto states = initial_states(model, spec);

    for (std::size_t k = 0; k < nt; ++k) {
        const double Tk = time_grid[k];
        if (mode == BootstrapMode::ResimulateFromZero) {
            states = initial_states(model, spec);
            const auto plan = plan_segment(model, theta_d, theta_f, 0.0, Tk, Tk,
                                           spec.steps_per_year, 0);
            run_segment(model, work, plan, spec, states);
        } else {
            const double t0 = k == 0 ? 0.0 : time_grid[k - 1];
            const std::uint64_t offset = static_cast<std::uint64_t>(
                std::llround(t0 * spec.steps_per_year));
            const auto plan = plan_segment(model, theta_d, theta_f, t0, Tk, Tk,
                                           spec.steps_per_year, offset);
            run_segment(model, work, plan, spec, states);
        }
        const auto samples = to_samples(states, spec.scheme);

        std::vector<double> col(nk);
        std::vector<bool> bad(nk, false);
        std::vector<double> evals(nk), ses(nk);
        for (std::size_t i = 0; i < nk; ++i) {
            const double K = strike_grid[i];
            const McEstimate e = expectation_term_mc(samples, K);
            evals[i] = e.value;
            ses[i] = e.se;
            ColumnDiag d{Tk, K, e.value, e.se, 0.0, 0.0, false};
            try {
                d.d2C_dK2 = surface.partials(K, Tk).d2_dK2;
                const double var = extended_local_vol_prices(surface, e.value, K, Tk);
                col[i] = sigma_from_variance(var);
                d.sigma = col[i];
            } catch (const NumericError&) {
                bad[i] = true;
                d.degenerate = true;
            }
            result.diagnostics.push_back(d);
        }
        // nearest-neighbor fill in K for flagged nodes
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

    // published grid uses the documented bilinear interpolation
    result.grid = LocalVolGrid(time_grid, strike_grid, work.values(), TimeInterp::Bilinear);
    return result;
}

}  // namespace fxlv
