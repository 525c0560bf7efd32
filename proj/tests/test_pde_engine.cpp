#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "fxlv/pde_engine.hpp"

using namespace fxlv;

namespace {

ThreeFactorModel det_model(double rd, double rf, double sigma) {
    return ThreeFactorModel{{0.05, PiecewiseConstant(0.0), rd},
                            {0.05, PiecewiseConstant(0.0), rf},
                            YieldCurve::flat(rd),
                            YieldCurve::flat(rf),
                            1.0,
                            {},
                            LocalVolGrid::constant(sigma)};
}

ThreeFactorModel stoch_model() {
    return ThreeFactorModel{{0.05, PiecewiseConstant(0.01), 0.03},
                            {0.03, PiecewiseConstant(0.008), 0.01},
                            YieldCurve::flat(0.03),
                            YieldCurve::flat(0.01),
                            1.0,
                            {0.3, -0.2, 0.25},
                            LocalVolGrid::constant(0.15)};
}

// separable Gaussian test density on a given mesh
DensityGrid3 gaussian_density(Axis x, Axis y, Axis z, double mx, double sx, double my,
                              double sy, double mz, double sz) {
    DensityGrid3 d;
    d.x = x;
    d.y = y;
    d.z = z;
    d.v.assign(std::size_t(x.n) * y.n * z.n, 0.0);
    auto g = [](double u, double m, double s) {
        const double q = (u - m) / s;
        return std::exp(-0.5 * q * q) / (s * std::sqrt(2.0 * M_PI));
    };
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < y.n; ++j)
            for (int k = 0; k < z.n; ++k)
                d.v[d.idx(i, j, k)] =
                    g(x.at(i), mx, sx) * g(y.at(j), my, sy) * g(z.at(k), mz, sz);
    return d;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

TEST_CASE("density moments and reductions on a separable gaussian") {
    const Axis x{-1.5, 2.8 / 120, 121}, y{-0.05, 0.16 / 80, 81}, z{-0.06, 0.16 / 80, 81};
    const double mx = -0.1, sx = 0.2, my = 0.03, sy = 0.012, mz = 0.01, sz = 0.013;
    auto d = gaussian_density(x, y, z, mx, sx, my, sy, mz, sz);
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.mean_rd() == doctest::Approx(my).epsilon(1e-6));
    CHECK(d.mean_rf() == doctest::Approx(mz).epsilon(1e-6));
    // E[S] = E[e^x] for lognormal x
    CHECK(d.mean_spot() == doctest::Approx(std::exp(mx + 0.5 * sx * sx)).epsilon(1e-4));

    const auto red = reduce_density(d);
    REQUIRE(red.p.size() == std::size_t(x.n));
    REQUIRE(red.q.size() == std::size_t(x.n) * z.n);
    // p integrates to the mass, q to p
    double pm = 0;
    for (int i = 0; i < x.n; ++i) pm += red.p[i] * x.step;
    CHECK(pm == doctest::Approx(d.mass()).epsilon(1e-12));
    for (int i : {10, 60, 110}) {
        double qi = 0;
        for (int k = 0; k < z.n; ++k) qi += red.q[std::size_t(i) * z.n + k] * z.step;
        CHECK(qi == doctest::Approx(red.p[i]).epsilon(1e-12));
    }
    CHECK(d.negative_nodes() == 0);
}

TEST_CASE("expectation term quadrature matches the analytic gaussian value") {
    const Axis x{-1.2, 2.4 / 160, 161}, y{-0.05, 0.16 / 60, 61}, z{-0.06, 0.16 / 60, 61};
    const double mx = 0.0, sx = 0.25, my = 0.03, sy = 0.01, mz = 0.012, sz = 0.011;
    auto d = gaussian_density(x, y, z, mx, sx, my, sy, mz, sz);
    // independent factors: E[(rd K - rf S)1_{S>K}] =
    //   my K P(x > lnK) - mz E[e^x 1_{x > lnK}]
    const double K = 1.05, lnK = std::log(K);
    auto ncdf = [](double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); };
    const double p_above = ncdf((mx - lnK) / sx);
    const double e_s_above =
        std::exp(mx + 0.5 * sx * sx) * ncdf((mx + sx * sx - lnK) / sx);
    const double ref = my * K * p_above - mz * e_s_above;
    CHECK(expectation_term_pde(d, K) == doctest::Approx(ref).epsilon(2e-4));
    // strike outside the mesh is a contract violation
    CHECK_THROWS_AS(expectation_term_pde(d, 5.0), InputError);
    CHECK_THROWS_AS(expectation_term_pde(d, 0.05), InputError);
}

TEST_CASE("initial density mollifier: mass one, forward-consistent spot mean") {
    auto m = stoch_model();
    PdeSpec spec;
    spec.nx = 80;
    spec.ny = 30;
    spec.nz = 30;
    ForwardPdeSolver solver(m, spec, 2.0);
    const auto& d = solver.density();
    CHECK(d.t == 0.0);
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d.mean_spot() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(d.mean_rd() == doctest::Approx(0.03).epsilon(1e-8));
    CHECK(d.mean_rf() == doctest::Approx(0.01).epsilon(1e-8));
    CHECK(d.negative_nodes() == 0);
}

TEST_CASE("deterministic-rate limit reproduces the lognormal expectation term") {
    // sigma_d = sigma_f = 0: rates stay put, S is lognormal with vol 0.2;
    // E[(rd K - rf S)1] has the closed form used in the gaussian test
    auto m = det_model(0.03, 0.01, 0.2);
    PdeSpec spec;
    spec.nx = 120;
    // degenerate rate axes keep the mollifier bump forever; 16 nodes keep the
    // boundary advection leak well under the mass guard
    spec.ny = 16;
    spec.nz = 16;
    spec.dt = 0.005;
    const double T = 1.0;
    ForwardPdeSolver solver(m, spec, T);
    solver.advance_to(T);
    const auto& d = solver.density();
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(2e-3));
    const double K = 1.0, lnK = 0.0;
    const double mx = (0.03 - 0.01 - 0.5 * 0.04) * T, sx = 0.2 * std::sqrt(T);
    auto ncdf = [](double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); };
    const double ref = 0.03 * K * ncdf((mx - lnK) / sx) -
                       0.01 * std::exp(mx + 0.5 * sx * sx) *
                           ncdf((mx + sx * sx - lnK) / sx);
    CHECK(std::abs(expectation_term_pde(d, K) - ref) < 1e-3);
}

TEST_CASE("rate marginal matches the hull-white forward-measure law") {
    // small spot vol so x stays comfortably inside the mesh; the y marginal
    // must land on mean f_d(0,T) and the closed-form variance
    auto m = stoch_model();
    m.local_vol = LocalVolGrid::constant(0.05);
    PdeSpec spec;
    spec.nx = 60;
    spec.ny = 50;
    spec.nz = 30;
    spec.dt = 0.01;
    const double T = 2.0;
    ForwardPdeSolver solver(m, spec, T);
    solver.advance_to(T);
    const auto& d = solver.density();
    CHECK(d.mass() == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(std::abs(d.mean_rd() - 0.03) < 2e-4);
    // second moment of the y marginal
    double m2 = 0;
    for (int i = 0; i < d.x.n; ++i)
        for (int j = 0; j < d.y.n; ++j)
            for (int k = 0; k < d.z.n; ++k) {
                const double y = d.y.at(j);
                m2 += y * y * d.v[d.idx(i, j, k)];
            }
    m2 *= d.cell();
    const double mean = d.mean_rd();
    const double var = m2 / d.mass() - mean * mean;
    CHECK(var == doctest::Approx(short_rate_variance(m.hw_d, T)).epsilon(0.02));
    // transient undershoots near the peaked initial condition are allowed, but
    // the final density should carry essentially no negative mass
    double neg_mass = 0.0;
    for (double v : d.v)
        if (v < 0.0) neg_mass += v;
    neg_mass *= d.cell();
    CHECK(std::abs(neg_mass) < 1e-6);
    CHECK(solver.worst_negative() > -1e-1);
}

TEST_CASE("fokker_planck_step advances time and conserves mass") {
    auto m = stoch_model();
    PdeSpec spec;
    spec.nx = 60;
    spec.ny = 24;
    spec.nz = 24;
    ForwardPdeSolver solver(m, spec, 1.0);
    auto d0 = solver.density();
    auto d1 = fokker_planck_step(d0, m, 0.01);
    CHECK(d1.t == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(d1.mass() == doctest::Approx(d0.mass()).epsilon(1e-3));
    // reset_density round trip
    solver.reset_density(d1);
    CHECK(solver.density().t == doctest::Approx(0.01).epsilon(1e-12));
    DensityGrid3 bad = d1;
    bad.v.pop_back();
    CHECK_THROWS_AS(solver.reset_density(bad), InputError);
}

TEST_CASE("spec validation") {
    PdeSpec spec;
    spec.nx = 2;
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = PdeSpec{};
    spec.dt = 0.0;
    CHECK_THROWS_AS(spec.validate(), InputError);
    spec = PdeSpec{};
    spec.n_stdev = 0.0;
    CHECK_THROWS_AS(spec.validate(), InputError);
}

TEST_CASE("calibrate_pde recovers a flat smile on a coarse mesh") {
    auto m = stoch_model();
    m.hw_d.sigma = PiecewiseConstant(0.004);
    m.hw_f.sigma = PiecewiseConstant(0.004);
    auto iv = std::make_shared<const ImpliedVolSurface>(
        linspace(0.7, 1.4, 15), std::vector<double>{0.5, 1.0},
        std::vector<std::vector<double>>(2, std::vector<double>(15, 0.15)), 1.0);
    CallPriceSurface surface(iv, m.curve_d, m.curve_f);
    PdeSpec spec;
    spec.nx = 70;
    spec.ny = 20;
    spec.nz = 20;
    spec.dt = 0.02;
    const std::vector<double> times = {0.5, 1.0};
    const std::vector<double> strikes = linspace(0.85, 1.2, 8);
    const auto res = calibrate_pde(surface, m, times, strikes, spec);
    CHECK(res.grid.time_interp() == TimeInterp::Bilinear);
    REQUIRE(res.diagnostics.size() == times.size() * strikes.size());
    for (const auto& d : res.diagnostics) {
        CHECK(d.se == 0.0);
        CHECK(std::isfinite(d.sigma));
    }
    CHECK(res.exp_term.provenance == Provenance::Pde);
    for (double K : {0.95, 1.0, 1.1}) {
        CHECK(res.grid.value(0.5, K) == doctest::Approx(0.15).epsilon(0.02));
        CHECK(res.grid.value(1.0, K) == doctest::Approx(0.15).epsilon(0.02));
    }
}
