#pragma once

#include <functional>
#include <vector>

#include "fxlv/local_vol.hpp"
#include "fxlv/mc_engine.hpp"

namespace fxlv {

struct Axis {
    double lo = 0.0;
    double step = 1.0;
    int n = 1;
    double at(int i) const { return lo + i * step; }
    double hi() const { return lo + (n - 1) * step; }
};

// Forward joint density phi_F(x, y, z, t) with x = ln S, y = r_d, z = r_f.
struct DensityGrid3 {
    Axis x, y, z;
    std::vector<double> v;  // idx = (i*ny + j)*nz + k
    double t = 0.0;

    std::size_t idx(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * y.n + j) * z.n + k;
    }
    double cell() const { return x.step * y.step * z.step; }
    double mass() const;
    double mean_rd() const;
    double mean_rf() const;
    double mean_spot() const;
    int negative_nodes(double* worst = nullptr) const;
};

struct PdeSpec {
    int nx = 100, ny = 40, nz = 40;
    double n_stdev = 5.0;
    double dt = 0.01;
    double mollifier_cells = 2.0;

    void validate() const;
};

struct ReducedDensity {
    Axis x, z;
    std::vector<double> q;  // q_F(x, z), idx = i*nz + k
    std::vector<double> p;  // p_F(x)
};

ReducedDensity reduce_density(const DensityGrid3& density);

// E^{Q_t}[(r_d K - r_f S) 1_{S>K}] by quadrature against phi_F, with a
// partial-cell weight for the indicator at x = ln K. K must lie inside the
// spot mesh.
double expectation_term_pde(const DensityGrid3& density, double K);

// Douglas ADI (implicit per axis, explicit mixed derivatives) for the forward
// PDE of the t-forward density, including the (r_d - f_d(0,t)) source term.
class ForwardPdeSolver {
public:
    ForwardPdeSolver(const ThreeFactorModel& model, const PdeSpec& spec, double horizon,
                     const LocalVolGrid* vol_override = nullptr);

    void step(double dt);
    void advance_to(double t_target);  // sub-steps of at most spec.dt
    void reset_density(DensityGrid3 d);

    const DensityGrid3& density() const { return d_; }
    double worst_negative() const { return worst_negative_; }

private:
    void apply_ax(double t, const std::vector<double>& in, std::vector<double>& out) const;
    void apply_ay(double t, const std::vector<double>& in, std::vector<double>& out) const;
    void apply_az(double t, const std::vector<double>& in, std::vector<double>& out) const;
    void apply_mixed(double t, const std::vector<double>& in, std::vector<double>& out) const;
    void solve_x(double t, double w, std::vector<double>& rhs) const;
    void solve_y(double t, double w, std::vector<double>& rhs) const;
    void solve_z(double t, double w, std::vector<double>& rhs) const;
    void refresh_coeffs(double t) const;

    const ThreeFactorModel& model_;
    PdeSpec spec_;
    const LocalVolGrid* vol_;
    std::function<double(double)> theta_d_, theta_f_;
    DensityGrid3 d_;
    double worst_negative_ = 0.0;

    // coefficient caches refreshed per step
    mutable double coeff_t_ = -1.0;
    mutable std::vector<double> sig2_;      // sigma^2(t, S_i)
    mutable std::vector<double> quanto_;    // rho_fS sigma_f sigma_i
    mutable std::vector<double> cxy_, cxz_;
    mutable double cyz_ = 0.0, dy_ = 0.0, dz_ = 0.0;
    mutable double thd_ = 0.0, thf_ = 0.0, fd_ = 0.0;
};

// Single forward step of the density (spec operation granularity).
DensityGrid3 fokker_planck_step(const DensityGrid3& density, const ThreeFactorModel& model,
                                double dt, const LocalVolGrid* vol_override = nullptr);

// Deterministic forward bootstrap: march the density, evaluate the expectation
// term each column, feed the local vol back in.
CalibrationResult calibrate_pde(const CallPriceSurface& surface, const ThreeFactorModel& model,
                                const std::vector<double>& time_grid,
                                const std::vector<double>& strike_grid, const PdeSpec& spec);

}  // namespace fxlv
