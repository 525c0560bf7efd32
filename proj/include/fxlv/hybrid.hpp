#pragma once

#include <span>
#include <vector>

#include "fxlv/mc_engine.hpp"

namespace fxlv {

// Ornstein-Uhlenbeck stochastic vol factor nu(t):
//   d nu = k (lambda - nu) dt + xi dW_nu   (spot measure)
struct SchobelZhuParams {
    double k = 1.0;
    double lambda = 0.1;
    double xi = 0.0;
    double nu0 = 0.1;
    double rho_S_nu = 0.0;
    double rho_d_nu = 0.0;

    void validate() const;
};

enum class GammaKind { Nu, SqrtNu, ExpSqrtNu };

struct GammaSpec {
    GammaKind kind = GammaKind::Nu;

    double operator()(double nu) const;
    // OU lets nu go negative, so the sqrt-based forms are rejected up front.
    bool needs_nonnegative() const { return kind != GammaKind::Nu; }
};

// Four-factor model: spot vol = local_vol(t,S) * gamma(nu), with local_vol on
// the ThreeFactorModel base playing the leverage function sigma_LOC2.
struct HybridModel {
    ThreeFactorModel base;
    SchobelZhuParams sz;
    GammaSpec gamma;
    double rho_f_nu = 0.0;  // remaining entry of the 4x4 correlation matrix

    void validate() const;
    std::vector<double> cholesky() const;  // 4x4 lower factor, order (S, r_d, r_f, nu)
};

struct SzMoments {
    double mean, variance;
};

// Q_T-forward distribution of nu(T) given nu(t): Gaussian with these moments.
// Needs constant sigma_d (single-knot schedule).
SzMoments sz_tforward_moments(const SchobelZhuParams& params, const HullWhiteParams& hw_d,
                              double t, double T);

// Mimicking vol^2 under spot-vol independence: E[nu(T)]^2 + Var[nu(T)] at (0,T).
double mimic_local_vol_closed_form(const SchobelZhuParams& params,
                                   const HullWhiteParams& hw_d, double T);

struct HybridSample {
    double S, r_d, r_f, nu;
};

std::vector<HybridSample> simulate_hybrid_tforward(const HybridModel& model, double T,
                                                   const SimSpec& spec,
                                                   const LocalVolGrid* vol_override = nullptr);

struct ConditionalEstimate {
    std::vector<double> values;      // E[gamma^2 | S = K] per strike
    std::vector<int> bin_counts;     // population of the final bin
    std::vector<int> widenings;      // doublings applied to the bandwidth
};

// Binned particle estimator (top-hat kernel centered on each strike, bandwidth
// equal to the local strike spacing, widened geometrically on empty bins).
ConditionalEstimate conditional_gamma2(std::span<const HybridSample> samples,
                                       const GammaSpec& gamma,
                                       const std::vector<double>& strike_grid);

// Quadrature-ratio form on a joint density slice phi(S, nu) at fixed t.
struct DensitySlice2 {
    std::vector<double> S_nodes, nu_nodes;
    std::vector<std::vector<double>> phi;  // phi[iS][inu]
};

std::vector<double> conditional_gamma2_density(const DensitySlice2& slice,
                                               const GammaSpec& gamma,
                                               const std::vector<double>& strike_grid);

struct HybridNodeDiag {
    double T, K;
    double e_gamma2;
    int bin_count, widenings;
};

struct HybridCalibrationResult {
    LocalVolGrid grid;  // sigma_LOC2, includes the t=0 boundary row
    std::vector<HybridNodeDiag> diagnostics;
};

// Forward bootstrap: sigma_LOC2(0,.) = sigma_LOC1(0,.)/gamma(nu0), then per t_k
// simulate with the columns filled so far, estimate E[gamma^2 | S=K], divide.
HybridCalibrationResult calibrate_hybrid_loc2(const LocalVolGrid& loc1, const HybridModel& model,
                                              const std::vector<double>& time_grid,
                                              const std::vector<double>& strike_grid,
                                              const SimSpec& spec);

}  // namespace fxlv
