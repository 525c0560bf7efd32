#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fxlv/local_vol.hpp"

namespace fxlv {

enum class Scheme { EulerLogSpot, EulerSpot };

struct SimSpec {
    std::int64_t n_paths = 100000;
    int steps_per_year = 50;
    std::uint64_t seed = 42;
    Scheme scheme = Scheme::EulerLogSpot;
    bool antithetic = false;
    int n_threads = 0;  // 0: hardware concurrency

    void validate() const;
};

struct StateSample {
    double S, r_d, r_f;
};

struct McEstimate {
    double value, se;
};

// Simulate (S, r_d, r_f) from 0 to the horizon T under the T-forward measure.
// vol_override replaces model.local_vol when given (used by the bootstrap).
std::vector<StateSample> simulate_tforward(const ThreeFactorModel& model, double T,
                                           const SimSpec& spec,
                                           const LocalVolGrid* vol_override = nullptr);

// (1/n) sum (r_d^i K - r_f^i S^i) 1_{S^i > K} with its standard error.
McEstimate expectation_term_mc(std::span<const StateSample> samples, double K);

// P_d(0,T) E^{Q_T}[(S(T) - K)^+], estimated on a fresh path set.
McEstimate price_call_mc(const ThreeFactorModel& model, double K, double T,
                         const SimSpec& spec, const LocalVolGrid* vol_override = nullptr);

struct ColumnDiag {
    double T, K;
    double exp_term, se;
    double d2C_dK2;
    double sigma;
    bool degenerate = false;  // node was filled by nearest neighbor in K
};

struct CalibrationResult {
    LocalVolGrid grid;
    std::vector<ColumnDiag> diagnostics;
    ExpectationTerm exp_term;
};

// Per-horizon measure handling for the forward bootstrap. ResimulateFromZero
// redraws paths with the correct Q_{T_k} drifts for every horizon;
// IncrementalPaths extends the previous horizon's paths, mixing measures.
enum class BootstrapMode { ResimulateFromZero, IncrementalPaths };

CalibrationResult calibrate_mc(const CallPriceSurface& surface, const ThreeFactorModel& model,
                               const std::vector<double>& time_grid,
                               const std::vector<double>& strike_grid, const SimSpec& spec,
                               BootstrapMode mode = BootstrapMode::ResimulateFromZero);

}  // namespace fxlv
