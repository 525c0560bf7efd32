#pragma once

#include <string>
#include <vector>

#include "fxlv/local_vol.hpp"
#include "fxlv/mc_engine.hpp"
#include "fxlv/pde_engine.hpp"
#include "fxlv/surfaces.hpp"
#include "fxlv/yield_curve.hpp"

namespace fxlv {

// CSV with header `tenor_years,zero_rate`
YieldCurve read_curve_csv(const std::string& path);

// CSV with header `strike,maturity_years,implied_vol`
ImpliedVolSurface read_surface_csv(const std::string& path, double spot);

// CSV with header `time,spot,sigma`, one row per grid node
void write_local_vol_csv(const std::string& path, const LocalVolGrid& grid);
LocalVolGrid read_local_vol_csv(const std::string& path);

// CSV with header `T,K,exp_term,se,d2C_dK2,sigma,degenerate`
void write_diagnostics_csv(const std::string& path, const std::vector<ColumnDiag>& diags);

// CSV with header `x,y,z,phi` (debug export of a density snapshot)
void write_density_csv(const std::string& path, const DensityGrid3& density);

// FNV-1a hash of the file contents, as a fixed-width hex string
std::string fnv1a_file_hex(const std::string& path);
std::string fnv1a_hex(const std::string& data);

// full-precision number formatting used by every writer
std::string fmt_double(double v);

}  // namespace fxlv
