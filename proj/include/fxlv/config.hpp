#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fxlv/hybrid.hpp"
#include "fxlv/local_vol.hpp"
#include "fxlv/mc_engine.hpp"
#include "fxlv/pde_engine.hpp"

namespace fxlv {

// INI-style config: `key = value` lines under `[section]` headers, `#` comments.
// Nested sections are spelled [a.b].
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& name);

    bool has_section(const std::string& section) const;
    bool has(const std::string& section, const std::string& key) const;

    std::string get_str(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::string name_;
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

struct RunConfig {
    int schema_version = 1;
    std::string config_path;

    std::string domestic_curve_file, foreign_curve_file, surface_file;
    double spot = 1.0;
    HullWhiteParams hw_d, hw_f;
    Correlations corr;

    std::string engine = "mc";  // mc | pde
    SimSpec sim;
    PdeSpec pde;
    std::vector<double> time_grid, strike_grid;
    std::string out_dir = ".";

    bool has_sz = false;
    SchobelZhuParams sz;
    double rho_f_nu = 0.0;
    GammaKind gamma_kind = GammaKind::Nu;
    std::string loc1_file;  // optional precomputed grid for the hybrid command
};

RunConfig load_run_config(const std::string& path);

}  // namespace fxlv
