#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fxlv/black_scholes.hpp"
#include "fxlv/config.hpp"
#include "fxlv/errors.hpp"
#include "fxlv/hybrid.hpp"
#include "fxlv/io.hpp"
#include "fxlv/mc_engine.hpp"
#include "fxlv/pde_engine.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct LoadedInputs {
    fxlv::YieldCurve curve_d, curve_f;
    std::shared_ptr<const fxlv::ImpliedVolSurface> surface;
};

LoadedInputs load_inputs(const fxlv::RunConfig& rc) {
    return {fxlv::read_curve_csv(rc.domestic_curve_file),
            fxlv::read_curve_csv(rc.foreign_curve_file),
            std::make_shared<const fxlv::ImpliedVolSurface>(
                fxlv::read_surface_csv(rc.surface_file, rc.spot))};
}

fxlv::ThreeFactorModel build_model(const fxlv::RunConfig& rc, const LoadedInputs& in) {
    fxlv::ThreeFactorModel m{rc.hw_d, rc.hw_f, in.curve_d, in.curve_f,
                             rc.spot,  rc.corr, fxlv::LocalVolGrid::constant(0.0)};
    m.validate();
    return m;
}

json input_hashes(const fxlv::RunConfig& rc) {
    json j;
    j["config"] = fxlv::fnv1a_file_hex(rc.config_path);
    j["domestic_curve"] = fxlv::fnv1a_file_hex(rc.domestic_curve_file);
    j["foreign_curve"] = fxlv::fnv1a_file_hex(rc.foreign_curve_file);
    j["surface"] = fxlv::fnv1a_file_hex(rc.surface_file);
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw fxlv::InputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void write_grid_metadata(const fs::path& path, const fxlv::LocalVolGrid& grid,
                         json provenance) {
    json j;
    j["schema_version"] = 1;
    j["time_nodes"] = grid.time_nodes();
    j["spot_nodes"] = grid.spot_nodes();
    j["provenance"] = std::move(provenance);
    write_json(path, j);
}

void write_manifest(const fs::path& out_dir, const fxlv::RunConfig& rc,
                    const std::string& command, const std::vector<std::string>& outputs) {
    json j;
    j["schema_version"] = 1;
    j["version"] = kVersion;
    j["command"] = command;
    j["engine"] = rc.engine;
    j["seed"] = rc.sim.seed;
    j["inputs"] = input_hashes(rc);
    std::ifstream cfg(rc.config_path);
    std::ostringstream ss;
    ss << cfg.rdbuf();
    j["config_text"] = ss.str();
    json outs;
    for (const auto& f : outputs) outs[f] = fxlv::fnv1a_file_hex((out_dir / f).string());
    j["outputs"] = outs;
    write_json(out_dir / "manifest.json", j);
}

fs::path prepare_out_dir(const fxlv::RunConfig& rc) {
    fs::path dir(rc.out_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_dupire(const fxlv::RunConfig& rc) {
    const auto in = load_inputs(rc);
    fxlv::CallPriceSurface prices(in.surface, in.curve_d, in.curve_f);

    std::vector<std::vector<double>> values;
    for (double t : rc.time_grid) {
        std::vector<double> col;
        for (double K : rc.strike_grid)
            col.push_back(fxlv::sigma_from_variance(
                fxlv::dupire_local_vol_prices(prices, K, t)));
        values.push_back(col);
    }
    fxlv::LocalVolGrid grid(rc.time_grid, rc.strike_grid, values);

    const fs::path dir = prepare_out_dir(rc);
    fxlv::write_local_vol_csv((dir / "local_vol.csv").string(), grid);
    json prov;
    prov["kind"] = "dupire-deterministic-rates";
    prov["inputs"] = input_hashes(rc);
    write_grid_metadata(dir / "local_vol.json", grid, prov);
    write_manifest(dir, rc, "dupire", {"local_vol.csv", "local_vol.json"});
    return 0;
}

fxlv::CalibrationResult run_calibration(const fxlv::RunConfig& rc, const LoadedInputs& in,
                                        const fxlv::ThreeFactorModel& model) {
    fxlv::CallPriceSurface prices(in.surface, in.curve_d, in.curve_f);
    if (rc.engine == "pde")
        return fxlv::calibrate_pde(prices, model, rc.time_grid, rc.strike_grid, rc.pde);
    return fxlv::calibrate_mc(prices, model, rc.time_grid, rc.strike_grid, rc.sim);
}

int cmd_calibrate(const fxlv::RunConfig& rc) {
    const auto in = load_inputs(rc);
    const auto model = build_model(rc, in);
    const auto result = run_calibration(rc, in, model);

    const fs::path dir = prepare_out_dir(rc);
    fxlv::write_local_vol_csv((dir / "local_vol.csv").string(), result.grid);
    fxlv::write_diagnostics_csv((dir / "diagnostics.csv").string(), result.diagnostics);
    json prov;
    prov["kind"] = "three-factor-" + rc.engine;
    prov["seed"] = rc.sim.seed;
    prov["inputs"] = input_hashes(rc);
    write_grid_metadata(dir / "local_vol.json", result.grid, prov);
    write_manifest(dir, rc, "calibrate",
                   {"local_vol.csv", "local_vol.json", "diagnostics.csv"});
    return 0;
}

int cmd_hybrid(const fxlv::RunConfig& rc) {
    if (!rc.has_sz)
        throw fxlv::InputError("hybrid command needs an [sz] config section");
    const auto in = load_inputs(rc);
    const auto model3 = build_model(rc, in);

    fxlv::LocalVolGrid loc1 = fxlv::LocalVolGrid::constant(0.0);
    std::string loc1_hash;
    if (!rc.loc1_file.empty()) {
        loc1 = fxlv::read_local_vol_csv(rc.loc1_file);
        loc1_hash = fxlv::fnv1a_file_hex(rc.loc1_file);
    } else {
        loc1 = run_calibration(rc, in, model3).grid;
        loc1_hash = "inline";
    }

    fxlv::HybridModel hybrid{model3, rc.sz, {rc.gamma_kind}, rc.rho_f_nu};
    const auto result = fxlv::calibrate_hybrid_loc2(loc1, hybrid, rc.time_grid,
                                                    rc.strike_grid, rc.sim);

    const fs::path dir = prepare_out_dir(rc);
    fxlv::write_local_vol_csv((dir / "loc2.csv").string(), result.grid);
    {
        std::ofstream out(dir / "hybrid_diagnostics.csv");
        out << "T,K,e_gamma2,bin_count,widenings\n";
        for (const auto& d : result.diagnostics)
            out << fxlv::fmt_double(d.T) << ',' << fxlv::fmt_double(d.K) << ','
                << fxlv::fmt_double(d.e_gamma2) << ',' << d.bin_count << ','
                << d.widenings << '\n';
    }
    json prov;
    prov["kind"] = "hybrid-loc2";
    prov["loc1_hash"] = loc1_hash;
    prov["sz"] = {{"k", rc.sz.k},       {"lambda", rc.sz.lambda},
                  {"xi", rc.sz.xi},     {"nu0", rc.sz.nu0},
                  {"rho_spot_nu", rc.sz.rho_S_nu},
                  {"rho_domestic_nu", rc.sz.rho_d_nu},
                  {"rho_foreign_nu", rc.rho_f_nu}};
    prov["inputs"] = input_hashes(rc);
    write_grid_metadata(dir / "loc2.json", result.grid, prov);

    // repricing check: vanillas under the calibrated hybrid vs the loc1 model
    {
        std::ofstream out(dir / "reprice.csv");
        out << "T,K,iv_loc1,iv_hybrid,diff_bp\n";
        const double T = rc.time_grid.back();
        auto m_loc1 = model3;
        m_loc1.local_vol = loc1;
        fxlv::SimSpec sim = rc.sim;
        const double Pd = in.curve_d.discount_factor(T);
        const double Pf = in.curve_f.discount_factor(T);
        const auto hyb_samples = fxlv::simulate_hybrid_tforward(hybrid, T, sim,
                                                                &result.grid);
        const auto loc_samples = fxlv::simulate_tforward(m_loc1, T, sim);
        for (double K : rc.strike_grid) {
            double p_h = 0.0, p_l = 0.0;
            for (const auto& s : hyb_samples) p_h += std::max(s.S - K, 0.0);
            for (const auto& s : loc_samples) p_l += std::max(s.S - K, 0.0);
            p_h *= Pd / hyb_samples.size();
            p_l *= Pd / loc_samples.size();
            const double iv_l = fxlv::implied_vol_df(p_l, rc.spot, K, Pd, Pf, T);
            const double iv_h = fxlv::implied_vol_df(p_h, rc.spot, K, Pd, Pf, T);
            out << fxlv::fmt_double(T) << ',' << fxlv::fmt_double(K) << ','
                << fxlv::fmt_double(iv_l) << ',' << fxlv::fmt_double(iv_h) << ','
                << fxlv::fmt_double((iv_h - iv_l) * 1e4) << '\n';
        }
    }
    write_manifest(dir, rc, "hybrid",
                   {"loc2.csv", "loc2.json", "hybrid_diagnostics.csv", "reprice.csv"});
    return 0;
}

int cmd_report(const fxlv::RunConfig& rc) {
    const fs::path dir(rc.out_dir);
    if (!fs::exists(dir / "manifest.json"))
        throw fxlv::InputError("no manifest.json in run directory " + dir.string());

    const std::string grid_file =
        fs::exists(dir / "loc2.csv") ? "loc2.csv" : "local_vol.csv";
    if (!fs::exists(dir / grid_file))
        throw fxlv::InputError("no calibration grid in run directory " + dir.string());
    const auto grid = fxlv::read_local_vol_csv((dir / grid_file).string());

    {
        std::ofstream out(dir / "slices.csv");
        out << "slice,time,spot,sigma\n";
        for (std::size_t it = 0; it < grid.time_nodes().size(); ++it)
            for (std::size_t is = 0; is < grid.spot_nodes().size(); ++is)
                out << it << ',' << fxlv::fmt_double(grid.time_nodes()[it]) << ','
                    << fxlv::fmt_double(grid.spot_nodes()[is]) << ','
                    << fxlv::fmt_double(grid.values()[it][is]) << '\n';
    }

    // smile slices from the input surface for plotting alongside the grid
    {
        const auto in = load_inputs(rc);
        std::ofstream out(dir / "smile_slices.csv");
        out << "maturity_years,strike,implied_vol\n";
        for (double T : rc.time_grid)
            for (double K : rc.strike_grid)
                out << fxlv::fmt_double(T) << ',' << fxlv::fmt_double(K) << ','
                    << fxlv::fmt_double(in.surface->vol(K, T)) << '\n';
    }

    int checks = 0, failures = 0;
    std::ofstream sum(dir / "summary.txt");
    auto check = [&](const std::string& name, bool ok) {
        ++checks;
        if (!ok) ++failures;
        sum << (ok ? "PASS " : "FAIL ") << name << '\n';
    };
    bool finite = true, positive = true;
    for (const auto& row : grid.values())
        for (double v : row) {
            if (!std::isfinite(v)) finite = false;
            if (v < 0.0) positive = false;
        }
    check("grid values finite", finite);
    check("grid values nonnegative", positive);
    check("time nodes increasing",
          std::is_sorted(grid.time_nodes().begin(), grid.time_nodes().end()));
    if (fs::exists(dir / "diagnostics.csv")) {
        std::ifstream diag(dir / "diagnostics.csv");
        std::string line;
        std::getline(diag, line);
        int degenerate = 0, rows = 0;
        while (std::getline(diag, line)) {
            ++rows;
            if (!line.empty() && line.back() == '1') ++degenerate;
        }
        check("diagnostics present", rows > 0);
        check("degenerate nodes below 10%", degenerate * 10 <= rows);
    }
    sum << checks << " checks, " << failures << " failures\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FX local volatility calibration"};
    app.require_subcommand(1);

    std::string config_path, engine_override, out_override;
    long long seed_override = -1;
    app.add_option("--config", config_path, "config file")->required();
    app.add_option("--engine", engine_override, "engine override (mc|pde)");
    app.add_option("--out", out_override, "output directory override");
    app.add_option("--seed", seed_override, "seed override");

    auto* dupire = app.add_subcommand("dupire", "deterministic-rate Dupire grid");
    auto* calibrate = app.add_subcommand("calibrate", "three-factor calibration");
    auto* hybrid = app.add_subcommand("hybrid", "four-factor leverage calibration");
    auto* report = app.add_subcommand("report", "summarize a run directory");
    // flags may be given after the subcommand; route them back to the app
    for (auto* sub : {dupire, calibrate, hybrid, report}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        fxlv::RunConfig rc = fxlv::load_run_config(config_path);
        if (!engine_override.empty()) {
            if (engine_override != "mc" && engine_override != "pde")
                throw fxlv::InputError("engine must be mc or pde");
            rc.engine = engine_override;
        }
        if (!out_override.empty()) rc.out_dir = out_override;
        if (seed_override >= 0) rc.sim.seed = static_cast<std::uint64_t>(seed_override);

        if (dupire->parsed()) return cmd_dupire(rc);
        if (calibrate->parsed()) return cmd_calibrate(rc);
        if (hybrid->parsed()) return cmd_hybrid(rc);
        if (report->parsed()) return cmd_report(rc);
        return 2;
    } catch (const fxlv::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const fxlv::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
