#include "fxlv/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fxlv/errors.hpp"

namespace fxlv {

namespace {

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const std::string t = strip(s);
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size())
        throw InputError(where + ": cannot parse number '" + s + "'");
    return v;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& name) {
    Config cfg;
    cfg.name_ = name;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw InputError(name + ":" + std::to_string(line_no) +
                                 ": unterminated section header");
            section = strip(line.substr(1, line.size() - 2));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(name + ":" + std::to_string(line_no) +
                             ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty())
            throw InputError(name + ":" + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

bool Config::has_section(const std::string& section) const {
    return sections_.count(section) > 0;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string Config::get_str(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end() || !it->second.count(key))
        throw InputError(name_ + ": missing [" + section + "] " + key);
    return it->second.at(key);
}

std::string Config::get_str(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? sections_.at(section).at(key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
    return to_double(get_str(section, key), name_ + " [" + section + "] " + key);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
    if (!has(section, key)) return fallback;
    const double v = get_double(section, key);
    const long long r = static_cast<long long>(v);
    if (static_cast<double>(r) != v)
        throw InputError(name_ + " [" + section + "] " + key + ": expected an integer");
    return r;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw InputError(name_ + " [" + section + "] " + key + ": expected true/false");
}

std::vector<double> Config::get_list(const std::string& section,
                                     const std::string& key) const {
    const std::string raw = get_str(section, key);
    std::vector<double> out;
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (strip(item).empty()) continue;
        out.push_back(to_double(item, name_ + " [" + section + "] " + key));
    }
    if (out.empty())
        throw InputError(name_ + " [" + section + "] " + key + ": empty list");
    return out;
}

namespace {

PiecewiseConstant parse_schedule(const std::string& raw, const std::string& where) {
    std::vector<double> times, values;
    std::stringstream ss(raw);
    std::string pair;
    while (ss >> pair) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos)
            throw InputError(where + ": schedule entries are t:value pairs");
        times.push_back(to_double(pair.substr(0, colon), where));
        values.push_back(to_double(pair.substr(colon + 1), where));
    }
    if (times.empty()) throw InputError(where + ": empty schedule");
    return PiecewiseConstant(times, values);
}

HullWhiteParams parse_hw(const Config& cfg, const std::string& section, Currency tag) {
    HullWhiteParams hw;
    hw.alpha = cfg.get_double(section, "alpha");
    hw.sigma = parse_schedule(cfg.get_str(section, "sigma"), "[" + section + "] sigma");
    hw.r0 = cfg.get_double(section, "r0");
    hw.currency_tag = tag;
    hw.validate();
    return hw;
}

GammaKind parse_gamma(const std::string& s) {
    if (s == "nu") return GammaKind::Nu;
    if (s == "sqrt_nu") return GammaKind::SqrtNu;
    if (s == "exp_sqrt_nu") return GammaKind::ExpSqrtNu;
    throw InputError("unknown gamma form '" + s + "' (nu | sqrt_nu | exp_sqrt_nu)");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    const Config cfg = Config::parse_file(path);
    RunConfig rc;
    rc.config_path = path;

    rc.schema_version = static_cast<int>(cfg.get_int("", "schema_version", -1));
    if (rc.schema_version != 1)
        throw InputError(path + ": unsupported schema_version (expected 1)");

    // relative paths in the config resolve against the config's own directory
    const auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
    auto resolve = [&](const std::string& f) {
        if (f.empty()) return f;
        const std::filesystem::path q(f);
        return (q.is_absolute() ? q : base / q).lexically_normal().string();
    };
    rc.domestic_curve_file = resolve(cfg.get_str("data", "domestic_curve"));
    rc.foreign_curve_file = resolve(cfg.get_str("data", "foreign_curve"));
    rc.surface_file = resolve(cfg.get_str("data", "surface"));
    rc.spot = cfg.get_double("data", "spot");
    for (const std::string& f :
         {rc.domestic_curve_file, rc.foreign_curve_file, rc.surface_file})
        if (!std::filesystem::exists(f))
            throw InputError(path + ": referenced file does not exist: " + f);

    rc.hw_d = parse_hw(cfg, "model.domestic", Currency::Domestic);
    rc.hw_f = parse_hw(cfg, "model.foreign", Currency::Foreign);
    rc.corr.rho_Sd = cfg.get_double("model", "rho_spot_domestic", 0.0);
    rc.corr.rho_Sf = cfg.get_double("model", "rho_spot_foreign", 0.0);
    rc.corr.rho_df = cfg.get_double("model", "rho_domestic_foreign", 0.0);

    rc.engine = cfg.get_str("run", "engine", "mc");
    if (rc.engine != "mc" && rc.engine != "pde")
        throw InputError(path + ": engine must be mc or pde");
    rc.time_grid = cfg.get_list("run", "time_grid");
    rc.strike_grid = cfg.get_list("run", "strike_grid");
    rc.out_dir = resolve(cfg.get_str("run", "out_dir", "."));

    if (rc.engine == "mc" && !cfg.has_section("mc"))
        throw InputError(path + ": engine=mc needs an [mc] section");
    if (rc.engine == "pde" && !cfg.has_section("pde"))
        throw InputError(path + ": engine=pde needs a [pde] section");

    rc.sim.n_paths = cfg.get_int("mc", "n_paths", rc.sim.n_paths);
    rc.sim.steps_per_year = static_cast<int>(
        cfg.get_int("mc", "steps_per_year", rc.sim.steps_per_year));
    rc.sim.seed = static_cast<std::uint64_t>(cfg.get_int("mc", "seed", 42));
    const std::string scheme = cfg.get_str("mc", "scheme", "euler-log-spot");
    if (scheme == "euler-log-spot") rc.sim.scheme = Scheme::EulerLogSpot;
    else if (scheme == "euler-spot") rc.sim.scheme = Scheme::EulerSpot;
    else throw InputError(path + ": unknown mc scheme '" + scheme + "'");
    rc.sim.antithetic = cfg.get_bool("mc", "antithetic", false);
    rc.sim.n_threads = static_cast<int>(cfg.get_int("mc", "n_threads", 0));

    rc.pde.nx = static_cast<int>(cfg.get_int("pde", "nx", rc.pde.nx));
    rc.pde.ny = static_cast<int>(cfg.get_int("pde", "ny", rc.pde.ny));
    rc.pde.nz = static_cast<int>(cfg.get_int("pde", "nz", rc.pde.nz));
    rc.pde.n_stdev = cfg.get_double("pde", "n_stdev", rc.pde.n_stdev);
    rc.pde.dt = cfg.get_double("pde", "dt", rc.pde.dt);
    rc.pde.mollifier_cells = cfg.get_double("pde", "mollifier_cells", rc.pde.mollifier_cells);

    if (cfg.has_section("sz")) {
        rc.has_sz = true;
        rc.sz.k = cfg.get_double("sz", "k");
        rc.sz.lambda = cfg.get_double("sz", "lambda");
        rc.sz.xi = cfg.get_double("sz", "xi");
        rc.sz.nu0 = cfg.get_double("sz", "nu0");
        rc.sz.rho_S_nu = cfg.get_double("sz", "rho_spot_nu", 0.0);
        rc.sz.rho_d_nu = cfg.get_double("sz", "rho_domestic_nu", 0.0);
        rc.rho_f_nu = cfg.get_double("sz", "rho_foreign_nu", 0.0);
        rc.gamma_kind = parse_gamma(cfg.get_str("sz", "gamma", "nu"));
        rc.loc1_file = resolve(cfg.get_str("sz", "loc1_grid", ""));
        rc.sz.validate();
    }
    return rc;
}

}  // namespace fxlv
