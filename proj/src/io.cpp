#include "fxlv/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fxlv/errors.hpp"

namespace fxlv {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& raw, const std::string& path, int line) {
    const std::string s = strip(raw);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw InputError(path + ":" + std::to_string(line) + ": cannot parse number '" +
                         raw + "'");
    return v;
}

struct CsvReader {
    std::ifstream in;
    std::string path;
    int line_no = 0;

    CsvReader(const std::string& p, const std::string& header) : in(p), path(p) {
        if (!in) throw InputError("cannot open " + p);
        std::string header_line;
        if (!std::getline(in, header_line))
            throw InputError(p + ": empty file");
        ++line_no;
        if (strip(header_line) != header)
            throw InputError(p + ":1: expected header '" + header + "', got '" +
                             strip(header_line) + "'");
    }

    bool next(std::vector<double>& fields, std::size_t n) {
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (strip(line).empty()) continue;
            const auto parts = split(line, ',');
            if (parts.size() != n)
                throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                                 std::to_string(n) + " fields, got " +
                                 std::to_string(parts.size()));
            fields.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                fields[i] = parse_double(parts[i], path, line_no);
            return true;
        }
        return false;
    }
};

}  // namespace

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

YieldCurve read_curve_csv(const std::string& path) {
    CsvReader r(path, "tenor_years,zero_rate");
    std::vector<double> t, z, f;
    while (r.next(f, 2)) {
        t.push_back(f[0]);
        z.push_back(f[1]);
    }
    if (t.empty()) throw InputError(path + ": no pillars");
    return YieldCurve(t, z);
}

ImpliedVolSurface read_surface_csv(const std::string& path, double spot) {
    CsvReader r(path, "strike,maturity_years,implied_vol");
    std::map<double, std::map<double, double>> rows;  // T -> K -> vol
    std::vector<double> f;
    while (r.next(f, 3)) rows[f[1]][f[0]] = f[2];
    if (rows.empty()) throw InputError(path + ": no quotes");

    const auto& first_smile = rows.begin()->second;
    std::vector<double> strikes;
    for (const auto& [k, v] : first_smile) strikes.push_back(k);
    std::vector<double> maturities;
    std::vector<std::vector<double>> vols;
    for (const auto& [T, smile] : rows) {
        if (smile.size() != strikes.size())
            throw InputError(path + ": ragged strike grid at maturity " + fmt_double(T));
        std::vector<double> row;
        std::size_t i = 0;
        for (const auto& [k, v] : smile) {
            if (k != strikes[i++])
                throw InputError(path + ": strike grids differ across maturities");
            row.push_back(v);
        }
        maturities.push_back(T);
        vols.push_back(row);
    }
    return ImpliedVolSurface(strikes, maturities, vols, spot);
}

void write_local_vol_csv(const std::string& path, const LocalVolGrid& grid) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "time,spot,sigma\n";
    for (std::size_t it = 0; it < grid.time_nodes().size(); ++it)
        for (std::size_t is = 0; is < grid.spot_nodes().size(); ++is)
            out << fmt_double(grid.time_nodes()[it]) << ','
                << fmt_double(grid.spot_nodes()[is]) << ','
                << fmt_double(grid.values()[it][is]) << '\n';
}

LocalVolGrid read_local_vol_csv(const std::string& path) {
    CsvReader r(path, "time,spot,sigma");
    std::map<double, std::map<double, double>> rows;
    std::vector<double> f;
    while (r.next(f, 3)) rows[f[0]][f[1]] = f[2];
    if (rows.empty()) throw InputError(path + ": empty grid");

    std::vector<double> spots;
    for (const auto& [s, v] : rows.begin()->second) spots.push_back(s);
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    for (const auto& [t, col] : rows) {
        if (col.size() != spots.size())
            throw InputError(path + ": ragged spot grid at time " + fmt_double(t));
        std::vector<double> row;
        for (const auto& [s, v] : col) row.push_back(v);
        times.push_back(t);
        values.push_back(row);
    }
    return LocalVolGrid(times, spots, values, TimeInterp::Bilinear);
}

void write_diagnostics_csv(const std::string& path, const std::vector<ColumnDiag>& diags) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "T,K,exp_term,se,d2C_dK2,sigma,degenerate\n";
    for (const auto& d : diags)
        out << fmt_double(d.T) << ',' << fmt_double(d.K) << ',' << fmt_double(d.exp_term)
            << ',' << fmt_double(d.se) << ',' << fmt_double(d.d2C_dK2) << ','
            << fmt_double(d.sigma) << ',' << (d.degenerate ? 1 : 0) << '\n';
}

void write_density_csv(const std::string& path, const DensityGrid3& d) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    out << "x,y,z,phi\n";
    for (int i = 0; i < d.x.n; ++i)
        for (int j = 0; j < d.y.n; ++j)
            for (int k = 0; k < d.z.n; ++k)
                out << fmt_double(d.x.at(i)) << ',' << fmt_double(d.y.at(j)) << ','
                    << fmt_double(d.z.at(k)) << ',' << fmt_double(d.v[d.idx(i, j, k)])
                    << '\n';
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fnv1a_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

}  // namespace fxlv
