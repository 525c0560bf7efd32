#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fxlv/errors.hpp"

namespace fxlv {

inline double norm_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

// Deterministic summation independent of how the array was filled.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 128) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

// Cholesky factor of a symmetric PSD matrix (row-major n x n). Lower triangular.
// Pivots in [-1e-12, 0] are clamped to zero so degenerate correlations are allowed.
std::vector<double> cholesky_psd(const std::vector<double>& a, int n);

// Natural cubic spline with flat extrapolation (value clamped, derivatives zero
// outside the knot range).
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double value(double q) const;
    double deriv(double q) const;
    double deriv2(double q) const;

private:
    std::vector<double> x_, y_, m_;  // m_: second derivatives at knots
    int interval(double q) const;
};

}  // namespace fxlv
