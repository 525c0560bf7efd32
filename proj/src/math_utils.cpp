#include "fxlv/math_utils.hpp"

#include <algorithm>

namespace fxlv {

std::vector<double> cholesky_psd(const std::vector<double>& a, int n) {
    std::vector<double> L(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
        if (d < -1e-12)
            throw InputError("correlation matrix is not positive semidefinite");
        d = std::max(d, 0.0);
        const double Ljj = std::sqrt(d);
        L[j * n + j] = Ljj;
        for (int i = j + 1; i < n; ++i) {
            if (Ljj == 0.0) {
                L[i * n + j] = 0.0;
                continue;
            }
            double s = a[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = s / Ljj;
        }
    }
    return L;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
        throw InputError("spline needs at least two knots with matching values");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1]))
            throw InputError("spline knots must be strictly increasing");

    m_.assign(n, 0.0);
    if (n == 2) return;

    // Thomas solve for interior second derivatives, natural boundary m[0]=m[n-1]=0.
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        sub[i] = h0;
        diag[i] = 2.0 * (h0 + h1);
        sup[i] = h1;
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
        if (i == 1) break;
    }
}

int CubicSpline::interval(double q) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), q);
    int i = static_cast<int>(it - x_.begin()) - 1;
    i = std::clamp(i, 0, static_cast<int>(x_.size()) - 2);
    return i;
}

double CubicSpline::value(double q) const {
    if (q <= x_.front()) return y_.front();
    if (q >= x_.back()) return y_.back();
    const int i = interval(q);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - q) / h;
    const double b = (q - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double q) const {
    if (q <= x_.front() || q >= x_.back()) return 0.0;
    const int i = interval(q);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - q) / h;
    const double b = (q - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) * h / 6.0;
}

double CubicSpline::deriv2(double q) const {
    if (q <= x_.front() || q >= x_.back()) return 0.0;
    const int i = interval(q);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - q) / h;
    const double b = (q - x_[i]) / h;
    return a * m_[i] + b * m_[i + 1];
}

}  // namespace fxlv
