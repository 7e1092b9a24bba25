// Independent reference computations used only by the tests. Each is written straight from the
// textbook formula with no code shared with include/reld.
#ifndef RELD_TESTS_ORACLES_HPP
#define RELD_TESTS_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace reld::oracle {

inline long double mean(const std::vector<double>& v) {
    long double s = 0.0L;
    for (double x : v) s += x;
    return s / static_cast<long double>(v.size());
}

inline long double sample_var(const std::vector<double>& v) {
    const long double mu = mean(v);
    long double s = 0.0L;
    for (double x : v) s += (x - mu) * (x - mu);
    return s / static_cast<long double>(v.size() - 1);
}

/// (mean x - mean y) / sqrt(s_x^2 / I + s_y^2 / O + eps)
inline double welch(const std::vector<double>& x, const std::vector<double>& y, double eps) {
    const long double num = mean(x) - mean(y);
    const long double den = std::sqrt(sample_var(x) / x.size() + sample_var(y) / y.size() + eps);
    return static_cast<double>(num / den);
}

/// Square of the pooled-variance Student t statistic.
inline double pooled_t_squared(const std::vector<double>& x, const std::vector<double>& y) {
    const long double nx = x.size();
    const long double ny = y.size();
    const long double sp = ((nx - 1) * sample_var(x) + (ny - 1) * sample_var(y)) / (nx + ny - 2);
    const long double t = (mean(x) - mean(y)) / std::sqrt(sp * (1 / nx + 1 / ny));
    return static_cast<double>(t * t);
}

/// Two-variable Hotelling t^2 with an explicit 2x2 inverse. Rows are (a, b) pairs.
inline double hotelling_2d(const std::vector<std::pair<double, double>>& x,
                           const std::vector<std::pair<double, double>>& y, double ridge) {
    auto moments = [](const std::vector<std::pair<double, double>>& s, long double& ma, long double& mb,
                      long double& saa, long double& sab, long double& sbb) {
        ma = mb = 0.0L;
        for (auto [a, b] : s) {
            ma += a;
            mb += b;
        }
        ma /= s.size();
        mb /= s.size();
        saa = sab = sbb = 0.0L;
        for (auto [a, b] : s) {
            saa += (a - ma) * (a - ma);
            sab += (a - ma) * (b - mb);
            sbb += (b - mb) * (b - mb);
        }
    };
    long double xa, xb, xaa, xab, xbb, ya, yb, yaa, yab, ybb;
    moments(x, xa, xb, xaa, xab, xbb);
    moments(y, ya, yb, yaa, yab, ybb);
    const long double dof = x.size() + y.size() - 2.0L;
    const long double c11 = (xaa + yaa) / dof + ridge;
    const long double c12 = (xab + yab) / dof;
    const long double c22 = (xbb + ybb) / dof + ridge;
    const long double det = c11 * c22 - c12 * c12;
    const long double i11 = c22 / det, i12 = -c12 / det, i22 = c11 / det;
    const long double da = xa - ya, db = xb - yb;
    const long double q = da * (i11 * da + i12 * db) + db * (i12 * da + i22 * db);
    const long double scale = static_cast<long double>(x.size() * y.size()) / (x.size() + y.size());
    return static_cast<double>(scale * q);
}

/// KPSS statistic step by step: OLS on [1, k] via the normal equations, partial sums, (1/n) sum e^2.
inline double kpss(const std::vector<double>& seq) {
    const std::size_t n = seq.size();
    long double s_k = 0, s_kk = 0, s_y = 0, s_ky = 0;
    for (std::size_t k = 0; k < n; ++k) {
        s_k += k;
        s_kk += static_cast<long double>(k) * k;
        s_y += seq[k];
        s_ky += k * static_cast<long double>(seq[k]);
    }
    const long double det = n * s_kk - s_k * s_k;
    const long double a = (s_kk * s_y - s_k * s_ky) / det;
    const long double b = (n * s_ky - s_k * s_y) / det;
    std::vector<long double> e(n);
    long double rss = 0;
    for (std::size_t k = 0; k < n; ++k) {
        e[k] = seq[k] - a - b * k;
        rss += e[k] * e[k];
    }
    long double partial = 0, acc = 0;
    for (auto v : e) {
        partial += v;
        acc += partial * partial;
    }
    const long double sigma2 = rss / n;
    return static_cast<double>(acc / (static_cast<long double>(n) * n * sigma2));
}

} // namespace reld::oracle

#endif
