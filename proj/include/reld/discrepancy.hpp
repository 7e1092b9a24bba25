#ifndef RELD_DISCREPANCY_HPP
#define RELD_DISCREPANCY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "reld/series.hpp"

namespace reld {

enum class LdMetric { WelchT, HotellingT2, Kpss };

inline std::string_view to_string(LdMetric m) {
    switch (m) {
    case LdMetric::WelchT: return "welch";
    case LdMetric::HotellingT2: return "hotelling";
    case LdMetric::Kpss: return "kpss";
    }
    return "?";
}

/// Long-run variance estimator for the KPSS statistic. NeweyWest uses Bartlett weights.
struct LongRunVariance {
    enum class Kind { Simple, NeweyWest };
    Kind kind = Kind::Simple;
    std::size_t bandwidth = 0;

    static LongRunVariance simple() { return {}; }
    static LongRunVariance newey_west(std::size_t lags) { return {Kind::NeweyWest, lags}; }
};

/// Which output rows enter the Hotelling output-window covariance.
enum class HotellingOutputRows {
    All,           // all O rows
    SkipFirstRow,  // rows 1..O-1, still divided by O-1 (literal reading of the published formula)
};

struct LdConfig {
    LdMetric metric = LdMetric::WelchT;
    double epsilon = 1e-8;
    double ridge = 1e-8;
    LongRunVariance lrv{};
    HotellingOutputRows hotelling_rows = HotellingOutputRows::All;

    void validate() const {
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw std::invalid_argument("LdConfig: epsilon must be positive");
        }
        if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
            throw std::invalid_argument("LdConfig: ridge must be non-negative");
        }
    }

    /// Number of LD columns produced for an m-variate series.
    std::size_t columns(std::size_t m) const { return metric == LdMetric::HotellingT2 ? 1 : m; }
};

/// Pooled covariance plus ridge could not be inverted reliably.
class SingularCovarianceError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Welch t-statistic between input and output windows, one value per column.
/// epsilon sits under the square root and keeps zero-variance windows finite.
inline std::vector<double> welch_ld(const SliceView& x, const SliceView& y, double epsilon) {
    if (x.cols() != y.cols()) {
        throw std::invalid_argument("welch_ld: column mismatch");
    }
    const auto sx = window_stats(x);
    const auto sy = window_stats(y);
    const auto nx = static_cast<double>(x.rows());
    const auto ny = static_cast<double>(y.rows());
    std::vector<double> out(x.cols());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = (sx.mean[j] - sy.mean[j]) / std::sqrt(sx.variance[j] / nx + sy.variance[j] / ny + epsilon);
    }
    return out;
}

/// Two-sample Hotelling t-squared with pooled covariance. Always >= 0.
inline double hotelling_ld(const SliceView& x, const SliceView& y, double ridge,
                           HotellingOutputRows rows = HotellingOutputRows::All) {
    const std::size_t m = x.cols();
    const std::size_t ni = x.rows();
    const std::size_t no = y.rows();
    if (y.cols() != m) {
        throw std::invalid_argument("hotelling_ld: column mismatch");
    }
    if (ni < 2 || no < 2) {
        throw std::invalid_argument("hotelling_ld: each window needs at least 2 rows");
    }
    if (ni + no < m + 2) {
        throw std::invalid_argument("hotelling_ld: I + O must be at least m + 2");
    }

    Eigen::VectorXd mx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::VectorXd my = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < ni; ++i) {
        for (std::size_t j = 0; j < m; ++j) mx(static_cast<Eigen::Index>(j)) += x(i, j);
    }
    for (std::size_t i = 0; i < no; ++i) {
        for (std::size_t j = 0; j < m; ++j) my(static_cast<Eigen::Index>(j)) += y(i, j);
    }
    mx /= static_cast<double>(ni);
    my /= static_cast<double>(no);

    // Scatter matrices; the pooled estimate is (Sx + Sy) / (I + O - 2).
    const auto m_idx = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(m_idx, m_idx);
    Eigen::VectorXd d(m_idx);
    for (std::size_t i = 0; i < ni; ++i) {
        for (std::size_t j = 0; j < m; ++j) d(static_cast<Eigen::Index>(j)) = x(i, j) - mx(static_cast<Eigen::Index>(j));
        scatter.noalias() += d * d.transpose();
    }
    const std::size_t first_y = rows == HotellingOutputRows::SkipFirstRow ? 1 : 0;
    for (std::size_t i = first_y; i < no; ++i) {
        for (std::size_t j = 0; j < m; ++j) d(static_cast<Eigen::Index>(j)) = y(i, j) - my(static_cast<Eigen::Index>(j));
        scatter.noalias() += d * d.transpose();
    }
    Eigen::MatrixXd pooled = scatter / static_cast<double>(ni + no - 2);
    pooled.diagonal().array() += ridge;

    const Eigen::VectorXd diff = mx - my;
    if (diff.isZero(0.0)) {
        return 0.0;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(pooled);
    // rcond() alone misses exact zero pivots, so the pivot ratio is checked as well.
    const Eigen::VectorXd pivots = ldlt.vectorD().cwiseAbs();
    const double eps = std::numeric_limits<double>::epsilon();
    if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > eps * pivots.maxCoeff()) || !(ldlt.rcond() > eps)) {
        throw SingularCovarianceError("hotelling_ld: pooled covariance is numerically singular; increase ridge");
    }
    const double scale = static_cast<double>(ni * no) / static_cast<double>(ni + no);
    const double q = diff.dot(ldlt.solve(diff));
    return std::max(0.0, scale * q);
}

/// KPSS statistic of one concatenated sequence: detrend by OLS on (1, k), cumulate residuals,
/// normalise by n^2 and the long-run residual variance.
inline double kpss_statistic(std::span<const double> seq, const LongRunVariance& lrv = {}) {
    const std::size_t n = seq.size();
    if (n < 3) {
        throw std::invalid_argument("kpss_ld: window needs at least 3 points");
    }
    const double nd = static_cast<double>(n);
    const double k_mean = (nd - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double v : seq) y_mean += v;
    y_mean /= nd;

    double sxy = 0.0;
    double sxx = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double dk = static_cast<double>(k) - k_mean;
        sxy += dk * (seq[k] - y_mean);
        sxx += dk * dk;
        scale = std::max(scale, std::abs(seq[k]));
    }
    const double slope = sxy / sxx;

    std::vector<double> resid(n);
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        resid[k] = seq[k] - y_mean - slope * (static_cast<double>(k) - k_mean);
        rss += resid[k] * resid[k];
    }
    // Residuals at rounding level mean the window lies on a line: 0/0 is taken as 0.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    if (rss <= nd * noise * noise) {
        return 0.0;
    }

    double sigma2 = rss / nd;
    if (lrv.kind == LongRunVariance::Kind::NeweyWest) {
        const std::size_t lags = std::min(lrv.bandwidth, n - 1);
        for (std::size_t l = 1; l <= lags; ++l) {
            double acc = 0.0;
            for (std::size_t k = l; k < n; ++k) acc += resid[k] * resid[k - l];
            const double bartlett = 1.0 - static_cast<double>(l) / static_cast<double>(lags + 1);
            sigma2 += 2.0 * bartlett * acc / nd;
        }
        if (!(sigma2 > 0.0)) {
            sigma2 = rss / nd;
        }
    }

    double partial = 0.0;
    double sum_sq = 0.0;
    for (double e : resid) {
        partial += e;
        sum_sq += partial * partial;
    }
    return sum_sq / (nd * nd * sigma2);
}

/// Per-column KPSS over the concatenation of x and y.
inline std::vector<double> kpss_ld(const SliceView& x, const SliceView& y, const LongRunVariance& lrv = {}) {
    if (x.cols() != y.cols()) {
        throw std::invalid_argument("kpss_ld: column mismatch");
    }
    const std::size_t m = x.cols();
    const std::size_t n = x.rows() + y.rows();
    std::vector<double> seq(n);
    std::vector<double> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < x.rows(); ++i) seq[i] = x(i, j);
        for (std::size_t i = 0; i < y.rows(); ++i) seq[x.rows() + i] = y(i, j);
        out[j] = kpss_statistic(seq, lrv);
    }
    return out;
}

/// LD values for every window: rows follow the window order, `cols` is m (Welch, KPSS) or 1 (Hotelling).
struct LdProfile {
    std::vector<std::size_t> t_values;
    std::vector<double> ld;
    std::size_t cols = 0;
    LdConfig config;
    WindowSpec spec;

    std::size_t rows() const noexcept { return t_values.size(); }
    double operator()(std::size_t i, std::size_t j) const { return ld[i * cols + j]; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = ld[i * cols + j];
        return out;
    }
};

inline std::vector<double> local_discrepancy(const WindowPair& pair, const LdConfig& cfg) {
    switch (cfg.metric) {
    case LdMetric::WelchT: return welch_ld(pair.x, pair.y, cfg.epsilon);
    case LdMetric::HotellingT2: return {hotelling_ld(pair.x, pair.y, cfg.ridge, cfg.hotelling_rows)};
    case LdMetric::Kpss: return kpss_ld(pair.x, pair.y, cfg.lrv);
    }
    throw std::logic_error("local_discrepancy: unknown metric");
}

inline LdProfile ld_profile(const WindowSet& windows, const LdConfig& cfg) {
    cfg.validate();
    LdProfile profile;
    profile.config = cfg;
    profile.spec = windows.spec;
    if (windows.size() == 0) {
        return profile;
    }
    profile.cols = cfg.columns(windows[0].x.cols());
    profile.t_values.reserve(windows.size());
    profile.ld.reserve(windows.size() * profile.cols);
    for (const auto& pair : windows) {
        const auto v = local_discrepancy(pair, cfg);
        profile.t_values.push_back(pair.t);
        profile.ld.insert(profile.ld.end(), v.begin(), v.end());
    }
    return profile;
}

inline LdProfile ld_profile(const Series& series, const WindowSpec& spec, const LdConfig& cfg) {
    return ld_profile(make_windows(series, spec), cfg);
}

/// max |ld(t + p) - ld(t)| over all rows and columns. `period` is in samples and must be a multiple
/// of the profile stride.
inline double periodicity_residual(const LdProfile& profile, std::size_t period) {
    const std::size_t stride = profile.spec.stride == 0 ? 1 : profile.spec.stride;
    if (period == 0 || period % stride != 0) {
        throw std::invalid_argument("periodicity_residual: period must be a positive multiple of the stride");
    }
    const std::size_t shift = period / stride;
    if (profile.rows() < 2 * shift) {
        throw std::invalid_argument("periodicity_residual: profile covers fewer than two periods");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + shift < profile.rows(); ++i) {
        for (std::size_t j = 0; j < profile.cols; ++j) {
            worst = std::max(worst, std::abs(profile(i + shift, j) - profile(i, j)));
        }
    }
    return worst;
}

struct MomentResidual {
    double mean = 0.0;
    double variance = 0.0;
};

/// Shift-by-one-period residuals of the windowed mean and population variance:
/// max over start a of |m(a+p) - m(a)| and |s(a+p) - s(a)|.
inline MomentResidual window_moment_residual(const Series& series, std::size_t window_len, std::size_t period) {
    if (window_len == 0 || period == 0) {
        throw std::invalid_argument("window_moment_residual: window and period must be positive");
    }
    const std::size_t T = series.length();
    if (T < 2 * period + window_len) {
        throw std::invalid_argument("window_moment_residual: series shorter than two periods plus one window");
    }
    const std::size_t m = series.dims();
    const double n = static_cast<double>(window_len);
    auto moments = [&](std::size_t a, std::size_t j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < window_len; ++i) mean += series(a + i, j);
        mean /= n;
        double var = 0.0;
        for (std::size_t i = 0; i < window_len; ++i) {
            const double d = series(a + i, j) - mean;
            var += d * d;
        }
        return std::pair{mean, var / n};
    };

    MomentResidual out;
    for (std::size_t a = 0; a + period + window_len <= T; ++a) {
        for (std::size_t j = 0; j < m; ++j) {
            const auto [m0, s0] = moments(a, j);
            const auto [m1, s1] = moments(a + period, j);
            out.mean = std::max(out.mean, std::abs(m1 - m0));
            out.variance = std::max(out.variance, std::abs(s1 - s0));
        }
    }
    return out;
}

} // namespace reld

#endif
