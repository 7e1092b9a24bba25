#ifndef RELD_LOSSES_HPP
#define RELD_LOSSES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "reld/series.hpp"

namespace reld {

struct LossKind {
    enum class Kind { L2, L1, Huber };
    Kind kind = Kind::L2;
    double delta = 1.0;

    static LossKind l2() { return {}; }
    static LossKind l1() { return {Kind::L1, 1.0}; }
    static LossKind huber(double delta = 1.0) {
        if (!(delta > 0.0)) {
            throw std::invalid_argument("LossKind: Huber delta must be positive");
        }
        return {Kind::Huber, delta};
    }

    double penalty(double r) const {
        switch (kind) {
        case Kind::L2: return r * r;
        case Kind::L1: return std::abs(r);
        case Kind::Huber: {
            const double a = std::abs(r);
            return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
        }
        }
        return 0.0;
    }

    /// d penalty / d r. L1 uses sign(0) = 0.
    double derivative(double r) const {
        switch (kind) {
        case Kind::L2: return 2.0 * r;
        case Kind::L1: return r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0);
        case Kind::Huber: return std::abs(r) <= delta ? r : (r > 0.0 ? delta : -delta);
        }
        return 0.0;
    }
};

namespace detail {
inline double weight_at(std::span<const double> w, std::size_t j) { return w.size() == 1 ? w[0] : w[j]; }
} // namespace detail

/// (1 / (m O)) * sum_j w_j * sum_i penalty(y_ij - yhat_ij). A single weight broadcasts to all columns.
inline double weighted_loss(const SliceView& y, const SliceView& y_hat, std::span<const double> w, const LossKind& kind) {
    if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
        throw std::invalid_argument("weighted_loss: target/prediction shape mismatch");
    }
    if (w.size() != y.cols() && w.size() != 1) {
        throw std::invalid_argument("weighted_loss: weight count must be 1 or m");
    }
    const std::size_t rows = y.rows();
    const std::size_t m = y.cols();
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            col += kind.penalty(y(i, j) - y_hat(i, j));
        }
        total += detail::weight_at(w, j) * col;
    }
    return total / static_cast<double>(m * rows);
}

struct ErrorReweight {
    enum class Kind { FocalR, FlipFocalR, InvL2 };
    Kind kind = Kind::FocalR;
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1e-3;

    static ErrorReweight focal(double beta = 1.0, double gamma = 1.0) { return checked({Kind::FocalR, beta, gamma, 1e-3}); }
    static ErrorReweight flip_focal(double beta = 1.0, double gamma = 1.0) {
        return checked({Kind::FlipFocalR, beta, gamma, 1e-3});
    }
    static ErrorReweight inv_l2(double epsilon = 1e-3) { return checked({Kind::InvL2, 1.0, 1.0, epsilon}); }

private:
    static ErrorReweight checked(ErrorReweight e) {
        if (!(e.beta > 0.0) || !(e.gamma > 0.0) || !(e.epsilon > 0.0)) {
            throw std::invalid_argument("ErrorReweight: beta, gamma and epsilon must be positive");
        }
        return e;
    }
};

inline double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Multiplicative loss factor for a sample whose error is `e`.
inline double error_weight(double e, const ErrorReweight& r) {
    const double a = std::abs(e);
    switch (r.kind) {
    case ErrorReweight::Kind::FocalR: return std::pow(sigmoid(r.beta * a), r.gamma);
    case ErrorReweight::Kind::FlipFocalR: return std::pow(sigmoid(-r.beta * a), r.gamma);
    case ErrorReweight::Kind::InvL2: return 1.0 / (a + r.epsilon);
    }
    return 1.0;
}

// Input preprocessing baselines.

/// Trailing moving average; the first k-1 rows average the available prefix.
inline Series moving_average(const Series& series, std::size_t k) {
    if (k == 0) {
        throw std::invalid_argument("moving_average: k must be at least 1");
    }
    const std::size_t T = series.length();
    const std::size_t m = series.dims();
    std::vector<double> out(T * m);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t first = t + 1 >= k ? t + 1 - k : 0;
            double acc = 0.0;
            for (std::size_t s = first; s <= t; ++s) acc += series(s, j);
            out[t * m + j] = acc / static_cast<double>(t - first + 1);
        }
    }
    return Series(std::move(out), m, series.name());
}

inline Series ema(const Series& series, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("ema: alpha must be in (0, 1]");
    }
    const std::size_t T = series.length();
    const std::size_t m = series.dims();
    std::vector<double> out(T * m);
    for (std::size_t j = 0; j < m; ++j) {
        double s = series(0, j);
        out[j] = s;
        for (std::size_t t = 1; t < T; ++t) {
            s = alpha == 1.0 ? series(t, j) : alpha * series(t, j) + (1.0 - alpha) * s;
            out[t * m + j] = s;
        }
    }
    return Series(std::move(out), m, series.name());
}

struct FilteredSeries {
    Series series;
    std::vector<bool> removed;  // T x m, row-major
};

/// Replace points further than z_threshold population standard deviations from the column mean by
/// linear interpolation between the nearest kept neighbours. Ends clamp to the nearest kept value.
inline FilteredSeries filter_outliers(const Series& series, double z_threshold) {
    if (!(z_threshold > 0.0)) {
        throw std::invalid_argument("filter_outliers: threshold must be positive");
    }
    const std::size_t T = series.length();
    const std::size_t m = series.dims();
    if (T < 2) {
        throw std::invalid_argument("filter_outliers: need at least 2 rows");
    }
    std::vector<double> out(series.data().begin(), series.data().end());
    std::vector<bool> removed(T * m, false);

    for (std::size_t j = 0; j < m; ++j) {
        const auto col = series.column(j);
        double mean = 0.0;
        for (double v : col) mean += v;
        mean /= static_cast<double>(T);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / static_cast<double>(T));
        if (!(sd > 0.0)) {
            continue;
        }
        std::vector<std::size_t> kept;
        for (std::size_t t = 0; t < T; ++t) {
            if (std::abs(col[t] - mean) > z_threshold * sd) {
                removed[t * m + j] = true;
            } else {
                kept.push_back(t);
            }
        }
        if (kept.empty()) {
            continue;
        }
        std::size_t next = 0;  // index into kept of the first kept row >= t
        for (std::size_t t = 0; t < T; ++t) {
            while (next < kept.size() && kept[next] < t) ++next;
            if (!removed[t * m + j]) {
                continue;
            }
            if (next == 0) {
                out[t * m + j] = col[kept.front()];
            } else if (next == kept.size()) {
                out[t * m + j] = col[kept.back()];
            } else {
                const std::size_t lo = kept[next - 1];
                const std::size_t hi = kept[next];
                const double frac = static_cast<double>(t - lo) / static_cast<double>(hi - lo);
                out[t * m + j] = col[lo] + frac * (col[hi] - col[lo]);
            }
        }
    }
    return {Series(std::move(out), m, series.name()), std::move(removed)};
}

} // namespace reld

#endif
