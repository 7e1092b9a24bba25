#ifndef RELD_SERIES_HPP
#define RELD_SERIES_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace reld {

/// Row-major T x m block of finite doubles. Rows are time steps, columns are variables.
class Series {
public:
    Series() = default;

    Series(std::vector<double> values, std::size_t cols, std::string name = {})
        : values_(std::move(values)), cols_(cols), name_(std::move(name)) {
        if (cols_ == 0) {
            throw std::invalid_argument("Series: variable count must be at least 1");
        }
        if (values_.empty() || values_.size() % cols_ != 0) {
            throw std::invalid_argument("Series: value count must be a positive multiple of the column count");
        }
        rows_ = values_.size() / cols_;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::invalid_argument("Series: non-finite value at row " + std::to_string(i / cols_) +
                                            ", column " + std::to_string(i % cols_));
            }
        }
    }

    /// Single-variable convenience constructor.
    static Series univariate(std::vector<double> values, std::string name = {}) {
        return Series(std::move(values), 1, std::move(name));
    }

    std::size_t length() const noexcept { return rows_; }
    std::size_t dims() const noexcept { return cols_; }
    const std::string& name() const noexcept { return name_; }

    double operator()(std::size_t t, std::size_t j) const { return values_[t * cols_ + j]; }

    std::span<const double> row(std::size_t t) const {
        return std::span<const double>(values_).subspan(t * cols_, cols_);
    }

    std::span<const double> data() const noexcept { return values_; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t t = 0; t < rows_; ++t) {
            out[t] = values_[t * cols_ + j];
        }
        return out;
    }

    friend bool operator==(const Series& a, const Series& b) {
        return a.cols_ == b.cols_ && a.values_ == b.values_;
    }

private:
    std::vector<double> values_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::string name_;
};

/// Read-only view over consecutive rows of a Series.
class SliceView {
public:
    SliceView() = default;
    SliceView(std::span<const double> data, std::size_t cols) : data_(data), cols_(cols) {
        if (cols_ == 0 || data_.size() % cols_ != 0) {
            throw std::invalid_argument("SliceView: data size is not a multiple of the column count");
        }
    }

    std::size_t rows() const noexcept { return cols_ == 0 ? 0 : data_.size() / cols_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const { return data_.subspan(i * cols_, cols_); }
    std::span<const double> data() const noexcept { return data_; }

private:
    std::span<const double> data_;
    std::size_t cols_ = 0;
};

struct WindowSpec {
    std::size_t input_len = 0;
    std::size_t output_len = 0;
    std::size_t stride = 1;

    std::size_t span() const noexcept { return input_len + output_len; }

    void validate() const {
        if (input_len < 2 || output_len < 2) {
            throw std::invalid_argument("WindowSpec: input and output lengths must both be at least 2");
        }
        if (stride == 0) {
            throw std::invalid_argument("WindowSpec: stride must be positive");
        }
    }

    void validate(std::size_t series_length) const {
        validate();
        if (span() > series_length) {
            throw std::invalid_argument("WindowSpec: input_len + output_len (" + std::to_string(span()) +
                                        ") exceeds series length " + std::to_string(series_length));
        }
    }

    /// Number of windows a series of the given length yields.
    std::size_t count(std::size_t series_length) const {
        validate(series_length);
        return (series_length - span()) / stride + 1;
    }
};

/// One in-output pair. `t` is the 0-based row of the first output point.
struct WindowPair {
    std::size_t t = 0;
    SliceView x;
    SliceView y;
};

/// All in-output pairs of a series, ordered by prediction time. Views borrow from the series.
struct WindowSet {
    WindowSpec spec;
    std::vector<WindowPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
    const WindowPair& operator[](std::size_t i) const { return pairs[i]; }
    auto begin() const noexcept { return pairs.begin(); }
    auto end() const noexcept { return pairs.end(); }
};

inline WindowSet make_windows(const Series& series, const WindowSpec& spec) {
    const std::size_t n = spec.count(series.length());
    const std::size_t m = series.dims();
    const auto data = series.data();

    WindowSet set;
    set.spec = spec;
    set.pairs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t t = spec.input_len + k * spec.stride;
        WindowPair pair;
        pair.t = t;
        pair.x = SliceView(data.subspan((t - spec.input_len) * m, spec.input_len * m), m);
        pair.y = SliceView(data.subspan(t * m, spec.output_len * m), m);
        set.pairs.push_back(pair);
    }
    return set;
}

// Hold the series too; a WindowSet over a temporary would dangle.
WindowSet make_windows(Series&&, const WindowSpec&) = delete;

struct WindowStats {
    std::vector<double> mean;
    std::vector<double> variance;
};

/// Per-column mean and unbiased (k-1) sample variance, two-pass.
inline WindowStats window_stats(const SliceView& slice) {
    const std::size_t k = slice.rows();
    const std::size_t m = slice.cols();
    if (k < 2) {
        throw std::invalid_argument("window_stats: need at least 2 rows, got " + std::to_string(k));
    }
    WindowStats out{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            out.mean[j] += slice(i, j);
        }
    }
    for (auto& v : out.mean) {
        v /= static_cast<double>(k);
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = slice(i, j) - out.mean[j];
            out.variance[j] += d * d;
        }
    }
    for (auto& v : out.variance) {
        v /= static_cast<double>(k - 1);
    }
    return out;
}

/// Rows [begin, end) of a series as a view.
inline SliceView rows_of(const Series& series, std::size_t begin, std::size_t end) {
    if (begin > end || end > series.length()) {
        throw std::out_of_range("rows_of: row range out of bounds");
    }
    const std::size_t m = series.dims();
    return SliceView(series.data().subspan(begin * m, (end - begin) * m), m);
}

/// Chronological prefix/suffix split. The suffix starts `input_len` rows early so its
/// first window predicts the first held-out row.
inline std::pair<Series, Series> split_series(const Series& series, double train_fraction, std::size_t context = 0) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("split_series: fraction must be in (0, 1)");
    }
    const std::size_t T = series.length();
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(T)));
    if (cut == 0 || cut >= T || context > cut) {
        throw std::invalid_argument("split_series: series too short for the requested split");
    }
    const std::size_t m = series.dims();
    const auto data = series.data();
    std::vector<double> head(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(cut * m));
    std::vector<double> tail(data.begin() + static_cast<std::ptrdiff_t>((cut - context) * m), data.end());
    return {Series(std::move(head), m, series.name()), Series(std::move(tail), m, series.name())};
}

} // namespace reld

#endif
