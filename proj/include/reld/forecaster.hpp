#ifndef RELD_FORECASTER_HPP
#define RELD_FORECASTER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "reld/csv.hpp"
#include "reld/losses.hpp"
#include "reld/series.hpp"
#include "reld/synth.hpp"
#include "reld/weighting.hpp"

namespace reld {

/// Channel-independent direct multi-horizon linear map: for every variable j,
/// yhat_j = W_j x_j + b_j with W_j of shape O x I.
class LinearForecaster {
public:
    LinearForecaster() = default;
    LinearForecaster(std::size_t dims, std::size_t input_len, std::size_t output_len)
        : dims_(dims), input_len_(input_len), output_len_(output_len),
          params_(dims * output_len * (input_len + 1), 0.0) {
        if (dims == 0 || input_len == 0 || output_len == 0) {
            throw std::invalid_argument("LinearForecaster: dimensions must be positive");
        }
    }

    std::size_t dims() const noexcept { return dims_; }
    std::size_t input_len() const noexcept { return input_len_; }
    std::size_t output_len() const noexcept { return output_len_; }
    std::size_t param_count() const noexcept { return params_.size(); }

    // Layout per variable j: W_j row-major (O x I), then b_j (O).
    std::size_t block() const noexcept { return output_len_ * (input_len_ + 1); }
    double& weight(std::size_t j, std::size_t i, std::size_t k) { return params_[j * block() + i * input_len_ + k]; }
    double weight(std::size_t j, std::size_t i, std::size_t k) const { return params_[j * block() + i * input_len_ + k]; }
    double& bias(std::size_t j, std::size_t i) { return params_[j * block() + output_len_ * input_len_ + i]; }
    double bias(std::size_t j, std::size_t i) const { return params_[j * block() + output_len_ * input_len_ + i]; }

    std::span<double> params() noexcept { return params_; }
    std::span<const double> params() const noexcept { return params_; }

    /// O x m prediction, row-major.
    std::vector<double> predict(const SliceView& x) const {
        if (x.rows() != input_len_ || x.cols() != dims_) {
            throw std::invalid_argument("predict: input window shape does not match the model");
        }
        std::vector<double> out(output_len_ * dims_);
        for (std::size_t j = 0; j < dims_; ++j) {
            const double* W = params_.data() + j * block();
            const double* b = W + output_len_ * input_len_;
            for (std::size_t i = 0; i < output_len_; ++i) {
                double acc = b[i];
                const double* row = W + i * input_len_;
                for (std::size_t k = 0; k < input_len_; ++k) acc += row[k] * x(k, j);
                out[i * dims_ + j] = acc;
            }
        }
        return out;
    }

    friend bool operator==(const LinearForecaster&, const LinearForecaster&) = default;

private:
    std::size_t dims_ = 0;
    std::size_t input_len_ = 0;
    std::size_t output_len_ = 0;
    std::vector<double> params_;
};

/// Loss of one window and its gradient w.r.t. every parameter (accumulated into `grad` with `scale`).
inline double loss_and_gradient(const LinearForecaster& model, const WindowPair& pair, std::span<const double> w,
                                const LossKind& kind, std::span<double> grad, double scale) {
    const std::size_t m = model.dims();
    const std::size_t I = model.input_len();
    const std::size_t O = model.output_len();
    const auto pred = model.predict(pair.x);
    const double norm = 1.0 / static_cast<double>(m * O);
    double loss = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double wj = detail::weight_at(w, j);
        double col = 0.0;
        double* gW = grad.empty() ? nullptr : grad.data() + j * model.block();
        double* gb = gW == nullptr ? nullptr : gW + O * I;
        for (std::size_t i = 0; i < O; ++i) {
            const double r = pair.y(i, j) - pred[i * m + j];
            col += kind.penalty(r);
            if (gW == nullptr) {
                continue;
            }
            // d/d yhat of penalty(y - yhat) is -penalty'(r).
            const double g = -scale * wj * norm * kind.derivative(r);
            if (g == 0.0) {
                continue;
            }
            double* row = gW + i * I;
            for (std::size_t k = 0; k < I; ++k) row[k] += g * pair.x(k, j);
            gb[i] += g;
        }
        loss += wj * col;
    }
    return loss * norm;
}

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    LossKind loss{};
    bool shuffle = true;
    std::optional<ErrorReweight> error_reweight;  // multiplies each sample's loss by an error-based factor

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw std::invalid_argument("TrainConfig: learning_rate must be finite and non-negative");
        }
        if (epochs == 0 || batch_size == 0) {
            throw std::invalid_argument("TrainConfig: epochs and batch_size must be positive");
        }
    }
};

class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(std::size_t epoch, std::size_t batch)
        : std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                             std::to_string(batch)),
          epoch_(epoch), batch_(batch) {}
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

struct TrainResult {
    LinearForecaster model;
    std::vector<double> loss_trace;  // mean sample loss seen during each epoch
};

/// Mean absolute error of one window under the model; the error-based reweighting uses it as e_i.
inline double window_mae(const LinearForecaster& model, const WindowPair& pair) {
    const auto pred = model.predict(pair.x);
    double acc = 0.0;
    const std::size_t m = model.dims();
    for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pair.y(i / m, i % m) - pred[i]);
    return acc / static_cast<double>(pred.size());
}

/// Mini-batch gradient descent from zero initialisation on the batch mean of weighted losses.
/// `weights` must list the same prediction times as `windows`; pass std::nullopt for uniform weights.
inline TrainResult train(const WindowSet& windows, const std::optional<WeightTable>& weights, const TrainConfig& cfg) {
    cfg.validate();
    const std::size_t n = windows.size();
    if (n == 0) {
        throw std::invalid_argument("train: no windows");
    }
    const std::size_t m = windows[0].x.cols();
    if (weights) {
        if (weights->t_values.size() != n) {
            throw std::invalid_argument("train: weight table has " + std::to_string(weights->rows()) +
                                        " rows for " + std::to_string(n) + " windows");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (weights->t_values[i] != windows[i].t) {
                throw std::invalid_argument("train: weight row " + std::to_string(i) + " is for t=" +
                                            std::to_string(weights->t_values[i]) + ", window has t=" +
                                            std::to_string(windows[i].t));
            }
        }
        if (weights->cols != 1 && weights->cols != m) {
            throw std::invalid_argument("train: weight columns must be 1 or m");
        }
    }

    TrainResult result{LinearForecaster(m, windows.spec.input_len, windows.spec.output_len), {}};
    auto& model = result.model;
    std::vector<double> grad(model.param_count());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededRng rng(cfg.seed);
    std::vector<double> w(m, 1.0);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            for (std::size_t i = n - 1; i > 0; --i) {
                const std::size_t k = static_cast<std::size_t>(rng.next() % (i + 1));
                std::swap(order[i], order[k]);
            }
        }
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const double inv_b = 1.0 / static_cast<double>(stop - start);
            std::fill(grad.begin(), grad.end(), 0.0);
            double batch_loss = 0.0;
            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t idx = order[s];
                const auto& pair = windows[idx];
                for (std::size_t j = 0; j < m; ++j) w[j] = weights ? (*weights)(idx, j) : 1.0;
                if (cfg.error_reweight) {
                    const double f = error_weight(window_mae(model, pair), *cfg.error_reweight);
                    for (auto& v : w) v *= f;
                }
                batch_loss += loss_and_gradient(model, pair, w, cfg.loss, grad, inv_b);
            }
            if (!std::isfinite(batch_loss)) {
                throw TrainingDiverged(epoch, batch_index);
            }
            epoch_loss += batch_loss;
            const auto params = model.params();
            for (std::size_t p = 0; p < params.size(); ++p) params[p] -= cfg.learning_rate * grad[p];
        }
        result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
    }
    for (double p : model.params()) {
        if (!std::isfinite(p)) {
            throw TrainingDiverged(cfg.epochs - 1, 0);
        }
    }
    return result;
}

/// Unweighted per-window loss, in window order.
inline std::vector<double> window_losses(const LinearForecaster& model, const WindowSet& windows,
                                         const LossKind& kind = {}) {
    std::vector<double> out;
    out.reserve(windows.size());
    const std::vector<double> one{1.0};
    for (const auto& pair : windows) {
        out.push_back(loss_and_gradient(model, pair, one, kind, {}, 0.0));
    }
    return out;
}

struct EvalReport {
    double mse = 0.0;
    double mae = 0.0;
    std::size_t count = 0;
    std::optional<double> mse_normal;
    std::optional<double> mse_abrupt;
    std::size_t count_normal = 0;
    std::size_t count_abrupt = 0;
    bool labelled = false;
};

/// Unweighted MSE/MAE over all windows, split by label when labels are given.
inline EvalReport evaluate(const LinearForecaster& model, const WindowSet& windows,
                           const std::optional<std::vector<bool>>& labels = std::nullopt) {
    if (labels && labels->size() != windows.size()) {
        throw std::invalid_argument("evaluate: " + std::to_string(labels->size()) + " labels for " +
                                    std::to_string(windows.size()) + " windows");
    }
    EvalReport report;
    report.count = windows.size();
    report.labelled = labels.has_value();
    if (windows.size() == 0) {
        return report;
    }
    double sq = 0.0;
    double ab = 0.0;
    double sq_normal = 0.0;
    double sq_abrupt = 0.0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto& pair = windows[w];
        const auto pred = model.predict(pair.x);
        const std::size_t m = pair.y.cols();
        double win_sq = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            const double r = pair.y(i / m, i % m) - pred[i];
            win_sq += r * r;
            ab += std::abs(r);
        }
        win_sq /= static_cast<double>(pred.size());
        sq += win_sq;
        if (labels) {
            if ((*labels)[w]) {
                sq_abrupt += win_sq;
                ++report.count_abrupt;
            } else {
                sq_normal += win_sq;
                ++report.count_normal;
            }
        }
    }
    const double n = static_cast<double>(windows.size());
    const double elems = n * static_cast<double>(windows.spec.output_len * windows[0].y.cols());
    report.mse = sq / n;
    report.mae = ab / elems;
    if (report.count_normal > 0) report.mse_normal = sq_normal / static_cast<double>(report.count_normal);
    if (report.count_abrupt > 0) report.mse_abrupt = sq_abrupt / static_cast<double>(report.count_abrupt);
    return report;
}

/// Max relative difference between the analytic gradient and central finite differences.
inline double grad_check(const LinearForecaster& model, const WindowPair& pair, std::span<const double> w,
                         const LossKind& kind, double step = 1e-5) {
    std::vector<double> analytic(model.param_count(), 0.0);
    loss_and_gradient(model, pair, w, kind, analytic, 1.0);
    LinearForecaster probe = model;
    double worst = 0.0;
    for (std::size_t p = 0; p < probe.param_count(); ++p) {
        const double orig = probe.params()[p];
        probe.params()[p] = orig + step;
        const double up = loss_and_gradient(probe, pair, w, kind, {}, 0.0);
        probe.params()[p] = orig - step;
        const double down = loss_and_gradient(probe, pair, w, kind, {}, 0.0);
        probe.params()[p] = orig;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(analytic[p]), std::abs(numeric), 1e-7});
        worst = std::max(worst, std::abs(analytic[p] - numeric) / denom);
    }
    return worst;
}

// Persistence: "reld-linear v1", then "dims input_len output_len", then one parameter per line.
inline constexpr std::string_view kModelMagic = "reld-linear";
inline constexpr int kModelVersion = 1;

inline void save_model(const LinearForecaster& model, std::ostream& out) {
    out << kModelMagic << " v" << kModelVersion << '\n'
        << model.dims() << ' ' << model.input_len() << ' ' << model.output_len() << '\n';
    for (double p : model.params()) out << format_double(p) << '\n';
}

inline LinearForecaster load_model(std::istream& in) {
    std::string magic;
    std::string version;
    in >> magic >> version;
    if (magic != kModelMagic || version != "v" + std::to_string(kModelVersion)) {
        throw DataError("model file: unrecognised header '" + magic + " " + version + "'");
    }
    std::size_t m = 0, I = 0, O = 0;
    if (!(in >> m >> I >> O)) {
        throw DataError("model file: missing dimensions");
    }
    LinearForecaster model(m, I, O);
    for (std::size_t p = 0; p < model.param_count(); ++p) {
        std::string tok;
        double v = 0.0;
        if (!(in >> tok) || !detail::parse_double(tok, v)) {
            throw DataError("model file: bad or missing parameter", p + 3, 1);
        }
        model.params()[p] = v;
    }
    return model;
}

inline void save_model(const LinearForecaster& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    save_model(model, out);
}

inline LinearForecaster load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return load_model(in);
}

} // namespace reld

#endif
