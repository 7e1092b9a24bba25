#ifndef RELD_WEIGHTING_HPP
#define RELD_WEIGHTING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reld/discrepancy.hpp"

namespace reld {

/// Equal-width histogram over [min, max] of a sample. When every value is identical the histogram
/// spans [v, v + num_bins] and bin 0 holds all of them.
struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;

    std::size_t num_bins() const noexcept { return counts.size(); }
    double lower() const { return edges.front(); }
    double width() const { return (edges.back() - edges.front()) / static_cast<double>(num_bins()); }

    std::size_t bin_of(double v) const {
        const double w = width();
        if (!(v > edges.front())) {
            return 0;
        }
        const auto b = static_cast<std::size_t>(std::floor((v - edges.front()) / w));
        return std::min(b, num_bins() - 1);
    }

    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

/// `min_relative_span` sets a resolution floor: if max - min is below min_relative_span * max|v|, the
/// range is widened symmetrically about its midpoint to that span. Values agreeing to that relative
/// precision then share a bin instead of being stretched across all of them.
inline Histogram build_histogram(std::span<const double> values, std::size_t num_bins,
                                 double min_relative_span = 0.0) {
    if (values.empty()) {
        throw std::invalid_argument("build_histogram: no values");
    }
    if (num_bins == 0) {
        throw std::invalid_argument("build_histogram: num_bins must be positive");
    }
    double lo = values.front();
    double hi = values.front();
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("build_histogram: non-finite value");
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(min_relative_span >= 0.0)) {
        throw std::invalid_argument("build_histogram: min_relative_span must be non-negative");
    }
    const double floor_span = min_relative_span * std::max(std::abs(lo), std::abs(hi));
    if (hi > lo && hi - lo < floor_span) {
        const double mid = 0.5 * (lo + hi);
        lo = mid - 0.5 * floor_span;
        hi = mid + 0.5 * floor_span;
    }
    if (!(hi > lo)) {
        hi = lo + static_cast<double>(num_bins);
    }

    Histogram h;
    h.edges.resize(num_bins + 1);
    const double width = (hi - lo) / static_cast<double>(num_bins);
    for (std::size_t b = 0; b <= num_bins; ++b) {
        h.edges[b] = lo + width * static_cast<double>(b);
    }
    h.edges.back() = hi;
    h.counts.assign(num_bins, 0);
    for (double v : values) {
        ++h.counts[h.bin_of(v)];
    }
    return h;
}

enum class KernelEdge {
    ZeroPad,      // mass falling outside the histogram is lost
    Renormalize,  // kernel weights re-scaled to the bins that exist
};

struct KernelSpec {
    std::size_t size = 5;
    double sigma = 2.0;
    KernelEdge edge = KernelEdge::ZeroPad;

    void validate() const {
        if (size == 0 || size % 2 == 0) {
            throw std::invalid_argument("KernelSpec: size must be a positive odd integer");
        }
        if (!(sigma > 0.0)) {
            throw std::invalid_argument("KernelSpec: sigma must be positive");
        }
    }

    /// Normalised Gaussian taps for offsets -size/2 .. size/2, in bin units.
    std::vector<double> taps() const {
        validate();
        const auto half = static_cast<long>(size / 2);
        std::vector<double> w(size);
        double sum = 0.0;
        for (long i = -half; i <= half; ++i) {
            const double d = static_cast<double>(i);
            w[static_cast<std::size_t>(i + half)] = std::exp(-d * d / (2.0 * sigma * sigma));
        }
        for (double v : w) sum += v;
        for (double& v : w) v /= sum;
        return w;
    }
};

struct DensityEstimate {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> density;
    KernelSpec kernel;
};

/// Discrete convolution of the bin counts with a Gaussian kernel. Not renormalised.
inline DensityEstimate smooth_density(const Histogram& hist, const KernelSpec& kernel) {
    const auto taps = kernel.taps();
    const auto half = static_cast<long>(taps.size() / 2);
    const auto nb = static_cast<long>(hist.num_bins());

    DensityEstimate est{hist.edges, hist.counts, std::vector<double>(hist.num_bins(), 0.0), kernel};
    for (long b = 0; b < nb; ++b) {
        double acc = 0.0;
        double mass = 0.0;
        for (long k = -half; k <= half; ++k) {
            const long src = b - k;
            if (src < 0 || src >= nb) {
                continue;
            }
            const double w = taps[static_cast<std::size_t>(k + half)];
            acc += w * static_cast<double>(hist.counts[static_cast<std::size_t>(src)]);
            mass += w;
        }
        if (kernel.edge == KernelEdge::Renormalize && mass > 0.0) {
            acc /= mass;
        }
        est.density[static_cast<std::size_t>(b)] = acc;
    }
    return est;
}

enum class WeightScheme { Uniform, ReLD, InvLD };

inline std::string_view to_string(WeightScheme s) {
    switch (s) {
    case WeightScheme::Uniform: return "uniform";
    case WeightScheme::ReLD: return "reld";
    case WeightScheme::InvLD: return "invld";
    }
    return "?";
}

/// Per-window loss weights. `cols` is 1 when one weight per window applies to every variable.
struct WeightTable {
    std::vector<std::size_t> t_values;
    std::vector<double> weights;
    std::size_t cols = 0;
    std::vector<double> scaling;
    WeightScheme scheme = WeightScheme::Uniform;

    std::size_t rows() const noexcept { return t_values.size(); }

    /// Weight of window i for variable j, broadcasting a single column.
    double operator()(std::size_t i, std::size_t j) const { return weights[i * cols + (cols == 1 ? 0 : j)]; }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> out(rows());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(i, j);
        return out;
    }
};

inline constexpr double kWeightFloor = 1e-6;

/// Scale each column to mean one (c = N / sum), then clamp below at kWeightFloor.
inline WeightTable normalize_weights(std::vector<double> raw, std::size_t cols, std::vector<std::size_t> t_values,
                                     WeightScheme scheme) {
    if (cols == 0 || raw.size() != t_values.size() * cols) {
        throw std::invalid_argument("normalize_weights: shape mismatch");
    }
    const std::size_t n = t_values.size();
    WeightTable table;
    table.t_values = std::move(t_values);
    table.cols = cols;
    table.scheme = scheme;
    table.scaling.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = raw[i * cols + j];
            if (!std::isfinite(v) || v < 0.0) {
                throw std::invalid_argument("normalize_weights: raw weights must be finite and non-negative");
            }
            sum += v;
        }
        if (!(sum > 0.0)) {
            throw std::invalid_argument("normalize_weights: column " + std::to_string(j) + " is all zero");
        }
        const double c = static_cast<double>(n) / sum;
        table.scaling[j] = c;
        for (std::size_t i = 0; i < n; ++i) {
            raw[i * cols + j] = std::max(c * raw[i * cols + j], kWeightFloor);
        }
    }
    table.weights = std::move(raw);
    return table;
}

struct ReldOptions {
    std::size_t num_bins = 200;
    KernelSpec kernel{};
    double min_relative_span = 0.05;
};

/// Per-column LD density; one DensityEstimate per profile column.
inline std::vector<DensityEstimate> ld_density(const LdProfile& profile, const ReldOptions& opts = {}) {
    if (profile.rows() == 0) {
        throw std::invalid_argument("ld_density: empty profile");
    }
    std::vector<DensityEstimate> out;
    out.reserve(profile.cols);
    for (std::size_t j = 0; j < profile.cols; ++j) {
        const auto col = profile.column(j);
        out.push_back(smooth_density(build_histogram(col, opts.num_bins, opts.min_relative_span), opts.kernel));
    }
    return out;
}

/// Weight each window by the smoothed density of its LD bin, per column.
inline WeightTable reld_weights(const LdProfile& profile, const ReldOptions& opts = {}) {
    const auto densities = ld_density(profile, opts);
    const std::size_t n = profile.rows();
    std::vector<double> raw(n * profile.cols);
    for (std::size_t j = 0; j < profile.cols; ++j) {
        const auto& est = densities[j];
        Histogram h{est.edges, est.counts};
        for (std::size_t i = 0; i < n; ++i) {
            raw[i * profile.cols + j] = est.density[h.bin_of(profile(i, j))];
        }
    }
    return normalize_weights(std::move(raw), profile.cols, profile.t_values, WeightScheme::ReLD);
}

/// 1 / (|v| + 1) per entry, then mean-one scaling.
inline WeightTable invld_weights(const LdProfile& profile) {
    if (profile.rows() == 0) {
        throw std::invalid_argument("invld_weights: empty profile");
    }
    std::vector<double> raw(profile.ld.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = 1.0 / (std::abs(profile.ld[i]) + 1.0);
    }
    return normalize_weights(std::move(raw), profile.cols, profile.t_values, WeightScheme::InvLD);
}

inline WeightTable uniform_weights(std::vector<std::size_t> t_values, std::size_t cols = 1) {
    std::vector<double> raw(t_values.size() * cols, 1.0);
    return normalize_weights(std::move(raw), cols, std::move(t_values), WeightScheme::Uniform);
}

inline WeightTable compute_weights(const LdProfile& profile, WeightScheme scheme, const ReldOptions& opts = {}) {
    switch (scheme) {
    case WeightScheme::Uniform: return uniform_weights(profile.t_values, profile.cols);
    case WeightScheme::ReLD: return reld_weights(profile, opts);
    case WeightScheme::InvLD: return invld_weights(profile);
    }
    throw std::logic_error("compute_weights: unknown scheme");
}

} // namespace reld

#endif
