#ifndef RELD_EXPERIMENT_HPP
#define RELD_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "reld/discrepancy.hpp"
#include "reld/forecaster.hpp"
#include "reld/series.hpp"
#include "reld/synth.hpp"
#include "reld/weighting.hpp"

namespace reld {

/// Sine base with four labelled abrupt changes (two flukes, one frequency change, one level shift),
/// each of magnitude `event_scale` times the base amplitude. Event positions are fixed fractions of
/// the length, jittered by up to one period from the seed.
struct AbruptSetup {
    std::size_t length = 4096;
    std::size_t period = 64;
    double amplitude = 1.0;
    double noise_sigma = 0.05;
    double event_scale = 5.0;
    double frequency_multiplier = 3.0;
    std::uint64_t seed = 0;

    PeriodicSpec base() const {
        PeriodicSpec spec;
        spec.length = length;
        spec.period = period;
        spec.amplitude = amplitude;
        spec.noise_sigma = noise_sigma;
        spec.seed = seed;
        return spec;
    }

    std::vector<AbruptEvent> events() const {
        SeededRng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        auto at = [&](double frac) {
            return static_cast<std::size_t>(frac * static_cast<double>(length)) +
                   static_cast<std::size_t>(rng.uniform() * static_cast<double>(period));
        };
        const double mag = event_scale * amplitude;
        return {
            {AbruptEvent::Kind::Fluke, at(0.15), 1, mag},
            {AbruptEvent::Kind::TrendShift, at(0.35), 1, mag},
            {AbruptEvent::Kind::FrequencyChange, at(0.55), period, frequency_multiplier},
            {AbruptEvent::Kind::Fluke, at(0.85), 1, -mag},
        };
    }

    LabeledSeries generate() const { return inject_abrupt(gen_periodic(base()), base(), events()); }
};

/// A labelled series split chronologically into train/test windows. The test part keeps the last
/// `input_len` training rows as context, so its first window predicts the first held-out row.
struct SplitData {
    Series train_series;
    Series test_series;
    std::vector<bool> train_mask;
    std::vector<bool> test_mask;
};

inline SplitData split_labeled(const LabeledSeries& data, double train_fraction, std::size_t context) {
    auto [train, test] = split_series(data.series, train_fraction, context);
    const std::size_t cut = train.length();
    SplitData out{std::move(train), std::move(test), {}, {}};
    out.train_mask.assign(data.abrupt.begin(), data.abrupt.begin() + static_cast<std::ptrdiff_t>(cut));
    out.test_mask.assign(data.abrupt.begin() + static_cast<std::ptrdiff_t>(cut - context), data.abrupt.end());
    return out;
}

struct RunOutcome {
    TrainResult trained;
    EvalReport test;
    std::optional<WeightTable> weights;
};

/// Weights from the training split only, train, then evaluate on the test split.
inline RunOutcome run_scheme(const SplitData& data, const WindowSpec& spec, const LdConfig& ld, WeightScheme scheme,
                             const ReldOptions& reld, const TrainConfig& cfg) {
    const auto train_windows = make_windows(data.train_series, spec);
    const auto test_windows = make_windows(data.test_series, spec);
    RunOutcome out;
    if (scheme != WeightScheme::Uniform) {
        out.weights = compute_weights(ld_profile(train_windows, ld), scheme, reld);
    }
    out.trained = train(train_windows, out.weights, cfg);
    out.test = evaluate(out.trained.model, test_windows, window_labels(data.test_mask, test_windows));
    return out;
}

} // namespace reld

#endif
