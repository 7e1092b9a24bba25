#ifndef RELD_SYNTH_HPP
#define RELD_SYNTH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reld/series.hpp"

namespace reld {

/// Seeded random source with a fixed algorithm so generated data is reproducible across standard
/// libraries: 64-bit Mersenne Twister, 53-bit uniforms, Box-Muller normals.
class SeededRng {
public:
    static constexpr std::string_view algorithm = "mt19937_64/u53/box-muller";

    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

struct Harmonic {
    std::size_t multiplier = 1;
    double amplitude = 1.0;
    double phase = 0.0;
};

struct PeriodicSpec {
    std::size_t length = 0;
    std::size_t period = 0;
    double amplitude = 1.0;           // used when `components` is empty
    std::vector<Harmonic> components;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    std::vector<Harmonic> effective_components() const {
        return components.empty() ? std::vector<Harmonic>{{1, amplitude, 0.0}} : components;
    }

    double amplitude_bound() const {
        double b = 0.0;
        for (const auto& c : effective_components()) b += std::abs(c.amplitude);
        return b;
    }

    void validate() const {
        if (period < 2) {
            throw std::invalid_argument("PeriodicSpec: period must be at least 2");
        }
        if (length < 2 * period) {
            throw std::invalid_argument("PeriodicSpec: length must cover at least two periods");
        }
        if (!(noise_sigma >= 0.0)) {
            throw std::invalid_argument("PeriodicSpec: noise_sigma must be non-negative");
        }
    }
};

/// Noise-free value of the periodic base at time t for a (possibly fractional) period.
inline double periodic_value(const std::vector<Harmonic>& comps, double t, double period) {
    double v = 0.0;
    for (const auto& c : comps) {
        v += c.amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(c.multiplier) * t / period + c.phase);
    }
    return v;
}

/// Sum of sinusoids plus seeded Gaussian noise. The phase argument is reduced modulo the period, so
/// the noise-free series repeats bit-for-bit.
inline Series gen_periodic(const PeriodicSpec& spec) {
    spec.validate();
    const auto comps = spec.effective_components();
    SeededRng rng(spec.seed);
    std::vector<double> values(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) {
        values[t] = periodic_value(comps, static_cast<double>(t % spec.period), static_cast<double>(spec.period));
        if (spec.noise_sigma > 0.0) {
            values[t] += spec.noise_sigma * rng.normal();
        }
    }
    return Series::univariate(std::move(values), "periodic");
}

struct AbruptEvent {
    enum class Kind { Fluke, FrequencyChange, TrendShift };
    Kind kind = Kind::Fluke;
    std::size_t start = 0;
    std::size_t duration = 1;
    double magnitude = 0.0;

    /// Half-open index range the event occupies (TrendShift: its labelled transition).
    std::pair<std::size_t, std::size_t> interval() const {
        return {start, start + (kind == Kind::Fluke ? 1 : std::max<std::size_t>(duration, 1))};
    }
};

inline std::string_view to_string(AbruptEvent::Kind k) {
    switch (k) {
    case AbruptEvent::Kind::Fluke: return "fluke";
    case AbruptEvent::Kind::FrequencyChange: return "frequency";
    case AbruptEvent::Kind::TrendShift: return "trend";
    }
    return "?";
}

struct LabeledSeries {
    Series series;
    std::vector<bool> abrupt;  // one flag per row
};

/// Apply events to a series generated from `base`.
///  - Fluke: adds `magnitude` at `start`.
///  - FrequencyChange: over [start, start + duration) the noise-free base is re-rendered at period
///    p / |magnitude|; existing noise is kept.
///  - TrendShift: adds `magnitude` to every row >= start. Only [start, start + duration) is labelled.
inline LabeledSeries inject_abrupt(const Series& series, const PeriodicSpec& base, std::vector<AbruptEvent> events) {
    const std::size_t T = series.length();
    const std::size_t m = series.dims();
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto [lo, hi] = events[i].interval();
        if (hi > T) {
            throw std::invalid_argument("inject_abrupt: event at " + std::to_string(lo) + " extends past the series");
        }
        if (i > 0 && lo < events[i - 1].interval().second) {
            throw std::invalid_argument("inject_abrupt: events overlap at index " + std::to_string(lo));
        }
        if (events[i].kind == AbruptEvent::Kind::FrequencyChange && !(std::abs(events[i].magnitude) > 0.0)) {
            throw std::invalid_argument("inject_abrupt: frequency multiplier must be non-zero");
        }
    }

    std::vector<double> values(series.data().begin(), series.data().end());
    std::vector<bool> mask(T, false);
    const auto comps = base.effective_components();
    const double p = static_cast<double>(base.period);

    for (const auto& ev : events) {
        const auto [lo, hi] = ev.interval();
        switch (ev.kind) {
        case AbruptEvent::Kind::Fluke:
            for (std::size_t j = 0; j < m; ++j) values[lo * m + j] += ev.magnitude;
            break;
        case AbruptEvent::Kind::FrequencyChange: {
            const double p_new = p / std::abs(ev.magnitude);
            for (std::size_t t = lo; t < hi; ++t) {
                const double clean = periodic_value(comps, static_cast<double>(t % base.period), p);
                const double changed = periodic_value(comps, static_cast<double>(t), p_new);
                for (std::size_t j = 0; j < m; ++j) values[t * m + j] += changed - clean;
            }
            break;
        }
        case AbruptEvent::Kind::TrendShift:
            for (std::size_t t = lo; t < T; ++t) {
                for (std::size_t j = 0; j < m; ++j) values[t * m + j] += ev.magnitude;
            }
            break;
        }
        for (std::size_t t = lo; t < hi; ++t) mask[t] = true;
    }
    return {Series(std::move(values), m, series.name()), std::move(mask)};
}

struct RectSpec {
    std::size_t length = 0;
    std::size_t period = 24;
    double duty = 0.5;
    double amplitude = 1.0;
    double growth = 1.0;         // per-period amplitude multiplier
    bool broken = false;
    double removal_prob = 0.0;   // broken only
    std::uint64_t seed = 0;

    void validate() const {
        if (period < 2) throw std::invalid_argument("RectSpec: period must be at least 2");
        if (length < period) throw std::invalid_argument("RectSpec: length must cover one period");
        if (!(duty > 0.0 && duty < 1.0)) throw std::invalid_argument("RectSpec: duty must be in (0, 1)");
        if (!(growth >= 1.0)) throw std::invalid_argument("RectSpec: growth must be >= 1");
        if (!(removal_prob >= 0.0 && removal_prob <= 1.0)) {
            throw std::invalid_argument("RectSpec: removal_prob must be in [0, 1]");
        }
    }

    /// High samples per period, at least 1 and at most period - 1.
    std::size_t high_len() const {
        const auto h = static_cast<std::size_t>(std::llround(duty * static_cast<double>(period)));
        return std::clamp<std::size_t>(h, 1, period - 1);
    }
};

/// Pulse train: each period starts with `high_len()` samples at the current amplitude, then zeros.
/// When broken, each rectangle is flattened with probability removal_prob and labelled.
inline LabeledSeries gen_rect(const RectSpec& spec) {
    spec.validate();
    SeededRng rng(spec.seed);
    const std::size_t high = spec.high_len();
    std::vector<double> values(spec.length, 0.0);
    std::vector<bool> mask(spec.length, false);
    double amp = spec.amplitude;
    for (std::size_t start = 0; start < spec.length; start += spec.period) {
        const bool removed = spec.broken && rng.uniform() < spec.removal_prob;
        const std::size_t end = std::min(start + high, spec.length);
        for (std::size_t t = start; t < end; ++t) {
            if (removed) {
                mask[t] = true;
            } else {
                values[t] = amp;
            }
        }
        amp *= spec.growth;
    }
    return {Series::univariate(std::move(values), spec.broken ? "rect-broken" : "rect-normal"), std::move(mask)};
}

/// A window is abrupt when its output rows [t, t + O) touch any labelled row.
inline std::vector<bool> window_labels(const std::vector<bool>& abrupt, const WindowSet& windows) {
    std::vector<bool> out;
    out.reserve(windows.size());
    const std::size_t O = windows.spec.output_len;
    for (const auto& pair : windows) {
        if (pair.t + O > abrupt.size()) {
            throw std::invalid_argument("window_labels: mask shorter than the windowed series");
        }
        bool hit = false;
        for (std::size_t t = pair.t; t < pair.t + O && !hit; ++t) hit = abrupt[t];
        out.push_back(hit);
    }
    return out;
}

inline std::vector<bool> window_labels(const LabeledSeries& labeled, const WindowSet& windows) {
    return window_labels(labeled.abrupt, windows);
}

} // namespace reld

#endif
