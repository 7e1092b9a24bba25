// reld: generate synthetic series, compute LD weights, train/evaluate the linear forecaster and run
// the built-in verification checks.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 verification failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracles.hpp"
#include "reld/reld.hpp"

namespace fs = std::filesystem;
using namespace reld;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// "reld <sub> --a=1 --b=x ..." with every option of the subcommand, given or defaulted.
std::string flag_line(const CLI::App& sub) {
    std::string line = "reld " + sub.get_name();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string& name = opt->get_single_name();
        if (name == "help" || name.empty()) continue;
        std::string value;
        if (opt->count() > 0) {
            const auto& res = opt->results();
            for (std::size_t i = 0; i < res.size(); ++i) value += (i ? ";" : "") + res[i];
            if (opt->get_expected_min() == 0) value = "true";
        } else {
            value = opt->get_default_str();
            if (opt->get_expected_min() == 0 && value.empty()) value = "false";
        }
        line += " --" + name + "=" + value;
    }
    return line;
}

fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    return p;
}

fs::path prepare_file(const std::string& file) {
    fs::path p(file);
    if (p.has_parent_path()) prepare_dir(p.parent_path().string());
    return p;
}

// ---- shared option groups --------------------------------------------------------------------

struct WindowFlags {
    std::size_t input_len = 64;
    std::size_t output_len = 32;
    std::size_t stride = 1;

    void add(CLI::App& app) {
        app.add_option("--input-len", input_len, "Input window length I");
        app.add_option("--output-len", output_len, "Output window length O");
        app.add_option("--stride", stride, "Window stride");
    }
    WindowSpec spec() const {
        WindowSpec s{input_len, output_len, stride};
        s.validate();
        return s;
    }
};

struct LdFlags {
    std::string metric = "welch";
    double epsilon = 1e-8;
    double ridge = 1e-8;
    std::string lrv = "simple";
    std::size_t bandwidth = 0;
    bool skip_first_row = false;

    void add(CLI::App& app) {
        app.add_option("--metric", metric, "LD metric")->check(CLI::IsMember({"welch", "hotelling", "kpss"}));
        app.add_option("--epsilon", epsilon, "Welch variance floor");
        app.add_option("--ridge", ridge, "Hotelling covariance ridge");
        app.add_option("--lrv", lrv, "KPSS long-run variance")->check(CLI::IsMember({"simple", "newey-west"}));
        app.add_option("--bandwidth", bandwidth, "Newey-West lag count");
        app.add_flag("--hotelling-skip-first", skip_first_row, "Drop the first output row from the Hotelling covariance");
    }
    LdConfig config() const {
        LdConfig c;
        c.metric = metric == "welch" ? LdMetric::WelchT : metric == "hotelling" ? LdMetric::HotellingT2 : LdMetric::Kpss;
        c.epsilon = epsilon;
        c.ridge = ridge;
        c.lrv = lrv == "simple" ? LongRunVariance::simple() : LongRunVariance::newey_west(bandwidth);
        c.hotelling_rows = skip_first_row ? HotellingOutputRows::SkipFirstRow : HotellingOutputRows::All;
        c.validate();
        return c;
    }
};

struct WeightFlags {
    std::string scheme = "reld";
    std::size_t bins = 200;
    std::size_t kernel_size = 5;
    double kernel_sigma = 2.0;
    std::string kernel_edge = "zero";
    double min_span = 0.05;

    void add(CLI::App& app) {
        app.add_option("--scheme", scheme, "Weighting scheme")->check(CLI::IsMember({"uniform", "reld", "invld"}));
        app.add_option("--bins", bins, "Histogram bins");
        app.add_option("--kernel-size", kernel_size, "Gaussian kernel taps (odd)");
        app.add_option("--kernel-sigma", kernel_sigma, "Gaussian kernel sigma in bins");
        app.add_option("--kernel-edge", kernel_edge, "Kernel edge handling")->check(CLI::IsMember({"zero", "renormalize"}));
        app.add_option("--min-span", min_span, "Histogram range floor relative to max |LD|");
    }
    WeightScheme scheme_kind() const {
        return scheme == "uniform" ? WeightScheme::Uniform : scheme == "reld" ? WeightScheme::ReLD : WeightScheme::InvLD;
    }
    ReldOptions options() const {
        ReldOptions o;
        o.num_bins = bins;
        o.kernel = {kernel_size, kernel_sigma, kernel_edge == "zero" ? KernelEdge::ZeroPad : KernelEdge::Renormalize};
        o.kernel.validate();
        o.min_relative_span = min_span;
        if (bins == 0) throw UsageError("--bins must be positive");
        return o;
    }
};

// ---- gen -------------------------------------------------------------------------------------

struct GenFlags {
    std::string kind = "periodic";
    std::size_t length = 4096;
    std::size_t period = 64;
    double amplitude = 1.0;
    double noise = 0.0;
    std::vector<std::string> harmonics;
    std::uint64_t seed = 0;
    double event_scale = 5.0;
    double freq_mult = 3.0;
    double duty = 0.5;
    double growth = 1.0;
    bool broken = false;
    double removal_prob = 0.3;
    std::string out;
    std::string mask_out;
};

std::vector<Harmonic> parse_harmonics(const std::vector<std::string>& specs) {
    std::vector<Harmonic> out;
    for (const auto& s : specs) {
        Harmonic h;
        char c1 = 0, c2 = 0;
        std::istringstream in(s);
        if (!(in >> h.multiplier >> c1 >> h.amplitude) || c1 != ':') {
            throw UsageError("--harmonic expects MULT:AMP[:PHASE], got '" + s + "'");
        }
        if (in >> c2) {
            if (c2 != ':' || !(in >> h.phase)) throw UsageError("--harmonic expects MULT:AMP[:PHASE], got '" + s + "'");
        }
        if (h.multiplier == 0) throw UsageError("--harmonic multiplier must be positive");
        out.push_back(h);
    }
    return out;
}

std::string default_mask_path(const std::string& out) {
    fs::path p(out);
    return (p.parent_path() / (p.stem().string() + ".mask.csv")).string();
}

void write_series(const fs::path& path, const std::string& flags, const Series& s) {
    CsvWriter w(path);
    w.comment(flags).header({"value"});
    for (std::size_t t = 0; t < s.length(); ++t) w.row(s(t, 0));
}

void write_mask(const fs::path& path, const std::string& flags, const std::vector<bool>& mask) {
    CsvWriter w(path);
    w.comment(flags).header({"abrupt"});
    for (bool b : mask) w.row(b ? 1 : 0);
}

int cmd_gen(const CLI::App& sub, const GenFlags& f) {
    const std::string flags = flag_line(sub);
    std::optional<LabeledSeries> labeled;
    Series series;
    if (f.kind == "periodic") {
        PeriodicSpec spec;
        spec.length = f.length;
        spec.period = f.period;
        spec.amplitude = f.amplitude;
        spec.components = parse_harmonics(f.harmonics);
        spec.noise_sigma = f.noise;
        spec.seed = f.seed;
        series = gen_periodic(spec);
    } else if (f.kind == "abrupt") {
        AbruptSetup setup;
        setup.length = f.length;
        setup.period = f.period;
        setup.amplitude = f.amplitude;
        setup.noise_sigma = f.noise;
        setup.event_scale = f.event_scale;
        setup.frequency_multiplier = f.freq_mult;
        setup.seed = f.seed;
        labeled = setup.generate();
    } else {
        RectSpec spec;
        spec.length = f.length;
        spec.period = f.period;
        spec.duty = f.duty;
        spec.amplitude = f.amplitude;
        spec.growth = f.growth;
        spec.broken = f.broken;
        spec.removal_prob = f.removal_prob;
        spec.seed = f.seed;
        labeled = gen_rect(spec);
    }
    const auto out = prepare_file(f.out);
    write_series(out, flags, labeled ? labeled->series : series);
    std::cout << "wrote " << out.string() << '\n';
    if (labeled) {
        const auto mask_path = prepare_file(f.mask_out.empty() ? default_mask_path(f.out) : f.mask_out);
        write_mask(mask_path, flags, labeled->abrupt);
        std::cout << "wrote " << mask_path.string() << '\n';
    }
    return kExitOk;
}

// ---- weigh -----------------------------------------------------------------------------------

struct WeighFlags {
    std::string input;
    bool header = false;
    std::string out_dir = "reld_out";
    WindowFlags window;
    LdFlags ld;
    WeightFlags weights;
};

void write_profile(const fs::path& path, const std::string& flags, const LdProfile& p) {
    CsvWriter w(path);
    w.comment(flags).header({"t", "dim", "ld"});
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols; ++j) w.row(p.t_values[i], j, p(i, j));
    }
}

void write_density(const fs::path& path, const std::string& flags, const std::vector<DensityEstimate>& est) {
    CsvWriter w(path);
    w.comment(flags).header({"dim", "bin_left", "bin_right", "count", "density"});
    for (std::size_t j = 0; j < est.size(); ++j) {
        const auto& e = est[j];
        for (std::size_t b = 0; b < e.density.size(); ++b) w.row(j, e.edges[b], e.edges[b + 1], e.counts[b], e.density[b]);
    }
}

void write_weights(const fs::path& path, const std::string& flags, const LdProfile& p, const WeightTable& t) {
    CsvWriter w(path);
    w.comment(flags).header({"t", "dim", "ld", "weight"});
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) w.row(t.t_values[i], j, p(i, std::min(j, p.cols - 1)), t(i, j));
    }
}

int cmd_weigh(const CLI::App& sub, const WeighFlags& f) {
    const std::string flags = flag_line(sub);
    const auto spec = f.window.spec();
    const auto ld_cfg = f.ld.config();
    const auto opts = f.weights.options();
    const auto series = load_csv(f.input, f.header);
    if (series.length() < spec.span()) {
        throw DataError(f.input + ": " + std::to_string(series.length()) + " rows, windows need " +
                        std::to_string(spec.span()));
    }

    const auto t0 = Clock::now();
    const auto windows = make_windows(series, spec);
    const auto profile = ld_profile(windows, ld_cfg);
    const auto density = ld_density(profile, opts);
    const auto table = compute_weights(profile, f.weights.scheme_kind(), opts);
    const double secs = seconds_since(t0);

    const auto dir = prepare_dir(f.out_dir);
    write_profile(dir / "ld_profile.csv", flags, profile);
    write_density(dir / "density.csv", flags, density);
    write_weights(dir / "weights.csv", flags, profile, table);
    std::cout << "windows=" << windows.size() << " dims=" << series.dims() << " metric=" << to_string(ld_cfg.metric)
              << " scheme=" << to_string(table.scheme) << '\n'
              << "weighting_seconds=" << secs << '\n'
              << "wrote " << (dir / "ld_profile.csv").string() << ", density.csv, weights.csv\n";
    return kExitOk;
}

// ---- train-eval ------------------------------------------------------------------------------

struct TrainFlags {
    std::string input;
    bool header = false;
    std::string mask;
    std::string synth;
    std::uint64_t seed = 0;
    std::size_t length = 0;
    std::size_t period = 0;
    double split = 0.7;
    std::string preprocess = "none";
    std::size_t ma_window = 5;
    double ema_alpha = 0.3;
    double outlier_z = 3.0;
    std::string loss = "l2";
    double huber_delta = 1.0;
    double lr = 0.01;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    bool no_shuffle = false;
    std::string reweight = "none";
    double beta = 1.0;
    double gamma = 1.0;
    double reweight_eps = 1e-3;
    bool split_metrics = false;
    std::string out_dir = "reld_out";
    WindowFlags window;
    LdFlags ld;
    WeightFlags weights;
};

LabeledSeries synth_source(const TrainFlags& f) {
    if (f.synth == "abrupt") {
        AbruptSetup setup;
        setup.seed = f.seed;
        if (f.length) setup.length = f.length;
        if (f.period) setup.period = f.period;
        return setup.generate();
    }
    RectSpec spec;
    spec.length = f.length ? f.length : 2400;
    spec.period = f.period ? f.period : 24;
    spec.growth = 1.02;
    spec.broken = f.synth == "rect-broken";
    spec.removal_prob = 0.3;
    spec.seed = f.seed;
    return gen_rect(spec);
}

std::vector<bool> load_mask(const std::string& path, bool header, std::size_t length) {
    const auto m = load_csv(path, header);
    if (m.dims() != 1 || m.length() != length) {
        throw DataError(path + ": mask must be one column with " + std::to_string(length) + " rows");
    }
    std::vector<bool> out(length);
    for (std::size_t t = 0; t < length; ++t) {
        const double v = m(t, 0);
        if (v != 0.0 && v != 1.0) throw DataError(path + ": mask values must be 0 or 1", t + 1, 1);
        out[t] = v == 1.0;
    }
    return out;
}

Series preprocess(const Series& s, const TrainFlags& f) {
    if (f.preprocess == "ma") return moving_average(s, f.ma_window);
    if (f.preprocess == "ema") return ema(s, f.ema_alpha);
    if (f.preprocess == "filter") return filter_outliers(s, f.outlier_z).series;
    return s;
}

nlohmann::json report_json(const EvalReport& r) {
    nlohmann::json j;
    j["mse"] = r.mse;
    j["mae"] = r.mae;
    j["count"] = r.count;
    if (r.labelled) {
        j["count_normal"] = r.count_normal;
        j["count_abrupt"] = r.count_abrupt;
        j["mse_normal"] = r.mse_normal ? nlohmann::json(*r.mse_normal) : nlohmann::json(nullptr);
        j["mse_abrupt"] = r.mse_abrupt ? nlohmann::json(*r.mse_abrupt) : nlohmann::json(nullptr);
    }
    return j;
}

int cmd_train_eval(const CLI::App& sub, const TrainFlags& f) {
    const std::string flags = flag_line(sub);
    if (f.input.empty() == f.synth.empty()) throw UsageError("give exactly one of --input or --synth");
    if (!(f.split > 0.0 && f.split < 1.0)) throw UsageError("--split must be in (0, 1)");
    const auto spec = f.window.spec();
    const auto ld_cfg = f.ld.config();
    const auto opts = f.weights.options();
    TrainConfig cfg;
    cfg.learning_rate = f.lr;
    cfg.epochs = f.epochs;
    cfg.batch_size = f.batch_size;
    cfg.seed = f.seed;
    cfg.shuffle = !f.no_shuffle;
    cfg.loss = f.loss == "l2" ? LossKind::l2() : f.loss == "l1" ? LossKind::l1() : LossKind::huber(f.huber_delta);
    if (f.reweight == "focal") cfg.error_reweight = ErrorReweight::focal(f.beta, f.gamma);
    if (f.reweight == "flip-focal") cfg.error_reweight = ErrorReweight::flip_focal(f.beta, f.gamma);
    if (f.reweight == "inv-l2") cfg.error_reweight = ErrorReweight::inv_l2(f.reweight_eps);
    cfg.validate();

    LabeledSeries data;
    bool has_mask = false;
    if (!f.synth.empty()) {
        data = synth_source(f);
        has_mask = true;
    } else {
        data.series = load_csv(f.input, f.header);
        if (!f.mask.empty()) {
            data.abrupt = load_mask(f.mask, f.header, data.series.length());
            has_mask = true;
        } else {
            data.abrupt.assign(data.series.length(), false);
        }
    }
    if (f.split_metrics && !has_mask) {
        std::cerr << "warning: split metrics requested but no mask was given; MSE_N/MSE_A omitted\n";
    }

    const std::size_t cut = static_cast<std::size_t>(std::floor(f.split * static_cast<double>(data.series.length())));
    if (cut < spec.span() || data.series.length() - cut < spec.output_len) {
        throw DataError("series of " + std::to_string(data.series.length()) +
                        " rows is too short for this split and window");
    }
    auto split = split_labeled(data, f.split, spec.input_len);
    split.train_series = preprocess(split.train_series, f);

    const auto train_windows = make_windows(split.train_series, spec);
    const auto test_windows = make_windows(split.test_series, spec);

    const auto t0 = Clock::now();
    std::optional<WeightTable> weights;
    std::optional<LdProfile> profile;
    if (f.weights.scheme_kind() != WeightScheme::Uniform) {
        profile = ld_profile(train_windows, ld_cfg);
        weights = compute_weights(*profile, f.weights.scheme_kind(), opts);
    }
    const double weigh_secs = seconds_since(t0);

    const auto t1 = Clock::now();
    const auto trained = train(train_windows, weights, cfg);
    const double train_secs = seconds_since(t1);

    std::optional<std::vector<bool>> labels;
    if (has_mask) labels = window_labels(split.test_mask, test_windows);
    const auto report = evaluate(trained.model, test_windows, labels);

    const auto dir = prepare_dir(f.out_dir);
    const std::string scheme(to_string(f.weights.scheme_kind()));

    std::map<std::string, std::string> kv{
        {"scheme", scheme},
        {"metric", std::string(to_string(ld_cfg.metric))},
        {"train_windows", std::to_string(train_windows.size())},
        {"test_windows", std::to_string(test_windows.size())},
        {"mse", format_double(report.mse)},
        {"mae", format_double(report.mae)},
        {"final_train_loss", format_double(trained.loss_trace.back())},
        {"weighting_seconds", format_double(weigh_secs)},
        {"train_seconds", format_double(train_secs)},
    };
    if (report.labelled) {
        kv["count_normal"] = std::to_string(report.count_normal);
        kv["count_abrupt"] = std::to_string(report.count_abrupt);
        if (report.mse_normal) kv["mse_normal"] = format_double(*report.mse_normal);
        if (report.mse_abrupt) kv["mse_abrupt"] = format_double(*report.mse_abrupt);
    }
    {
        std::ofstream out(dir / "report.txt");
        if (!out) throw DataError("cannot write report in '" + dir.string() + "'");
        out << "# " << flags << '\n';
        for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    }
    {
        nlohmann::json j;
        j["flags"] = flags;
        j["scheme"] = scheme;
        j["metric"] = to_string(ld_cfg.metric);
        j["train_windows"] = train_windows.size();
        j["test"] = report_json(report);
        j["final_train_loss"] = trained.loss_trace.back();
        j["weighting_seconds"] = weigh_secs;
        j["train_seconds"] = train_secs;
        std::ofstream out(dir / "report.json");
        out << j.dump(2) << '\n';
    }
    {
        CsvWriter w(dir / "loss_trace.csv");
        w.comment(flags).header({"epoch", "loss"});
        for (std::size_t e = 0; e < trained.loss_trace.size(); ++e) w.row(e, trained.loss_trace[e]);
    }
    if (weights) write_weights(dir / "weights.csv", flags, *profile, *weights);
    {
        std::ofstream out(dir / "model.txt");
        out << "# " << flags << '\n';
        save_model(trained.model, out);
    }

    for (const auto& [k, v] : kv) std::cout << k << '=' << v << '\n';
    return kExitOk;
}

// ---- verify ----------------------------------------------------------------------------------

struct VerifyFlags {
    std::size_t period = 64;
    std::size_t periods = 12;
    std::size_t window = 32;
    std::string fixture = "clean";
    std::uint64_t seed = 1;
};

struct Check {
    std::string name;
    bool pass;
    std::string detail;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::vector<Check> run_checks(const VerifyFlags& f) {
    std::vector<Check> checks;
    PeriodicSpec spec;
    spec.length = f.period * f.periods;
    spec.period = f.period;
    Series s = gen_periodic(spec);
    if (f.fixture == "fluke") {
        s = inject_abrupt(s, spec, {{AbruptEvent::Kind::Fluke, spec.length / 2, 1, 3.0}}).series;
    }

    const WindowSpec ws{f.window, f.window, 1};
    for (auto metric : {LdMetric::WelchT, LdMetric::HotellingT2, LdMetric::Kpss}) {
        LdConfig cfg;
        cfg.metric = metric;
        const double r = periodicity_residual(ld_profile(s, ws, cfg), f.period);
        checks.push_back({"periodicity/" + std::string(to_string(metric)), r < 1e-9, "residual " + num(r)});
    }
    const auto mr = window_moment_residual(s, f.window, f.period);
    checks.push_back({"window-mean periodicity", mr.mean < 1e-9, "residual " + num(mr.mean)});
    checks.push_back({"window-variance periodicity", mr.variance < 1e-9, "residual " + num(mr.variance)});

    std::mt19937_64 rng(f.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> len(4, 48);
    double welch_worst = 0.0, kpss_worst = 0.0, hot_worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        const std::size_t I = len(rng), O = len(rng);
        std::vector<double> v(I + O);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = nd(rng) + (i >= I ? 0.7 : 0.0);
        const auto series = Series::univariate(v);
        const auto x = rows_of(series, 0, I);
        const auto y = rows_of(series, I, I + O);
        const std::vector<double> xv(v.begin(), v.begin() + I), yv(v.begin() + I, v.end());
        const double w_ref = oracle::welch(xv, yv, 1e-8);
        welch_worst = std::max(welch_worst, std::abs(welch_ld(x, y, 1e-8)[0] - w_ref) / std::max(std::abs(w_ref), 1e-300));
        const double k_ref = oracle::kpss(v);
        kpss_worst = std::max(kpss_worst, std::abs(kpss_ld(x, y)[0] - k_ref) / std::max(1.0, std::abs(k_ref)));
        const double h_ref = oracle::pooled_t_squared(xv, yv);
        hot_worst = std::max(hot_worst, std::abs(hotelling_ld(x, y, 0.0) - h_ref) / std::max(std::abs(h_ref), 1e-300));
    }
    checks.push_back({"welch oracle", welch_worst <= 1e-10, "max rel error " + num(welch_worst)});
    checks.push_back({"kpss oracle", kpss_worst <= 1e-8, "max error " + num(kpss_worst)});
    checks.push_back({"hotelling m=1 vs pooled t^2", hot_worst <= 1e-10, "max rel error " + num(hot_worst)});

    // One sample per period: constant windows must still give finite LD.
    std::vector<double> flat(4 * f.window);
    for (std::size_t k = 0; k < flat.size(); ++k) {
        flat[k] = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) + 0.3);
    }
    const auto deg = ld_profile(Series::univariate(flat), ws, LdConfig{});
    const bool finite = std::all_of(deg.ld.begin(), deg.ld.end(), [](double v) { return std::isfinite(v); });
    checks.push_back({"degenerate variance finite", finite, std::to_string(deg.rows()) + " windows"});
    return checks;
}

int cmd_verify(const VerifyFlags& f) {
    if (f.period < 2 || f.window < 2 || 2 * (f.window + f.period) > f.period * f.periods + 1) {
        throw UsageError("verify: the series must hold two periods of windows (raise --periods)");
    }
    const auto checks = run_checks(f);
    int failed = 0;
    for (const auto& c : checks) {
        failed += !c.pass;
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    }
    std::cout << (checks.size() - static_cast<std::size_t>(failed)) << '/' << checks.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitVerify;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-discrepancy sample reweighting for time series forecasting"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic series (and its abrupt-change mask)");
    gen_cmd->add_option("--kind", gen.kind, "Series kind")->check(CLI::IsMember({"periodic", "abrupt", "rect"}));
    gen_cmd->add_option("--length", gen.length, "Number of samples");
    gen_cmd->add_option("--period", gen.period, "Period in samples");
    gen_cmd->add_option("--amplitude", gen.amplitude, "Base amplitude");
    gen_cmd->add_option("--noise", gen.noise, "Gaussian noise sigma (periodic, abrupt)");
    gen_cmd->add_option("--harmonic", gen.harmonics, "Component MULT:AMP[:PHASE], repeatable (periodic)");
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--event-scale", gen.event_scale, "Event magnitude in base amplitudes (abrupt)");
    gen_cmd->add_option("--freq-mult", gen.freq_mult, "Frequency-change multiplier (abrupt)");
    gen_cmd->add_option("--duty", gen.duty, "High fraction of each period (rect)");
    gen_cmd->add_option("--growth", gen.growth, "Per-period amplitude factor (rect)");
    gen_cmd->add_flag("--broken", gen.broken, "Remove rectangles at random (rect)");
    gen_cmd->add_option("--removal-prob", gen.removal_prob, "Removal probability (rect --broken)");
    gen_cmd->add_option("--out", gen.out, "Series CSV path")->required();
    gen_cmd->add_option("--mask-out", gen.mask_out, "Mask CSV path (default: <out>.mask.csv)");

    WeighFlags weigh;
    auto* weigh_cmd = app.add_subcommand("weigh", "Compute LD profile, density and sample weights for a CSV");
    weigh_cmd->add_option("--input", weigh.input, "Input CSV")->required();
    weigh_cmd->add_flag("--header", weigh.header, "First non-comment line is a header");
    weigh_cmd->add_option("--out-dir", weigh.out_dir, "Output directory");
    weigh.window.add(*weigh_cmd);
    weigh.ld.add(*weigh_cmd);
    weigh.weights.add(*weigh_cmd);

    TrainFlags tr;
    auto* train_cmd = app.add_subcommand("train-eval", "Train the linear forecaster and evaluate on the held-out tail");
    train_cmd->add_option("--input", tr.input, "Input CSV");
    train_cmd->add_flag("--header", tr.header, "CSV files have a header line");
    train_cmd->add_option("--mask", tr.mask, "0/1 abrupt-change mask CSV for --input");
    train_cmd->add_option("--synth", tr.synth, "Built-in synthetic data instead of --input")
        ->check(CLI::IsMember({"abrupt", "rect-normal", "rect-broken"}));
    train_cmd->add_option("--seed", tr.seed, "Seed for synthetic data and shuffling");
    train_cmd->add_option("--length", tr.length, "Synthetic length (0 = built-in default)");
    train_cmd->add_option("--period", tr.period, "Synthetic period (0 = built-in default)");
    train_cmd->add_option("--split", tr.split, "Training fraction of the series");
    train_cmd->add_option("--preprocess", tr.preprocess, "Training-series preprocessing")
        ->check(CLI::IsMember({"none", "ma", "ema", "filter"}));
    train_cmd->add_option("--ma-window", tr.ma_window, "Moving-average width");
    train_cmd->add_option("--ema-alpha", tr.ema_alpha, "EMA smoothing factor");
    train_cmd->add_option("--outlier-z", tr.outlier_z, "Outlier filter threshold in standard deviations");
    train_cmd->add_option("--loss", tr.loss, "Loss")->check(CLI::IsMember({"l2", "l1", "huber"}));
    train_cmd->add_option("--huber-delta", tr.huber_delta, "Huber threshold");
    train_cmd->add_option("--lr", tr.lr, "Learning rate");
    train_cmd->add_option("--epochs", tr.epochs, "Epochs");
    train_cmd->add_option("--batch-size", tr.batch_size, "Mini-batch size");
    train_cmd->add_flag("--no-shuffle", tr.no_shuffle, "Keep window order fixed");
    train_cmd->add_option("--reweight", tr.reweight, "Error-based reweighting")
        ->check(CLI::IsMember({"none", "focal", "flip-focal", "inv-l2"}));
    train_cmd->add_option("--beta", tr.beta, "Focal beta");
    train_cmd->add_option("--gamma", tr.gamma, "Focal gamma");
    train_cmd->add_option("--reweight-eps", tr.reweight_eps, "Inverse-error epsilon");
    train_cmd->add_flag("--split-metrics", tr.split_metrics, "Warn when MSE_N/MSE_A cannot be reported");
    train_cmd->add_option("--out-dir", tr.out_dir, "Output directory");
    tr.window.add(*train_cmd);
    tr.ld.add(*train_cmd);
    tr.weights.add(*train_cmd);

    VerifyFlags ver;
    auto* verify_cmd = app.add_subcommand("verify", "Run the periodicity and oracle checks");
    verify_cmd->add_option("--period", ver.period, "Sine period in samples");
    verify_cmd->add_option("--periods", ver.periods, "Number of periods");
    verify_cmd->add_option("--window", ver.window, "Input and output window length");
    verify_cmd->add_option("--fixture", ver.fixture, "Series under test")->check(CLI::IsMember({"clean", "fluke"}));
    verify_cmd->add_option("--seed", ver.seed, "Seed for the random oracle cases");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(*gen_cmd, gen);
        if (*weigh_cmd) return cmd_weigh(*weigh_cmd, weigh);
        if (*train_cmd) return cmd_train_eval(*train_cmd, tr);
        if (*verify_cmd) return cmd_verify(ver);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
