#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "reld/forecaster.hpp"

using namespace reld;

namespace {

Series random_series(std::size_t T, std::size_t m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(T * m);
    for (auto& x : v) x = d(rng);
    return Series(std::move(v), m);
}

LinearForecaster random_model(std::size_t m, std::size_t I, std::size_t O, std::uint64_t seed) {
    LinearForecaster model(m, I, O);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.0, 0.3);
    for (auto& p : model.params()) p = d(rng);
    return model;
}

std::vector<double> gradient(const LinearForecaster& model, const WindowPair& pair, std::span<const double> w) {
    std::vector<double> g(model.param_count(), 0.0);
    loss_and_gradient(model, pair, w, LossKind::l2(), g, 1.0);
    return g;
}

} // namespace

TEST(Predict, ZeroModelPredictsZero) {
    const auto s = random_series(20, 2, 1);
    const auto windows = make_windows(s, {5, 3, 1});
    const LinearForecaster model(2, 5, 3);
    for (double v : model.predict(windows[0].x)) EXPECT_EQ(v, 0.0);
}

TEST(Predict, SelectionMatrixCopiesInputs) {
    const auto s = random_series(20, 2, 2);
    const auto windows = make_windows(s, {5, 3, 1});
    LinearForecaster model(2, 5, 3);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 3; ++i) model.weight(j, i, 4 - i) = 1.0;
        model.bias(j, 1) = 0.5;
    }
    const auto& x = windows[4].x;
    const auto y = model.predict(x);
    for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(y[i * 2 + j], x(4 - i, j) + (i == 1 ? 0.5 : 0.0));
    }
}

TEST(Predict, LinearInInputWithoutBias) {
    const auto model = [] {
        auto m = random_model(1, 6, 2, 3);
        m.bias(0, 0) = m.bias(0, 1) = 0.0;
        return m;
    }();
    const auto a = random_series(6, 1, 4);
    const auto b = random_series(6, 1, 5);
    std::vector<double> sum(6);
    for (std::size_t t = 0; t < 6; ++t) sum[t] = 2.0 * a(t, 0) + b(t, 0);
    const auto c = Series::univariate(sum);
    const auto pa = model.predict(rows_of(a, 0, 6));
    const auto pb = model.predict(rows_of(b, 0, 6));
    const auto pc = model.predict(rows_of(c, 0, 6));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(pc[i], 2.0 * pa[i] + pb[i], 1e-12);
    EXPECT_THROW(model.predict(rows_of(a, 0, 5)), std::invalid_argument);
}

TEST(Train, LearnsConstantSeries) {
    const auto s = Series::univariate(std::vector<double>(200, 1.5));
    const auto windows = make_windows(s, {8, 4, 1});
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 300;
    cfg.batch_size = 16;
    const auto result = train(windows, std::nullopt, cfg);
    EXPECT_LT(evaluate(result.model, windows).mse, 1e-6);
    EXPECT_LT(result.loss_trace.back(), result.loss_trace.front());
}

TEST(Train, UnitWeightsMatchUniformBitForBit) {
    const auto s = random_series(120, 2, 6);
    const auto windows = make_windows(s, {10, 5, 1});
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 17;
    std::vector<std::size_t> ts;
    for (const auto& p : windows) ts.push_back(p.t);
    const auto a = train(windows, std::nullopt, cfg);
    const auto b = train(windows, uniform_weights(ts, 2), cfg);
    EXPECT_EQ(a.model, b.model);
    EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Train, ZeroLearningRateKeepsLossConstant) {
    const auto s = random_series(80, 1, 7);
    const auto windows = make_windows(s, {6, 3, 1});
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 4;
    const auto r = train(windows, std::nullopt, cfg);
    for (double l : r.loss_trace) EXPECT_DOUBLE_EQ(l, r.loss_trace.front());
    EXPECT_EQ(r.model, LinearForecaster(1, 6, 3));
}

TEST(Train, WeightScaleEquivalentToLearningRateScale) {
    const auto s = random_series(150, 2, 8);
    const auto windows = make_windows(s, {12, 4, 1});
    std::vector<std::size_t> ts;
    std::vector<double> raw;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (const auto& p : windows) {
        ts.push_back(p.t);
        raw.push_back(u(rng));
    }
    const double c = 4.0;
    WeightTable w{ts, raw, 1, {1.0}, WeightScheme::ReLD};
    WeightTable cw = w;
    for (auto& v : cw.weights) v *= c;

    TrainConfig cfg;
    cfg.learning_rate = 0.002;
    cfg.epochs = 10;
    cfg.seed = 2;
    const auto scaled_w = train(windows, cw, cfg);
    cfg.learning_rate *= c;
    const auto scaled_lr = train(windows, w, cfg);
    const auto a = scaled_w.model.params();
    const auto b = scaled_lr.model.params();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-10);
}

TEST(Train, SeededDeterminismAndShuffleDependence) {
    const auto s = random_series(100, 1, 10);
    const auto windows = make_windows(s, {8, 4, 1});
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 7;
    cfg.seed = 1;
    const auto a = train(windows, std::nullopt, cfg);
    EXPECT_EQ(a.model, train(windows, std::nullopt, cfg).model);
    cfg.seed = 2;
    EXPECT_FALSE(a.model == train(windows, std::nullopt, cfg).model);
}

TEST(Train, RejectsMisalignedWeights) {
    const auto s = random_series(60, 2, 11);
    const auto windows = make_windows(s, {6, 3, 1});
    std::vector<std::size_t> ts;
    for (const auto& p : windows) ts.push_back(p.t);
    TrainConfig cfg;
    cfg.epochs = 1;

    auto shifted = ts;
    for (auto& t : shifted) ++t;
    EXPECT_THROW(train(windows, uniform_weights(shifted, 1), cfg), std::invalid_argument);
    auto shorter = ts;
    shorter.pop_back();
    EXPECT_THROW(train(windows, uniform_weights(shorter, 1), cfg), std::invalid_argument);
    EXPECT_THROW(train(windows, uniform_weights(ts, 3), cfg), std::invalid_argument);
    cfg.batch_size = 0;
    EXPECT_THROW(train(windows, std::nullopt, cfg), std::invalid_argument);
}

TEST(Train, DivergenceIsReported) {
    std::vector<double> v(200);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 100.0 * std::sin(static_cast<double>(t));
    const auto s = Series::univariate(v);
    const auto windows = make_windows(s, {16, 4, 1});
    TrainConfig cfg;
    cfg.learning_rate = 10.0;
    cfg.epochs = 50;
    EXPECT_THROW(train(windows, std::nullopt, cfg), TrainingDiverged);
}

TEST(Train, ErrorReweightingRuns) {
    const auto s = random_series(80, 1, 12);
    const auto windows = make_windows(s, {6, 3, 1});
    TrainConfig cfg;
    cfg.epochs = 3;
    for (const auto& r : {ErrorReweight::focal(), ErrorReweight::flip_focal(), ErrorReweight::inv_l2()}) {
        cfg.error_reweight = r;
        const auto out = train(windows, std::nullopt, cfg);
        for (double l : out.loss_trace) EXPECT_TRUE(std::isfinite(l));
    }
}

TEST(Evaluate, PerfectModelAndSplits) {
    const auto s = Series::univariate(std::vector<double>(30, 0.0));
    const auto windows = make_windows(s, {4, 2, 1});
    const LinearForecaster zero(1, 4, 2);
    const auto all_normal = evaluate(zero, windows, std::vector<bool>(windows.size(), false));
    EXPECT_EQ(all_normal.mse, 0.0);
    EXPECT_EQ(all_normal.mae, 0.0);
    EXPECT_EQ(all_normal.mse_normal, 0.0);
    EXPECT_FALSE(all_normal.mse_abrupt.has_value());
    EXPECT_EQ(all_normal.count_normal, windows.size());
    EXPECT_THROW(evaluate(zero, windows, std::vector<bool>(3, false)), std::invalid_argument);
}

TEST(Evaluate, HandSplit) {
    // Two windows with O = 2 under the zero model: squared errors (1 + 1) / 2 and (1 + 5) / 2.
    const auto s = Series::univariate({0, 0, 1, 1, std::sqrt(5.0)});
    const auto windows = make_windows(s, {2, 2, 1});
    ASSERT_EQ(windows.size(), 2u);
    const LinearForecaster zero(1, 2, 2);
    const auto r = evaluate(zero, windows, std::vector<bool>{false, true});
    EXPECT_DOUBLE_EQ(r.mse, 2.0);
    EXPECT_DOUBLE_EQ(*r.mse_normal, 1.0);
    EXPECT_DOUBLE_EQ(*r.mse_abrupt, 3.0);
}

TEST(Evaluate, OverallIsCountWeightedAverageOfSplits) {
    const auto s = random_series(200, 3, 13);
    const auto windows = make_windows(s, {10, 5, 1});
    const auto model = random_model(3, 10, 5, 14);
    std::vector<bool> labels(windows.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % 7 == 0;
    const auto r = evaluate(model, windows, labels);
    const double combined = (*r.mse_normal * r.count_normal + *r.mse_abrupt * r.count_abrupt) /
                            static_cast<double>(r.count_normal + r.count_abrupt);
    EXPECT_NEAR(r.mse, combined, 1e-12 * r.mse);
    const auto losses = window_losses(model, windows);
    double mean = 0.0;
    for (double l : losses) mean += l;
    EXPECT_NEAR(mean / static_cast<double>(losses.size()), r.mse, 1e-12 * r.mse);
}

TEST(GradCheck, RandomInstances) {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + trial % 3;
        const std::size_t I = 3 + trial % 5;
        const std::size_t O = 2 + trial % 4;
        const auto s = random_series(I + O + 3, m, 100 + trial);
        const auto windows = make_windows(s, {I, O, 1});
        const auto model = random_model(m, I, O, 200 + trial);
        std::vector<double> w(m);
        for (auto& x : w) x = u(rng);
        const auto& pair = windows[trial % windows.size()];
        EXPECT_LT(grad_check(model, pair, w, LossKind::l2()), 1e-5) << "L2 trial " << trial;
        // Huber with a large delta keeps every residual in the smooth quadratic region.
        EXPECT_LT(grad_check(model, pair, w, LossKind::huber(50.0)), 1e-5) << "Huber trial " << trial;
    }
}

TEST(GradCheck, SmoothL1Region) {
    // With all residuals well away from zero the L1 penalty is linear, so finite differences match.
    const auto s = Series::univariate({0, 0, 0, 0, 10, 11, 12});
    const auto windows = make_windows(s, {4, 3, 1});
    const LinearForecaster zero(1, 4, 3);
    const std::vector<double> w{1.3};
    EXPECT_LT(grad_check(zero, windows[0], w, LossKind::l1()), 1e-5);
}

TEST(Gradient, ZeroResidualAndWeightScaling) {
    const auto s = Series::univariate(std::vector<double>(12, 0.0));
    const auto windows = make_windows(s, {5, 3, 1});
    const LinearForecaster zero(1, 5, 3);
    const std::vector<double> one{1.0};
    for (double g : gradient(zero, windows[0], one)) EXPECT_EQ(g, 0.0);

    const auto r = random_series(30, 2, 16);
    const auto rw = make_windows(r, {5, 3, 1});
    const auto model = random_model(2, 5, 3, 17);
    const std::vector<double> w{0.7, 1.9};
    const std::vector<double> w2{1.4, 3.8};
    const auto g1 = gradient(model, rw[3], w);
    const auto g2 = gradient(model, rw[3], w2);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_EQ(g2[i], 2.0 * g1[i]);
}

TEST(ModelFile, RoundTrip) {
    const auto model = random_model(2, 7, 3, 18);
    std::stringstream buf;
    save_model(model, buf);
    EXPECT_EQ(load_model(buf), model);

    std::stringstream bad("reld-linear v9\n1 2 3\n");
    EXPECT_THROW(load_model(bad), DataError);
    std::stringstream truncated("reld-linear v1\n1 2 2\n0.5\n");
    EXPECT_THROW(load_model(truncated), DataError);
}
