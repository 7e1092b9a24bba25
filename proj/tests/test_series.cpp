#include <gtest/gtest.h>

#include <random>

#include "reld/series.hpp"

using namespace reld;

namespace {

Series ramp(std::size_t T, std::size_t m) {
    std::vector<double> v(T * m);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    return Series(std::move(v), m);
}

} // namespace

TEST(Series, RejectsNonFiniteAndRagged) {
    EXPECT_THROW(Series({1.0, std::nan("")}, 1), std::invalid_argument);
    EXPECT_THROW(Series({1.0, 2.0, 3.0}, 2), std::invalid_argument);
    EXPECT_THROW(Series({}, 1), std::invalid_argument);
    EXPECT_THROW(Series({1.0}, 0), std::invalid_argument);
}

TEST(MakeWindows, BoundaryCaseSingleWindow) {
    const auto s = ramp(4, 1);
    const auto w = make_windows(s, {2, 2, 1});
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].t, 2u);
}

TEST(MakeWindows, CountFormulaStrideOne) {
    const auto s = ramp(10, 1);
    const auto w = make_windows(s, {2, 2, 1});
    ASSERT_EQ(w.size(), 7u);
    for (std::size_t k = 0; k < w.size(); ++k) EXPECT_EQ(w[k].t, 2 + k);
}

TEST(MakeWindows, StrideThree) {
    const auto s = ramp(10, 1);
    const auto w = make_windows(s, {2, 2, 3});
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[0].t, 2u);
    EXPECT_EQ(w[1].t, 5u);
    EXPECT_EQ(w[2].t, 8u);
}

TEST(MakeWindows, RejectsShortSeriesAndTinyWindows) {
    const auto s = ramp(5, 1);
    EXPECT_THROW(make_windows(s, {3, 3, 1}), std::invalid_argument);
    EXPECT_THROW(make_windows(s, {1, 2, 1}), std::invalid_argument);
    EXPECT_THROW(make_windows(s, {2, 1, 1}), std::invalid_argument);
    EXPECT_THROW(make_windows(s, {2, 2, 0}), std::invalid_argument);
}

TEST(MakeWindows, RoundTripReproducesSourceRows) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t m = 1 + rng() % 3;
        const std::size_t I = 2 + rng() % 6;
        const std::size_t O = 2 + rng() % 6;
        const std::size_t T = I + O + rng() % 20;
        const std::size_t stride = 1 + rng() % 4;
        const auto s = ramp(T, m);
        const auto w = make_windows(s, {I, O, stride});
        EXPECT_EQ(w.size(), (T - I - O) / stride + 1);
        for (const auto& pair : w) {
            ASSERT_EQ(pair.x.rows(), I);
            ASSERT_EQ(pair.y.rows(), O);
            for (std::size_t r = 0; r < I + O; ++r) {
                for (std::size_t j = 0; j < m; ++j) {
                    const double got = r < I ? pair.x(r, j) : pair.y(r - I, j);
                    EXPECT_EQ(got, s(pair.t - I + r, j));
                }
            }
        }
    }
}

TEST(MakeWindows, DeterministicAndOrderStable) {
    const auto s = ramp(50, 2);
    const auto a = make_windows(s, {4, 3, 2});
    const auto b = make_windows(s, {4, 3, 2});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].t, b[i].t);
        EXPECT_EQ(a[i].x.data().data(), b[i].x.data().data());
        if (i > 0) EXPECT_LT(a[i - 1].t, a[i].t);
    }
}

TEST(WindowStats, Examples) {
    const Series a = Series::univariate({0.0, 2.0});
    const auto s = window_stats(rows_of(a, 0, 2));
    EXPECT_DOUBLE_EQ(s.mean[0], 1.0);
    EXPECT_DOUBLE_EQ(s.variance[0], 2.0);

    const Series c = Series::univariate({5.0, 5.0, 5.0});
    const auto sc = window_stats(rows_of(c, 0, 3));
    EXPECT_DOUBLE_EQ(sc.mean[0], 5.0);
    EXPECT_DOUBLE_EQ(sc.variance[0], 0.0);

    const Series two({0.0, 10.0, 2.0, 10.0}, 2);
    const auto st = window_stats(rows_of(two, 0, 2));
    EXPECT_DOUBLE_EQ(st.mean[0], 1.0);
    EXPECT_DOUBLE_EQ(st.mean[1], 10.0);
    EXPECT_DOUBLE_EQ(st.variance[0], 2.0);
    EXPECT_DOUBLE_EQ(st.variance[1], 0.0);
}

TEST(WindowStats, RejectsSingleRow) {
    const Series a = Series::univariate({1.0, 2.0});
    EXPECT_THROW(window_stats(rows_of(a, 0, 1)), std::invalid_argument);
}

TEST(WindowStats, MatchesBruteForceOnRandomSlices) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = 2 + rng() % 30;
        const double offset = u(rng);
        std::vector<double> v(k);
        for (auto& x : v) x = offset + u(rng);
        const Series s = Series::univariate(v);
        const auto st = window_stats(rows_of(s, 0, k));

        long double mean = 0.0L;
        for (double x : v) mean += x;
        mean /= static_cast<long double>(k);
        long double var = 0.0L;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= static_cast<long double>(k - 1);

        EXPECT_LE(std::abs(st.mean[0] - static_cast<double>(mean)), 1e-12 * std::max(1.0, std::abs(static_cast<double>(mean))));
        EXPECT_LE(std::abs(st.variance[0] - static_cast<double>(var)), 1e-12 * static_cast<double>(var));
    }
}

TEST(SplitSeries, KeepsContextRows) {
    const auto s = ramp(10, 1);
    const auto [train, test] = split_series(s, 0.7, 2);
    EXPECT_EQ(train.length(), 7u);
    EXPECT_EQ(test.length(), 5u);
    EXPECT_EQ(test(0, 0), 5.0);
    EXPECT_THROW(split_series(s, 1.0), std::invalid_argument);
    EXPECT_THROW(split_series(s, 0.0), std::invalid_argument);
}
