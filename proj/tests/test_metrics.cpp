#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "synthetic.hpp"
#include "timeaware/metrics.hpp"

using namespace timeaware::metrics;

TEST(Metrics, WorkedVector) {
    const PredictionSet p({10, 20, 30}, {11, 19, 33});
    ASSERT_TRUE(relative_error(p).has_value());
    EXPECT_DOUBLE_EQ(*relative_error(p), 0.04);
    ASSERT_TRUE(mean_squared_error(p).has_value());
    EXPECT_DOUBLE_EQ(*mean_squared_error(p), 11.0 / 3.0);
    EXPECT_DOUBLE_EQ(total_absolute_error(p), 5.0);
}

TEST(Metrics, PerfectPredictions) {
    const PredictionSet p({4, 9, 16}, {4, 9, 16});
    EXPECT_DOUBLE_EQ(*relative_error(p), 0.0);
    EXPECT_DOUBLE_EQ(*mean_squared_error(p), 0.0);
    EXPECT_DOUBLE_EQ(total_absolute_error(p), 0.0);
}

TEST(Metrics, SingleProjectReportsOnlyAbsoluteError) {
    const PredictionSet p({310}, {8});
    EXPECT_FALSE(relative_error(p).has_value());
    EXPECT_FALSE(mean_squared_error(p).has_value());
    EXPECT_DOUBLE_EQ(total_absolute_error(p), 302.0);
}

TEST(Metrics, ConstantActualsLeaveRelativeErrorAbsent) {
    const PredictionSet p({50, 50, 50}, {40, 55, 52});
    EXPECT_FALSE(relative_error(p).has_value());
    EXPECT_TRUE(mean_squared_error(p).has_value());
}

TEST(Metrics, InvalidSetsRejected) {
    EXPECT_THROW(PredictionSet({1, 2}, {1}), std::invalid_argument);
    EXPECT_THROW(PredictionSet({}, {}), std::invalid_argument);
    EXPECT_THROW(PredictionSet({1, -2}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(PredictionSet({1, 2}, {1, 0}), std::invalid_argument);
    EXPECT_THROW(PredictionSet({1, NAN}, {1, 2}), std::invalid_argument);
}

TEST(Metrics, SampleVarianceUsesNMinusOne) {
    EXPECT_DOUBLE_EQ(sample_variance({10, 20, 30}), 100.0);
    EXPECT_THROW(sample_variance({1}), std::invalid_argument);
}

TEST(MetricsProperties, NonNegativityAndZeroIffExact) {
    synthetic::Source src(3);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = src.pick(1, 9);
        std::vector<double> a;
        std::vector<double> e;
        for (int i = 0; i < n; ++i) {
            a.push_back(src.uniform(1, 100));
            e.push_back(src.pick(0, 3) == 0 ? a.back() : src.uniform(1, 100));
        }
        const PredictionSet p(a, e);
        const bool exact = a == e;
        const double tae = total_absolute_error(p);
        EXPECT_GE(tae, 0.0);
        EXPECT_EQ(tae == 0.0, exact);
        if (const auto mse = mean_squared_error(p)) {
            EXPECT_GE(*mse, 0.0);
            EXPECT_EQ(*mse == 0.0, exact);
        }
        if (const auto re = relative_error(p)) EXPECT_GE(*re, 0.0);
    }
}

TEST(MetricsProperties, PermutationInvariance) {
    synthetic::Source src(12);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = src.pick(2, 9);
        std::vector<std::pair<double, double>> pairs;
        for (int i = 0; i < n; ++i) pairs.emplace_back(src.uniform(1, 50), src.uniform(1, 50));
        auto shuffled = pairs;
        std::reverse(shuffled.begin(), shuffled.end());
        std::rotate(shuffled.begin(), shuffled.begin() + 1, shuffled.end());
        const auto split = [](const auto& v) {
            std::vector<double> a;
            std::vector<double> e;
            for (const auto& [x, y] : v) {
                a.push_back(x);
                e.push_back(y);
            }
            return PredictionSet(a, e);
        };
        const auto p = split(pairs);
        const auto q = split(shuffled);
        EXPECT_NEAR(total_absolute_error(p), total_absolute_error(q), 1e-9);
        EXPECT_NEAR(*mean_squared_error(p), *mean_squared_error(q), 1e-9);
        EXPECT_NEAR(*relative_error(p), *relative_error(q), 1e-9);
    }
}

TEST(MetricsProperties, TranslationKeepsTaeMseAndResidualVariance) {
    synthetic::Source src(19);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = src.pick(2, 9);
        std::vector<double> a;
        std::vector<double> e;
        for (int i = 0; i < n; ++i) {
            a.push_back(src.uniform(1, 50));
            e.push_back(src.uniform(1, 50));
        }
        const double c = src.uniform(0, 500);
        std::vector<double> ac(a);
        std::vector<double> ec(e);
        for (auto& v : ac) v += c;
        for (auto& v : ec) v += c;
        const PredictionSet p(a, e);
        const PredictionSet q(ac, ec);
        EXPECT_NEAR(total_absolute_error(p), total_absolute_error(q), 1e-8);
        EXPECT_NEAR(*mean_squared_error(p), *mean_squared_error(q), 1e-8);
        // RE's numerator is the residual variance.
        std::vector<double> rp;
        std::vector<double> rq;
        for (int i = 0; i < n; ++i) {
            rp.push_back(a[i] - e[i]);
            rq.push_back(ac[i] - ec[i]);
        }
        EXPECT_NEAR(sample_variance(rp), sample_variance(rq), 1e-8);
        if (const auto re = relative_error(p)) {
            EXPECT_NEAR(*re * sample_variance(a), sample_variance(rp), 1e-8);
        }
    }
}

TEST(MetricsProperties, CauchySchwarz) {
    synthetic::Source src(23);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = src.pick(2, 12);
        std::vector<double> a;
        std::vector<double> e;
        for (int i = 0; i < n; ++i) {
            a.push_back(src.uniform(1, 1000));
            e.push_back(src.uniform(1, 1000));
        }
        const PredictionSet p(a, e);
        const double tae = total_absolute_error(p);
        EXPECT_GE(*mean_squared_error(p) * n * (1.0 + 1e-12), tae * tae / n);
    }
}
