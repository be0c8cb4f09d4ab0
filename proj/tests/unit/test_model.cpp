#include <gtest/gtest.h>

#include <cmath>

#include "designrisk/model.hpp"

using namespace designrisk;

TEST(Model, PowerInterceptExample) {
    EXPECT_DOUBLE_EQ(eval_trend(TrendSpec::power_intercept(1000, 1, 0.75), 16.0), 1008.0);
}

TEST(Model, LinearCase) {
    const auto t = TrendSpec::power_intercept(3.0, 2.0, 1.0);
    for (double x : {0.5, 1.0, 7.0}) EXPECT_DOUBLE_EQ(eval_trend(t, x), 3.0 + 2.0 * x);
}

TEST(Model, PowerSumExample) {
    const auto t = TrendSpec::power_sum({2.0, 3.0}, {1.0, 1.0});
    const double x[2] = {4.0, 5.0};
    EXPECT_DOUBLE_EQ(eval_trend(t, std::span<const double>(x, 2)), 23.0);
}

TEST(Model, IntegerExponentsExact) {
    const auto t = TrendSpec::power_sum({1.5, -2.0}, {2.0, 3.0});
    for (double a : {1.0, 2.0, 3.0}) {
        for (double b : {1.0, 2.0, 4.0}) {
            const double x[2] = {a, b};
            EXPECT_EQ(eval_trend(t, std::span<const double>(x, 2)), 1.5 * a * a - 2.0 * b * b * b);
        }
    }
}

TEST(Model, SpreadExamples) {
    EXPECT_DOUBLE_EQ(eval_spread({0.5}, 4.0), 2.0);
    EXPECT_DOUBLE_EQ(eval_spread({1.0}, 184.0), 184.0);
    for (double x : {0.0, 1.0, 1e6}) EXPECT_EQ(eval_spread({0.0}, x), 1.0);
}

TEST(Model, SpreadPowerLaw) {
    for (double th : {0.25, 0.5, 1.0, 1.7}) {
        for (double x : {0.3, 1.0, 17.0, 900.0}) {
            const double a = eval_spread({th}, x);
            const double b = eval_spread({2 * th}, x);
            EXPECT_NEAR(a * a, b, 1e-12 * b);
        }
    }
}

TEST(Model, DomainErrors) {
    EXPECT_THROW(eval_spread({0.5}, -1.0), std::domain_error);
    EXPECT_THROW(eval_spread({0.5}, 0.0), std::domain_error);
    EXPECT_THROW(eval_trend(TrendSpec::power_intercept(1, 1, -1), 0.0), std::domain_error);
}

TEST(Model, FreeCoefficients) {
    auto t = TrendSpec::power_intercept(1, 2, 0.5);
    EXPECT_EQ(t.free_count(), 2u);
    const double c[2] = {5.0, 6.0};
    const auto u = t.with_free_coefficients(std::span<const double>(c, 2));
    EXPECT_EQ(u.coefficient(0), 5.0);
    EXPECT_EQ(u.coefficient(1), 6.0);
    EXPECT_EQ(u.exponent(), 0.5);
    EXPECT_EQ(t.with_exponent(2.0).exponent(), 2.0);
}

TEST(Model, ExponentsMustBeFixed) {
    EXPECT_THROW(TrendSpec(TrendFamily::PowerIntercept, {1, 1, 1}, {false, false, false}),
                 std::invalid_argument);
    EXPECT_THROW(TrendSpec(TrendFamily::PowerIntercept, {1, 1}, {}), std::invalid_argument);
}

TEST(Model, FamilyNames) {
    EXPECT_EQ(trend_family_from_string(to_string(TrendFamily::PowerSum)), TrendFamily::PowerSum);
    EXPECT_EQ(trend_family_from_string("power_intercept"), TrendFamily::PowerIntercept);
    EXPECT_THROW(trend_family_from_string("spline"), std::invalid_argument);
}
