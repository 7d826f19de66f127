#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "smeary/quadrature.hpp"

using namespace smeary;

TEST(GaussLegendre, WeightsSumToTwoAndNodesAreSymmetric) {
    for (int n : {2, 7, 16, 64, 96}) {
        const auto& rule = quad::gauss_legendre(n);
        ASSERT_EQ(static_cast<int>(rule.nodes.size()), n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            sum += rule.weights[i];
            EXPECT_NEAR(rule.nodes[i], -rule.nodes[n - 1 - i], 1e-15);
        }
        EXPECT_NEAR(sum, 2.0, 1e-14);
    }
}

TEST(GaussLegendre, ExactForPolynomialsUpToDegree2nMinus1) {
    const auto& rule = quad::gauss_legendre(8);
    for (int deg = 0; deg <= 15; ++deg) {
        const double got = quad::fixed_gauss([deg](double x) { return std::pow(x, deg); }, 0.0, 1.0, rule);
        EXPECT_NEAR(got, 1.0 / (deg + 1), 1e-14) << "degree " << deg;
    }
}

TEST(Adaptive, SmoothIntegrals) {
    EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-14);
    EXPECT_NEAR(quad::integrate([](double x) { return std::exp(x); }, -1.0, 2.0), std::exp(2.0) - std::exp(-1.0),
                1e-13);
}

TEST(Adaptive, KinkIsResolvedByBisection) {
    const double got = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0);
    EXPECT_NEAR(got, 0.5 * (0.09 + 0.49), 1e-12);
}

TEST(TanhSinh, EndpointSingularities) {
    quad::TanhSinhResult info;
    const double a = quad::tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, {}, &info);
    EXPECT_NEAR(a, 2.0, 1e-10);
    EXPECT_TRUE(info.converged);
    const double b = quad::tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0);
    EXPECT_NEAR(b, -1.0, 1e-11);
    // 1 - x*x is formed from a rounded node, so the tails near +-1 lose about sqrt(eps)
    const double c =
        quad::tanh_sinh([](double x) { return 1.0 / std::sqrt(1.0 - x * x); }, -1.0, 1.0);
    EXPECT_NEAR(c, std::numbers::pi, 1e-7);
    const double d = quad::tanh_sinh([](double x) { return 1.0 / std::sqrt(x * (2.0 - x)); }, 0.0, 1.0);
    EXPECT_NEAR(d, std::numbers::pi / 2, 1e-10);
}

TEST(TanhSinh, EmptyIntervalIsZero) {
    EXPECT_EQ(quad::tanh_sinh([](double) { return 1.0; }, 0.5, 0.5), 0.0);
}
