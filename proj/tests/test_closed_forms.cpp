#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "smeary/closed_forms.hpp"
#include "smeary/critical_angles.hpp"
#include "smeary/ring.hpp"

using namespace smeary;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Wallis, SmallValues) {
    EXPECT_DOUBLE_EQ(wallis(0), kPi);
    EXPECT_DOUBLE_EQ(wallis(1), 2.0);
    EXPECT_NEAR(wallis(5), 16.0 / 15.0, 1e-15);
    EXPECT_THROW(wallis(-1), InvalidInput);
}

TEST(Wallis, MatchesQuadrature) {
    for (int m = 0; m <= 12; ++m) {
        EXPECT_NEAR(wallis(m), sin_power_integral(m, 0.0, kPi), 1e-13) << "m = " << m;
    }
}

TEST(SphereVolume, KnownValues) {
    EXPECT_NEAR(sphere_volume(1), 2.0 * kPi, 1e-14);
    EXPECT_NEAR(sphere_volume(2), 4.0 * kPi, 1e-14);
    EXPECT_NEAR(sphere_volume(3), 2.0 * kPi * kPi, 1e-13);
    EXPECT_THROW(sphere_volume(0), InvalidInput);
}

TEST(HemisphereCm, Values) {
    EXPECT_NEAR(hemisphere_c_m(1.0, 2), kPi / 8, 1e-14);
    EXPECT_NEAR(hemisphere_c_m(0.5, 5), 0.5 * sphere_volume(6) / sphere_volume(5) * 4.0 / 7.0, 1e-15);
    EXPECT_EQ(hemisphere_c_m(0.0, 5), 0.0);
    EXPECT_NEAR(hemisphere_c_m(0.3, 7), 0.3 * hemisphere_c_m(1.0, 7), 1e-15);
    EXPECT_THROW(hemisphere_c_m(1.5, 5), InvalidInput);
}

TEST(F2Closed, Values) {
    EXPECT_EQ(f2_closed(0.0, 5), 0.0);
    EXPECT_NEAR(f2_closed(kPi / 2, 5), 4.0 / 15.0, 1e-15);
    // frozen offline values
    EXPECT_NEAR(f2_closed(0.5, 5), 0.065664434185350713, 1e-15);
    EXPECT_NEAR(f2_closed(1.0, 5), 0.47708443737207081, 1e-15);
    EXPECT_NEAR(f2_closed(2.0, 5), -0.48515438160893574, 1e-15);
    EXPECT_NEAR(f2_closed(2.5, 5), -0.42373315517661429, 1e-15);
}

TEST(F2Closed, SignChangeForCircleAtTanThetaEqualsMinusTheta) {
    const double root = 2.02875783811043422;
    EXPECT_GT(f2_closed(root - 1e-9, 2), 0.0);
    EXPECT_LT(f2_closed(root + 1e-9, 2), 0.0);
}

TEST(F4Closed, EquatorValueDependsOnDimension) {
    for (int m = 4; m <= 12; ++m) {
        EXPECT_NEAR(f4_closed(kPi / 2, m), -4.0 * wallis(m) / (m + 2.0), 1e-14);
        EXPECT_NEAR(f4_closed(kPi / 2, m, F4Normalization::PerWallis), -4.0, 1e-14);
    }
}

TEST(F4Closed, NegativeNearZero) {
    for (int m = 5; m <= 10; ++m) {
        EXPECT_LT(f4_closed(0.05, m), 0.0);
        EXPECT_GT(f4_closed(0.05, m), -1e-3);
    }
}

TEST(F4Closed, FrozenValues) {
    EXPECT_NEAR(f4_closed(0.5, 5), -0.0037479692794791135, 1e-15);
    EXPECT_NEAR(f4_closed(1.5, 5), -0.56727689391318255, 1e-15);
    EXPECT_NEAR(f4_closed(2.5, 5), 0.7045374851281202, 1e-14);
    EXPECT_NEAR(f4_closed(1.0, 7), -0.080397216223857961, 1e-15);
    EXPECT_NEAR(f4_closed(2.0, 7), 0.046739050130921733, 1e-15);
    EXPECT_THROW(f4_closed(1.0, 3), InvalidInput);
}

TEST(RingFj, OddOrdersVanishAtPole) {
    for (double theta : {0.4, 1.3, 2.2, 3.0}) {
        EXPECT_NEAR(ring_fj(1, theta, 0.0, 5), 0.0, 1e-10);
        EXPECT_NEAR(ring_fj(3, theta, 0.0, 5), 0.0, 1e-10);
    }
}

TEST(RingFj, AgreesWithClosedForms) {
    for (int m = 5; m <= 10; ++m) {
        for (double theta : {0.5, 1.0, 1.5, 2.0, 2.5}) {
            EXPECT_NEAR(ring_fj(2, theta, 0.0, m), f2_closed(theta, m), 1e-8);
            EXPECT_NEAR(ring_fj(4, theta, 0.0, m), f4_closed(theta, m), 1e-8);
        }
    }
    EXPECT_NEAR(ring_fj(4, kPi / 2, 0.0, 6), -4.0 * wallis(6) / 8.0, 1e-10);
}

TEST(RingFj, OffPoleFrozenValues) {
    EXPECT_NEAR(ring_fj(2, 2.0, 0.4, 5), -0.51149638323865182, 1e-11);
    EXPECT_NEAR(ring_fj(3, 2.0, 0.4, 5), -0.11978458806082002, 1e-11);
    EXPECT_NEAR(ring_fj(4, 2.0, 0.4, 5), -0.16999225225161104, 1e-11);
    EXPECT_NEAR(ring_fj(2, 1.2, 0.7, 5), 0.49685746017712235, 1e-11);
    EXPECT_NEAR(ring_fj(4, 1.2, 0.7, 5), -0.48777643726334681, 1e-11);
    EXPECT_NEAR(ring_fj(3, 2.6, 0.3, 5), 0.27532213294568341, 1e-11);
    EXPECT_NEAR(ring_fj(4, 2.6, 0.3, 5), 1.1362818115980326, 1e-10);
}

TEST(RingFj, DimensionThresholds) {
    EXPECT_THROW(ring_fj(4, 1.0, 0.2, 4), ValidityError);
    EXPECT_THROW(ring_fj(2, 1.0, 0.2, 2), ValidityError);
    EXPECT_NO_THROW(ring_fj(2, 1.0, 0.2, 3));
    RingFjOptions restricted;
    restricted.restricted = true;
    EXPECT_NO_THROW(ring_fj(4, 1.0, 0.2, 4, restricted));
    // the restricted regime does not apply when theta + psi reaches pi
    EXPECT_THROW(ring_fj(4, 3.0, 0.2, 4, restricted), ValidityError);
    EXPECT_THROW(ring_fj(5, 1.0, 0.2, 8), InvalidInput);
}

TEST(RingPoleForms, MatchNormalisedClosedForms) {
    // ring derivative = 2 f_j / (I_{m-2} sin^{m-1} theta)
    for (int m = 5; m <= 9; ++m) {
        for (double theta : {0.3, 1.1, 2.4}) {
            const double scale = 2.0 / (wallis(m - 2) * std::pow(std::sin(theta), m - 1));
            EXPECT_NEAR(ring_d2_at_pole(theta, m), scale * f2_closed(theta, m), 1e-12);
            EXPECT_NEAR(ring_d4_at_pole(theta, m), scale * f4_closed(theta, m), 1e-11);
        }
    }
}

TEST(HoleClosedForms, FlatHessianAtAlphaBeta) {
    for (int m = 3; m <= 8; ++m) {
        for (double beta : {0.0, 0.2, 0.5}) {
            EXPECT_NEAR(hole_d2_closed(alpha_for_flat_hessian(beta, m), beta, m), 0.0, 1e-10);
        }
    }
    EXPECT_THROW(hole_d4_closed(0.5, 0.0, 4), ValidityError);
    EXPECT_THROW(hole_d2_closed(0.5, 0.0, 2), ValidityError);
    EXPECT_THROW(hole_d2_closed(0.5, 1.6, 5), InvalidInput);
    // beta = 0 reduces to 2(1 - alpha) - pi alpha I_m g(0) / (m - 1)
    const int m = 5;
    const double alpha = 0.4;
    EXPECT_NEAR(hole_d2_closed(alpha, 0.0, m),
                2.0 * (1.0 - alpha) - kPi * alpha * wallis(m) * hole_g(0.0, m) / (m - 1.0), 1e-14);
}
