#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "smeary/shapes.hpp"

using namespace smeary;

namespace {

LandmarkConfig::Points random_points(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    LandmarkConfig::Points p(k, 2);
    for (int i = 0; i < k; ++i) {
        p(i, 0) = normal(rng);
        p(i, 1) = normal(rng);
    }
    return p;
}

LandmarkConfig::Points rotated(const LandmarkConfig::Points& p, double angle) {
    Eigen::Matrix2d r;
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    return p * r.transpose();
}

double distance(const PreShape& a, const PreShape& b) { return geodesic_distance(a.point, b.point); }

}  // namespace

TEST(Helmert, RowsAreOrthonormalAndCentred) {
    for (int k : {3, 4, 6, 9}) {
        const Matrix h = helmert_submatrix(k);
        EXPECT_NEAR((h * h.transpose() - Matrix::Identity(k - 1, k - 1)).norm(), 0.0, 1e-14);
        EXPECT_NEAR((h * Vector::Ones(k)).norm(), 0.0, 1e-14);
    }
}

TEST(PreShapeProjection, LiesOnTheRightSphere) {
    const PreShape four = preshape_project(unit_square());
    EXPECT_EQ(four.point.dim(), 5);
    const PreShape six = preshape_project(augment_to_six(unit_square()));
    EXPECT_EQ(six.point.dim(), 9);
    const auto centred = four.landmarks();
    EXPECT_NEAR(centred.colwise().sum().norm(), 0.0, 1e-12);
    EXPECT_NEAR(centred.norm(), 1.0, 1e-12);
}

TEST(PreShapeProjection, TranslationAndScaleInvariant) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> shift(-50.0, 50.0), scale(0.01, 100.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 3 + trial % 5;
        const auto p = random_points(k, rng);
        const PreShape base = preshape_project(LandmarkConfig(p));
        Eigen::RowVector2d t(shift(rng), shift(rng));
        const PreShape moved = preshape_project(LandmarkConfig((scale(rng) * p).rowwise() + t));
        EXPECT_NEAR((moved.point.coords() - base.point.coords()).norm(), 0.0, 1e-10);
    }
}

TEST(PreShapeProjection, RotationIsNotQuotiented) {
    const PreShape a = preshape_project(unit_square());
    const PreShape b = preshape_project(LandmarkConfig(rotated(unit_square().points(), std::numbers::pi / 2)));
    EXPECT_GT(distance(a, b), 1e-3);
}

TEST(PreShapeProjection, RotationPreservesDistances) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_points(5, rng);
        const auto q = random_points(5, rng);
        const double angle = 0.3 * trial;
        const double before = distance(preshape_project(LandmarkConfig(p)), preshape_project(LandmarkConfig(q)));
        const double after = distance(preshape_project(LandmarkConfig(rotated(p, angle))),
                                      preshape_project(LandmarkConfig(rotated(q, angle))));
        EXPECT_NEAR(before, after, 1e-10);
    }
}

TEST(PreShapeProjection, PairDistanceInvariantUnderCommonSimilarity) {
    std::mt19937_64 rng(9);
    const auto p = random_points(4, rng);
    const auto q = random_points(4, rng);
    Eigen::RowVector2d t(3.0, -1.5);
    const double before = distance(preshape_project(LandmarkConfig(p)), preshape_project(LandmarkConfig(q)));
    const double after = distance(preshape_project(LandmarkConfig((2.5 * p).rowwise() + t)),
                                  preshape_project(LandmarkConfig((2.5 * q).rowwise() + t)));
    EXPECT_NEAR(before, after, 1e-10);
}

TEST(PreShapeProjection, DegenerateConfigurationRejected) {
    LandmarkConfig::Points p(4, 2);
    p.setConstant(3.0);
    EXPECT_THROW(preshape_project(LandmarkConfig(p)), InvalidInput);
    EXPECT_THROW(LandmarkConfig(LandmarkConfig::Points(2, 2)), InvalidInput);
}

TEST(Augment, InsertsEdgeMidpoints) {
    const LandmarkConfig six = augment_to_six(unit_square());
    LandmarkConfig::Points want(6, 2);
    want << 0, 0, 0.5, 0, 1, 0, 1, 1, 0.5, 1, 0, 1;
    EXPECT_EQ(six.points(), want);
    LandmarkConfig::Points tri(3, 2);
    tri << 0, 0, 1, 0, 0, 1;
    EXPECT_THROW(augment_to_six(LandmarkConfig(tri)), InvalidInput);
}

TEST(Augment, CommutesWithTranslationAndScaling) {
    std::mt19937_64 rng(10);
    const auto p = random_points(4, rng);
    Eigen::RowVector2d t(-4.0, 7.0);
    const PreShape a = preshape_project(augment_to_six(LandmarkConfig(p)));
    const PreShape b = preshape_project(augment_to_six(LandmarkConfig((0.3 * p).rowwise() + t)));
    EXPECT_NEAR((a.point.coords() - b.point.coords()).norm(), 0.0, 1e-10);
}

TEST(Quadrangles, SlightlyPositiveHessian) {
    for (int k : {4, 6}) {
        const QuadrangleModel model = quadrangle_model(k, 0.95);
        EXPECT_GT(model.alpha_crit, 0.0);
        EXPECT_LT(model.alpha_crit, 1.0);
        EXPECT_GT(model.hessian, 0.0);
        EXPECT_LT(model.hessian, model.hessian_spread_only);
        EXPECT_EQ(model.dist.dim(), 2 * k - 3);
        const QuadrangleModel flat_limit = quadrangle_model(k, 1.0 - 1e-9);
        EXPECT_NEAR(flat_limit.hessian, 0.0, 1e-7);
    }
    EXPECT_THROW(quadrangle_model(5, 0.95), InvalidInput);
    EXPECT_THROW(quadrangle_model(4, 1.0), InvalidInput);
    EXPECT_THROW(quadrangle_model(4, 0.0), InvalidInput);
}

TEST(Quadrangles, SamplesLiveAroundTheBasePreShape) {
    Rng rng(6);
    for (int k : {4, 6}) {
        const auto shapes = simulate_quadrangles(k, 0.95, 400, rng);
        ASSERT_EQ(shapes.size(), 400u);
        const UnitVector base = base_preshape(k).point;
        int near = 0;
        for (const auto& s : shapes) {
            EXPECT_EQ(s.point.dim(), 2 * k - 3);
            const double d = geodesic_distance(s.point, base);
            const bool in_spread = d <= kQuadrangleSpread + 1e-12;
            const bool at_atom = std::abs(d - kQuadrangleAtom) < 1e-9;
            EXPECT_TRUE(in_spread || at_atom) << d;
            near += in_spread;
        }
        EXPECT_GT(near, 300);
    }
    EXPECT_THROW(simulate_quadrangles(4, 0.95, 0, rng), InvalidInput);
}

TEST(LandmarkIo, RoundTrip) {
    std::mt19937_64 rng(11);
    const LandmarkConfig cfg(random_points(6, rng));
    std::stringstream buf;
    write_landmarks_csv(buf, cfg);
    const LandmarkConfig back = read_landmarks_csv(buf);
    EXPECT_EQ(back.points(), cfg.points());
}

TEST(LandmarkIo, Errors) {
    std::istringstream no_header("a,b\n1,2\n");
    EXPECT_THROW(read_landmarks_csv(no_header), FormatError);
    std::istringstream bad_value("x,y\n1,2\n3,four\n5,6\n");
    EXPECT_THROW(read_landmarks_csv(bad_value), FormatError);
    std::istringstream empty("");
    EXPECT_THROW(read_landmarks_csv(empty), InvalidInput);
    EXPECT_THROW(read_landmarks_csv(std::string("/nonexistent/landmarks.csv")), InvalidInput);
}

TEST(LandmarkIo, PreShapeExport) {
    Matrix cols(2, 2);
    cols << 1.0, 0.0, 0.0, 1.0;
    std::ostringstream out;
    write_preshapes_csv(out, cols);
    EXPECT_EQ(out.str(), "# units: pre-shape coordinates, dimensionless unit vectors\nc0,c1\n1,0\n0,1\n");
}
