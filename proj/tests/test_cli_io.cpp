#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "smeary/cli_io.hpp"

using namespace smeary;

TEST(LatLon, AxisConventions) {
    EXPECT_NEAR((latlon_to_unit(90, 0).coords() - UnitVector::basis(2, 2).coords()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((latlon_to_unit(0, 0).coords() - UnitVector::basis(2, 0).coords()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((latlon_to_unit(0, 90).coords() - UnitVector::basis(2, 1).coords()).norm(), 0.0, 1e-15);
}

TEST(LatLon, RoundTrip) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lat(-89.999, 89.999), lon(-179.999, 180.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = lat(rng), b = lon(rng);
        const auto [a2, b2] = unit_to_latlon(latlon_to_unit(a, b));
        EXPECT_NEAR(a2, a, 1e-9);
        EXPECT_NEAR(b2, b, 1e-9);
    }
    const auto [plat, plon] = unit_to_latlon(latlon_to_unit(90, 45));
    EXPECT_NEAR(plat, 90.0, 1e-12);
    EXPECT_EQ(plon, 0.0);
    EXPECT_EQ(unit_to_latlon(latlon_to_unit(0, 180)).second, 180.0);
}

TEST(LatLon, Errors) {
    EXPECT_THROW(latlon_to_unit(91, 0), InvalidInput);
    EXPECT_THROW(latlon_to_unit(0, std::nan("")), InvalidInput);
    EXPECT_THROW(unit_to_latlon(UnitVector::north_pole(3)), InvalidInput);
}

TEST(ParseCsv, RejectsBadRowsWithLineNumbers) {
    std::istringstream in(
        "# comment\n"
        "site,Lat,Lon\n"
        "a,10,20\n"
        "b,95,0\n"
        "c,0,-180\n"
        "d,x,3\n"
        "e,5\n"
        "\n"
        "f,-90,180\n");
    const GeoSample s = parse_latlon_csv(in, "demo");
    EXPECT_EQ(s.label, "demo");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.lat[1], -90.0);
    ASSERT_EQ(s.rejected.size(), 4u);
    EXPECT_EQ(s.rejected[0].line, 4);
    EXPECT_EQ(s.rejected[1].line, 5);
    EXPECT_EQ(s.rejected[2].line, 6);
    EXPECT_EQ(s.rejected[3].line, 7);
    EXPECT_EQ(s.matrix().cols(), 2);
    EXPECT_NEAR(s.matrix()(2, 1), -1.0, 1e-15);
}

TEST(ParseCsv, ColumnAliases) {
    std::istringstream in("plat,plong\n45,90\n");
    const GeoSample s = parse_latlon_csv(in);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NEAR(s.points[0][1], std::sqrt(0.5), 1e-15);
}

TEST(ParseCsv, StructuralErrors) {
    std::istringstream no_lon("lat,depth\n1,2\n");
    EXPECT_THROW(parse_latlon_csv(no_lon), FormatError);
    std::istringstream empty("# only a comment\n\n");
    EXPECT_THROW(parse_latlon_csv(empty), InvalidInput);
    EXPECT_THROW(parse_latlon_csv(std::string("/nonexistent/vgp.csv")), InvalidInput);
}

TEST(ConvertVgp, TabSeparatedWithShiftedLongitudes) {
    std::istringstream in("RESULT_NO\tPLAT\tPLONG\tB95\n11\t80.5\t350\t4\n12\tn/a\t10\t3\n13\t-70\t120.25\t2\n");
    std::ostringstream out;
    EXPECT_EQ(convert_vgp(in, out), 2u);
    EXPECT_EQ(out.str(), "# units: lat degrees, lon degrees\nlabel,lat,lon\n11,80.5,-10\n13,-70,120.25\n");
    std::istringstream back(out.str());
    const GeoSample s = parse_latlon_csv(back);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_TRUE(s.rejected.empty());
}

TEST(ConvertVgp, SemicolonWithoutLabel) {
    std::istringstream in("vgp_lat;vgp_lon\n10;20\n");
    std::ostringstream out;
    EXPECT_EQ(convert_vgp(in, out), 1u);
    EXPECT_EQ(out.str(), "# units: lat degrees, lon degrees\nlat,lon\n10,20\n");
}

TEST(ConvertVgp, Errors) {
    std::istringstream none("a,b\n1,2\n");
    std::ostringstream out;
    EXPECT_THROW(convert_vgp(none, out), FormatError);
    std::istringstream empty("");
    EXPECT_THROW(convert_vgp(empty, out), InvalidInput);
}
