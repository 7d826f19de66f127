#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smeary/errors.hpp"
#include "smeary/profile.hpp"
#include "smeary/sphere.hpp"

namespace smeary {

inline constexpr const char* kVersion = "0.1.0";

struct RejectedRow {
    int line = 0;
    std::string reason;
};

/// Directional data on S^2 read from a lat/lon table.
struct GeoSample {
    std::string label;
    std::vector<double> lat;  // degrees in [-90, 90]
    std::vector<double> lon;  // degrees in (-180, 180]
    std::vector<UnitVector> points;
    std::vector<RejectedRow> rejected;

    std::size_t size() const noexcept { return points.size(); }
    Matrix matrix() const {
        Matrix x(3, static_cast<Eigen::Index>(points.size()));
        for (std::size_t j = 0; j < points.size(); ++j) {
            x.col(static_cast<Eigen::Index>(j)) = points[j].coords();
        }
        return x;
    }
};

/// (cos lat cos lon, cos lat sin lon, sin lat)
inline UnitVector latlon_to_unit(double lat_deg, double lon_deg) {
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0) || !std::isfinite(lon_deg)) {
        throw InvalidInput("latlon_to_unit: latitude must lie in [-90, 90] and longitude must be finite");
    }
    const double d2r = std::numbers::pi / 180.0;
    const double la = lat_deg * d2r;
    const double lo = lon_deg * d2r;
    Vector v(3);
    v << std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo), std::sin(la);
    return UnitVector::normalized(v);
}

/// Inverse of latlon_to_unit; longitude in (-180, 180], and 0 at the poles.
inline std::pair<double, double> unit_to_latlon(const UnitVector& p) {
    if (p.dim() != 2) {
        throw InvalidInput("unit_to_latlon: point must lie on S^2");
    }
    const double r2d = 180.0 / std::numbers::pi;
    const double horiz = std::hypot(p[0], p[1]);
    const double lat = std::atan2(p[2], horiz) * r2d;
    // at the poles (up to the rounding of cos(90 degrees)) longitude is set to 0
    double lon = horiz < 1e-15 ? 0.0 : std::atan2(p[1], p[0]) * r2d;
    if (lon <= -180.0) {
        lon += 360.0;
    }
    return {lat, lon};
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

inline bool parse_number(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

inline int find_column(const std::vector<std::string>& header, std::initializer_list<const char*> names) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string h = lower(header[i]);
        for (const char* n : names) {
            if (h == n) {
                return static_cast<int>(i);
            }
        }
    }
    return -1;
}

}  // namespace detail

/// Parses a CSV with `lat` and `lon` columns in decimal degrees.
/// Rows with missing, non-numeric or out-of-range values are skipped and
/// listed in `rejected` with their 1-based line number.
inline GeoSample parse_latlon_csv(std::istream& in, const std::string& label = "") {
    GeoSample out;
    out.label = label;
    std::string line;
    int line_no = 0;
    int lat_col = -1, lon_col = -1;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (!have_header) {
            have_header = true;
            lat_col = detail::find_column(cells, {"lat", "latitude", "plat"});
            lon_col = detail::find_column(cells, {"lon", "long", "longitude", "plong", "plon"});
            if (lat_col < 0 || lon_col < 0) {
                throw FormatError("lat/lon CSV: header must contain lat and lon columns");
            }
            continue;
        }
        if (static_cast<int>(cells.size()) <= std::max(lat_col, lon_col)) {
            out.rejected.push_back({line_no, "too few columns"});
            continue;
        }
        double lat = 0.0, lon = 0.0;
        if (!detail::parse_number(cells[lat_col], lat) || !detail::parse_number(cells[lon_col], lon)) {
            out.rejected.push_back({line_no, "non-numeric lat/lon"});
            continue;
        }
        if (lat < -90.0 || lat > 90.0) {
            out.rejected.push_back({line_no, "latitude outside [-90, 90]"});
            continue;
        }
        if (lon <= -180.0 || lon > 180.0) {
            out.rejected.push_back({line_no, "longitude outside (-180, 180]"});
            continue;
        }
        out.lat.push_back(lat);
        out.lon.push_back(lon);
        out.points.push_back(latlon_to_unit(lat, lon));
    }
    if (!have_header) {
        throw InvalidInput("lat/lon CSV: file is empty");
    }
    return out;
}

inline GeoSample parse_latlon_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open " + path);
    }
    std::string label = path;
    if (const auto slash = label.find_last_of('/'); slash != std::string::npos) {
        label = label.substr(slash + 1);
    }
    return parse_latlon_csv(in, label);
}

/// Column mapping for VGP tables exported from a paleomagnetic archive.
/// The archive layout is not documented, so names are matched
/// case-insensitively against common spellings; the first match wins.
struct VgpColumnMap {
    std::vector<std::string> lat{"plat", "vgp_lat", "pole_lat", "lat"};
    std::vector<std::string> lon{"plong", "plon", "vgp_lon", "pole_lon", "lon"};
    std::vector<std::string> label{"result_no", "rowno", "dataset", "id"};
};

/// Rewrites a delimited VGP export (comma, tab or semicolon) as a lat/lon CSV.
/// Longitudes in [180, 360) are shifted into (-180, 180]. Returns the number
/// of rows written.
inline std::size_t convert_vgp(std::istream& in, std::ostream& out, const VgpColumnMap& map = {}) {
    std::string line;
    int line_no = 0;
    int lat_col = -1, lon_col = -1, label_col = -1;
    char delim = ',';
    std::size_t written = 0;
    auto split = [&](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, delim)) {
            cells.push_back(detail::trim(cell));
        }
        return cells;
    };
    auto pick = [](const std::vector<std::string>& header, const std::vector<std::string>& names) {
        for (const auto& n : names) {
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (detail::lower(header[i]) == n) {
                    return static_cast<int>(i);
                }
            }
        }
        return -1;
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        if (lat_col < 0) {
            if (line.find('\t') != std::string::npos) {
                delim = '\t';
            } else if (line.find(';') != std::string::npos && line.find(',') == std::string::npos) {
                delim = ';';
            }
            const auto header = split(line);
            lat_col = pick(header, map.lat);
            lon_col = pick(header, map.lon);
            label_col = pick(header, map.label);
            if (lat_col < 0 || lon_col < 0) {
                throw FormatError("VGP table: no recognisable pole latitude/longitude columns");
            }
            out << "# units: lat degrees, lon degrees\n";
            out << (label_col >= 0 ? "label,lat,lon\n" : "lat,lon\n");
            continue;
        }
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max({lat_col, lon_col, label_col})) {
            continue;
        }
        double lat = 0.0, lon = 0.0;
        if (!detail::parse_number(cells[lat_col], lat) || !detail::parse_number(cells[lon_col], lon)) {
            continue;
        }
        if (lon > 180.0 && lon < 360.0) {
            lon -= 360.0;
        }
        if (label_col >= 0) {
            out << cells[label_col] << ',';
        }
        out << format_double(lat) << ',' << format_double(lon) << '\n';
        ++written;
    }
    if (lat_col < 0) {
        throw InvalidInput("VGP table: file is empty");
    }
    return written;
}

}  // namespace smeary
