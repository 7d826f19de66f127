#pragma once

#include <array>
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
#include "smeary/radial.hpp"
#include "smeary/sphere.hpp"

namespace smeary {

/// k planar landmarks, one per row.
class LandmarkConfig {
public:
    using Points = Eigen::Matrix<double, Eigen::Dynamic, 2>;

    explicit LandmarkConfig(Points points) : points_(std::move(points)) {
        if (points_.rows() < 3) {
            throw InvalidInput("LandmarkConfig: at least 3 landmarks are required");
        }
        if (!points_.allFinite()) {
            throw InvalidInput("LandmarkConfig: coordinates must be finite");
        }
    }

    int k() const noexcept { return static_cast<int>(points_.rows()); }
    const Points& points() const noexcept { return points_; }

private:
    Points points_;
};

/// Rows 1..k-1 of the Helmert matrix: an orthonormal basis of the vectors in
/// R^k that sum to zero.
inline Matrix helmert_submatrix(int k) {
    Matrix h = Matrix::Zero(k - 1, k);
    for (int j = 1; j < k; ++j) {
        const double c = 1.0 / std::sqrt(static_cast<double>(j) * (j + 1));
        h.row(j - 1).head(j).setConstant(-c);
        h(j - 1, j) = j * c;
    }
    return h;
}

struct PreShape {
    UnitVector point;  // on S^{2k-3}, coordinates interleaved (x_1, y_1, x_2, y_2, ...)
    Matrix basis;      // the (k-1) x k Helmert submatrix

    int k() const { return static_cast<int>(basis.cols()); }

    /// Centred, unit-size landmark configuration represented by this pre-shape.
    LandmarkConfig::Points landmarks() const {
        const int km1 = static_cast<int>(basis.rows());
        Eigen::Matrix<double, Eigen::Dynamic, 2> z(km1, 2);
        for (int i = 0; i < km1; ++i) {
            z(i, 0) = point[2 * i];
            z(i, 1) = point[2 * i + 1];
        }
        return basis.transpose() * z;
    }
};

/// Removes translation and scale; orientation is kept.
inline PreShape preshape_project(const LandmarkConfig& cfg) {
    const int k = cfg.k();
    const Matrix h = helmert_submatrix(k);
    const Eigen::Matrix<double, Eigen::Dynamic, 2> z = h * cfg.points();
    const double norm = z.norm();
    if (!(norm > 1e-300) || norm < 1e-12 * std::max(1.0, cfg.points().cwiseAbs().maxCoeff())) {
        throw InvalidInput("preshape_project: all landmarks coincide");
    }
    Vector flat(2 * (k - 1));
    for (int i = 0; i < k - 1; ++i) {
        flat[2 * i] = z(i, 0);
        flat[2 * i + 1] = z(i, 1);
    }
    return {UnitVector::normalized(flat), h};
}

/// Six landmarks from a quadrangle by inserting the midpoints of edges 1-2
/// and 3-4 between their endpoints: (p1, m12, p2, p3, m34, p4).
inline LandmarkConfig augment_to_six(const LandmarkConfig& cfg) {
    if (cfg.k() != 4) {
        throw InvalidInput("augment_to_six: expects a quadrangle (k = 4)");
    }
    const auto& p = cfg.points();
    LandmarkConfig::Points out(6, 2);
    out.row(0) = p.row(0);
    out.row(1) = 0.5 * (p.row(0) + p.row(1));
    out.row(2) = p.row(1);
    out.row(3) = p.row(2);
    out.row(4) = 0.5 * (p.row(2) + p.row(3));
    out.row(5) = p.row(3);
    return LandmarkConfig(out);
}

inline LandmarkConfig unit_square() {
    LandmarkConfig::Points p(4, 2);
    p << 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0;
    return LandmarkConfig(p);
}

/// Distribution center of the simulation: the unit square, augmented for k = 6.
inline PreShape base_preshape(int k) {
    if (k == 4) {
        return preshape_project(unit_square());
    }
    if (k == 6) {
        return preshape_project(augment_to_six(unit_square()));
    }
    throw InvalidInput("base_preshape: k must be 4 or 6");
}

inline constexpr double kQuadrangleSpread = 0.05 * std::numbers::pi;
inline constexpr double kQuadrangleAtom = 0.95 * std::numbers::pi;

/// Radial law of the quadrangle simulation: uniform in theta on [0, 0.05 pi]
/// with weight 1 - a, atom at 0.95 pi with weight a (all mass off the pole).
inline RadialMixture quadrangle_law(int k, double atom_weight) {
    return RadialMixture(2 * k - 3, 1.0, Interval{0.0, kQuadrangleSpread, Atom{kQuadrangleAtom, atom_weight}});
}

struct QuadrangleModel {
    int k = 4;
    double alpha_crit = 0.0;  // atom weight with vanishing Hessian
    double alpha = 0.0;       // alpha_factor * alpha_crit
    double hessian = 0.0;     // Hessian at the mean for `alpha`
    double hessian_spread_only = 0.0;
    RadialMixture dist = quadrangle_law(4, 0.0);
    PreShape base = base_preshape(4);
    Matrix rotation;  // takes e_{2k-2} to the base pre-shape
};

inline QuadrangleModel quadrangle_model(int k, double alpha_factor) {
    if (k != 4 && k != 6) {
        throw InvalidInput("quadrangle_model: k must be 4 or 6");
    }
    if (!(alpha_factor > 0.0 && alpha_factor < 1.0)) {
        throw InvalidInput("quadrangle_model: alpha_factor must lie in (0, 1)");
    }
    auto hessian = [k](double a) {
        return derivative_profile(quadrangle_law(k, a), {0.0}, {2}).at(0, 2);
    };
    const double h0 = hessian(0.0);
    const double h1 = hessian(1.0);
    // the Hessian is linear in the atom weight
    if (!(h0 > 0.0 && h1 < 0.0)) {
        throw ModelError("quadrangle_model: no atom weight in (0, 1) flattens the Hessian");
    }
    QuadrangleModel model;
    model.k = k;
    model.alpha_crit = h0 / (h0 - h1);
    model.alpha = alpha_factor * model.alpha_crit;
    model.dist = quadrangle_law(k, model.alpha);
    model.hessian = hessian(model.alpha);
    model.hessian_spread_only = h0;
    model.base = base_preshape(k);
    model.rotation = rotate_pole_to(model.base.point);
    return model;
}

/// Pre-shapes drawn about the base pre-shape, as columns of a matrix.
inline Matrix simulate_quadrangles_matrix(const QuadrangleModel& model, int n, Rng& rng) {
    const Matrix pts = RadialSampler(model.dist).draw(n, rng);
    return model.rotation * pts;
}

inline std::vector<PreShape> simulate_quadrangles(int k, double alpha_factor, int n, Rng& rng) {
    if (n < 1) {
        throw InvalidInput("simulate_quadrangles: n must be at least 1");
    }
    const QuadrangleModel model = quadrangle_model(k, alpha_factor);
    const Matrix pts = simulate_quadrangles_matrix(model, n, rng);
    std::vector<PreShape> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        out.push_back({UnitVector::normalized(pts.col(j)), model.base.basis});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Landmark I/O

/// Reads k rows with columns x, y (header required).
inline LandmarkConfig read_landmarks_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    int xcol = -1, ycol = -1;
    std::vector<std::array<double, 2>> rows;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            const auto b = cell.find_first_not_of(" \t\r");
            const auto e = cell.find_last_not_of(" \t\r");
            out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
        }
        return out;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto cells = split(line);
        if (xcol < 0) {
            for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
                if (cells[i] == "x") xcol = i;
                if (cells[i] == "y") ycol = i;
            }
            if (xcol < 0 || ycol < 0) {
                throw FormatError("landmark CSV: header must name columns x and y");
            }
            continue;
        }
        if (static_cast<int>(cells.size()) <= std::max(xcol, ycol)) {
            throw FormatError("landmark CSV: line " + std::to_string(line_no) + " has too few columns");
        }
        try {
            std::size_t px = 0, py = 0;
            const double x = std::stod(cells[xcol], &px);
            const double y = std::stod(cells[ycol], &py);
            if (px != cells[xcol].size() || py != cells[ycol].size()) {
                throw std::invalid_argument("trailing characters");
            }
            rows.push_back({x, y});
        } catch (const std::exception&) {
            throw FormatError("landmark CSV: line " + std::to_string(line_no) + " is not numeric");
        }
    }
    if (xcol < 0) {
        throw InvalidInput("landmark CSV: file is empty");
    }
    LandmarkConfig::Points p(static_cast<Eigen::Index>(rows.size()), 2);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        p(static_cast<Eigen::Index>(i), 0) = rows[i][0];
        p(static_cast<Eigen::Index>(i), 1) = rows[i][1];
    }
    return LandmarkConfig(p);
}

inline LandmarkConfig read_landmarks_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open landmark file " + path);
    }
    return read_landmarks_csv(in);
}

inline void write_landmarks_csv(std::ostream& out, const LandmarkConfig& cfg) {
    out << "# units: landmark coordinates in input length units\n";
    out << "x,y\n";
    for (int i = 0; i < cfg.k(); ++i) {
        out << format_double(cfg.points()(i, 0)) << ',' << format_double(cfg.points()(i, 1)) << '\n';
    }
}

/// One pre-shape per row, coordinates c0..c_{2k-3} (dimensionless, unit norm).
inline void write_preshapes_csv(std::ostream& out, const Matrix& columns) {
    out << "# units: pre-shape coordinates, dimensionless unit vectors\n";
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
        out << (i ? "," : "") << 'c' << i;
    }
    out << '\n';
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
        for (Eigen::Index i = 0; i < columns.rows(); ++i) {
            out << (i ? "," : "") << format_double(columns(i, j));
        }
        out << '\n';
    }
}

}  // namespace smeary
