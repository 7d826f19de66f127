#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "smeary/errors.hpp"

namespace smeary {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kUnitNormTol = 1e-12;
inline constexpr double kTangencyTol = 1e-10;
inline constexpr double kCutLocusTol = 1e-9;

/// A point on S^m stored as a unit vector in R^{m+1}.
class UnitVector {
public:
    /// Validates the norm; use normalized() to project an arbitrary vector.
    explicit UnitVector(Vector coords) : coords_(std::move(coords)) {
        if (coords_.size() < 2) {
            throw InvalidInput("UnitVector: ambient dimension must be at least 2");
        }
        if (!coords_.allFinite() || std::abs(coords_.norm() - 1.0) > kUnitNormTol) {
            throw InvalidInput("UnitVector: coordinates are not of unit norm");
        }
    }

    static UnitVector normalized(const Vector& v) {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw InvalidInput("UnitVector::normalized: zero or non-finite vector");
        }
        return UnitVector(v / n);
    }

    /// Standard basis vector e_{index+1} of R^{m+1} (zero-based index).
    static UnitVector basis(int m, int index) {
        if (m < 1 || index < 0 || index > m) {
            throw InvalidInput("UnitVector::basis: index out of range");
        }
        Vector v = Vector::Zero(m + 1);
        v[index] = 1.0;
        return UnitVector(std::move(v));
    }

    /// The north pole e_{m+1}.
    static UnitVector north_pole(int m) { return basis(m, m); }

    int dim() const noexcept { return static_cast<int>(coords_.size()) - 1; }
    const Vector& coords() const noexcept { return coords_; }
    double operator[](int i) const { return coords_[i]; }

    UnitVector operator-() const { return UnitVector(-coords_); }

private:
    Vector coords_;
};

/// A vector in the tangent space at `base`.
class TangentVector {
public:
    TangentVector(UnitVector base, Vector components)
        : base_(std::move(base)), components_(std::move(components)) {
        if (components_.size() != base_.coords().size()) {
            throw InvalidInput("TangentVector: dimension mismatch with base point");
        }
        if (std::abs(base_.coords().dot(components_)) > kTangencyTol * std::max(1.0, components_.norm())) {
            throw InvalidInput("TangentVector: components are not tangent at the base point");
        }
    }

    const UnitVector& base() const noexcept { return base_; }
    const Vector& components() const noexcept { return components_; }
    double norm() const { return components_.norm(); }

private:
    UnitVector base_;
    Vector components_;
};

inline void require_same_sphere(const UnitVector& p, const UnitVector& q, const char* who) {
    if (p.dim() != q.dim()) {
        throw InvalidInput(std::string(who) + ": points lie on spheres of different dimension");
    }
}

inline double clamped_acos(double c) { return std::acos(std::clamp(c, -1.0, 1.0)); }

/// Great-circle distance in [0, pi].
inline double geodesic_distance(const UnitVector& p, const UnitVector& q) {
    require_same_sphere(p, q, "geodesic_distance");
    return clamped_acos(p.coords().dot(q.coords()));
}

inline UnitVector exp_map(const TangentVector& v) {
    const double len = v.norm();
    const Vector& base = v.base().coords();
    if (len == 0.0) {
        return v.base();
    }
    Vector out = std::cos(len) * base + (std::sin(len) / len) * v.components();
    return UnitVector::normalized(out);
}

/// Inverse of exp_map away from the antipode.
inline TangentVector log_map(const UnitVector& p, const UnitVector& q) {
    require_same_sphere(p, q, "log_map");
    const Vector& x = p.coords();
    const Vector& y = q.coords();
    if ((x + y).norm() < kCutLocusTol) {
        throw CutLocusError("log_map: target is on the cut locus of the base point");
    }
    const double c = std::clamp(x.dot(y), -1.0, 1.0);
    Vector perp = y - c * x;
    const double s = perp.norm();
    if (s == 0.0) {
        return TangentVector(p, Vector::Zero(x.size()));
    }
    const double d = std::atan2(s, c);
    perp *= d / s;
    // remove residual normal component from rounding
    perp -= x.dot(perp) * x;
    return TangentVector(p, std::move(perp));
}

/// Rotation R in SO(m+1) with R e_{m+1} = p.
///
/// Built as a Householder reflection taking e_{m+1} to p composed with the
/// reflection of the first axis, which fixes e_{m+1}; the product has
/// determinant +1. For p = e_{m+1} the identity is returned.
inline Matrix rotate_pole_to(const UnitVector& p) {
    const int n = static_cast<int>(p.coords().size());
    Matrix r = Matrix::Identity(n, n);
    Vector v = -p.coords();
    v[n - 1] += 1.0;
    const double vv = v.squaredNorm();
    if (vv < 1e-30) {
        return r;
    }
    Matrix house = Matrix::Identity(n, n) - (2.0 / vv) * v * v.transpose();
    r = house;
    r.col(0) = -house.col(0);
    return r;
}

inline UnitVector apply(const Matrix& rotation, const UnitVector& x) {
    return UnitVector::normalized(rotation * x.coords());
}

}  // namespace smeary
