#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace smeary {

/// The geometric symbols of the Frechet integrand for the pole-to-p angle psi,
/// polar angle theta and azimuth phi (p tilted towards the phi = 0 meridian).
///
///   h  = cos psi cos theta + sin psi sin theta cos phi   (inner product <p, q>)
///   h' = dh/dpsi, and h'' = -h
///   s  = sin theta sin phi
///   w  = 1 - h^2, evaluated as h'^2 + s^2 so it keeps relative accuracy near h = +-1
///   a  = arccos h
struct Integrand {
    double h = 1.0;
    double hp = 0.0;
    double s = 0.0;
    double w = 0.0;
    double a = 0.0;

    static Integrand at(double psi, double theta, double phi) {
        return from_trig(std::cos(psi), std::sin(psi), std::cos(theta), std::sin(theta), std::cos(phi),
                         std::sin(phi));
    }

    static Integrand from_trig(double cpsi, double spsi, double cth, double sth, double cphi, double sphi) {
        Integrand out;
        out.h = cpsi * cth + spsi * sth * cphi;
        out.hp = -spsi * cth + cpsi * sth * cphi;
        out.s = sth * sphi;
        out.w = out.hp * out.hp + out.s * out.s;
        out.a = std::atan2(std::sqrt(out.w), out.h);
        return out;
    }
};

/// arccos(x) / sqrt(1 - x^2) given a = arccos x and w = 1 - x^2.
/// Uses 1 + (1 - x)/3 when the quotient is numerically 0/0.
inline double arccos_over_sqrt(double h, double w, double a) {
    const double t = w / (1.0 + h);
    if (h > 0.0 && t < 1e-8) {
        return 1.0 + t / 3.0;
    }
    return a / std::sqrt(w);
}

namespace detail {

/// Taylor coefficients of arccos^2(1 - t) = sum_n c_n t^n, c_n = 2^{n+1} / (n^2 binom(2n, n)).
inline const std::array<double, 64>& arccos_sq_series() {
    static const std::array<double, 64> coeffs = [] {
        std::array<double, 64> c{};
        double central = 1.0;  // binom(2n, n)
        double pow2 = 2.0;     // 2^{n+1} / 2
        for (int n = 1; n < 64; ++n) {
            central *= (2.0 * n) * (2.0 * n - 1.0) / (static_cast<double>(n) * n);
            pow2 *= 2.0;
            c[n] = pow2 / (static_cast<double>(n) * n * central);
        }
        return c;
    }();
    return coeffs;
}

}  // namespace detail

/// Derivatives G_k = d^k/dx^k arccos^2(x) at x = h, k = 0..4.
///
/// Close to x = 1 the closed expressions divide 0 by 0, so there the Taylor
/// series in t = 1 - x is summed instead; elsewhere the recursion from
/// (1 - x^2) G'' - x G' = 2 is used.
inline std::array<double, 5> arccos_sq_derivatives(double h, double w, double a) {
    std::array<double, 5> g{};
    g[0] = a * a;
    if (h > 0.5) {
        const double t = w / (1.0 + h);
        const auto& c = detail::arccos_sq_series();
        double p[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
        // p[k] = sum_n c_n n!/(n-k)! t^{n-k}; evaluated by Horner from the top
        for (int n = 63; n >= 1; --n) {
            if (n >= 4) {
                p[4] = p[4] * t + c[n] * n * (n - 1.0) * (n - 2.0) * (n - 3.0);
            }
            if (n >= 3) {
                p[3] = p[3] * t + c[n] * n * (n - 1.0) * (n - 2.0);
            }
            if (n >= 2) {
                p[2] = p[2] * t + c[n] * n * (n - 1.0);
            }
            p[1] = p[1] * t + c[n] * n;
        }
        g[1] = -p[1];
        g[2] = p[2];
        g[3] = -p[3];
        g[4] = p[4];
        return g;
    }
    g[1] = -2.0 * a / std::sqrt(w);
    g[2] = (2.0 + h * g[1]) / w;
    g[3] = (3.0 * h * g[2] + g[1]) / w;
    g[4] = (5.0 * h * g[3] + 4.0 * g[2]) / w;
    return g;
}

using Derivs5 = Eigen::Matrix<double, 5, 1>;

/// d^j/dpsi^j of arccos^2(h(psi, theta, phi)) for j = 0..4, by the chain rule
/// with h'' = -h.
inline Derivs5 psi_derivatives(const Integrand& q) {
    const auto g = arccos_sq_derivatives(q.h, q.w, q.a);
    const double h = q.h;
    const double hp = q.hp;
    const double hp2 = hp * hp;
    Derivs5 d;
    d[0] = g[0];
    d[1] = g[1] * hp;
    d[2] = g[2] * hp2 - g[1] * h;
    d[3] = g[3] * hp2 * hp - 3.0 * g[2] * h * hp - g[1] * hp;
    d[4] = g[4] * hp2 * hp2 - 6.0 * g[3] * h * hp2 + g[2] * (3.0 * h * h - 4.0 * hp2) + g[1] * h;
    return d;
}

}  // namespace smeary
