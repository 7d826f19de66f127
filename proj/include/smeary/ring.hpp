#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "smeary/errors.hpp"
#include "smeary/integrand.hpp"
#include "smeary/profile.hpp"
#include "smeary/quadrature.hpp"

namespace smeary {

struct RingFjOptions {
    /// lower the dimension requirement by one; only honoured when theta + psi < pi
    bool restricted = false;
    quad::Tolerance tol{1e-16, 1e-13, 24};
};

/// f_j(theta, psi) = (1 / 2g(theta)) d^j F_theta / dpsi^j for j = 1..4, computed
/// from the explicit azimuthal integrands written in h, h', s and
/// r = arccos(h) / sqrt(1 - h^2).
inline double ring_fj(int j, double theta, double psi, int m, const RingFjOptions& opts = {}) {
    if (j < 1 || j > 4) {
        throw InvalidInput("ring_fj: order must be 1, 2, 3 or 4");
    }
    const bool restricted = opts.restricted && theta + psi < std::numbers::pi;
    const int need = min_dimension_for_order(j, restricted);
    if (m < need) {
        throw ValidityError("ring_fj: differentiating order " + std::to_string(j) +
                            " under the integral requires m >= " + std::to_string(need));
    }
    const double cpsi = std::cos(psi);
    const double spsi = std::sin(psi);
    const double cth = std::cos(theta);
    const double sth = std::sin(theta);
    auto integrand = [&](double phi) {
        const Integrand q = Integrand::from_trig(cpsi, spsi, cth, sth, std::cos(phi), std::sin(phi));
        const double h = q.h;
        const double hp = q.hp;
        const double s = q.s;
        const double w = q.w;
        if (w == 0.0) {
            return 0.0;
        }
        const double r = arccos_over_sqrt(h, w, q.a);
        const double s2 = s * s;
        const double hp2 = hp * hp;
        switch (j) {
            case 1:
                return std::pow(s, m - 2) * (-hp * r);
            case 2:
                return std::pow(s, m - 2) * (hp2 + h * s2 * r) / w;
            case 3:
                return std::pow(s, m) * hp * (-3.0 * h + (1.0 + 2.0 * h * h) * r) / (w * w);
            default: {
                const double h2 = h * h;
                const double num = 3.0 * s2 * h2 - 4.0 * (1.0 + 2.0 * h2) * hp2 +
                                   (4.0 * (2.0 + h2) * hp2 - s2 * (1.0 + 2.0 * h2)) * h * r;
                return std::pow(s, m) * num / (w * w * w);
            }
        }
    };
    return sth * quad::tanh_sinh(integrand, 0.0, std::numbers::pi, opts.tol);
}

}  // namespace smeary
