#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "smeary/errors.hpp"
#include "smeary/radial.hpp"

namespace smeary {

/// Wallis integral I_m = int_0^pi sin^m phi dphi, by the two-step recursion.
inline double wallis(int m) {
    if (m < 0) {
        throw InvalidInput("wallis: m must be non-negative");
    }
    double value = (m % 2 == 0) ? std::numbers::pi : 2.0;
    for (int k = (m % 2 == 0) ? 2 : 3; k <= m; k += 2) {
        value *= static_cast<double>(k - 1) / k;
    }
    return value;
}

/// Surface measure of the unit sphere S^m.
inline double sphere_volume(int m) {
    if (m < 1) {
        throw InvalidInput("sphere_volume: m must be at least 1");
    }
    const double h = 0.5 * (m + 1);
    return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

/// Fourth derivative at the pole of the hemisphere model with flat Hessian.
inline double hemisphere_c_m(double alpha, int m) {
    if (m < 2) {
        throw InvalidInput("hemisphere_c_m: m must be at least 2");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidInput("hemisphere_c_m: alpha must lie in [0, 1]");
    }
    return alpha * sphere_volume(m + 1) / sphere_volume(m) * (m - 1.0) / (m + 2.0);
}

/// Ring contribution to the second derivative at the pole, before the 1/(2g)
/// normalisation is removed.
inline double f2_closed(double theta, int m) {
    if (m < 2) {
        throw InvalidInput("f2_closed: m must be at least 2");
    }
    const double s = std::sin(theta);
    return wallis(m) * std::pow(s, m - 2) * (s / (m - 1.0) + theta * std::cos(theta));
}

enum class F4Normalization {
    Raw,        // exactly the integrated expression
    PerWallis,  // divided by I_m / (m + 2); equals -4 at the equator for every m
};

/// Ring contribution to the fourth derivative at the pole.
inline double f4_closed(double theta, int m, F4Normalization norm = F4Normalization::Raw) {
    if (m < 4) {
        throw InvalidInput("f4_closed: m must be at least 4");
    }
    const double s = std::sin(theta);
    const double s2 = s * s;
    const double bracket = std::pow(s, m - 3) * ((3.0 * m - 9.0) - (3.0 * m - 5.0) * s2) -
                           theta * std::cos(theta) * std::pow(s, m - 4) * ((3.0 * m - 9.0) - (2.0 * m - 2.0) * s2);
    if (norm == F4Normalization::PerWallis) {
        return bracket;
    }
    return wallis(m) / (m + 2.0) * bracket;
}

namespace detail {

/// theta * cot(theta), with the removable point at 0
inline double theta_cot(double theta) {
    if (std::abs(theta) < 1e-8) {
        return 1.0 - theta * theta / 3.0;
    }
    return theta * std::cos(theta) / std::sin(theta);
}

/// sin(theta) - theta cos(theta), series below 0.2 to avoid cancellation
inline double sin_minus_theta_cos(double theta) {
    if (std::abs(theta) < 0.2) {
        const double t2 = theta * theta;
        double term = theta * t2;  // theta^{2k+1}
        double sum = 0.0;
        double fact = 6.0;  // (2k+1)!
        for (int k = 1; k <= 8; ++k) {
            const double sign = (k % 2 == 1) ? 1.0 : -1.0;
            sum += sign * (2.0 * k) * term / fact;
            term *= t2;
            fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
        }
        return sum;
    }
    return std::sin(theta) - theta * std::cos(theta);
}

}  // namespace detail

/// Second psi-derivative at the pole of the Frechet function of a uniform ring
/// at polar angle theta (i.e. 2 g(theta) f_2(theta, 0)).
inline double ring_d2_at_pole(double theta, int m) {
    return 2.0 * (1.0 + (m - 1.0) * detail::theta_cot(theta)) / m;
}

/// Fourth psi-derivative at the pole for a uniform ring (2 g(theta) f_4(theta, 0)),
/// written so that the limit theta -> 0 is evaluated without cancellation.
inline double ring_d4_at_pole(double theta, int m) {
    if (m < 4) {
        throw InvalidInput("ring_d4_at_pole: m must be at least 4");
    }
    const double s = std::sin(theta);
    const double factor = 2.0 * (m - 1.0) / (m * (m + 2.0));
    if (theta == 0.0) {
        return 0.0;
    }
    const double core = (3.0 * m - 9.0) * detail::sin_minus_theta_cos(theta) / (s * s * s) - (3.0 * m - 5.0) +
                        (2.0 * m - 2.0) * detail::theta_cot(theta);
    return factor * core;
}

/// Flat-Hessian discriminant of the hole model; its first zero is beta_{m,2}.
inline double hole_b2(double beta, int m) {
    return std::numbers::pi / 2 - (std::numbers::pi - beta) * std::pow(std::sin(beta), m - 1);
}

/// Sign of the fourth derivative of the hole model at the pole; its first zero is beta_{m,4}.
inline double hole_b4(double beta, int m) {
    const double pi = std::numbers::pi;
    const double s = std::sin(beta);
    return pi / 2 + 2.0 * (pi - beta) * std::pow(s, m - 1) - 3.0 * std::cos(beta) * std::pow(s, m - 2) -
           3.0 * (pi - beta) * std::pow(s, m - 3);
}

/// int_{pi/2}^{pi - beta} sin^{m-1} theta dtheta
inline double hole_shell_integral(double beta, int m) {
    return sin_power_integral(m - 1, std::numbers::pi / 2, std::numbers::pi - beta);
}

/// Normalisation g(beta) of the uniform law on the annulus.
inline double hole_g(double beta, int m) { return 1.0 / (wallis(m - 2) * hole_shell_integral(beta, m)); }

inline void check_hole_beta(double beta, const char* who) {
    if (!(beta >= 0.0 && beta < std::numbers::pi / 2)) {
        throw InvalidInput(std::string(who) + ": beta must lie in [0, pi/2)");
    }
}

/// Second psi-derivative at the pole of the hole model.
inline double hole_d2_closed(double alpha, double beta, int m) {
    check_hole_beta(beta, "hole_d2_closed");
    const int need = beta > 0.0 ? 2 : 3;
    if (m < need) {
        throw ValidityError("hole_d2_closed: differentiation under the integral needs m >= " + std::to_string(need));
    }
    const double pi = std::numbers::pi;
    return 2.0 * (1.0 - alpha) + 2.0 * alpha * wallis(m) * hole_g(beta, m) / (m - 1.0) *
                                     ((pi - beta) * std::pow(std::sin(beta), m - 1) - pi / 2);
}

/// Fourth psi-derivative at the pole of the hole model.
inline double hole_d4_closed(double alpha, double beta, int m) {
    check_hole_beta(beta, "hole_d4_closed");
    const int need = beta > 0.0 ? 4 : 5;
    if (m < need) {
        throw ValidityError("hole_d4_closed: differentiation under the integral needs m >= " + std::to_string(need));
    }
    return 2.0 * alpha * wallis(m) * hole_g(beta, m) * hole_b4(beta, m) / (m + 2.0);
}

}  // namespace smeary
