#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "smeary/closed_forms.hpp"
#include "smeary/errors.hpp"
#include "smeary/profile.hpp"
#include "smeary/quadrature.hpp"
#include "smeary/radial.hpp"

namespace smeary {

/// Bisection for a sign change of f on [a, b]; stops at width `tol`.
inline double bisect(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    double fa = f(a);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        throw InvalidInput("bisect: no sign change on the bracket");
    }
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

/// First sign change of f on a uniform scan of [a, b], refined by bisection.
inline double first_root(const std::function<double(double)>& f, double a, double b, int cells = 4096,
                         double tol = 1e-12) {
    double x0 = a;
    double f0 = f(a);
    for (int i = 1; i <= cells; ++i) {
        const double x1 = a + (b - a) * i / cells;
        const double f1 = f(x1);
        if (f1 == 0.0) {
            return x1;
        }
        if ((f0 > 0.0) != (f1 > 0.0)) {
            return bisect(f, x0, x1, tol);
        }
        x0 = x1;
        f0 = f1;
    }
    throw InternalConsistencyError("first_root: no sign change found on the scan");
}

namespace detail {

inline double theta_m2_root(int m) {
    auto f = [m](double t) { return std::sin(t) / (m - 1.0) + t * std::cos(t); };
    return bisect(f, std::numbers::pi / 2, std::numbers::pi);
}

inline double theta_m4_root(int m) {
    auto f = [m](double t) { return f4_closed(t, m, F4Normalization::PerWallis); };
    return first_root(f, std::numbers::pi / 2, std::numbers::pi);
}

inline double beta_m2_root(int m) {
    auto f = [m](double b) { return hole_b2(b, m); };
    // b_{m,2} vanishes again at pi/2 itself, so the scan stops just short of it
    return first_root(f, 0.0, std::numbers::pi / 2 - 1e-9, 1 << 14);
}

inline double beta_m4_root(int m) {
    auto f = [m](double b) { return hole_b4(b, m); };
    return first_root(f, 0.0, std::numbers::pi / 2 - 1e-9, 1 << 14);
}

}  // namespace detail

/// One analytic inequality lower <= value <= upper (either side may be absent).
struct BoundCheck {
    std::string name;
    double value = 0.0;
    std::optional<double> lower;
    std::optional<double> upper;

    bool pass() const { return (!lower || *lower <= value) && (!upper || value <= *upper); }
    /// distance to the nearest active bound; negative when violated
    double margin() const {
        double out = std::numeric_limits<double>::infinity();
        if (lower) out = std::min(out, value - *lower);
        if (upper) out = std::min(out, *upper - value);
        return out;
    }
};

inline std::vector<BoundCheck> theta_m2_bounds(int m, double value) {
    const double half = std::numbers::pi / 2;
    return {{"theta_m2", value, half + 1.0 / (3.0 * (m - 1.0)), half + 1.0 / (m - 1.0)}};
}

inline std::vector<BoundCheck> theta_m4_bounds(int m, double value, double theta2) {
    std::vector<BoundCheck> out{{"theta_m4_above_half_pi", value, std::numbers::pi / 2, std::nullopt},
                                {"theta_m4_above_theta_m2", value, theta2, std::nullopt}};
    if (m > 3) {
        out.push_back({"theta_m4_upper", value, std::nullopt, std::numbers::pi / 2 + 16.0 / (std::numbers::pi * (m - 3.0))});
    }
    return out;
}

inline std::vector<BoundCheck> beta_m2_bounds(int m, double value) {
    const double half = std::numbers::pi / 2;
    return {{"beta_m2", value, half - 6.0 / (std::numbers::pi * (m - 1.0)), half - 1.0 / (2.0 * (m - 1.0))}};
}

inline std::vector<BoundCheck> beta_m4_bounds(int m, double value, double beta2) {
    const double half = std::numbers::pi / 2;
    std::vector<BoundCheck> out{
        {"beta_m4_lower", value, half - 6.0 * (6.0 + std::numbers::pi) / (std::numbers::pi * (m - 3.0)), std::nullopt},
        {"beta_m4_below_beta_m2", value, std::nullopt, beta2},
        {"beta_m4_upper", value, std::nullopt, half - 1.0 / (2.0 * (m - 3.0))}};
    return out;
}

inline void require_bounds(const std::vector<BoundCheck>& checks, int m) {
    for (const auto& c : checks) {
        if (!c.pass()) {
            throw InternalConsistencyError(c.name + " violates its analytic bound for m = " + std::to_string(m) +
                                           " (margin " + format_double(c.margin()) + ")");
        }
    }
}

/// Zero of sin(theta)/(m-1) + theta cos(theta) on (pi/2, pi).
inline double theta_m2(int m) {
    if (m < 2) {
        throw InvalidInput("theta_m2: m must be at least 2");
    }
    const double t = detail::theta_m2_root(m);
    require_bounds(theta_m2_bounds(m, t), m);
    return t;
}

/// First zero of the fourth-derivative ring contribution on (pi/2, pi).
inline double theta_m4(int m) {
    if (m < 4) {
        throw InvalidInput("theta_m4: m must be at least 4");
    }
    const double t = detail::theta_m4_root(m);
    require_bounds(theta_m4_bounds(m, t, detail::theta_m2_root(m)), m);
    return t;
}

/// Largest hole radius admitting a flat Hessian.
inline double beta_m2(int m) {
    if (m < 2) {
        throw InvalidInput("beta_m2: m must be at least 2");
    }
    const double b = detail::beta_m2_root(m);
    require_bounds(beta_m2_bounds(m, b), m);
    return b;
}

/// Largest hole radius keeping the fourth derivative positive.
inline double beta_m4(int m) {
    if (m < 4) {
        throw InvalidInput("beta_m4: m must be at least 4");
    }
    const double b = detail::beta_m4_root(m);
    require_bounds(beta_m4_bounds(m, b, detail::beta_m2_root(m)), m);
    return b;
}

/// Weight alpha_beta of the annulus for which the Hessian at the pole vanishes.
inline double alpha_for_flat_hessian(double beta, int m) {
    if (m < 2) {
        throw InvalidInput("alpha_for_flat_hessian: m must be at least 2");
    }
    check_hole_beta(beta, "alpha_for_flat_hessian");
    const double b2 = hole_b2(beta, m);
    // b_{m,2} is positive exactly on [0, beta_m2) within [0, pi/2)
    if (!(b2 > 0.0)) {
        throw ModelError("alpha_for_flat_hessian: no admissible alpha for beta = " + format_double(beta) +
                         " (beta must stay below beta_m2)");
    }
    return 1.0 / (1.0 + b2 / (m * hole_shell_integral(beta, m)));
}

/// The flat-Hessian hole model for (m, beta).
inline RadialMixture smeary_hole_model(int m, double beta) { return hole_model(m, alpha_for_flat_hessian(beta, m), beta); }

struct CriticalAngleReport {
    int m = 0;
    std::optional<double> theta_m2;
    std::optional<double> theta_m4;
    std::optional<double> beta_m2;
    std::optional<double> beta_m4;
    std::optional<double> beta;
    std::optional<double> alpha_beta;
    std::vector<BoundCheck> bounds;

    bool bounds_pass() const {
        return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& b) { return b.pass(); });
    }
};

/// All angles available for m with their bound checks; violations are
/// reported in `bounds` rather than thrown.
inline CriticalAngleReport critical_angle_report(int m, std::optional<double> beta = std::nullopt) {
    if (m < 2) {
        throw InvalidInput("critical_angle_report: m must be at least 2");
    }
    CriticalAngleReport rep;
    rep.m = m;
    rep.theta_m2 = detail::theta_m2_root(m);
    rep.beta_m2 = detail::beta_m2_root(m);
    auto append = [&](std::vector<BoundCheck> more) {
        rep.bounds.insert(rep.bounds.end(), more.begin(), more.end());
    };
    append(theta_m2_bounds(m, *rep.theta_m2));
    append(beta_m2_bounds(m, *rep.beta_m2));
    if (m >= 4) {
        rep.theta_m4 = detail::theta_m4_root(m);
        rep.beta_m4 = detail::beta_m4_root(m);
        append(theta_m4_bounds(m, *rep.theta_m4, *rep.theta_m2));
        append(beta_m4_bounds(m, *rep.beta_m4, *rep.beta_m2));
    }
    if (beta) {
        rep.beta = beta;
        rep.alpha_beta = alpha_for_flat_hessian(*beta, m);
    }
    return rep;
}

inline void write_critical_angles_csv(std::ostream& out, const std::vector<CriticalAngleReport>& reports) {
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    out << "# units: angles and bounds in rad; margin = distance to the nearest bound (rad), negative if violated\n";
    out << "m,theta_m2,theta_m4,beta_m2,beta_m4,"
           "theta_m2_lower,theta_m2_upper,theta_m4_upper,beta_m2_lower,beta_m2_upper,beta_m4_lower,beta_m4_upper,"
           "min_margin,bounds_pass\n";
    const double half = std::numbers::pi / 2;
    for (const auto& r : reports) {
        const int m = r.m;
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& b : r.bounds) {
            margin = std::min(margin, b.margin());
        }
        std::optional<double> t4u, b4l, b4u;
        if (m >= 4) {
            t4u = half + 16.0 / (std::numbers::pi * (m - 3.0));
            b4l = half - 6.0 * (6.0 + std::numbers::pi) / (std::numbers::pi * (m - 3.0));
            b4u = half - 1.0 / (2.0 * (m - 3.0));
        }
        out << m << ',' << cell(r.theta_m2) << ',' << cell(r.theta_m4) << ',' << cell(r.beta_m2) << ','
            << cell(r.beta_m4) << ',' << format_double(half + 1.0 / (3.0 * (m - 1.0))) << ','
            << format_double(half + 1.0 / (m - 1.0)) << ',' << cell(t4u) << ','
            << format_double(half - 6.0 / (std::numbers::pi * (m - 1.0))) << ','
            << format_double(half - 1.0 / (2.0 * (m - 1.0))) << ',' << cell(b4l) << ',' << cell(b4u) << ','
            << format_double(margin) << ',' << (r.bounds_pass() ? "true" : "false") << '\n';
    }
}

// ---------------------------------------------------------------------------
// Derivatives of the flat-Hessian hole model with respect to the hole radius.

namespace detail {

/// d alpha_beta / d beta
inline double alpha_beta_slope(double beta, int m) {
    const double alpha = alpha_for_flat_hessian(beta, m);
    const double s = hole_shell_integral(beta, m);
    const double sb = std::pow(std::sin(beta), m - 1);
    const double b2 = hole_b2(beta, m);
    const double db2 = sb - (std::numbers::pi - beta) * (m - 1.0) * std::pow(std::sin(beta), m - 2) * std::cos(beta);
    return -alpha * alpha * (db2 * s + b2 * sb) / (m * s * s);
}

inline double order_pole_term(int j) { return j == 2 ? 2.0 : 0.0; }

struct ShellIntegrator {
    int m;
    int j;
    double psi;
    quad::Tolerance ring_tol{1e-13, 1e-11, 24};

    double ring(double theta) const { return ring_derivatives(m, theta, psi, ring_tol)[j]; }
    double weighted(double theta) const { return std::pow(std::sin(theta), m - 1) * ring(theta); }

    /// int_a^b sin^{m-1} R_j dtheta, split at the antipode of p when inside
    double integral(double a, double b, bool fixed_rule) const {
        if (b <= a) {
            return 0.0;
        }
        const double split = std::numbers::pi - psi;
        auto fn = [this](double t) { return weighted(t); };
        if (split > a && split < b) {
            return integral(a, split, false) + integral(split, b, false);
        }
        if (fixed_rule) {
            return quad::fixed_gauss(fn, a, b, quad::gauss_legendre(8));
        }
        return quad::tanh_sinh(fn, a, b, {1e-13, 1e-10, 24});
    }
};

}  // namespace detail

/// j-th psi-derivative of the flat-Hessian hole model with radius beta.
inline double hole_psi_derivative(int j, double beta, double psi, int m) {
    const double alpha = alpha_for_flat_hessian(beta, m);
    const detail::ShellIntegrator shell{m, j, psi};
    const double k = shell.integral(std::numbers::pi / 2, std::numbers::pi - beta, false);
    return (1.0 - alpha) * detail::order_pole_term(j) + alpha * k / hole_shell_integral(beta, m);
}

namespace detail {

inline double beta_derivative_from_shell(int j, double beta, int m, double k, double ring_at_edge) {
    const double alpha = alpha_for_flat_hessian(beta, m);
    const double s = hole_shell_integral(beta, m);
    const double sb = std::pow(std::sin(beta), m - 1);
    return alpha_beta_slope(beta, m) * (k / s - order_pole_term(j)) + alpha * sb * (k / (s * s) - ring_at_edge / s);
}

}  // namespace detail

/// d/dbeta of the j-th psi-derivative of the flat-Hessian hole model.
inline double hole_beta_derivative(int j, double beta, double psi, int m) {
    const detail::ShellIntegrator shell{m, j, psi};
    const double k = shell.integral(std::numbers::pi / 2, std::numbers::pi - beta, false);
    return detail::beta_derivative_from_shell(j, beta, m, k, shell.ring(std::numbers::pi - beta));
}

struct LipschitzOptions {
    int grid = 64;
    int refine = 9;
    double safety = 1.5;
};

struct LipschitzEstimate {
    double value = 0.0;      // grid maximum times the safety factor
    double grid_max = 0.0;
    double argmax_beta = 0.0;
    double argmax_psi = 0.0;
};

/// Upper estimate of sup |d^{j+1} F / dbeta dpsi^j| over beta in [0, beta_m4], psi in [0, pi].
inline LipschitzEstimate numerical_lipschitz(int j, int m, const LipschitzOptions& opts = {}) {
    if (j < 2 || j > 4) {
        throw InvalidInput("numerical_lipschitz: order must be 2, 3 or 4");
    }
    if (m < j + 1) {
        throw ValidityError("numerical_lipschitz: order " + std::to_string(j) + " needs m >= " +
                            std::to_string(j + 1) + " to differentiate under the integral");
    }
    if (opts.grid < 2) {
        throw InvalidInput("numerical_lipschitz: grid must have at least 2 points per axis");
    }
    const double bmax = detail::beta_m4_root(m);
    const int n = opts.grid;
    std::vector<double> betas(n), psis(n);
    for (int i = 0; i < n; ++i) {
        // sampled strictly inside the admissible range
        betas[i] = bmax * i / n;
        psis[i] = std::numbers::pi * i / (n - 1);
    }
    LipschitzEstimate est;
    for (int l = 0; l < n; ++l) {
        const detail::ShellIntegrator shell{m, j, psis[l]};
        // accumulate the shell integral from the largest hole inwards
        double k = shell.integral(std::numbers::pi / 2, std::numbers::pi - betas[n - 1], false);
        for (int i = n - 1; i >= 0; --i) {
            if (i < n - 1) {
                k += shell.integral(std::numbers::pi - betas[i + 1], std::numbers::pi - betas[i], true);
            }
            const double d = std::abs(
                detail::beta_derivative_from_shell(j, betas[i], m, k, shell.ring(std::numbers::pi - betas[i])));
            if (d > est.grid_max) {
                est.grid_max = d;
                est.argmax_beta = betas[i];
                est.argmax_psi = psis[l];
            }
        }
    }
    // one refinement pass on a local grid around the maximiser
    const double db = bmax / n;
    const double dp = std::numbers::pi / (n - 1);
    const double b0 = est.argmax_beta;
    const double p0 = est.argmax_psi;
    for (int a = 0; a < opts.refine; ++a) {
        const double beta = std::clamp(b0 - db + 2.0 * db * a / (opts.refine - 1), 0.0, bmax * (1.0 - 1e-9));
        for (int b = 0; b < opts.refine; ++b) {
            const double psi = std::clamp(p0 - dp + 2.0 * dp * b / (opts.refine - 1), 0.0, std::numbers::pi);
            const double d = std::abs(hole_beta_derivative(j, beta, psi, m));
            if (d > est.grid_max) {
                est.grid_max = d;
                est.argmax_beta = beta;
                est.argmax_psi = psi;
            }
        }
    }
    est.value = opts.safety * est.grid_max;
    return est;
}

struct Beta0Report {
    int m = 0;
    double alpha0 = 0.0;
    double c_m = 0.0;
    double lipschitz2 = 0.0;
    double lipschitz4 = 0.0;
    double hessian_at_pi_over_3 = 0.0;
    double beta0 = 0.0;
};

/// Hole radius below which the pole is the unique minimiser, from the
/// Lipschitz argument: min(c_m / (2 L4), F''(alpha_0, 0, pi/3) / L2).
inline Beta0Report beta0_uniqueness_radius(int m, const LipschitzOptions& opts = {}) {
    if (m < 5) {
        throw ValidityError("beta0_uniqueness_radius: requires m >= 5");
    }
    Beta0Report rep;
    rep.m = m;
    rep.alpha0 = alpha_for_flat_hessian(0.0, m);
    rep.c_m = hemisphere_c_m(rep.alpha0, m);
    rep.lipschitz2 = numerical_lipschitz(2, m, opts).value;
    rep.lipschitz4 = numerical_lipschitz(4, m, opts).value;
    const auto prof = derivative_profile(hemisphere_model(m, rep.alpha0), {std::numbers::pi / 3}, {2});
    rep.hessian_at_pi_over_3 = prof.at(0, 2);
    rep.beta0 = std::min(rep.c_m / (2.0 * rep.lipschitz4), rep.hessian_at_pi_over_3 / rep.lipschitz2);
    return rep;
}

struct GlobalMinimumCheck {
    double beta = 0.0;
    double alpha = 0.0;
    double min_increment = 0.0;
    double min_increment_psi = 0.0;
    bool unique_minimum = false;
};

/// F(psi) > F(0) on a uniform grid of (0, pi] for the flat-Hessian hole model.
inline GlobalMinimumCheck certify_global_minimum(int m, double beta, int points = 200) {
    GlobalMinimumCheck out;
    out.beta = beta;
    out.alpha = alpha_for_flat_hessian(beta, m);
    const RadialMixture dist = hole_model(m, out.alpha, beta);
    out.min_increment = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= points; ++i) {
        const double psi = std::numbers::pi * i / points;
        const double inc = frechet_F_increment(dist, psi);
        if (inc < out.min_increment) {
            out.min_increment = inc;
            out.min_increment_psi = psi;
        }
    }
    out.unique_minimum = out.min_increment > 0.0;
    return out;
}

struct CurseReport {
    int m = 0;
    double theta_threshold = 0.0;  // pi/2 + 16 / (pi (m - 3))
    double beta_threshold = 0.0;   // pi/2 - 6 (6 + pi) / (pi (m - 3))
    double theta_m4 = 0.0;
    double beta_m4 = 0.0;
    bool theta_ok = false;
    bool beta_applicable = false;  // false when the beta threshold is negative
    bool beta_ok = false;
};

inline CurseReport curse_bounds(int m) {
    if (m < 4) {
        throw InvalidInput("curse_bounds: m must be at least 4");
    }
    CurseReport rep;
    rep.m = m;
    rep.theta_threshold = std::numbers::pi / 2 + 16.0 / (std::numbers::pi * (m - 3.0));
    rep.beta_threshold = std::numbers::pi / 2 - 6.0 * (6.0 + std::numbers::pi) / (std::numbers::pi * (m - 3.0));
    rep.theta_m4 = detail::theta_m4_root(m);
    rep.beta_m4 = detail::beta_m4_root(m);
    rep.theta_ok = rep.theta_m4 <= rep.theta_threshold;
    rep.beta_applicable = rep.beta_threshold > 0.0;
    rep.beta_ok = rep.beta_m4 >= rep.beta_threshold;
    return rep;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares fit of y against x.
inline RateFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    RateFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    return f;
}

/// Approach rate of theta_m4 - pi/2 and pi/2 - beta_m4 against 1/m.
struct CurseRate {
    RateFit theta;
    RateFit beta;
};

inline CurseRate curse_rate(int m_lo = 10, int m_hi = 100) {
    std::vector<double> inv, dt, db;
    for (int m = m_lo; m <= m_hi; ++m) {
        inv.push_back(1.0 / m);
        dt.push_back(detail::theta_m4_root(m) - std::numbers::pi / 2);
        db.push_back(std::numbers::pi / 2 - detail::beta_m4_root(m));
    }
    return {linear_fit(inv, dt), linear_fit(inv, db)};
}

}  // namespace smeary
