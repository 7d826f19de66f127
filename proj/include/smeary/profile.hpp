#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smeary/closed_forms.hpp"
#include "smeary/errors.hpp"
#include "smeary/integrand.hpp"
#include "smeary/quadrature.hpp"
#include "smeary/radial.hpp"

namespace smeary {

struct QuadratureOptions {
    quad::Tolerance inner{1e-15, 1e-13, 24};
    quad::Tolerance outer{1e-14, 1e-12, 24};
};

/// Smallest sphere dimension for which the j-th psi-derivative may be taken
/// under the integral sign. With `restricted` (support kept away from the
/// antipode of p) one dimension less suffices.
inline int min_dimension_for_order(int order, bool restricted) {
    if (order <= 1) {
        return 2;
    }
    return std::max(2, restricted ? order : order + 1);
}

/// psi-derivatives (orders 0..4) of the Frechet function of the uniform law on
/// the ring at polar angle theta:
///   F_theta(psi) = (1/I_{m-2}) int_0^pi sin^{m-2}(phi) arccos^2 h dphi.
inline Derivs5 ring_derivatives(int m, double theta, double psi, const quad::Tolerance& tol = {1e-15, 1e-13, 24},
                                quad::TanhSinhResult* info = nullptr) {
    if (m < 2) {
        throw InvalidInput("ring_derivatives: m must be at least 2");
    }
    const double cpsi = std::cos(psi);
    const double spsi = std::sin(psi);
    const double cth = std::cos(theta);
    const double sth = std::sin(theta);
    const int power = m - 2;
    auto integrand = [&](double phi) -> Derivs5 {
        const double sphi = std::sin(phi);
        const Integrand q = Integrand::from_trig(cpsi, spsi, cth, sth, std::cos(phi), sphi);
        const double weight = power == 0 ? 1.0 : std::pow(sphi, power);
        if (q.w == 0.0 && q.h < 0.0) {
            return Derivs5::Zero();
        }
        return weight * psi_derivatives(q);
    };
    const Derivs5 sum = quad::tanh_sinh(integrand, 0.0, std::numbers::pi, tol, info);
    return sum / wallis(m - 2);
}

/// Frechet function of the ring, F_theta(psi) - theta^2, in extended precision.
inline long double ring_increment(int m, double theta, double psi, const quad::Tolerance& tol = {1e-24, 1e-12, 24},
                                  quad::TanhSinhResult* info = nullptr) {
    const long double cpsi = std::cos(static_cast<long double>(psi));
    const long double spsi = std::sin(static_cast<long double>(psi));
    const long double th = theta;
    const long double cth = std::cos(th);
    const long double sth = std::sin(th);
    const int power = m - 2;
    auto integrand = [&](double phi) -> long double {
        const long double ph = phi;
        const long double sphi = std::sin(ph);
        const long double cphi = std::cos(ph);
        const long double h = cpsi * cth + spsi * sth * cphi;
        const long double hp = -spsi * cth + cpsi * sth * cphi;
        const long double s = sth * sphi;
        const long double a = std::atan2(std::sqrt(hp * hp + s * s), h);
        long double weight = 1.0L;
        for (int i = 0; i < power; ++i) {
            weight *= sphi;
        }
        return weight * (a - th) * (a + th);
    };
    const long double sum = quad::tanh_sinh(integrand, 0.0, std::numbers::pi, tol, info);
    return sum / static_cast<long double>(wallis(m - 2));
}

namespace detail {

/// E[ring(theta)] over the radial law (the off-pole part, without the alpha factor).
/// The continuous part is split at `split` when it falls inside the support.
template <class V, class RingFn>
V radial_expectation(const RadialMixture& dist, double split, RingFn&& ring, const quad::Tolerance& tol,
                     const char* who) {
    const auto comp = dist.components();
    const int m = dist.dim();
    V total = quad::zero_like<V>();
    if (comp.continuous) {
        const auto& part = *comp.continuous;
        const bool area = part.kind == ContinuousPart::Kind::AreaUniform;
        const double norm = area ? sin_power_integral(m - 1, part.lo, part.hi) : part.hi - part.lo;
        auto weighted = [&](double theta) -> V {
            const double dens = area ? std::pow(std::sin(theta), m - 1) : 1.0;
            return V(dens * ring(theta));
        };
        std::vector<double> cuts{part.lo};
        // a split within rounding distance of an endpoint would leave a sliver
        // whose nodes all collapse onto the endpoints
        const double sliver = 64.0 * std::numeric_limits<double>::epsilon() * (part.hi - part.lo);
        if (split > part.lo + sliver && split < part.hi - sliver) {
            cuts.push_back(split);
        }
        cuts.push_back(part.hi);
        V acc = quad::zero_like<V>();
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            quad::TanhSinhResult info;
            const V piece = quad::tanh_sinh(weighted, cuts[i], cuts[i + 1], tol, &info);
            if (!info.converged) {
                throw AccuracyError(std::string(who) + ": radial quadrature did not reach tolerance",
                                    quad::magnitude(piece), info.error);
            }
            acc += piece;
        }
        total += V((part.weight / norm) * acc);
    }
    for (const auto& atom : comp.atoms) {
        total += V(atom.weight * ring(atom.angle));
    }
    return total;
}

inline double increment_split(double psi) { return std::numbers::pi - psi; }

}  // namespace detail

/// psi-derivatives (orders 0..max_order) of the full Frechet function at psi by
/// two-dimensional quadrature. Higher orders are returned as zero; they are
/// left out of the integration because they may not be integrable for small m.
/// A negative max_order picks the highest order valid in dimension m.
inline Derivs5 frechet_derivatives(const RadialMixture& dist, double psi, const QuadratureOptions& opts = {},
                                   int max_order = -1) {
    if (!(psi >= 0.0 && psi <= std::numbers::pi)) {
        throw InvalidInput("frechet_derivatives: psi must lie in [0, pi]");
    }
    const double alpha = dist.alpha();
    Derivs5 pole;
    pole << psi * psi, 2.0 * psi, 2.0, 0.0, 0.0;
    if (alpha == 0.0) {
        return pole;
    }
    const int m = dist.dim();
    if (max_order < 0) {
        max_order = std::clamp(m - 1, 1, 4);
    }
    if (max_order > 4) {
        throw InvalidInput("frechet_derivatives: max_order must be at most 4");
    }
    auto ring = [&](double theta) -> Derivs5 {
        Derivs5 d = ring_derivatives(m, theta, psi, opts.inner);
        d.tail(4 - max_order).setZero();
        return d;
    };
    const Derivs5 radial = detail::radial_expectation<Derivs5>(dist, detail::increment_split(psi), ring, opts.outer,
                                                               "frechet_derivatives");
    return (1.0 - alpha) * pole + alpha * radial;
}

/// F(0) = alpha E[theta^2].
inline double frechet_F0(const RadialMixture& dist) {
    if (dist.alpha() == 0.0) {
        return 0.0;
    }
    auto ring = [](double theta) { return theta * theta; };
    return dist.alpha() * detail::radial_expectation<double>(dist, -1.0, ring, {1e-15, 1e-14, 24}, "frechet_F0");
}

/// F(psi) - F(0), integrating a^2 - theta^2 in extended precision so that
/// increments far below the size of F itself stay resolved.
inline double frechet_F_increment(const RadialMixture& dist, double psi, const QuadratureOptions& opts = {}) {
    if (!(psi >= 0.0 && psi <= std::numbers::pi)) {
        throw InvalidInput("frechet_F_increment: psi must lie in [0, pi]");
    }
    const long double alpha = dist.alpha();
    const long double pole = static_cast<long double>(psi) * psi;
    if (dist.alpha() == 0.0 || psi == 0.0) {
        return static_cast<double>((1.0L - alpha) * pole);
    }
    const int m = dist.dim();
    auto ring = [&](double theta) -> long double { return ring_increment(m, theta, psi); };
    quad::Tolerance outer = opts.outer;
    outer.abs = std::min(outer.abs, 1e-24);
    const long double radial =
        detail::radial_expectation<long double>(dist, detail::increment_split(psi), ring, outer, "frechet_F_increment");
    return static_cast<double>((1.0L - alpha) * pole + alpha * radial);
}

/// Population Frechet function at polar angle psi from the pole.
inline double frechet_F(const RadialMixture& dist, double psi, const QuadratureOptions& opts = {}) {
    return frechet_F0(dist) + frechet_F_increment(dist, psi, opts);
}

/// Even derivatives at the pole from the ring closed forms and 1-D radial quadrature.
inline Derivs5 pole_derivatives_closed(const RadialMixture& dist, const std::vector<int>& orders) {
    const int m = dist.dim();
    const double alpha = dist.alpha();
    Derivs5 out;
    out << frechet_F0(dist), 0.0, 2.0 * (1.0 - alpha), 0.0, 0.0;
    if (alpha == 0.0) {
        return out;
    }
    const auto comp = dist.components();
    const bool want4 = std::find(orders.begin(), orders.end(), 4) != orders.end();
    auto expect = [&](int order) {
        double total = 0.0;
        if (comp.continuous) {
            const auto& part = *comp.continuous;
            double piece;
            if (part.kind == ContinuousPart::Kind::AreaUniform) {
                // density times the ring derivative collapses to the f_j closed forms
                const double z = sin_power_integral(m - 1, part.lo, part.hi) * wallis(m - 2);
                piece = quad::integrate(
                    [&](double t) { return 2.0 * (order == 2 ? f2_closed(t, m) : f4_closed(t, m)) / z; }, part.lo,
                    part.hi, {1e-15, 1e-14, 24});
            } else {
                piece = quad::integrate(
                            [&](double t) { return order == 2 ? ring_d2_at_pole(t, m) : ring_d4_at_pole(t, m); },
                            part.lo, part.hi, {1e-15, 1e-14, 24}) /
                        (part.hi - part.lo);
            }
            total += part.weight * piece;
        }
        for (const auto& atom : comp.atoms) {
            total += atom.weight * (order == 2 ? ring_d2_at_pole(atom.angle, m) : ring_d4_at_pole(atom.angle, m));
        }
        return total;
    };
    out[2] += alpha * expect(2);
    if (want4) {
        out[4] = alpha * expect(4);
    }
    return out;
}

struct ProfileOptions {
    /// at psi = 0 use the ring closed forms instead of 2-D quadrature
    bool closed_form_at_pole = true;
    /// accept one dimension less when support_max + psi stays below pi
    bool allow_restricted_regime = false;
    QuadratureOptions quadrature{};
};

enum class ProfileMethod { ClosedForm, Quadrature };

inline const char* to_string(ProfileMethod method) {
    return method == ProfileMethod::ClosedForm ? "closed-form" : "quadrature";
}

/// Sampled psi-derivatives of F; column j holds the j-th derivative (units rad^{2-j}).
/// Columns for orders that were not requested hold NaN, except column 0 (F),
/// which is always filled.
struct DerivativeProfile {
    RadialMixture dist;
    std::vector<double> psi;
    std::vector<int> orders;
    Eigen::MatrixXd values;
    std::vector<ProfileMethod> method;

    double at(std::size_t row, int order) const { return values(static_cast<Eigen::Index>(row), order); }
};

/// Throws ValidityError when an order may not be differentiated under the integral.
inline void check_profile_validity(const RadialMixture& dist, const std::vector<double>& psi_grid,
                                   const std::vector<int>& orders, bool allow_restricted) {
    const int m = dist.dim();
    double psi_max = 0.0;
    for (double p : psi_grid) {
        psi_max = std::max(psi_max, p);
    }
    const bool restricted = allow_restricted && dist.support_max() + psi_max < std::numbers::pi;
    for (int j : orders) {
        if (j < 1 || j > 4) {
            throw InvalidInput("derivative_profile: orders must lie in {1, 2, 3, 4}");
        }
        const int need = min_dimension_for_order(j, restricted);
        if (m < need) {
            std::string msg = "derivative_profile: order " + std::to_string(j) + " needs m >= " +
                              std::to_string(need) + " to differentiate under the integral";
            if (allow_restricted && !restricted) {
                msg += " (support plus psi reaches the antipode, so the restricted regime does not apply)";
            }
            throw ValidityError(msg);
        }
    }
}

inline DerivativeProfile derivative_profile(const RadialMixture& dist, const std::vector<double>& psi_grid,
                                            std::vector<int> orders, const ProfileOptions& opts = {}) {
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    check_profile_validity(dist, psi_grid, orders, opts.allow_restricted_regime);
    DerivativeProfile prof{dist, psi_grid, orders, Eigen::MatrixXd::Constant(psi_grid.size(), 5, std::nan("")), {}};
    for (std::size_t i = 0; i < psi_grid.size(); ++i) {
        const double psi = psi_grid[i];
        Derivs5 d;
        ProfileMethod method;
        if (psi == 0.0 && opts.closed_form_at_pole) {
            d = pole_derivatives_closed(dist, orders);
            method = ProfileMethod::ClosedForm;
        } else {
            d = frechet_derivatives(dist, psi, opts.quadrature, orders.empty() ? 0 : orders.back());
            method = ProfileMethod::Quadrature;
        }
        prof.values(i, 0) = d[0];
        for (int j : orders) {
            prof.values(i, j) = d[j];
        }
        prof.method.push_back(method);
    }
    return prof;
}

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[40];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) {
            break;
        }
    }
    return buf;
}

inline void write_profile_csv(std::ostream& out, const DerivativeProfile& prof) {
    out << "# units: psi rad, F rad^2, dF rad, d2F 1, d3F rad^-1, d4F rad^-2\n";
    out << "psi,F,dF,d2F,d3F,d4F,method\n";
    for (std::size_t i = 0; i < prof.psi.size(); ++i) {
        out << format_double(prof.psi[i]);
        for (int j = 0; j <= 4; ++j) {
            out << ',' << format_double(prof.at(i, j));
        }
        out << ',' << to_string(prof.method[i]) << '\n';
    }
}

}  // namespace smeary
