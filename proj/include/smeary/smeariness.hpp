#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "smeary/closed_forms.hpp"
#include "smeary/errors.hpp"
#include "smeary/profile.hpp"
#include "smeary/radial.hpp"

namespace smeary {

class InvalidWindowError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// F(psi) - F(0) ~ C psi^kappa near the pole.
struct SmearinessFit {
    double kappa = 0.0;
    double c_fit = 0.0;
    double psi_lo = 0.0;
    double psi_hi = 0.0;
    std::size_t points = 0;
};

/// Least-squares fit of log(F(psi) - F(0)) against log(psi).
inline SmearinessFit fit_smeariness_order(const std::vector<double>& psi, const std::vector<double>& increments) {
    if (psi.size() != increments.size()) {
        throw InvalidInput("fit_smeariness_order: psi and increments differ in length");
    }
    if (psi.size() < 8) {
        throw InvalidWindowError("fit_smeariness_order: at least 8 points are needed");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (!(psi[i] > 0.0)) {
            throw InvalidWindowError("fit_smeariness_order: window must lie in psi > 0");
        }
        if (!(increments[i] > 0.0)) {
            throw InvalidWindowError("fit_smeariness_order: F(psi) - F(0) is not positive at psi = " +
                                     format_double(psi[i]));
        }
        const double x = std::log(psi[i]);
        const double y = std::log(increments[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        lo = std::min(lo, psi[i]);
        hi = std::max(hi, psi[i]);
    }
    const double n = static_cast<double>(psi.size());
    const double denom = n * sxx - sx * sx;
    if (!(denom > 0.0)) {
        throw InvalidWindowError("fit_smeariness_order: window has no spread in psi");
    }
    SmearinessFit fit;
    fit.kappa = (n * sxy - sx * sy) / denom;
    fit.c_fit = std::exp((sy - fit.kappa * sx) / n);
    fit.psi_lo = lo;
    fit.psi_hi = hi;
    fit.points = psi.size();
    return fit;
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) {
        throw InvalidInput("log_spaced: need 0 < lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) {
        out[i] = lo * std::exp(step * i);
    }
    out.back() = hi;
    return out;
}

/// Growth exponent of F near the pole for a distribution.
inline SmearinessFit fit_smeariness_order(const RadialMixture& dist, double psi_lo = 1e-3, double psi_hi = 1e-1,
                                          int points = 16) {
    const auto grid = log_spaced(psi_lo, psi_hi, points);
    std::vector<double> inc;
    inc.reserve(grid.size());
    for (double p : grid) {
        inc.push_back(frechet_F_increment(dist, p));
    }
    return fit_smeariness_order(grid, inc);
}

/// Outcome of the cap construction with alpha = sin(delta) / (4 pi).
struct CapConstructionReport {
    double delta = 0.0;
    int m = 0;
    double alpha = 0.0;
    double min_increment = 0.0;      // min over grid psi > 0 of F(psi) - F(0)
    double min_increment_psi = 0.0;
    double hessian_at_pole = 0.0;
    double south_pole_density = 0.0;  // alpha g(delta)
    double density_lower_bound = 0.0;  // m / (4 pi^2 I_{m-2} delta^{m-1})
    bool increments_positive = false;
    bool hessian_positive = false;
    bool density_exceeds_bound = false;

    bool pass() const { return increments_positive && hessian_positive && density_exceeds_bound; }
};

inline CapConstructionReport verify_cap_construction(double delta, int m, const std::vector<double>& psi_grid) {
    if (!(delta > 0.0 && delta <= std::numbers::pi / 2)) {
        throw InvalidInput("verify_cap_construction: delta must lie in (0, pi/2]");
    }
    if (m < 2) {
        throw InvalidInput("verify_cap_construction: m must be at least 2");
    }
    CapConstructionReport rep;
    rep.delta = delta;
    rep.m = m;
    rep.alpha = std::sin(delta) / (4.0 * std::numbers::pi);
    const RadialMixture dist = cap_model(m, rep.alpha, delta);
    rep.min_increment = std::numeric_limits<double>::infinity();
    for (double psi : psi_grid) {
        if (psi <= 0.0) {
            continue;
        }
        const double inc = frechet_F_increment(dist, psi);
        if (inc < rep.min_increment) {
            rep.min_increment = inc;
            rep.min_increment_psi = psi;
        }
    }
    rep.hessian_at_pole = pole_derivatives_closed(dist, {2})[2];
    const double cap_mass = sin_power_integral(m - 1, std::numbers::pi - delta, std::numbers::pi);
    rep.south_pole_density = rep.alpha / (wallis(m - 2) * cap_mass);
    rep.density_lower_bound = m / (4.0 * std::numbers::pi * std::numbers::pi * wallis(m - 2) * std::pow(delta, m - 1));
    rep.increments_positive = rep.min_increment > 0.0;
    rep.hessian_positive = rep.hessian_at_pole > 0.0;
    rep.density_exceeds_bound = rep.south_pole_density >= rep.density_lower_bound;
    return rep;
}

}  // namespace smeary
