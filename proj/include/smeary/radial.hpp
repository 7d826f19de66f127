#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "smeary/errors.hpp"
#include "smeary/quadrature.hpp"
#include "smeary/sphere.hpp"

namespace smeary {

using Rng = std::mt19937_64;

/// Area-uniform law on the annulus theta in [pi/2, pi - beta].
struct Annulus {
    double beta = 0.0;
};

/// Area-uniform law on the cap theta in [pi - delta, pi] around the south pole.
struct Cap {
    double delta = std::numbers::pi / 2;
};

/// Uniform law on the subsphere at fixed polar angle.
struct Ring {
    double theta_star = std::numbers::pi / 2;
};

struct Atom {
    double angle = 0.0;
    double weight = 0.0;
};

/// Uniform-in-theta law on [lo, hi] carrying 1 - atom.weight, plus an optional atom.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    std::optional<Atom> atom;
};

using RadialLaw = std::variant<Annulus, Cap, Ring, Interval>;

/// Continuous polar-angle density of a radial law.
struct ContinuousPart {
    enum class Kind { AreaUniform, ThetaUniform };
    Kind kind = Kind::AreaUniform;
    double lo = 0.0;
    double hi = 0.0;
    double weight = 1.0;  // share of the radial part
};

/// Radial law split into a continuous density and point masses in theta.
struct RadialComponents {
    std::optional<ContinuousPart> continuous;
    std::vector<Atom> atoms;  // weights are shares of the radial part
};

/// integral of sin^k over [a, b]
inline double sin_power_integral(int k, double a, double b) {
    return quad::integrate([k](double t) { return std::pow(std::sin(t), k); }, a, b);
}

/// Rotation-symmetric law on S^m: weight 1 - alpha at the north pole, alpha on
/// the radial part.
class RadialMixture {
public:
    RadialMixture(int m, double alpha, RadialLaw radial)
        : m_(m), alpha_(alpha), radial_(std::move(radial)) {
        validate();
    }

    int dim() const noexcept { return m_; }
    double alpha() const noexcept { return alpha_; }
    const RadialLaw& radial() const noexcept { return radial_; }

    RadialMixture with_alpha(double alpha) const { return RadialMixture(m_, alpha, radial_); }

    RadialComponents components() const {
        RadialComponents out;
        using K = ContinuousPart::Kind;
        std::visit(
            [&](const auto& law) {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    out.continuous = ContinuousPart{K::AreaUniform, std::numbers::pi / 2,
                                                    std::numbers::pi - law.beta, 1.0};
                } else if constexpr (std::is_same_v<T, Cap>) {
                    out.continuous = ContinuousPart{K::AreaUniform, std::numbers::pi - law.delta,
                                                    std::numbers::pi, 1.0};
                } else if constexpr (std::is_same_v<T, Ring>) {
                    out.atoms.push_back({law.theta_star, 1.0});
                } else {
                    const double atom_weight = law.atom ? law.atom->weight : 0.0;
                    if (atom_weight < 1.0) {
                        out.continuous = ContinuousPart{K::ThetaUniform, law.lo, law.hi, 1.0 - atom_weight};
                    }
                    if (law.atom && atom_weight > 0.0) {
                        out.atoms.push_back(*law.atom);
                    }
                }
            },
            radial_);
        return out;
    }

    /// Largest polar angle carrying mass.
    double support_max() const {
        const auto c = components();
        double out = 0.0;
        if (c.continuous) {
            out = c.continuous->hi;
        }
        for (const auto& a : c.atoms) {
            out = std::max(out, a.angle);
        }
        return out;
    }

    /// Total mass of the radial part, by quadrature of its density.
    double radial_mass() const {
        const auto c = components();
        double share = 0.0;
        if (c.continuous) {
            const auto& part = *c.continuous;
            if (part.kind == ContinuousPart::Kind::AreaUniform) {
                const double z = sin_power_integral(m_ - 1, part.lo, part.hi);
                share += part.weight * quad::integrate(
                                           [this, z](double t) { return std::pow(std::sin(t), m_ - 1) / z; },
                                           part.lo, part.hi);
            } else {
                const double width = part.hi - part.lo;
                share += part.weight * quad::integrate([width](double) { return 1.0 / width; }, part.lo, part.hi);
            }
        }
        for (const auto& a : c.atoms) {
            share += a.weight;
        }
        return alpha_ * share;
    }

private:
    void validate() const {
        constexpr double pi = std::numbers::pi;
        if (m_ < 1) {
            throw InvalidInput("RadialMixture: sphere dimension must be at least 1");
        }
        if (!(alpha_ >= 0.0 && alpha_ <= 1.0)) {
            throw InvalidInput("RadialMixture: alpha must lie in [0, 1]");
        }
        std::visit(
            [&](const auto& law) {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, Annulus>) {
                    if (!(law.beta >= 0.0 && law.beta < pi / 2)) {
                        throw InvalidInput("Annulus: beta must lie in [0, pi/2)");
                    }
                } else if constexpr (std::is_same_v<T, Cap>) {
                    if (!(law.delta > 0.0 && law.delta <= pi / 2)) {
                        throw InvalidInput("Cap: delta must lie in (0, pi/2]");
                    }
                } else if constexpr (std::is_same_v<T, Ring>) {
                    if (!(law.theta_star > 0.0 && law.theta_star < pi)) {
                        throw InvalidInput("Ring: theta_star must lie in (0, pi)");
                    }
                } else {
                    if (!(law.lo >= 0.0 && law.hi <= pi && law.lo < law.hi)) {
                        throw InvalidInput("Interval: need 0 <= lo < hi <= pi");
                    }
                    if (law.atom) {
                        if (!(law.atom->weight >= 0.0 && law.atom->weight <= 1.0)) {
                            throw InvalidInput("Interval: atom weight must lie in [0, 1]");
                        }
                        if (!(law.atom->angle >= 0.0 && law.atom->angle <= pi)) {
                            throw InvalidInput("Interval: atom angle must lie in [0, pi]");
                        }
                    }
                }
            },
            radial_);
    }

    int m_;
    double alpha_;
    RadialLaw radial_;
};

inline RadialMixture hole_model(int m, double alpha, double beta) { return {m, alpha, Annulus{beta}}; }
inline RadialMixture hemisphere_model(int m, double alpha) { return {m, alpha, Annulus{0.0}}; }
inline RadialMixture cap_model(int m, double alpha, double delta) { return {m, alpha, Cap{delta}}; }
inline RadialMixture ring_model(int m, double alpha, double theta_star) { return {m, alpha, Ring{theta_star}}; }

/// Inverse-CDF sampler for the area density sin^{m-1} theta on [lo, hi].
///
/// The CDF is tabulated at 1024 cells with a 16-point Gauss rule per cell;
/// inversion locates the cell by bisection on the table and finishes with a
/// safeguarded Newton iteration inside the cell.
class AreaAngleSampler {
public:
    static constexpr int kCells = 1024;

    AreaAngleSampler(int m, double lo, double hi)
        : power_(m - 1), lo_(lo), hi_(hi), rule_(&quad::gauss_legendre(16)) {
        const auto& rule = *rule_;
        width_ = (hi_ - lo_) / kCells;
        cdf_.assign(kCells + 1, 0.0);
        for (int i = 0; i < kCells; ++i) {
            const double a = lo_ + i * width_;
            cdf_[i + 1] = cdf_[i] + quad::fixed_gauss([this](double t) { return density(t); }, a, a + width_, rule);
        }
        total_ = cdf_.back();
        if (!(total_ > 0.0)) {
            throw InvalidInput("AreaAngleSampler: support has zero mass");
        }
    }

    double cdf(double theta) const {
        if (theta <= lo_) return 0.0;
        if (theta >= hi_) return 1.0;
        const int cell = std::min(kCells - 1, static_cast<int>((theta - lo_) / width_));
        const double a = lo_ + cell * width_;
        return (cdf_[cell] + partial(a, theta)) / total_;
    }

    double quantile(double u) const {
        const double target = std::clamp(u, 0.0, 1.0) * total_;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        int cell = static_cast<int>(it - cdf_.begin()) - 1;
        cell = std::clamp(cell, 0, kCells - 1);
        double a = lo_ + cell * width_;
        double b = a + width_;
        const double base = cdf_[cell];
        const double cell_mass = cdf_[cell + 1] - base;
        double x = cell_mass > 0.0 ? a + width_ * (target - base) / cell_mass : 0.5 * (a + b);
        for (int iter = 0; iter < 60; ++iter) {
            const double r = base + partial(lo_ + cell * width_, x) - target;
            if (r > 0.0) {
                b = x;
            } else {
                a = x;
            }
            const double dens = density(x);
            double next = dens > 0.0 ? x - r / dens : 0.5 * (a + b);
            if (!(next > a && next < b)) {
                next = 0.5 * (a + b);
            }
            if (std::abs(next - x) < 1e-15 || b - a < 1e-15) {
                return next;
            }
            x = next;
        }
        return x;
    }

private:
    double density(double t) const {
        const double s = std::sin(t);
        double out = 1.0;
        for (int i = 0; i < power_; ++i) {
            out *= s;
        }
        return out;
    }
    double partial(double a, double x) const {
        return quad::fixed_gauss([this](double t) { return density(t); }, a, x, *rule_);
    }

    int power_;
    double lo_;
    double hi_;
    const quad::GaussLegendreRule* rule_;
    double width_ = 0.0;
    double total_ = 0.0;
    std::vector<double> cdf_;
};

/// uniform random unit vector in the first m coordinates of R^{m+1}
inline void random_equatorial_direction(Rng& rng, Eigen::Ref<Vector> out) {
    std::normal_distribution<double> normal;
    const int m = static_cast<int>(out.size()) - 1;
    double norm2 = 0.0;
    do {
        norm2 = 0.0;
        for (int i = 0; i < m; ++i) {
            out[i] = normal(rng);
            norm2 += out[i] * out[i];
        }
    } while (norm2 == 0.0);
    out.head(m) /= std::sqrt(norm2);
    out[m] = 0.0;
}

/// Draws i.i.d. points of a RadialMixture as columns of a (m+1) x n matrix.
///
/// The sampler is transferable between threads; give each worker its own Rng.
class RadialSampler {
public:
    explicit RadialSampler(const RadialMixture& dist) : dist_(dist), components_(dist.components()) {
        double acc = 0.0;
        if (components_.continuous) {
            acc += components_.continuous->weight;
            const auto& part = *components_.continuous;
            if (part.kind == ContinuousPart::Kind::AreaUniform) {
                area_ = std::make_shared<const AreaAngleSampler>(dist.dim(), part.lo, part.hi);
            }
        }
        cumulative_.push_back(acc);
        for (const auto& a : components_.atoms) {
            acc += a.weight;
            cumulative_.push_back(acc);
        }
    }

    const RadialMixture& distribution() const noexcept { return dist_; }

    double draw_angle(Rng& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(rng) >= dist_.alpha()) {
            return 0.0;
        }
        const double pick = unif(rng) * cumulative_.back();
        if (components_.continuous && pick < cumulative_.front()) {
            const auto& part = *components_.continuous;
            const double u = unif(rng);
            if (area_) {
                return area_->quantile(u);
            }
            return part.lo + u * (part.hi - part.lo);
        }
        for (std::size_t i = 0; i < components_.atoms.size(); ++i) {
            if (pick < cumulative_[i + 1]) {
                return components_.atoms[i].angle;
            }
        }
        return components_.atoms.empty() ? 0.0 : components_.atoms.back().angle;
    }

    Matrix draw(int n, Rng& rng) const {
        if (n < 1) {
            throw InvalidInput("sample: n must be at least 1");
        }
        const int m = dist_.dim();
        Matrix out(m + 1, n);
        Vector dir(m + 1);
        for (int j = 0; j < n; ++j) {
            const double theta = draw_angle(rng);
            if (theta == 0.0) {
                out.col(j).setZero();
                out(m, j) = 1.0;
                continue;
            }
            random_equatorial_direction(rng, dir);
            out.col(j) = std::sin(theta) * dir;
            out(m, j) = std::cos(theta);
        }
        return out;
    }

private:
    RadialMixture dist_;
    RadialComponents components_;
    std::shared_ptr<const AreaAngleSampler> area_;
    std::vector<double> cumulative_;
};

/// n i.i.d. draws from `dist` about the north pole.
inline std::vector<UnitVector> sample(const RadialMixture& dist, int n, Rng& rng) {
    const Matrix pts = RadialSampler(dist).draw(n, rng);
    std::vector<UnitVector> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        out.push_back(UnitVector::normalized(pts.col(j)));
    }
    return out;
}

inline Matrix sample_matrix(const RadialMixture& dist, int n, Rng& rng) { return RadialSampler(dist).draw(n, rng); }

/// splitmix64 finaliser; derives independent per-replicate seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

}  // namespace smeary
