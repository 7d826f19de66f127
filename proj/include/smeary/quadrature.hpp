#pragma once

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "smeary/errors.hpp"

namespace smeary::quad {

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline GaussLegendreRule make_gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // recompute the derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Cached rule; the returned reference stays valid for the program lifetime.
inline const GaussLegendreRule& gauss_legendre(int n) {
    static std::mutex mutex;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, make_gauss_legendre(n)).first;
    }
    return it->second;
}

template <class V>
double magnitude(const V& v) {
    if constexpr (std::is_arithmetic_v<V>) {
        return static_cast<double>(std::abs(v));
    } else {
        return v.template lpNorm<Eigen::Infinity>();
    }
}

template <class V>
V zero_like() {
    if constexpr (std::is_arithmetic_v<V>) {
        return V(0);
    } else {
        return V::Zero();
    }
}

/// Fixed Gauss-Legendre rule applied on [a, b].
template <class F>
auto fixed_gauss(F&& f, double a, double b, const GaussLegendreRule& rule) {
    using V = std::decay_t<decltype(f(a))>;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    V sum = zero_like<V>();
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return V(half * sum);
}

struct Tolerance {
    double abs = 1e-13;
    double rel = 1e-12;
    int max_depth = 24;
};

namespace detail {

template <class F, class V>
V adaptive_gauss_step(F& f, double a, double b, V coarse, const Tolerance& tol, int depth,
                      double& err_total) {
    const V fine = fixed_gauss(f, a, b, gauss_legendre(96));
    const double err = magnitude(V(fine - coarse));
    if (err <= std::max(tol.abs, tol.rel * magnitude(fine)) || depth >= tol.max_depth) {
        err_total += err;
        return fine;
    }
    const double mid = 0.5 * (a + b);
    const V left = fixed_gauss(f, a, mid, gauss_legendre(64));
    const V right = fixed_gauss(f, mid, b, gauss_legendre(64));
    Tolerance half = tol;
    half.abs *= 0.5;
    return V(adaptive_gauss_step(f, a, mid, left, half, depth + 1, err_total) +
             adaptive_gauss_step(f, mid, b, right, half, depth + 1, err_total));
}

}  // namespace detail

/// 64-node Gauss-Legendre with a 96-node comparison; bisects where they disagree.
template <class F>
auto integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
    using V = std::decay_t<decltype(f(a))>;
    if (a == b) {
        return zero_like<V>();
    }
    double err = 0.0;
    const V coarse = fixed_gauss(f, a, b, gauss_legendre(64));
    return detail::adaptive_gauss_step(f, a, b, coarse, tol, 0, err);
}

/// Tanh-sinh (double exponential) node tables on [-1, 1].
///
/// Level L has step h0 / 2^L. Each entry stores the distance c of the node to
/// the nearer endpoint of [0, 1] (so endpoint-adjacent nodes keep full
/// relative precision) and the unscaled weight for the unit interval.
class TanhSinhTable {
public:
    static constexpr int kMaxLevel = 9;
    static constexpr double kStep0 = 0.5;
    static constexpr double kTMax = 3.8;

    struct Node {
        double c;
        double w;
    };

    static const TanhSinhTable& instance() {
        static const TanhSinhTable table;
        return table;
    }

    const std::vector<Node>& level(int l) const { return levels_[l]; }

private:
    TanhSinhTable() {
        levels_.resize(kMaxLevel + 1);
        for (int l = 0; l <= kMaxLevel; ++l) {
            const double h = kStep0 / std::ldexp(1.0, l);
            const int stride = l == 0 ? 1 : 2;
            for (int k = 1; k * h <= kTMax; k += stride) {
                const double t = k * h;
                const double u = 0.5 * std::numbers::pi * std::sinh(t);
                const double e = std::exp(-2.0 * u);
                const double c = e / (1.0 + e);
                // (pi/2) cosh t / cosh^2 u mapped to the unit interval
                const double w = 0.5 * std::numbers::pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e)) * 0.5;
                levels_[l].push_back({c, w});
            }
        }
    }

    std::vector<std::vector<Node>> levels_;
};

struct TanhSinhResult {
    double error = 0.0;
    int levels = 0;
    bool converged = false;
};

/// Tanh-sinh quadrature on [a, b]; robust to integrable endpoint singularities.
template <class F>
auto tanh_sinh(F&& f, double a, double b, const Tolerance& tol = {}, TanhSinhResult* info = nullptr,
               int min_level = 3) {
    using V = std::decay_t<decltype(f(a))>;
    if (a == b) {
        return zero_like<V>();
    }
    const auto& table = TanhSinhTable::instance();
    const double len = b - a;
    const double center_weight = 0.5 * std::numbers::pi * 0.5;
    V running = V(center_weight * f(0.5 * (a + b)));
    V previous = zero_like<V>();
    double err = 0.0;
    for (int l = 0; l <= TanhSinhTable::kMaxLevel; ++l) {
        for (const auto& node : table.level(l)) {
            const double d = len * node.c;
            const double left = a + d;
            const double right = b - d;
            if (left > a) {
                running += node.w * f(left);
            }
            if (right < b) {
                running += node.w * f(right);
            }
        }
        const double h = TanhSinhTable::kStep0 / std::ldexp(1.0, l);
        const V current = V(len * h * running);
        if (l > 0) {
            err = magnitude(V(current - previous));
            if (l >= min_level && err <= std::max(tol.abs, tol.rel * magnitude(current))) {
                if (info) {
                    *info = {err, l, true};
                }
                return current;
            }
        }
        previous = current;
    }
    if (info) {
        *info = {err, TanhSinhTable::kMaxLevel, false};
    }
    return previous;
}

}  // namespace smeary::quad
