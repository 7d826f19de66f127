#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smeary/closed_forms.hpp"
#include "smeary/errors.hpp"
#include "smeary/parallel.hpp"
#include "smeary/profile.hpp"
#include "smeary/radial.hpp"
#include "smeary/sphere.hpp"

namespace smeary {

struct MeanResult {
    UnitVector mean = UnitVector::north_pole(1);
    double frechet_value = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;
    int restarts_used = 0;
};

/// Mean search failed on every start; carries the best iterate seen.
class MeanConvergenceError : public ConvergenceError {
public:
    MeanConvergenceError(const std::string& what, MeanResult best) : ConvergenceError(what), best_(std::move(best)) {}
    const MeanResult& best() const noexcept { return best_; }

private:
    MeanResult best_;
};

/// Geodesic ball the mean search must stay in.
struct SearchCap {
    UnitVector center = UnitVector::north_pole(1);
    double radius = std::numbers::pi / 2;
};

enum class MeanStep {
    Newton,      // Riemannian Newton, falling back to the gradient step
    FixedPoint,  // mu <- exp_mu(s * mean log_mu(x_i))
};

struct MeanOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
    int restarts = 5;
    MeanStep step = MeanStep::Newton;
    std::optional<SearchCap> cap;
    std::uint64_t seed = 0x5eed;  // drives initializer fallback and restart perturbations
};

/// Points as columns of a (m+1) x n matrix.
inline Matrix to_matrix(const std::vector<UnitVector>& sample) {
    if (sample.empty()) {
        throw InvalidInput("sample must not be empty");
    }
    const int dim = sample.front().dim();
    Matrix x(dim + 1, static_cast<Eigen::Index>(sample.size()));
    for (std::size_t j = 0; j < sample.size(); ++j) {
        if (sample[j].dim() != dim) {
            throw InvalidInput("sample points lie on spheres of different dimension");
        }
        x.col(static_cast<Eigen::Index>(j)) = sample[j].coords();
    }
    return x;
}

/// (1/n) sum arccos^2 <p, x_i>
inline double empirical_frechet(const Matrix& x, const Vector& p) {
    if (x.cols() == 0) {
        throw InvalidInput("empirical_frechet: sample must not be empty");
    }
    if (x.rows() != p.size()) {
        throw InvalidInput("empirical_frechet: dimension mismatch");
    }
    const Vector c = x.transpose() * p;
    long double sum = 0.0L;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const double d = clamped_acos(c[i]);
        sum += static_cast<long double>(d) * d;
    }
    return static_cast<double>(sum / static_cast<long double>(x.cols()));
}

inline double empirical_frechet(const std::vector<UnitVector>& sample, const UnitVector& p) {
    return empirical_frechet(to_matrix(sample), p.coords());
}

namespace detail {

struct TangentStats {
    Vector mean_log;  // (1/n) sum log_mu(x_i)
    Matrix hessian;   // Hessian of (1/2n) sum d^2 in ambient coordinates, restricted to T_mu
    double value = 0.0;
    bool cut_locus = false;
};

inline TangentStats tangent_stats(const Matrix& x, const Vector& mu, bool want_hessian) {
    const Eigen::Index dim = x.rows();
    const Eigen::Index n = x.cols();
    TangentStats st;
    st.mean_log = Vector::Zero(dim);
    if (want_hessian) {
        st.hessian = Matrix::Zero(dim, dim);
    }
    double radial_sum = 0.0;  // sum of d cot d
    long double value = 0.0L;  // the line search compares values differing in the last digits
    Vector perp(dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto xi = x.col(i);
        if ((xi + mu).norm() < kCutLocusTol) {
            st.cut_locus = true;
            return st;
        }
        const double c = std::clamp(mu.dot(xi), -1.0, 1.0);
        perp = xi - c * mu;
        const double s = perp.norm();
        const double d = std::atan2(s, c);
        value += static_cast<long double>(d) * d;
        if (s == 0.0) {
            radial_sum += 1.0;
            continue;
        }
        st.mean_log.noalias() += (d / s) * perp;
        if (want_hessian) {
            const double dcot = d * c / s;
            radial_sum += dcot;
            st.hessian.noalias() += ((1.0 - dcot) / (s * s)) * perp * perp.transpose();
        }
    }
    const double inv = 1.0 / static_cast<double>(n);
    st.value = static_cast<double>(value / static_cast<long double>(n));
    st.mean_log *= inv;
    st.mean_log -= mu.dot(st.mean_log) * mu;
    if (want_hessian) {
        const Matrix proj = Matrix::Identity(dim, dim) - mu * mu.transpose();
        st.hessian = inv * (st.hessian + radial_sum * proj);
    }
    return st;
}

inline Vector exp_at(const Vector& mu, const Vector& v) {
    const double len = v.norm();
    if (len == 0.0) {
        return mu;
    }
    Vector out = std::cos(len) * mu + (std::sin(len) / len) * v;
    return out / out.norm();
}

inline bool inside_cap(const Vector& mu, const std::optional<SearchCap>& cap) {
    if (!cap) {
        return true;
    }
    return clamped_acos(cap->center.coords().dot(mu)) <= cap->radius;
}

inline Vector initial_point(const Matrix& x, std::mt19937_64& rng, const std::optional<SearchCap>& cap) {
    Vector avg = x.rowwise().mean();
    const double norm = avg.norm();
    Vector init;
    if (norm < 1e-3) {
        std::uniform_int_distribution<Eigen::Index> pick(0, x.cols() - 1);
        init = x.col(pick(rng));
        init /= init.norm();
    } else {
        init = avg / norm;
    }
    if (!inside_cap(init, cap)) {
        init = cap->center.coords();
    }
    return init;
}

/// Random tangent perturbation of size `scale` at mu.
inline Vector perturb(const Vector& mu, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Vector v(mu.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = normal(rng);
    }
    v -= mu.dot(v) * mu;
    const double n = v.norm();
    if (n == 0.0) {
        return mu;
    }
    return exp_at(mu, (scale / n) * v);
}

struct Attempt {
    Vector mu;
    double value = std::numeric_limits<double>::infinity();
    double gradient_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool cut_locus = false;
};

inline Attempt descend(const Matrix& x, Vector mu, const MeanOptions& opts) {
    Attempt at;
    at.mu = mu;
    const bool newton = opts.step == MeanStep::Newton;
    TangentStats st = tangent_stats(x, mu, newton);
    if (st.cut_locus) {
        at.cut_locus = true;
        return at;
    }
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        at.mu = mu;
        at.value = st.value;
        at.gradient_norm = st.mean_log.norm();
        at.iterations = iter;
        if (at.gradient_norm < opts.tolerance) {
            at.converged = true;
            return at;
        }
        Vector direction = st.mean_log;
        if (newton) {
            // Newton step on the tangent space; negative or tiny curvature
            // directions are replaced by their absolute value (floored), so the
            // step is always a descent direction.
            const Matrix lifted = st.hessian + mu * mu.transpose();
            Eigen::SelfAdjointEigenSolver<Matrix> eig(lifted);
            if (eig.info() == Eigen::Success) {
                const Vector lam = eig.eigenvalues().cwiseAbs();
                const double floor = std::max(1e-8, 1e-6 * lam.maxCoeff());
                const Vector coeff = eig.eigenvectors().transpose() * st.mean_log;
                Vector v = eig.eigenvectors() * coeff.cwiseQuotient(lam.cwiseMax(floor));
                v -= mu.dot(v) * mu;
                if (v.allFinite() && v.dot(st.mean_log) > 0.0) {
                    direction = v;
                }
            }
        }
        // halve the step until the empirical Frechet value does not increase
        double step = 1.0;
        bool accepted = false;
        TangentStats next;
        Vector candidate;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            candidate = exp_at(mu, step * direction);
            if (!inside_cap(candidate, opts.cap)) {
                continue;
            }
            next = tangent_stats(x, candidate, newton);
            if (next.cut_locus) {
                at.cut_locus = true;
                return at;
            }
            // Near the optimum value changes drop below rounding; there a step
            // that shrinks the gradient is accepted instead.
            const double slack = 8.0 * std::numeric_limits<double>::epsilon() * st.value;
            if (next.value < st.value ||
                (next.value <= st.value + slack && next.mean_log.norm() < st.mean_log.norm())) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            return at;
        }
        mu = candidate;
        st = std::move(next);
    }
    at.mu = mu;
    at.value = st.value;
    at.gradient_norm = st.mean_log.norm();
    at.iterations = opts.max_iterations;
    at.converged = at.gradient_norm < opts.tolerance;
    return at;
}

}  // namespace detail

/// Sample Frechet mean by Riemannian descent with restarts.
inline MeanResult frechet_mean(const Matrix& x, const MeanOptions& opts = {}) {
    if (x.cols() == 0) {
        throw InvalidInput("frechet_mean: sample must not be empty");
    }
    if (x.rows() < 2) {
        throw InvalidInput("frechet_mean: ambient dimension must be at least 2");
    }
    if (opts.cap && opts.cap->center.coords().size() != x.rows()) {
        throw InvalidInput("frechet_mean: search cap lives on a different sphere");
    }
    std::mt19937_64 rng(opts.seed);
    const Vector init = detail::initial_point(x, rng, opts.cap);
    std::optional<detail::Attempt> best_converged;
    detail::Attempt best_any;
    int restarts_used = 0;
    int total_iterations = 0;
    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        Vector start = init;
        if (attempt > 0) {
            ++restarts_used;
            start = detail::perturb(init, 0.1 * attempt, rng);
            if (!detail::inside_cap(start, opts.cap)) {
                start = init;
            }
        }
        detail::Attempt at = detail::descend(x, start, opts);
        total_iterations += at.iterations;
        if (at.converged) {
            best_converged = at;
            break;
        }
        if (!at.cut_locus && at.value < best_any.value) {
            best_any = at;
        }
    }
    auto pack = [&](const detail::Attempt& at) {
        MeanResult r;
        r.mean = UnitVector::normalized(at.mu.size() ? at.mu : init);
        r.frechet_value = empirical_frechet(x, r.mean.coords());
        r.iterations = total_iterations;
        r.gradient_norm = at.gradient_norm;
        r.restarts_used = restarts_used;
        return r;
    };
    if (best_converged) {
        return pack(*best_converged);
    }
    throw MeanConvergenceError("frechet_mean: no start converged to tolerance", pack(best_any));
}

inline MeanResult frechet_mean(const std::vector<UnitVector>& sample, const MeanOptions& opts = {}) {
    if (sample.empty()) {
        throw InvalidInput("frechet_mean: sample must not be empty");
    }
    return frechet_mean(to_matrix(sample), opts);
}

// ---------------------------------------------------------------------------
// Monte Carlo harnesses

enum class VarianceCenter {
    ReplicateMean,  // about the Frechet mean of the replicate means
    KnownPole,      // about the population mean e_{m+1}
};

struct ExperimentOptions {
    VarianceCenter center = VarianceCenter::ReplicateMean;
    MeanOptions mean{};
    int threads = default_thread_count();
    double failure_budget = 0.05;
};

struct SlopeFit {
    double slope = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
    double intercept = std::numeric_limits<double>::quiet_NaN();
};

struct ScalingCurve {
    std::vector<long long> sizes;
    std::vector<double> variance;
    std::vector<double> rescaled_variance;
    std::vector<int> failures;
    int replicates = 0;
    std::uint64_t seed = 0;
    SlopeFit slope_fit;
};

/// Ordinary least squares of log var against log size, with the slope standard error.
inline SlopeFit fit_log_slope(const std::vector<long long>& sizes, const std::vector<double>& var) {
    SlopeFit fit;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (!(var[i] > 0.0)) {
            return fit;
        }
        x.push_back(std::log(static_cast<double>(sizes[i])));
        y.push_back(std::log(var[i]));
    }
    const std::size_t n = x.size();
    if (n < 2) {
        return fit;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (n > 2) {
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.stderr_ = std::sqrt(rss / (n - 2) / sxx);
    } else {
        fit.stderr_ = 0.0;
    }
    return fit;
}

/// Slope restricted to sizes in [lo, hi].
inline SlopeFit fit_log_slope(const ScalingCurve& curve, double lo, double hi) {
    std::vector<long long> s;
    std::vector<double> v;
    for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
        const double n = static_cast<double>(curve.sizes[i]);
        if (n >= lo && n <= hi) {
            s.push_back(curve.sizes[i]);
            v.push_back(curve.variance[i]);
        }
    }
    return fit_log_slope(s, v);
}

/// Frechet variance of a set of means about the chosen center.
inline double frechet_variance(const Matrix& means, VarianceCenter center, const MeanOptions& opts) {
    const Eigen::Index dim = means.rows();
    Vector c;
    if (center == VarianceCenter::KnownPole) {
        c = Vector::Zero(dim);
        c[dim - 1] = 1.0;
    } else {
        MeanOptions o = opts;
        o.cap.reset();
        c = frechet_mean(means, o).mean.coords();
    }
    return empirical_frechet(means, c);
}

namespace detail {

/// Runs `replicates` mean computations for one size and aggregates them.
template <class DrawFn>
void scaling_point(ScalingCurve& curve, long long size, int replicates, const ExperimentOptions& opts,
                   std::uint64_t seed, std::uint64_t index, int dim, DrawFn&& draw) {
    Matrix means(dim + 1, replicates);
    std::vector<char> ok(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), opts.threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, index, b));
        const Matrix x = draw(rng);
        MeanOptions mo = opts.mean;
        mo.seed = derive_seed(seed ^ 0xa5a5a5a5ULL, index, b);
        try {
            means.col(static_cast<Eigen::Index>(b)) = frechet_mean(x, mo).mean.coords();
            ok[b] = 1;
        } catch (const ConvergenceError&) {
        } catch (const CutLocusError&) {
        }
    });
    int good = 0;
    for (char c : ok) {
        good += c;
    }
    const int failed = replicates - good;
    if (failed > opts.failure_budget * replicates) {
        throw ExperimentError("mean computation failed for " + std::to_string(failed) + " of " +
                              std::to_string(replicates) + " replicates at size " + std::to_string(size));
    }
    Matrix kept(dim + 1, good);
    for (int b = 0, j = 0; b < replicates; ++b) {
        if (ok[b]) {
            kept.col(j++) = means.col(b);
        }
    }
    const double var = frechet_variance(kept, opts.center, opts.mean);
    curve.sizes.push_back(size);
    curve.variance.push_back(var);
    curve.rescaled_variance.push_back(var * static_cast<double>(size));
    curve.failures.push_back(failed);
}

}  // namespace detail

/// n Var[mu_n] over a grid of sample sizes; draw(n, rng) returns n points as columns.
template <class DrawFn>
ScalingCurve scaling_curve(DrawFn&& draw, int dim, const std::vector<long long>& n_grid, int replicates,
                           std::uint64_t seed, const ExperimentOptions& opts = {}) {
    if (replicates < 50) {
        throw InvalidInput("variance_scaling: at least 50 replicates are required");
    }
    if (n_grid.empty() || !std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() < 1) {
        throw InvalidInput("variance_scaling: sizes must be positive and ascending");
    }
    ScalingCurve curve;
    curve.replicates = replicates;
    curve.seed = seed;
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        const int n = static_cast<int>(n_grid[i]);
        detail::scaling_point(curve, n_grid[i], replicates, opts, seed, i, dim,
                              [&](Rng& rng) { return draw(n, rng); });
    }
    curve.slope_fit = fit_log_slope(curve.sizes, curve.variance);
    return curve;
}

/// n Var[mu_n] over a grid of sample sizes for draws from `dist`.
inline ScalingCurve variance_scaling(const RadialMixture& dist, const std::vector<long long>& n_grid, int replicates,
                                     std::uint64_t seed, const ExperimentOptions& opts = {}) {
    const RadialSampler sampler(dist);
    return scaling_curve([&](int n, Rng& rng) { return sampler.draw(n, rng); }, dist.dim(), n_grid, replicates, seed,
                         opts);
}

/// k-out-of-n bootstrap: resamples of size k drawn with replacement.
inline ScalingCurve bootstrap_k_of_n(const Matrix& sample, const std::vector<long long>& k_grid, int replicates,
                                     std::uint64_t seed, const ExperimentOptions& opts = {}) {
    const Eigen::Index n = sample.cols();
    if (n == 0) {
        throw InvalidInput("bootstrap_k_of_n: sample must not be empty");
    }
    if (replicates < 1) {
        throw InvalidInput("bootstrap_k_of_n: at least one replicate is required");
    }
    for (long long k : k_grid) {
        if (k < 1 || k > 10 * static_cast<long long>(n)) {
            throw InvalidInput("bootstrap_k_of_n: k must lie in [1, 10 n]");
        }
    }
    ScalingCurve curve;
    curve.replicates = replicates;
    curve.seed = seed;
    const int dim = static_cast<int>(sample.rows()) - 1;
    for (std::size_t i = 0; i < k_grid.size(); ++i) {
        const Eigen::Index k = static_cast<Eigen::Index>(k_grid[i]);
        detail::scaling_point(curve, k_grid[i], replicates, opts, seed, i, dim, [&](Rng& rng) {
            std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
            Matrix x(sample.rows(), k);
            for (Eigen::Index j = 0; j < k; ++j) {
                x.col(j) = sample.col(pick(rng));
            }
            return x;
        });
    }
    curve.slope_fit = fit_log_slope(curve.sizes, curve.variance);
    return curve;
}

/// max over the grid of n Var[mu_n] / Var[X].
inline double fss_magnitude(const ScalingCurve& curve, double var_x) {
    if (curve.rescaled_variance.empty()) {
        throw InvalidInput("fss_magnitude: curve is empty");
    }
    if (!(var_x > 0.0)) {
        throw InvalidInput("fss_magnitude: Var[X] must be positive");
    }
    return *std::max_element(curve.rescaled_variance.begin(), curve.rescaled_variance.end()) / var_x;
}

/// Weight of the ring at theta_star for which the Hessian at the pole vanishes.
inline double ring_alpha0(int m, double theta_star) {
    const double contribution = ring_d2_at_pole(theta_star, m);
    if (!(contribution < 0.0)) {
        throw ModelError("ring_alpha0: the ring does not lower the Hessian (theta_star must exceed theta_m2)");
    }
    return std::min(1.0, 2.0 / (2.0 - contribution));
}

/// Limit of n Var[mu_n] / Var[X] for the ring model below its critical weight.
inline double ring_fss_theory(double alpha, double alpha0) {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) {
        throw InvalidInput("ring_fss_theory: alpha0 must lie in (0, 1]");
    }
    if (!(alpha >= 0.0)) {
        throw InvalidInput("ring_fss_theory: alpha must be non-negative");
    }
    if (alpha >= alpha0) {
        throw InvalidInput("ring_fss_theory: alpha >= alpha0 leaves no positive Hessian");
    }
    return alpha0 * alpha0 / ((alpha0 - alpha) * (alpha0 - alpha));
}

/// Var[X] = E d^2(mu, X) for a distribution about its pole.
inline double population_variance(const RadialMixture& dist) { return frechet_F0(dist); }

inline void write_scaling_csv(std::ostream& out, const ScalingCurve& curve) {
    out << "# units: size count, var rad^2, rescaled_var rad^2, n_failures count\n";
    out << "size,var,rescaled_var,n_failures\n";
    for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
        out << curve.sizes[i] << ',' << format_double(curve.variance[i]) << ','
            << format_double(curve.rescaled_variance[i]) << ',' << curve.failures[i] << '\n';
    }
}

}  // namespace smeary
