#pragma once

/**
 * @file
 * Collective spin moments, angle-optimized transverse variance, the
 * spectroscopic squeezing parameter and closed-form reference curves.
 */

#include <cmath>
#include <complex>
#include <cstdint>
#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spinlattice/errors.hpp"
#include "spinlattice/state_vector.hpp"

namespace spinlattice {

/// First moments and symmetrized second moments of (J_x, J_y, J_z).
template <typename Real = double> struct MomentSet {
    Eigen::Matrix<Real, 3, 1> mean = Eigen::Matrix<Real, 3, 1>::Zero();
    /// second(a, b) = <J_a J_b + J_b J_a> / 2
    Eigen::Matrix<Real, 3, 3> second = Eigen::Matrix<Real, 3, 3>::Zero();

    [[nodiscard]] Eigen::Matrix<Real, 3, 3> covariance() const { return second - mean * mean.transpose(); }
    [[nodiscard]] Real variance(Axis axis) const {
        const auto a = static_cast<int>(axis);
        return second(a, a) - mean(a) * mean(a);
    }
    [[nodiscard]] Real jz() const { return mean(2); }
};

namespace detail {

/// Writes J_x psi, J_y psi, J_z psi.
template <typename Real>
void apply_collective(const typename StateVector<Real>::Vector &psi, int n, typename StateVector<Real>::Vector &jx,
                      typename StateVector<Real>::Vector &jy, typename StateVector<Real>::Vector &jz) {
    using C = std::complex<Real>;
    const Eigen::Index dim = psi.size();
    const Real half = Real{0.5};
    jx.setZero(dim);
    jy.setZero(dim);
    jz.resize(dim);
    for (int k = 0; k < n; ++k) {
        const auto bit = Eigen::Index{1} << k;
        for (Eigen::Index base = 0; base < dim; base += 2 * bit) {
            for (Eigen::Index i0 = base; i0 < base + bit; ++i0) {
                const C p0 = psi(i0);
                const C p1 = psi(i0 + bit);
                jx(i0) += half * p1;
                jx(i0 + bit) += half * p0;
                // (i/2) p1 and -(i/2) p0
                jy(i0) += C{-half * p1.imag(), half * p1.real()};
                jy(i0 + bit) += C{half * p0.imag(), -half * p0.real()};
            }
        }
    }
    for (Eigen::Index i = 0; i < dim; ++i) {
        const int ones = std::popcount(static_cast<std::uint64_t>(i));
        jz(i) = (static_cast<Real>(ones) - half * static_cast<Real>(n)) * psi(i);
    }
}

} // namespace detail

template <typename Real> MomentSet<Real> collective_moments(const StateVector<Real> &state) {
    using Vector = typename StateVector<Real>::Vector;
    const Vector &psi = state.amplitudes();
    Vector applied[3];
    detail::apply_collective<Real>(psi, state.num_sites(), applied[0], applied[1], applied[2]);
    MomentSet<Real> m;
    for (int a = 0; a < 3; ++a) {
        m.mean(a) = psi.dot(applied[a]).real();
        for (int b = a; b < 3; ++b) {
            m.second(a, b) = applied[a].dot(applied[b]).real();
            m.second(b, a) = m.second(a, b);
        }
    }
    return m;
}

/// Variance of J_theta = cos(theta) J_x + sin(theta) J_y.
template <typename Real> Real variance_at(const MomentSet<Real> &m, Real theta) {
    const auto cov = m.covariance();
    const Real c = std::cos(theta);
    const Real s = std::sin(theta);
    return c * c * cov(0, 0) + s * s * cov(1, 1) + 2 * s * c * cov(0, 1);
}

template <typename Real = double> struct ThetaOptimum {
    Real theta = 0;
    Real min_variance = 0;
};

/**
 * Closed-form minimum of Var(J_theta) over theta. theta lies in
 * (-pi/2, pi/2]; when the variance does not depend on theta it is reported
 * as 0.
 */
template <typename Real> ThetaOptimum<Real> min_variance_theta(const MomentSet<Real> &m) {
    const auto cov = m.covariance();
    const Real a = cov(0, 0);
    const Real b = cov(1, 1);
    const Real c = cov(0, 1);
    const Real half_diff = (a - b) / 2;
    const Real radius = std::hypot(half_diff, c);
    ThetaOptimum<Real> out;
    out.min_variance = (a + b) / 2 - radius;
    const Real scale = std::max({std::abs(a), std::abs(b), Real{1}});
    if (radius <= Real{1e-14} * scale) {
        out.theta = 0;
        return out;
    }
    Real theta = std::atan2(-c, -half_diff) / 2;
    if (theta <= -std::numbers::pi_v<Real> / 2) {
        theta += std::numbers::pi_v<Real>;
    }
    out.theta = theta;
    return out;
}

/// |<J_z>| at or below this (relative to N/2) makes xi^2 undefined.
inline constexpr double kUndefinedJzTolerance = 1e-12;

/// N (Delta J_theta)^2 / <J_z>^2, or nullopt when <J_z> vanishes.
template <typename Real> std::optional<Real> xi_squared(const MomentSet<Real> &m, int num_atoms, Real theta) {
    const Real jz = m.jz();
    if (std::abs(jz) <= Real(kUndefinedJzTolerance) * std::max(Real{1}, Real(num_atoms) / 2)) {
        return std::nullopt;
    }
    return Real(num_atoms) * variance_at(m, theta) / (jz * jz);
}

template <typename Real = double> struct SqueezingReport {
    Real time = 0;
    Real theta_opt = 0;
    Real min_variance = 0;
    std::optional<Real> xi2;
};

template <typename Real> SqueezingReport<Real> squeezing_report(const MomentSet<Real> &m, int num_atoms, Real time) {
    const auto opt = min_variance_theta(m);
    return {time, opt.theta, opt.min_variance, xi_squared(m, num_atoms, opt.theta)};
}

/// (Delta J_{-pi/4})^2 for nearest-neighbour j_x j_x coupling from the all-|0> state.
inline double analytic_variance_one_neighbor(int num_atoms, double chi_t) {
    const double s = std::sin(chi_t);
    return num_atoms / 4.0 * (1.0 + 0.25 * s * s - s);
}

/// <J_z> for the same protocol, as printed in the closed form.
inline double analytic_jz_one_neighbor(int num_atoms, double chi_t) {
    const double c = std::cos(chi_t);
    return -num_atoms / 2.0 * c * c;
}

/// Pair coupling chi_{k,l} (lattice sites) used by the initial slope formula.
struct WeightedPair {
    int first = 0;
    int second = 0;
    double chi = 0.0;
};

/**
 * Convention constant of the initial variance slope
 * d/dt (Delta J_{-pi/4})^2 = -kappa * sum_{k,l} chi_{k,l} <h_k h_l>.
 *
 * The literal prefactor is 1/2. Matching the exact t = 0 derivative of the
 * fully filled nearest-neighbour curve, -N chi / 4, requires 1/4 for both the
 * one-directional and the symmetric coupling tables.
 */
inline constexpr double kSlopeConvention = 0.25;
inline constexpr double kLiteralSlopeConvention = 0.5;

/// `correlation(k, l)` returns <h_k h_l>.
inline double initial_slope_prediction(std::span<const WeightedPair> couplings,
                                       const std::function<double(int, int)> &correlation,
                                       double kappa = kSlopeConvention) {
    double sum = 0.0;
    for (const auto &c : couplings) {
        sum += c.chi * correlation(c.first, c.second);
    }
    return -kappa * sum;
}

struct TimeMinimum {
    double time = 0.0;
    double value = 0.0;
    double grid_step = 0.0;
    bool found = false;
};

struct TimeGrid {
    double t_min = 0.0;
    double t_max = std::numbers::pi / 2;
    int points = 400;
    /// Golden-section refinement around the best grid point.
    bool refine = true;
    double tolerance = 1e-10;
};

/// Times of a uniform grid.
inline std::vector<double> grid_times(const TimeGrid &grid) {
    if (grid.points < 2 || !(grid.t_max > grid.t_min)) {
        throw ArgumentError("time grid needs at least two points over a non-empty interval");
    }
    const double step = (grid.t_max - grid.t_min) / (grid.points - 1);
    std::vector<double> times(static_cast<std::size_t>(grid.points));
    for (int i = 0; i < grid.points; ++i) {
        times[static_cast<std::size_t>(i)] = grid.t_min + step * i;
    }
    return times;
}

/**
 * Best of the sampled grid values, refined by golden-section search of f in
 * the bracket around the best grid point when grid.refine is set. Undefined
 * samples (nullopt) are skipped.
 */
inline TimeMinimum refine_grid_minimum(std::span<const std::optional<double>> samples, const TimeGrid &grid,
                                       const std::function<std::optional<double>(double)> &f) {
    const auto times = grid_times(grid);
    if (samples.size() != times.size()) {
        throw ValidationError("sample count does not match the time grid");
    }
    const double step = times.size() > 1 ? times[1] - times[0] : 0.0;
    TimeMinimum best{0.0, 0.0, step, false};
    int best_index = -1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto &v = samples[i];
        if (v && (!best.found || *v < best.value)) {
            best = {times[i], *v, step, true};
            best_index = static_cast<int>(i);
        }
    }
    if (!best.found || !grid.refine || !f) {
        return best;
    }
    double lo = times[static_cast<std::size_t>(std::max(0, best_index - 1))];
    double hi = times[static_cast<std::size_t>(std::min(grid.points - 1, best_index + 1))];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto eval = [&](double t) {
        const auto v = f(t);
        return v ? *v : std::numeric_limits<double>::infinity();
    };
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = eval(x1);
    double f2 = eval(x2);
    while (hi - lo > grid.tolerance) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    if (f1 < best.value) {
        best.time = x1;
        best.value = f1;
    }
    if (f2 < best.value) {
        best.time = x2;
        best.value = f2;
    }
    return best;
}

/// Uniform grid scan of f followed by golden-section refinement.
inline TimeMinimum minimize_over_time(const std::function<std::optional<double>(double)> &f, const TimeGrid &grid) {
    std::vector<std::optional<double>> samples;
    for (double t : grid_times(grid)) {
        samples.push_back(f(t));
    }
    return refine_grid_minimum(samples, grid, f);
}

} // namespace spinlattice
