#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spinlattice/evolution.hpp"
#include "spinlattice/observables.hpp"

using namespace spinlattice;
constexpr double pi = std::numbers::pi;

namespace {

StateVector<double> random_state(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    StateVector<double>::Vector v(Eigen::Index{1} << n);
    for (auto &a : v) {
        a = {g(rng), g(rng)};
    }
    v.normalize();
    return StateVector<double>(n, v);
}

HamiltonianSpec xx_ring(int n, int r, double chi = 1.0) {
    HamiltonianSpec s;
    s.kind = CouplingKind::xx;
    s.chi = chi;
    s.neighbor_range = r;
    s.lattice = {n, Boundary::periodic};
    return s;
}

MomentSet<double> evolved_moments(const HamiltonianSpec &spec, double t) {
    auto psi = new_register(spec.register_size());
    apply_schedule(psi, compile(spec, t, 0.1));
    return collective_moments(psi);
}

/// Forward second-order difference of f at 0.
double slope_at_zero(const std::function<double(double)> &f, double h) {
    return (-3.0 * f(0.0) + 4.0 * f(h) - f(2.0 * h)) / (2.0 * h);
}

} // namespace

TEST_CASE("coherent state moments") {
    for (int n : {1, 4, 9}) {
        const auto m = collective_moments(new_register(n));
        CHECK(m.jz() == doctest::Approx(-n / 2.0));
        CHECK(m.variance(Axis::x) == doctest::Approx(n / 4.0));
        CHECK(m.variance(Axis::y) == doctest::Approx(n / 4.0));
        CHECK(std::abs(m.variance(Axis::z)) < 1e-13);
    }
}

TEST_CASE("single site along +x") {
    auto s = new_register(1);
    collective_rotation(s, Axis::y, -pi / 2);
    const auto m = collective_moments(s);
    CHECK(m.mean(0) == doctest::Approx(0.5));
    CHECK(std::abs(m.jz()) < 1e-15);
}

TEST_CASE("singlet has zero collective spin") {
    StateVector<double>::Vector v = StateVector<double>::Vector::Zero(4);
    v(1) = 1 / std::sqrt(2.0);
    v(2) = -1 / std::sqrt(2.0);
    const auto m = collective_moments(StateVector<double>(2, v));
    CHECK(m.mean.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(m.second.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("moments agree with Kronecker operators") {
    const int n = 5;
    const auto psi = random_state(n, 31);
    const auto m = collective_moments(psi);
    const char axes[3] = {'x', 'y', 'z'};
    for (int a = 0; a < 3; ++a) {
        const auto ja = oracle::collective(axes[a], n);
        CHECK(m.mean(a) == doctest::Approx(oracle::expectation(psi.amplitudes(), ja)).epsilon(1e-12));
        for (int b = 0; b < 3; ++b) {
            const auto jb = oracle::collective(axes[b], n);
            const oracle::Matrix sym = (ja * jb + jb * ja) / 2.0;
            CHECK(m.second(a, b) == doctest::Approx(oracle::expectation(psi.amplitudes(), sym)).epsilon(1e-12));
        }
    }
}

TEST_CASE("uncertainty relation and nonnegative variances") {
    for (unsigned seed = 0; seed < 20; ++seed) {
        const auto m = collective_moments(random_state(6, seed));
        CHECK((m.second - m.second.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (Axis a : {Axis::x, Axis::y, Axis::z}) {
            CHECK(m.variance(a) >= -1e-12);
        }
        CHECK(m.variance(Axis::x) * m.variance(Axis::y) >= m.jz() * m.jz() / 4 - 1e-10);
    }
}

TEST_CASE("closed-form theta minimum against a dense scan") {
    std::mt19937 rng(4);
    for (unsigned trial = 0; trial < 10; ++trial) {
        const auto m = collective_moments(random_state(5, trial + 100));
        const auto opt = min_variance_theta(m);
        double scan = std::numeric_limits<double>::infinity();
        const int samples = 100000;
        for (int i = 0; i < samples; ++i) {
            scan = std::min(scan, variance_at(m, -pi / 2 + pi * i / samples));
        }
        CHECK(std::abs(opt.min_variance - scan) < 1e-9);
        CHECK(variance_at(m, opt.theta) == doctest::Approx(opt.min_variance).epsilon(1e-12));
        CHECK(opt.theta > -pi / 2);
        CHECK(opt.theta <= pi / 2);
        CHECK(opt.min_variance <= std::min(m.variance(Axis::x), m.variance(Axis::y)) + 1e-15);
        for (double off : {-0.1, -1e-3, 1e-3, 0.1}) {
            CHECK(variance_at(m, opt.theta + off) >= opt.min_variance);
        }
    }
}

TEST_CASE("degenerate variance reports theta = 0") {
    const auto opt = min_variance_theta(collective_moments(new_register(7)));
    CHECK(opt.theta == 0.0);
    CHECK(opt.min_variance == doctest::Approx(7 / 4.0));
}

TEST_CASE("rotation about z shifts the optimal angle") {
    auto psi = new_register(8);
    apply_schedule(psi, compile_xx(xx_ring(8, 2), 0.3));
    const auto before = min_variance_theta(collective_moments(psi));
    for (double alpha : {0.2, -0.45, 0.9}) {
        auto rotated = psi;
        collective_rotation(rotated, Axis::z, alpha);
        const auto after = min_variance_theta(collective_moments(rotated));
        CHECK(after.min_variance == doctest::Approx(before.min_variance).epsilon(1e-10));
        double shift = after.theta - before.theta - alpha;
        shift -= pi * std::round(shift / pi);
        CHECK(std::abs(shift) < 1e-10);
    }
}

TEST_CASE("optimal angle tends to -pi/4 at short times") {
    const auto m = evolved_moments(xx_ring(10, 1), 1e-3);
    CHECK(min_variance_theta(m).theta == doctest::Approx(-pi / 4).epsilon(1e-3));
}

TEST_CASE("xi^2 of a coherent state is 1 at any angle") {
    for (int n : {2, 9, 16}) {
        const auto m = collective_moments(new_register(n));
        for (double theta : {0.0, 0.3, -1.2, pi / 2}) {
            CHECK(std::abs(*xi_squared(m, n, theta) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("xi^2 is undefined when Jz vanishes") {
    auto s = new_register(4);
    collective_rotation(s, Axis::y, pi / 2);
    const auto m = collective_moments(s);
    CHECK_FALSE(xi_squared(m, 4, 0.0).has_value());
    CHECK_FALSE(squeezing_report(m, 4, 0.0).xi2.has_value());
}

TEST_CASE("closed-form reference values") {
    CHECK(analytic_variance_one_neighbor(15, 0.0) == doctest::Approx(3.75));
    CHECK(analytic_variance_one_neighbor(15, pi / 2) == doctest::Approx(0.9375));
    CHECK(analytic_variance_one_neighbor(12, pi) == doctest::Approx(3.0));
    CHECK(analytic_jz_one_neighbor(15, 0.0) == doctest::Approx(-7.5));
    CHECK(std::abs(analytic_jz_one_neighbor(15, pi / 2)) < 1e-15);
    CHECK(analytic_jz_one_neighbor(15, pi) == doctest::Approx(-7.5));
    const double ct = 0.37;
    const double s = std::sin(ct);
    const double c = std::cos(ct);
    const double combined = 15 * analytic_variance_one_neighbor(15, ct) / std::pow(analytic_jz_one_neighbor(15, ct), 2);
    CHECK(combined == doctest::Approx((1 + 0.25 * s * s - s) / std::pow(c, 4)));
}

TEST_CASE("nearest-neighbour xx variance equals the closed form") {
    const int n = 10;
    const auto spec = xx_ring(n, 1, 0.8);
    for (int i = 0; i <= 20; ++i) {
        const double chi_t = pi * i / 20;
        const auto m = evolved_moments(spec, chi_t / 0.8);
        CHECK(std::abs(variance_at(m, -pi / 4) - analytic_variance_one_neighbor(n, chi_t)) < 1e-10);
    }
}

TEST_CASE("nearest-neighbour xx Jz follows -N/2 cos^2(chi t / 2)") {
    const int n = 10;
    const auto spec = xx_ring(n, 1);
    double worst_half = 0.0;
    double worst_literal = 0.0;
    for (int i = 0; i <= 20; ++i) {
        const double chi_t = pi * i / 20;
        const double jz = evolved_moments(spec, chi_t).jz();
        worst_half = std::max(worst_half, std::abs(jz - analytic_jz_one_neighbor(n, chi_t / 2)));
        worst_literal = std::max(worst_literal, std::abs(jz - analytic_jz_one_neighbor(n, chi_t)));
    }
    CHECK(worst_half < 1e-10);
    CHECK(worst_literal > 1.0);
}

TEST_CASE("initial slope") {
    CHECK(initial_slope_prediction({}, [](int, int) { return 1.0; }) == 0.0);
    const std::vector<WeightedPair> zero{{0, 1, 0.0}, {1, 2, 0.0}};
    CHECK(initial_slope_prediction(zero, [](int, int) { return 1.0; }) == 0.0);

    // Calibrate kappa on the full lattice: exact slope is -N chi / 4.
    const int n = 10;
    const double chi = 1.0;
    for (auto kind : {CouplingKind::xx, CouplingKind::partial_xx}) {
        auto spec = xx_ring(n, 1, chi);
        spec.kind = kind;
        if (kind == CouplingKind::partial_xx) {
            spec.mask = OccupancyMask::full(n);
        }
        const double measured = slope_at_zero(
            [&](double t) { return variance_at(evolved_moments(spec, t), -pi / 4); }, 1e-3);
        std::vector<WeightedPair> pairs;
        for (const auto &c : coupling_table(spec)) {
            pairs.push_back({c.first, c.second, c.weight * chi});
        }
        const double unit = initial_slope_prediction(pairs, [](int, int) { return 1.0; }, 1.0);
        CHECK(measured / unit == doctest::Approx(kSlopeConvention).epsilon(1e-5));
        if (kind == CouplingKind::xx) {
            CHECK(measured == doctest::Approx(-n * chi / 4).epsilon(1e-5));
        }
    }
}

TEST_CASE("d/dt Jz vanishes at t = 0 and squeezing sets in") {
    const auto spec = xx_ring(8, 2);
    const double d = slope_at_zero([&](double t) { return evolved_moments(spec, t).jz(); }, 1e-3);
    CHECK(std::abs(d) < 1e-5);
    for (double t : {0.01, 0.05, 0.2}) {
        const auto m = evolved_moments(spec, t);
        CHECK(*squeezing_report(m, 8, t).xi2 < 1.0);
    }
}

TEST_CASE("time minimization") {
    TimeGrid grid;
    grid.t_max = 2.0;
    grid.points = 50;
    const auto best = minimize_over_time([](double t) -> std::optional<double> { return (t - 0.7123) * (t - 0.7123) + 1; },
                                         grid);
    CHECK(best.found);
    CHECK(best.time == doctest::Approx(0.7123).epsilon(1e-7));
    CHECK(best.value == doctest::Approx(1.0).epsilon(1e-12));

    // Undefined points are skipped.
    const auto skip = minimize_over_time(
        [](double t) -> std::optional<double> {
            if (t < 0.5) {
                return std::nullopt;
            }
            return t;
        },
        grid);
    CHECK(skip.time >= 0.5);
    const auto none = minimize_over_time([](double) -> std::optional<double> { return std::nullopt; }, grid);
    CHECK_FALSE(none.found);

    grid.points = 1;
    CHECK_THROWS_AS(grid_times(grid), ArgumentError);
}
