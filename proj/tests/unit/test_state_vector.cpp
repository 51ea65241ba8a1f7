#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "spinlattice/observables.hpp"
#include "spinlattice/state_vector.hpp"

using namespace spinlattice;
using C = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

StateVector<double> random_state(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    StateVector<double>::Vector v(Eigen::Index{1} << n);
    for (auto &a : v) {
        a = C(g(rng), g(rng));
    }
    v.normalize();
    return StateVector<double>(n, v);
}

bool states_equal(const StateVector<double> &a, const StateVector<double> &b, double tol) {
    return (a.amplitudes() - b.amplitudes()).cwiseAbs().maxCoeff() <= tol;
}

} // namespace

TEST_CASE("new_register prepares all atoms in |0>") {
    auto s2 = new_register(2);
    CHECK(s2.dimension() == 4);
    CHECK(s2.amplitudes()(0) == C(1));
    CHECK(s2.amplitudes().tail(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(s2.norm_squared() == doctest::Approx(1.0));

    CHECK(site_magnetization(new_register(1), 0) == -0.5);
    CHECK(collective_moments(new_register(15)).jz() == doctest::Approx(-7.5).epsilon(1e-14));
}

TEST_CASE("register size outside the cap is a capacity error") {
    CHECK_THROWS_AS(new_register(0), CapacityError);
    CHECK_THROWS_AS(new_register(kMaxRegisterSites + 1), CapacityError);
    CHECK_NOTHROW(new_register(20));
}

TEST_CASE("phase gate imprints e^{i phi} only on |1>_k |0>_l") {
    // |10> with site 0 = 1, site 1 = 0 is basis index 1.
    StateVector<double> s(2, oracle::basis_state(2, 1));
    apply_phase_gate(s, PhaseGate<double>{0, 1, pi});
    CHECK(std::abs(s.amplitudes()(1) - C(-1)) < 1e-15);

    StateVector<double> both(2, oracle::basis_state(2, 3));
    apply_phase_gate(both, PhaseGate<double>{0, 1, 0.731});
    CHECK(both.amplitudes()(3) == C(1));

    auto r = random_state(4, 3);
    const auto before = r;
    apply_phase_gate(r, PhaseGate<double>{2, 0, 0.0});
    CHECK(states_equal(r, before, 0.0));

    CHECK_THROWS_AS(apply_phase_gate(r, PhaseGate<double>{0, 4, 1.0}), IndexError);
    CHECK_THROWS_AS(apply_phase_gate(r, PhaseGate<double>{1, 1, 1.0}), IndexError);
}

TEST_CASE("collective rotation about y by pi/2 turns -z into -x") {
    for (int n : {1, 3, 6}) {
        auto s = new_register(n);
        collective_rotation(s, Axis::y, pi / 2);
        const auto m = collective_moments(s);
        CHECK(m.jz() == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(m.mean(0) == doctest::Approx(-n / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("rotation by 2pi on one site is a global sign") {
    auto s = random_state(1, 7);
    const auto before = s;
    collective_rotation(s, Axis::y, 2 * pi);
    CHECK(states_equal(s, StateVector<double>(1, -before.amplitudes()), 1e-15));
    auto id = random_state(3, 8);
    const auto id_before = id;
    collective_rotation(id, Axis::x, 0.0);
    CHECK(states_equal(id, id_before, 0.0));
}

TEST_CASE("single-site rotation matches the Pade exponential of the spin operator") {
    for (char a : {'x', 'y', 'z'}) {
        const Axis axis = a == 'x' ? Axis::x : (a == 'y' ? Axis::y : Axis::z);
        const auto expected = oracle::expm_minus_i(oracle::spin(a), 0.83);
        const Matrix2<double> got = single_site_rotation<double>(axis, 0.83);
        CHECK((Eigen::MatrixXcd(got) - expected).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((Eigen::MatrixXcd(spin_operator<double>(axis)) - oracle::spin(a)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("two-site unitary") {
    SUBCASE("identity leaves the state alone") {
        auto s = random_state(3, 11);
        const auto before = s;
        apply_two_site_unitary(s, 0, 2, Matrix4<double>::Identity().eval());
        CHECK(states_equal(s, before, 0.0));
    }
    SUBCASE("diag(1,1,e^{i phi},1) reproduces the phase gate") {
        const double phi = 0.413;
        Matrix4<double> u = Matrix4<double>::Identity();
        u(2, 2) = std::polar(1.0, phi);
        for (auto [k, l] : {std::pair{0, 1}, std::pair{2, 0}, std::pair{1, 3}}) {
            auto a = random_state(4, 21);
            auto b = a;
            apply_two_site_unitary(a, k, l, u);
            apply_phase_gate(b, PhaseGate<double>{k, l, phi});
            CHECK(states_equal(a, b, 1e-15));
        }
    }
    SUBCASE("exp(-i theta sx sx / 4) on |00>") {
        const double theta = 1.37;
        const Eigen::MatrixXcd xx = Eigen::kroneckerProduct(oracle::pauli('x'), oracle::pauli('x'));
        const Matrix4<double> u = oracle::expm_minus_i(xx / 4.0, theta);
        auto s = new_register(2);
        apply_two_site_unitary(s, 0, 1, u);
        CHECK(std::abs(s.amplitudes()(0) - C(std::cos(theta / 4))) < 1e-14);
        CHECK(std::abs(s.amplitudes()(3) - C(0, -std::sin(theta / 4))) < 1e-14);
        CHECK(std::abs(s.amplitudes()(1)) < 1e-15);
        CHECK(std::abs(s.amplitudes()(2)) < 1e-15);
    }
    SUBCASE("non-unitary input is rejected") {
        auto s = new_register(2);
        Matrix4<double> u = Matrix4<double>::Identity();
        u(0, 0) = 1.0001;
        CHECK_THROWS_AS(apply_two_site_unitary(s, 0, 1, u), ValidationError);
    }
}

TEST_CASE("site magnetization") {
    auto s = new_register(3);
    for (int k = 0; k < 3; ++k) {
        CHECK(site_magnetization(s, k) == -0.5);
    }
    apply_single_site_unitary(s, 1, single_site_rotation<double>(Axis::x, pi));
    CHECK(site_magnetization(s, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(site_magnetization(s, 0) == doctest::Approx(-0.5).epsilon(1e-15));

    auto h = new_register(1);
    apply_single_site_unitary(h, 0, single_site_rotation<double>(Axis::y, pi / 2));
    CHECK(std::abs(site_magnetization(h, 0)) < 1e-15);
}

TEST_CASE("norm is preserved by every primitive") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> angle(-4.0, 4.0);
    auto s = random_state(6, 99);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = trial % 6;
        const int l = (trial * 5 + 1) % 6;
        switch (trial % 3) {
        case 0:
            if (k != l) {
                apply_phase_gate(s, PhaseGate<double>{k, l, angle(rng)});
            }
            break;
        case 1:
            collective_rotation(s, trial % 2 ? Axis::x : Axis::y, angle(rng));
            break;
        default:
            apply_single_site_unitary(s, k, single_site_rotation<double>(Axis::z, angle(rng)));
            break;
        }
        CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
    }
}

TEST_CASE("phase gates commute, disjoint or overlapping") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> site(0, 5);
    std::uniform_real_distribution<double> phase(-3.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        int k1 = site(rng), l1 = site(rng), k2 = site(rng), l2 = site(rng);
        if (k1 == l1 || k2 == l2) {
            continue;
        }
        const PhaseGate<double> g1{k1, l1, phase(rng)};
        const PhaseGate<double> g2{k2, l2, phase(rng)};
        auto a = random_state(6, static_cast<unsigned>(trial));
        auto b = a;
        apply_phase_gate(a, g1);
        apply_phase_gate(a, g2);
        apply_phase_gate(b, g2);
        apply_phase_gate(b, g1);
        CHECK(states_equal(a, b, 1e-12));
    }
}

TEST_CASE("rotations about one axis compose additively") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> angle(-5.0, 5.0);
    for (Axis axis : {Axis::x, Axis::y, Axis::z}) {
        const double a = angle(rng);
        const double b = angle(rng);
        auto s1 = random_state(4, 41);
        auto s2 = s1;
        collective_rotation(s1, axis, a);
        collective_rotation(s1, axis, b);
        collective_rotation(s2, axis, a + b);
        CHECK(states_equal(s1, s2, 1e-12));
    }
}

TEST_CASE("pulse conjugation maps a z-basis collision to the x-basis coupling") {
    // R_y(-pi/2) . exp(-i phi jz jz) . R_y(pi/2) == exp(-i phi jx jx), checked on 2 sites.
    const double phi = 0.9;
    const Eigen::MatrixXcd ry = oracle::expm_minus_i(oracle::collective('y', 2), pi / 2);
    const Eigen::MatrixXcd zz = oracle::embed(oracle::spin('z'), 0, 2) * oracle::embed(oracle::spin('z'), 1, 2);
    const Eigen::MatrixXcd xx = oracle::embed(oracle::spin('x'), 0, 2) * oracle::embed(oracle::spin('x'), 1, 2);
    const Eigen::MatrixXcd lhs = ry.adjoint() * oracle::expm_minus_i(zz, phi) * ry;
    CHECK((lhs - oracle::expm_minus_i(xx, phi)).cwiseAbs().maxCoeff() < 1e-12);

    // The same with the register primitives: the collision adds a phase to |1>_0|0>_1 only,
    // so compare up to the single-site terms, which cancel for the symmetric pair of gates.
    auto s = random_state(2, 5);
    const oracle::Vector expected = oracle::expm_minus_i(xx, 2 * phi) * s.amplitudes();
    collective_rotation(s, Axis::y, pi / 2);
    apply_phase_gate(s, PhaseGate<double>{0, 1, phi});
    apply_phase_gate(s, PhaseGate<double>{1, 0, phi});
    collective_rotation(s, Axis::y, -pi / 2);
    CHECK(fidelity(s, StateVector<double>(2, expected)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("phase gate is exp(-i chi t (jz_k + 1/2)(jz_l - 1/2)) with phi = chi t") {
    const double chi_t = 0.77;
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(4, 4);
    const Eigen::MatrixXcd nk = oracle::embed(oracle::spin('z'), 1, 2) + 0.5 * id;
    const Eigen::MatrixXcd nl = oracle::embed(oracle::spin('z'), 0, 2) - 0.5 * id;
    const Eigen::MatrixXcd op = nk * nl;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(op);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues().tail(3).cwiseAbs().maxCoeff() < 1e-15);
    const Eigen::MatrixXcd u = oracle::expm_minus_i(op, chi_t);
    for (unsigned b = 0; b < 4; ++b) {
        StateVector<double> s(2, oracle::basis_state(2, b));
        apply_phase_gate(s, PhaseGate<double>{1, 0, chi_t});
        CHECK((s.amplitudes() - u * oracle::basis_state(2, b)).cwiseAbs().maxCoeff() < 1e-14);
    }
}
