#pragma once

/**
 * @file
 * Dense state vector of an N-atom spin-1/2 register and the primitive
 * unitaries acting on it.
 *
 * Basis index bit k holds the internal state of register site k. A set bit
 * is |1> = |1/2,+1/2>, a cleared bit is |0> = |1/2,-1/2>.
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "spinlattice/errors.hpp"

namespace spinlattice {

enum class Axis { x, y, z };

inline char axis_name(Axis axis) {
    switch (axis) {
    case Axis::x:
        return 'x';
    case Axis::y:
        return 'y';
    case Axis::z:
        return 'z';
    }
    return '?';
}

/// Largest register the dense representation accepts.
inline constexpr int kMaxRegisterSites = 26;

template <typename Real = double> class StateVector {
  public:
    using Scalar = std::complex<Real>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// All sites in |0>.
    explicit StateVector(int num_sites) : num_sites_(checked_size(num_sites)) {
        amplitudes_ = Vector::Zero(Eigen::Index{1} << num_sites_);
        amplitudes_(0) = Scalar{1};
    }

    StateVector(int num_sites, Vector amplitudes)
        : num_sites_(checked_size(num_sites)), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != (Eigen::Index{1} << num_sites_)) {
            throw ValidationError("amplitude vector length must be 2^num_sites");
        }
    }

    [[nodiscard]] int num_sites() const noexcept { return num_sites_; }
    [[nodiscard]] Eigen::Index dimension() const noexcept { return amplitudes_.size(); }

    [[nodiscard]] const Vector &amplitudes() const noexcept { return amplitudes_; }
    [[nodiscard]] Vector &amplitudes() noexcept { return amplitudes_; }

    [[nodiscard]] Real norm_squared() const { return amplitudes_.squaredNorm(); }

    void check_site(int k) const {
        if (k < 0 || k >= num_sites_) {
            throw IndexError("site " + std::to_string(k) + " outside register of " +
                             std::to_string(num_sites_) + " sites");
        }
    }

  private:
    static int checked_size(int num_sites) {
        if (num_sites < 1 || num_sites > kMaxRegisterSites) {
            throw CapacityError("register size " + std::to_string(num_sites) +
                                " outside [1, " + std::to_string(kMaxRegisterSites) + "]");
        }
        return num_sites;
    }

    int num_sites_;
    Vector amplitudes_;
};

template <typename Real = double> StateVector<Real> new_register(int num_sites) {
    return StateVector<Real>(num_sites);
}

/// Collision phase gate: e^{i phi} on every basis state with control bit set
/// and target bit clear.
template <typename Real = double> struct PhaseGate {
    int control = 0;
    int target = 1;
    Real phi = 0;
};

namespace detail {

/// Plain complex product; std::complex operator* goes through a slow NaN-recovery path.
template <typename Real> inline std::complex<Real> cmul(const std::complex<Real> &a, const std::complex<Real> &b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

} // namespace detail

template <typename Real> void apply_phase_gate(StateVector<Real> &state, const PhaseGate<Real> &gate) {
    state.check_site(gate.control);
    state.check_site(gate.target);
    if (gate.control == gate.target) {
        throw IndexError("phase gate control and target coincide");
    }
    const int lo = std::min(gate.control, gate.target);
    const int hi = std::max(gate.control, gate.target);
    const std::uint64_t cmask = std::uint64_t{1} << gate.control;
    const std::complex<Real> phase = std::polar(Real{1}, gate.phi);
    auto &amp = state.amplitudes();
    const auto quarter = static_cast<std::uint64_t>(amp.size()) >> 2;
    // Visit only indices with control bit set and target bit clear.
    for (std::uint64_t j = 0; j < quarter; ++j) {
        std::uint64_t i = ((j >> lo) << (lo + 1)) | (j & ((std::uint64_t{1} << lo) - 1));
        i = ((i >> hi) << (hi + 1)) | (i & ((std::uint64_t{1} << hi) - 1));
        auto &a = amp(static_cast<Eigen::Index>(i | cmask));
        a = detail::cmul(a, phase);
    }
}

template <typename Real> using Matrix2 = Eigen::Matrix<std::complex<Real>, 2, 2>;
template <typename Real> using Matrix4 = Eigen::Matrix<std::complex<Real>, 4, 4>;

/// Single-site spin operator j_axis in the (|0>, |1>) basis.
template <typename Real = double> Matrix2<Real> spin_operator(Axis axis) {
    using C = std::complex<Real>;
    const Real h = Real{0.5};
    Matrix2<Real> m;
    switch (axis) {
    case Axis::x:
        m << C{0}, C{h}, C{h}, C{0};
        break;
    case Axis::y:
        // j_y|0> = -(i/2)|1>, j_y|1> = (i/2)|0>
        m << C{0}, C{0, h}, C{0, -h}, C{0};
        break;
    case Axis::z:
        m << C{-h}, C{0}, C{0}, C{h};
        break;
    }
    return m;
}

/// exp(-i angle j_axis) for one spin-1/2.
template <typename Real = double> Matrix2<Real> single_site_rotation(Axis axis, Real angle) {
    using C = std::complex<Real>;
    const Real c = std::cos(angle / 2);
    const Real s = std::sin(angle / 2);
    Matrix2<Real> m;
    switch (axis) {
    case Axis::x:
        m << C{c}, C{0, -s}, C{0, -s}, C{c};
        break;
    case Axis::y:
        m << C{c}, C{s}, C{-s}, C{c};
        break;
    case Axis::z:
        m << std::polar(Real{1}, angle / 2), C{0}, C{0}, std::polar(Real{1}, -angle / 2);
        break;
    }
    return m;
}

template <typename Real>
void apply_single_site_unitary(StateVector<Real> &state, int k, const Matrix2<Real> &u) {
    state.check_site(k);
    const auto bit = Eigen::Index{1} << k;
    auto &amp = state.amplitudes();
    const Eigen::Index dim = amp.size();
    const auto u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
    for (Eigen::Index base = 0; base < dim; base += 2 * bit) {
        for (Eigen::Index a = base; a < base + bit; ++a) {
            const auto v0 = amp(a);
            const auto v1 = amp(a + bit);
            amp(a) = detail::cmul(u00, v0) + detail::cmul(u01, v1);
            amp(a + bit) = detail::cmul(u10, v0) + detail::cmul(u11, v1);
        }
    }
}

/// exp(-i angle J_axis), J_axis = sum_k j_axis,k.
template <typename Real> void collective_rotation(StateVector<Real> &state, Axis axis, Real angle) {
    const Matrix2<Real> u = single_site_rotation<Real>(axis, angle);
    for (int k = 0; k < state.num_sites(); ++k) {
        apply_single_site_unitary(state, k, u);
    }
}

template <typename Derived> bool is_unitary(const Eigen::MatrixBase<Derived> &u, double tol = 1e-12) {
    const auto n = u.rows();
    if (u.cols() != n) {
        return false;
    }
    using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const M residual = u.adjoint() * u - M::Identity(n, n);
    return residual.cwiseAbs().maxCoeff() <= tol;
}

/**
 * Applies a 4x4 unitary to sites (k, l). Local ordering is (00, 01, 10, 11)
 * with the site-k bit as the high bit, so diag(1, 1, e^{i phi}, 1) is the
 * phase gate with control k and target l.
 */
template <typename Real>
void apply_two_site_unitary(StateVector<Real> &state, int k, int l, const Matrix4<Real> &u) {
    state.check_site(k);
    state.check_site(l);
    if (k == l) {
        throw IndexError("two-site unitary needs distinct sites");
    }
    if (!is_unitary(u)) {
        throw ValidationError("two-site matrix is not unitary within 1e-12");
    }
    const std::uint64_t kb = std::uint64_t{1} << k;
    const std::uint64_t lb = std::uint64_t{1} << l;
    auto &amp = state.amplitudes();
    const auto dim = static_cast<std::uint64_t>(amp.size());
    Eigen::Matrix<std::complex<Real>, 4, 1> local;
    for (std::uint64_t base = 0; base < dim; ++base) {
        if (base & (kb | lb)) {
            continue;
        }
        const Eigen::Index idx[4] = {static_cast<Eigen::Index>(base), static_cast<Eigen::Index>(base | lb),
                                     static_cast<Eigen::Index>(base | kb),
                                     static_cast<Eigen::Index>(base | kb | lb)};
        for (int j = 0; j < 4; ++j) {
            local(j) = amp(idx[j]);
        }
        local = (u * local).eval();
        for (int j = 0; j < 4; ++j) {
            amp(idx[j]) = local(j);
        }
    }
}

/// <j_z,k> = (P[bit_k = 1] - P[bit_k = 0]) / 2.
template <typename Real> Real site_magnetization(const StateVector<Real> &state, int k) {
    state.check_site(k);
    const std::uint64_t bit = std::uint64_t{1} << k;
    const auto &amp = state.amplitudes();
    Real up = 0;
    Real down = 0;
    for (Eigen::Index i = 0; i < amp.size(); ++i) {
        const Real p = std::norm(amp(i));
        if (static_cast<std::uint64_t>(i) & bit) {
            up += p;
        } else {
            down += p;
        }
    }
    return (up - down) / 2;
}

/// |<a|b>|, insensitive to global phase.
template <typename Real> Real fidelity(const StateVector<Real> &a, const StateVector<Real> &b) {
    if (a.dimension() != b.dimension()) {
        throw ValidationError("fidelity of states with different dimensions");
    }
    return std::abs(a.amplitudes().dot(b.amplitudes()));
}

/// min over global phase of ||a - e^{i alpha} b||.
template <typename Real> Real phase_aligned_distance(const StateVector<Real> &a, const StateVector<Real> &b) {
    if (a.dimension() != b.dimension()) {
        throw ValidationError("distance between states with different dimensions");
    }
    const std::complex<Real> overlap = b.amplitudes().dot(a.amplitudes());
    const Real mag = std::abs(overlap);
    const std::complex<Real> align = mag > 0 ? overlap / mag : std::complex<Real>{1};
    return (a.amplitudes() - align * b.amplitudes()).norm();
}

} // namespace spinlattice
