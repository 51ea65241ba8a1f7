#pragma once

/**
 * @file
 * Brute-force reference: the coupling Hamiltonian assembled as a dense
 * 2^N x 2^N matrix, exponentiated through its eigendecomposition.
 */

#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "spinlattice/errors.hpp"
#include "spinlattice/schedule.hpp"
#include "spinlattice/state_vector.hpp"

namespace spinlattice {

/// Largest register for which dense Hamiltonians are built.
inline constexpr int kMaxDenseSites = 12;

template <typename Real> using DenseMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

namespace detail {

/// H += coef * (a on site k) (b on site l).
template <typename Real>
void add_two_site_term(DenseMatrix<Real> &h, int k, const Matrix2<Real> &a, int l, const Matrix2<Real> &b,
                       Real coef) {
    const std::uint64_t kb = std::uint64_t{1} << k;
    const std::uint64_t lb = std::uint64_t{1} << l;
    const auto dim = static_cast<std::uint64_t>(h.rows());
    for (std::uint64_t col = 0; col < dim; ++col) {
        const int ck = (col & kb) ? 1 : 0;
        const int cl = (col & lb) ? 1 : 0;
        for (int rk = 0; rk < 2; ++rk) {
            const auto ak = a(rk, ck);
            if (ak == std::complex<Real>{0}) {
                continue;
            }
            for (int rl = 0; rl < 2; ++rl) {
                const auto bl = b(rl, cl);
                if (bl == std::complex<Real>{0}) {
                    continue;
                }
                std::uint64_t row = col & ~(kb | lb);
                row |= rk ? kb : 0;
                row |= rl ? lb : 0;
                h(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += coef * ak * bl;
            }
        }
    }
}

} // namespace detail

/**
 * Sum over the coupling table of weight times the two-site operator of the
 * requested kind, on the occupied-site register:
 *   zz           chi j_z j_z
 *   heisenberg   chi j_z j_z + eta j_x j_x + lambda j_y j_y
 *   xx           chi j_x j_x            (also partial_xx)
 *   xx_minus_yy  chi (j_x j_x - j_y j_y)
 */
template <typename Real = double> DenseMatrix<Real> build_dense_hamiltonian(const HamiltonianSpec &spec) {
    spec.validate();
    const OccupancyMask mask = spec.occupancy();
    const int n = mask.atom_count();
    if (n > kMaxDenseSites) {
        throw CapacityError("dense Hamiltonian of " + std::to_string(n) + " atoms exceeds cap of " +
                            std::to_string(kMaxDenseSites));
    }
    const Eigen::Index dim = Eigen::Index{1} << n;
    DenseMatrix<Real> h = DenseMatrix<Real>::Zero(dim, dim);
    const auto jx = spin_operator<Real>(Axis::x);
    const auto jy = spin_operator<Real>(Axis::y);
    const auto jz = spin_operator<Real>(Axis::z);
    for (const auto &c : coupling_table(spec)) {
        const int k = mask.atom_index(c.first);
        const int l = mask.atom_index(c.second);
        const Real w = static_cast<Real>(c.weight);
        switch (spec.kind) {
        case CouplingKind::zz:
            detail::add_two_site_term<Real>(h, k, jz, l, jz, w * Real(spec.chi));
            break;
        case CouplingKind::heisenberg:
            detail::add_two_site_term<Real>(h, k, jz, l, jz, w * Real(spec.chi));
            detail::add_two_site_term<Real>(h, k, jx, l, jx, w * Real(spec.eta));
            detail::add_two_site_term<Real>(h, k, jy, l, jy, w * Real(spec.lambda));
            break;
        case CouplingKind::xx:
        case CouplingKind::partial_xx:
            detail::add_two_site_term<Real>(h, k, jx, l, jx, w * Real(spec.chi));
            break;
        case CouplingKind::xx_minus_yy:
            detail::add_two_site_term<Real>(h, k, jx, l, jx, w * Real(spec.chi));
            detail::add_two_site_term<Real>(h, k, jy, l, jy, -w * Real(spec.chi));
            break;
        }
    }
    return h;
}

/// Caches the eigendecomposition of a Hermitian H so exp(-iHt) can be applied for many t.
template <typename Real = double> class DenseEvolver {
  public:
    explicit DenseEvolver(const DenseMatrix<Real> &h) {
        if (h.rows() != h.cols()) {
            throw ValidationError("Hamiltonian must be square");
        }
        const Real hermiticity = (h - h.adjoint()).cwiseAbs().maxCoeff();
        if (hermiticity > Real{1e-12} * std::max(Real{1}, h.cwiseAbs().maxCoeff())) {
            throw ValidationError("Hamiltonian is not Hermitian");
        }
        if (h.imag().cwiseAbs().maxCoeff() == Real{0}) {
            using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
            Eigen::SelfAdjointEigenSolver<RealMatrix> solver(RealMatrix(h.real()));
            eigenvalues_ = solver.eigenvalues();
            eigenvectors_ = solver.eigenvectors().template cast<std::complex<Real>>();
        } else {
            Eigen::SelfAdjointEigenSolver<DenseMatrix<Real>> solver(h);
            eigenvalues_ = solver.eigenvalues();
            eigenvectors_ = solver.eigenvectors();
        }
    }

    [[nodiscard]] Eigen::Index dimension() const noexcept { return eigenvalues_.size(); }
    [[nodiscard]] const Eigen::Matrix<Real, Eigen::Dynamic, 1> &eigenvalues() const noexcept { return eigenvalues_; }

    /// exp(-iHt) state.
    [[nodiscard]] StateVector<Real> evolve(const StateVector<Real> &state, Real t) const {
        if (state.dimension() != dimension()) {
            throw ValidationError("state dimension does not match Hamiltonian");
        }
        using Vector = typename StateVector<Real>::Vector;
        Vector coeffs = eigenvectors_.adjoint() * state.amplitudes();
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            coeffs(i) *= std::polar(Real{1}, -eigenvalues_(i) * t);
        }
        return StateVector<Real>(state.num_sites(), eigenvectors_ * coeffs);
    }

  private:
    Eigen::Matrix<Real, Eigen::Dynamic, 1> eigenvalues_;
    DenseMatrix<Real> eigenvectors_;
};

template <typename Real> StateVector<Real> dense_evolve(const DenseMatrix<Real> &h, const StateVector<Real> &state, Real t) {
    if (h.rows() != state.dimension()) {
        throw ValidationError("state dimension does not match Hamiltonian");
    }
    return DenseEvolver<Real>(h).evolve(state, t);
}

} // namespace spinlattice
