#pragma once

/**
 * @file
 * Coupling Hamiltonians and their compilation into gate schedules built from
 * two primitives the lattice offers: collision phase layers (one lattice
 * displacement each) and global resonant pulses.
 */

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinlattice/lattice.hpp"
#include "spinlattice/state_vector.hpp"

namespace spinlattice {

enum class CouplingKind { zz, heisenberg, xx, xx_minus_yy, partial_xx };

std::string to_string(CouplingKind kind);

/// Weight multiplier for one ordered site pair of the coupling table.
struct PairOverride {
    int first = 0;
    int second = 0;
    double weight = 1.0;
};

struct HamiltonianSpec {
    CouplingKind kind = CouplingKind::zz;
    double chi = 1.0;
    double eta = 0.0;
    double lambda = 0.0;
    /// Displacements d = 1..neighbor_range are visited.
    int neighbor_range = 1;
    LatticeConfig lattice{};
    /// Required for partial_xx; other kinds default to a full lattice.
    std::optional<OccupancyMask> mask;
    std::vector<PairOverride> overrides;

    void validate() const;
    [[nodiscard]] OccupancyMask occupancy() const;
    [[nodiscard]] int register_size() const { return occupancy().atom_count(); }
    /// Largest displacement actually used: min(neighbor_range, M - 1).
    [[nodiscard]] int max_displacement() const;
};

/// One ordered entry chi_{k,l} = weight * chi of the coupling table (lattice site indices).
struct SiteCoupling {
    int first = 0;
    int second = 0;
    int displacement = 1;
    double weight = 1.0;
};

/**
 * Ordered pairs (k, k+d), d = 1..r, both occupied. partial_xx also includes
 * d = -1..-r, making the table symmetric in k and l.
 */
std::vector<SiteCoupling> coupling_table(const HamiltonianSpec &spec);

/**
 * A collision of phase phi on ordered pair (k, l) realizes
 * exp(-i phi j_z,k j_z,l) up to a global phase and the single-site terms
 * phi (j_z,k - j_z,l) / 2. Those cancel whenever every atom is control and
 * target with equal total weight, so a coupling c over time t maps to
 * phi = kPhasePerCouplingTime * c * t.
 */
inline constexpr double kPhasePerCouplingTime = 1.0;

enum class Basis { z, x, y };

char basis_name(Basis basis);

struct CollisionLayer {
    int displacement = 1;
    Basis basis = Basis::z;
    /// Register indices.
    std::vector<PhaseGate<double>> gates;
};

struct RotationLayer {
    Axis axis = Axis::y;
    double angle = 0.0;
};

using Layer = std::variant<CollisionLayer, RotationLayer>;

struct ErrorOrder {
    enum class Kind { exact, first_order };
    Kind kind = Kind::exact;
    double dt = 0.0;
};

class Schedule {
  public:
    Schedule() = default;
    Schedule(int num_sites, double step_time, ErrorOrder order)
        : num_sites_(num_sites), step_time_(step_time), order_(order) {}

    [[nodiscard]] int num_sites() const noexcept { return num_sites_; }
    [[nodiscard]] double step_time() const noexcept { return step_time_; }
    [[nodiscard]] const ErrorOrder &error_order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<std::vector<Layer>> &steps() const noexcept { return steps_; }
    [[nodiscard]] int num_steps() const noexcept { return static_cast<int>(steps_.size()); }
    [[nodiscard]] double total_time() const noexcept { return step_time_ * num_steps(); }
    [[nodiscard]] bool empty() const noexcept;

    [[nodiscard]] int collision_layer_count() const;
    [[nodiscard]] int rotation_layer_count() const;
    [[nodiscard]] int gate_count() const;

    void add_step(std::vector<Layer> layers) { steps_.push_back(std::move(layers)); }

    /// One layer per line, prefixed by its step index.
    [[nodiscard]] std::string listing() const;

  private:
    int num_sites_ = 1;
    double step_time_ = 0.0;
    ErrorOrder order_{};
    std::vector<std::vector<Layer>> steps_;
};

Schedule compile_zz(const HamiltonianSpec &spec, double t);
Schedule compile_heisenberg(const HamiltonianSpec &spec, double t, double dt);
Schedule compile_xx(const HamiltonianSpec &spec, double t);
Schedule compile_xx_minus_yy(const HamiltonianSpec &spec, double t, double dt);

/// Dispatches on spec.kind; dt is ignored by the exact kinds.
Schedule compile(const HamiltonianSpec &spec, double t, double dt);

/// Whether spec.kind compiles to an exact (commuting) schedule.
bool is_exact_kind(CouplingKind kind);

} // namespace spinlattice
