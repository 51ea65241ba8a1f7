#include "spinlattice/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "spinlattice/errors.hpp"

namespace spinlattice {

namespace {

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Couplings mapped to register indices, grouped by displacement.
struct RegisterCoupling {
    int control;
    int target;
    int displacement;
    double weight;
};

std::vector<RegisterCoupling> register_couplings(const HamiltonianSpec &spec) {
    const OccupancyMask mask = spec.occupancy();
    std::vector<RegisterCoupling> out;
    for (const auto &c : coupling_table(spec)) {
        out.push_back({mask.atom_index(c.first), mask.atom_index(c.second), c.displacement, c.weight});
    }
    return out;
}

bool is_balanced(const std::vector<RegisterCoupling> &couplings, int num_sites) {
    std::vector<double> net(static_cast<std::size_t>(num_sites), 0.0);
    double scale = 0.0;
    for (const auto &c : couplings) {
        net[static_cast<std::size_t>(c.control)] += c.weight;
        net[static_cast<std::size_t>(c.target)] -= c.weight;
        scale = std::max(scale, std::abs(c.weight));
    }
    return std::all_of(net.begin(), net.end(), [&](double v) { return std::abs(v) <= 1e-12 * std::max(1.0, scale); });
}

/**
 * Appends the layers realizing exp(-i coupling t sum w_kl j_b,k j_b,l) in
 * basis b. Unbalanced tables are symmetrized by splitting each phase
 * between both directions so that the single-site terms cancel.
 */
void append_pass(std::vector<Layer> &layers, const std::vector<RegisterCoupling> &couplings, int num_sites,
                 Basis basis, double coupling_time) {
    if (couplings.empty() || coupling_time == 0.0) {
        return;
    }
    const bool balanced = is_balanced(couplings, num_sites);
    std::vector<int> displacements;
    for (const auto &c : couplings) {
        if (std::find(displacements.begin(), displacements.end(), c.displacement) == displacements.end()) {
            displacements.push_back(c.displacement);
        }
    }

    switch (basis) {
    case Basis::z:
        break;
    case Basis::x:
        layers.emplace_back(RotationLayer{Axis::y, std::numbers::pi / 2});
        break;
    case Basis::y:
        layers.emplace_back(RotationLayer{Axis::x, std::numbers::pi / 2});
        break;
    }
    for (int d : displacements) {
        CollisionLayer layer{d, basis, {}};
        for (const auto &c : couplings) {
            if (c.displacement != d) {
                continue;
            }
            const double phi = kPhasePerCouplingTime * c.weight * coupling_time;
            if (balanced) {
                layer.gates.push_back({c.control, c.target, phi});
            } else {
                layer.gates.push_back({c.control, c.target, phi / 2});
                layer.gates.push_back({c.target, c.control, phi / 2});
            }
        }
        layers.emplace_back(std::move(layer));
    }
    switch (basis) {
    case Basis::z:
        break;
    case Basis::x:
        layers.emplace_back(RotationLayer{Axis::y, -std::numbers::pi / 2});
        break;
    case Basis::y:
        layers.emplace_back(RotationLayer{Axis::x, -std::numbers::pi / 2});
        break;
    }
}

void require_kind(const HamiltonianSpec &spec, std::initializer_list<CouplingKind> kinds, const char *op) {
    if (std::find(kinds.begin(), kinds.end(), spec.kind) == kinds.end()) {
        throw ArgumentError(std::string(op) + ": unsupported coupling kind " + to_string(spec.kind));
    }
}

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw ArgumentError("evolution time must be finite and non-negative");
    }
}

int trotter_steps(double t, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ArgumentError("Trotter step dt must be positive");
    }
    return std::max(1, static_cast<int>(std::ceil(t / dt - 1e-9)));
}

} // namespace

std::string to_string(CouplingKind kind) {
    switch (kind) {
    case CouplingKind::zz:
        return "zz";
    case CouplingKind::heisenberg:
        return "heisenberg";
    case CouplingKind::xx:
        return "xx";
    case CouplingKind::xx_minus_yy:
        return "xxyy";
    case CouplingKind::partial_xx:
        return "partial_xx";
    }
    return "?";
}

char basis_name(Basis basis) {
    switch (basis) {
    case Basis::z:
        return 'z';
    case Basis::x:
        return 'x';
    case Basis::y:
        return 'y';
    }
    return '?';
}

void HamiltonianSpec::validate() const {
    lattice.validate();
    if (neighbor_range < 1) {
        throw ArgumentError("neighbor range must be at least 1");
    }
    if (!std::isfinite(chi) || !std::isfinite(eta) || !std::isfinite(lambda)) {
        throw ArgumentError("coupling coefficients must be finite");
    }
    if (kind == CouplingKind::partial_xx && !mask) {
        throw ArgumentError("partial_xx coupling requires an occupancy mask");
    }
    if (mask && mask->num_sites() != lattice.num_sites) {
        throw ValidationError("occupancy mask size does not match lattice");
    }
}

OccupancyMask HamiltonianSpec::occupancy() const { return mask ? *mask : OccupancyMask::full(lattice.num_sites); }

int HamiltonianSpec::max_displacement() const { return std::min(neighbor_range, lattice.num_sites - 1); }

std::vector<SiteCoupling> coupling_table(const HamiltonianSpec &spec) {
    spec.validate();
    const OccupancyMask mask = spec.occupancy();
    const int r = spec.max_displacement();
    std::vector<int> displacements;
    for (int d = 1; d <= r; ++d) {
        displacements.push_back(d);
        if (spec.kind == CouplingKind::partial_xx) {
            displacements.push_back(-d);
        }
    }
    std::vector<SiteCoupling> table;
    for (int d : displacements) {
        for (const auto &p : displacement_pairs(spec.lattice, mask, d)) {
            double weight = 1.0;
            for (const auto &o : spec.overrides) {
                if (o.first == p.first && o.second == p.second) {
                    weight = o.weight;
                }
            }
            table.push_back({p.first, p.second, d, weight});
        }
    }
    return table;
}

bool Schedule::empty() const noexcept {
    return std::all_of(steps_.begin(), steps_.end(), [](const auto &s) { return s.empty(); });
}

int Schedule::collision_layer_count() const {
    int n = 0;
    for (const auto &step : steps_) {
        for (const auto &layer : step) {
            n += std::holds_alternative<CollisionLayer>(layer) ? 1 : 0;
        }
    }
    return n;
}

int Schedule::rotation_layer_count() const {
    int n = 0;
    for (const auto &step : steps_) {
        for (const auto &layer : step) {
            n += std::holds_alternative<RotationLayer>(layer) ? 1 : 0;
        }
    }
    return n;
}

int Schedule::gate_count() const {
    int n = 0;
    for (const auto &step : steps_) {
        for (const auto &layer : step) {
            if (const auto *c = std::get_if<CollisionLayer>(&layer)) {
                n += static_cast<int>(c->gates.size());
            }
        }
    }
    return n;
}

std::string Schedule::listing() const {
    std::ostringstream os;
    os << "# schedule sites=" << num_sites_ << " steps=" << num_steps() << " step_time=" << format_real(step_time_)
       << " order=";
    if (order_.kind == ErrorOrder::Kind::exact) {
        os << "exact";
    } else {
        os << "first_order(dt=" << format_real(order_.dt) << ")";
    }
    os << '\n';
    for (std::size_t s = 0; s < steps_.size(); ++s) {
        for (const auto &layer : steps_[s]) {
            os << s << ' ';
            if (const auto *rot = std::get_if<RotationLayer>(&layer)) {
                os << "rotate axis=" << axis_name(rot->axis) << " angle=" << format_real(rot->angle);
            } else {
                const auto &col = std::get<CollisionLayer>(layer);
                os << "collide basis=" << basis_name(col.basis) << " d=" << (col.displacement > 0 ? "+" : "")
                   << col.displacement << " gates=" << col.gates.size() << " phase=";
                const bool uniform =
                    std::all_of(col.gates.begin(), col.gates.end(),
                                [&](const auto &g) { return g.phi == col.gates.front().phi; });
                if (col.gates.empty()) {
                    os << "none";
                } else if (uniform) {
                    os << format_real(col.gates.front().phi);
                } else {
                    os << "mixed";
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

bool is_exact_kind(CouplingKind kind) {
    return kind == CouplingKind::zz || kind == CouplingKind::xx || kind == CouplingKind::partial_xx;
}

Schedule compile_zz(const HamiltonianSpec &spec, double t) {
    require_kind(spec, {CouplingKind::zz, CouplingKind::heisenberg}, "compile_zz");
    require_time(t);
    const int n = spec.register_size();
    Schedule schedule(std::max(n, 1), t, {ErrorOrder::Kind::exact, 0.0});
    std::vector<Layer> layers;
    append_pass(layers, register_couplings(spec), n, Basis::z, spec.chi * t);
    schedule.add_step(std::move(layers));
    return schedule;
}

Schedule compile_heisenberg(const HamiltonianSpec &spec, double t, double dt) {
    require_kind(spec, {CouplingKind::heisenberg}, "compile_heisenberg");
    require_time(t);
    const int steps = trotter_steps(t, dt);
    if (spec.eta == 0.0 && spec.lambda == 0.0) {
        return compile_zz(spec, t);
    }
    const int n = spec.register_size();
    const double step = t / steps;
    const auto couplings = register_couplings(spec);
    Schedule schedule(std::max(n, 1), step, {ErrorOrder::Kind::first_order, dt});
    for (int s = 0; s < steps; ++s) {
        std::vector<Layer> layers;
        append_pass(layers, couplings, n, Basis::z, spec.chi * step);
        append_pass(layers, couplings, n, Basis::x, spec.eta * step);
        append_pass(layers, couplings, n, Basis::y, spec.lambda * step);
        schedule.add_step(std::move(layers));
    }
    return schedule;
}

Schedule compile_xx(const HamiltonianSpec &spec, double t) {
    require_kind(spec, {CouplingKind::xx, CouplingKind::partial_xx}, "compile_xx");
    require_time(t);
    const int n = spec.register_size();
    Schedule schedule(std::max(n, 1), t, {ErrorOrder::Kind::exact, 0.0});
    std::vector<Layer> layers;
    append_pass(layers, register_couplings(spec), n, Basis::x, spec.chi * t);
    schedule.add_step(std::move(layers));
    return schedule;
}

Schedule compile_xx_minus_yy(const HamiltonianSpec &spec, double t, double dt) {
    require_kind(spec, {CouplingKind::xx_minus_yy}, "compile_xx_minus_yy");
    require_time(t);
    const int steps = trotter_steps(t, dt);
    const int n = spec.register_size();
    const double step = t / steps;
    const auto couplings = register_couplings(spec);
    Schedule schedule(std::max(n, 1), step, {ErrorOrder::Kind::first_order, dt});
    for (int s = 0; s < steps; ++s) {
        std::vector<Layer> layers;
        append_pass(layers, couplings, n, Basis::x, spec.chi * step);
        append_pass(layers, couplings, n, Basis::y, -spec.chi * step);
        schedule.add_step(std::move(layers));
    }
    return schedule;
}

Schedule compile(const HamiltonianSpec &spec, double t, double dt) {
    switch (spec.kind) {
    case CouplingKind::zz:
        return compile_zz(spec, t);
    case CouplingKind::heisenberg:
        return compile_heisenberg(spec, t, dt);
    case CouplingKind::xx:
    case CouplingKind::partial_xx:
        return compile_xx(spec, t);
    case CouplingKind::xx_minus_yy:
        return compile_xx_minus_yy(spec, t, dt);
    }
    throw ArgumentError("unknown coupling kind");
}

} // namespace spinlattice
