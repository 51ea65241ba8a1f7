#pragma once

/**
 * @file
 * Executes compiled schedules on a state vector and records observables.
 */

#include <optional>
#include <variant>
#include <vector>

#include "spinlattice/dense_oracle.hpp"
#include "spinlattice/errors.hpp"
#include "spinlattice/observables.hpp"
#include "spinlattice/schedule.hpp"
#include "spinlattice/state_vector.hpp"

namespace spinlattice {

struct Probes {
    bool site_magnetization = true;
    bool moments = false;
};

template <typename Real = double> struct Snapshot {
    std::vector<Real> site_jz;
    std::optional<MomentSet<Real>> moments;
};

template <typename Real = double> struct EvolutionTrace {
    std::vector<Real> times;
    std::vector<Snapshot<Real>> records;

    void add(Real t, Snapshot<Real> s) {
        if (!times.empty() && !(t > times.back())) {
            throw ValidationError("trace times must be strictly increasing");
        }
        times.push_back(t);
        records.push_back(std::move(s));
    }
};

template <typename Real> Snapshot<Real> take_snapshot(const StateVector<Real> &state, const Probes &probes) {
    Snapshot<Real> s;
    if (probes.site_magnetization) {
        s.site_jz.reserve(static_cast<std::size_t>(state.num_sites()));
        for (int k = 0; k < state.num_sites(); ++k) {
            s.site_jz.push_back(site_magnetization(state, k));
        }
    }
    if (probes.moments) {
        s.moments = collective_moments(state);
    }
    return s;
}

template <typename Real> void apply_layer(StateVector<Real> &state, const Layer &layer) {
    if (const auto *rot = std::get_if<RotationLayer>(&layer)) {
        collective_rotation(state, rot->axis, static_cast<Real>(rot->angle));
        return;
    }
    for (const auto &g : std::get<CollisionLayer>(layer).gates) {
        apply_phase_gate(state, PhaseGate<Real>{g.control, g.target, static_cast<Real>(g.phi)});
    }
}

template <typename Real> void validate_schedule_for(const StateVector<Real> &state, const Schedule &schedule) {
    if (!schedule.empty() && schedule.num_sites() != state.num_sites()) {
        throw ValidationError("schedule acts on " + std::to_string(schedule.num_sites()) + " sites but state has " +
                              std::to_string(state.num_sites()));
    }
}

/// Applies every layer in order, without recording.
template <typename Real> void apply_schedule(StateVector<Real> &state, const Schedule &schedule) {
    validate_schedule_for(state, schedule);
    for (const auto &step : schedule.steps()) {
        for (const auto &layer : step) {
            apply_layer(state, layer);
        }
    }
}

/**
 * Applies the schedule in place, recording probes at the start, after every
 * `snapshot_every` steps and at the end. Times are offset by `start_time`.
 */
template <typename Real>
EvolutionTrace<Real> run_schedule(StateVector<Real> &state, const Schedule &schedule, int snapshot_every,
                                  const Probes &probes, Real start_time = 0) {
    validate_schedule_for(state, schedule);
    if (snapshot_every < 1) {
        throw ArgumentError("snapshot stride must be at least 1");
    }
    EvolutionTrace<Real> trace;
    trace.add(start_time, take_snapshot(state, probes));
    const int steps = schedule.num_steps();
    for (int s = 0; s < steps; ++s) {
        for (const auto &layer : schedule.steps()[static_cast<std::size_t>(s)]) {
            apply_layer(state, layer);
        }
        const int done = s + 1;
        const Real t = start_time + static_cast<Real>(schedule.step_time()) * done;
        if ((done % snapshot_every == 0 || done == steps) && t > trace.times.back()) {
            trace.add(t, take_snapshot(state, probes));
        }
    }
    return trace;
}

/// Dense-oracle counterpart of run_schedule on an explicit time list.
template <typename Real>
EvolutionTrace<Real> dense_trace(const DenseEvolver<Real> &evolver, const StateVector<Real> &initial,
                                 const std::vector<Real> &times, const Probes &probes) {
    EvolutionTrace<Real> trace;
    for (Real t : times) {
        trace.add(t, take_snapshot(evolver.evolve(initial, t), probes));
    }
    return trace;
}

} // namespace spinlattice
