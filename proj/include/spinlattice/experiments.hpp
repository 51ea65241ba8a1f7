#pragma once

/**
 * @file
 * Experiment drivers: spin-wave propagation, squeezing on full and randomly
 * filled lattices, and the all-to-all twisting limit. Each driver returns an
 * in-memory result table; writers serialize it to CSV or JSON.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinlattice/errors.hpp"
#include "spinlattice/lattice.hpp"
#include "spinlattice/observables.hpp"
#include "spinlattice/schedule.hpp"

namespace spinlattice {

enum class Experiment { spinwave, squeeze_full, squeeze_partial, twist_scaling };
enum class OutputFormat { csv, json };

std::string to_string(Experiment e);

/// Raised for invalid experiment configurations; the CLI maps it to exit code 2.
class ConfigError : public ArgumentError {
  public:
    using ArgumentError::ArgumentError;
};

struct ExperimentConfig {
    Experiment experiment = Experiment::spinwave;
    int atoms = 15;
    double filling = 1.0;
    /// Largest neighbour range; squeezing experiments sweep 1..range.
    int range = 3;
    /// Unset means the experiment's default coupling set.
    std::optional<CouplingKind> coupling;
    double chi = 1.0;
    double dt = 0.1;
    /// Unset means the experiment default (spin wave 2/chi, squeezing pi/(2 chi)).
    std::optional<double> t_max;
    int stride = 1;
    int realizations = 20;
    std::uint64_t seed = 1;
    std::string out;
    OutputFormat format = OutputFormat::csv;
    int grid_points = 400;
    /// Smallest N of the twisting sweep, and smallest N entering its log-log fit.
    int min_atoms = 2;
    int fit_min_atoms = 6;
    /// Worker threads for ensembles; 0 = hardware concurrency.
    int threads = 0;

    void validate() const;
    [[nodiscard]] double effective_t_max() const;
    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Long-form result table plus metadata and summary values.
struct ExperimentResult {
    using Cell = std::variant<std::int64_t, double, std::string>;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

/// One point of a squeezing time series.
struct SqueezePoint {
    double time = 0.0;
    double theta_opt = 0.0;
    double min_variance = 0.0;
    /// (Delta J_{-pi/4})^2
    double variance_minus_pi4 = 0.0;
    double jz = 0.0;
    std::optional<double> xi2;
};

struct SqueezeScan {
    std::vector<SqueezePoint> curve;
    TimeMinimum min_xi2;
    TimeMinimum min_variance;
};

/**
 * Evolves the all-|0> register under `spec` and tracks the squeezing
 * observables. Exact kinds are sampled on `grid` and their minima refined
 * by golden-section search; Trotter kinds are sampled stroboscopically at
 * multiples of dt up to grid.t_max without refinement.
 */
SqueezeScan scan_squeezing(const HamiltonianSpec &spec, double dt, const TimeGrid &grid);

/// Squeezing observables after evolving for time t.
SqueezePoint squeeze_point(const HamiltonianSpec &spec, double t, double dt);

/// Full-lattice periodic spec for the given coupling.
HamiltonianSpec lattice_spec(CouplingKind kind, int atoms, int range, double chi);

/// Spin-wave Heisenberg spec (chi = eta = lambda) and its centre-flipped initial state.
HamiltonianSpec spinwave_spec(int atoms, double chi);
int spinwave_center(int atoms);

ExperimentResult run_spinwave(const ExperimentConfig &config);
ExperimentResult run_squeeze_full(const ExperimentConfig &config);
ExperimentResult run_squeeze_partial(const ExperimentConfig &config);
ExperimentResult run_twist_scaling(const ExperimentConfig &config);
ExperimentResult run_experiment(const ExperimentConfig &config);

void write_csv(const ExperimentResult &result, std::ostream &os);
/// Config, metadata and summary (CSV sidecar).
nlohmann::ordered_json sidecar_json(const ExperimentConfig &config, const ExperimentResult &result);
/// Sidecar plus the table itself.
nlohmann::ordered_json full_json(const ExperimentConfig &config, const ExperimentResult &result);

/**
 * Writes config.out: CSV with a `<out>.json` sidecar, or a single JSON
 * document. Returns the paths written.
 */
std::vector<std::string> write_result(const ExperimentConfig &config, const ExperimentResult &result);

} // namespace spinlattice
