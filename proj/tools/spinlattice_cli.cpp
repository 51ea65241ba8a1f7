// Command-line harness for the lattice spin experiments.
//
//   spinlattice spinwave        --atoms 15 --dt 0.1 --tmax 2 --out spinwave.csv
//   spinlattice squeeze_full    --range 3 --out full.csv
//   spinlattice squeeze_partial --filling 0.5 --realizations 20 --out partial.csv
//   spinlattice twist_scaling   --atoms 14 --out twist.csv
//
// Exit status: 0 on success, 2 on invalid configuration, 1 on other errors.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "spinlattice/experiments.hpp"

namespace {

using spinlattice::CouplingKind;
using spinlattice::Experiment;
using spinlattice::ExperimentConfig;
using spinlattice::OutputFormat;

constexpr int kExitConfig = 2;

struct CommandOptions {
    ExperimentConfig config;
    std::string coupling;
    std::string format = "csv";
    double t_max = 0.0;
};

void add_common_options(CLI::App *cmd, CommandOptions &o, Experiment experiment) {
    auto &c = o.config;
    c.experiment = experiment;
    c.out = spinlattice::to_string(experiment) + ".csv";
    cmd->add_option("--atoms", c.atoms, "Number of atoms N (largest N for twist_scaling)")->capture_default_str();
    cmd->add_option("--filling", c.filling, "Filling factor p, 0 < p <= 1")->capture_default_str();
    cmd->add_option("--range", c.range, "Largest neighbour range r (sweeps 1..r)")->capture_default_str();
    cmd->add_option("--coupling", o.coupling, "Coupling: zz | heisenberg | xx | xxyy")
        ->check(CLI::IsMember({"zz", "heisenberg", "xx", "xxyy"}));
    cmd->add_option("--chi", c.chi, "Coupling strength chi (1/time)")->capture_default_str();
    cmd->add_option("--dt", c.dt, "Trotter step")->capture_default_str();
    cmd->add_option("--tmax", o.t_max, "Final evolution time (default: experiment-specific)");
    cmd->add_option("--stride", c.stride, "Snapshot every this many Trotter steps")->capture_default_str();
    cmd->add_option("--realizations", c.realizations, "Ensemble size for random filling")->capture_default_str();
    cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
    cmd->add_option("--out", c.out, "Output path")->capture_default_str();
    cmd->add_option("--format", o.format, "Output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--grid-points", c.grid_points, "Time grid points for squeezing minima")->capture_default_str();
    cmd->add_option("--threads", c.threads, "Worker threads for ensembles (0 = all cores)")->capture_default_str();
}

ExperimentConfig finalize(CLI::App *cmd, CommandOptions &o) {
    static const std::map<std::string, CouplingKind> kinds = {{"zz", CouplingKind::zz},
                                                              {"heisenberg", CouplingKind::heisenberg},
                                                              {"xx", CouplingKind::xx},
                                                              {"xxyy", CouplingKind::xx_minus_yy}};
    ExperimentConfig c = o.config;
    if (!o.coupling.empty()) {
        c.coupling = kinds.at(o.coupling);
    }
    if (cmd->count("--tmax") > 0) {
        c.t_max = o.t_max;
    }
    c.format = o.format == "json" ? OutputFormat::json : OutputFormat::csv;
    return c;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Exact simulation of spin-1/2 atoms in a 1-D optical lattice"};
    app.require_subcommand(1);

    CommandOptions spinwave;
    auto *spinwave_cmd = app.add_subcommand("spinwave", "Spin wave from a flipped central atom (Heisenberg chain)");
    add_common_options(spinwave_cmd, spinwave, Experiment::spinwave);

    CommandOptions full;
    auto *full_cmd = app.add_subcommand("squeeze_full", "Squeezing on a fully filled lattice vs neighbour range");
    add_common_options(full_cmd, full, Experiment::squeeze_full);

    CommandOptions partial;
    partial.config.filling = 0.5;
    auto *partial_cmd = app.add_subcommand("squeeze_partial", "Squeezing on randomly filled lattices");
    add_common_options(partial_cmd, partial, Experiment::squeeze_partial);

    CommandOptions twist;
    twist.config.atoms = 14;
    twist.config.dt = 0.005;
    auto *twist_cmd = app.add_subcommand("twist_scaling", "All-to-all coupling: minimum variance vs atom number");
    add_common_options(twist_cmd, twist, Experiment::twist_scaling);
    twist_cmd->add_option("--min-atoms", twist.config.min_atoms, "Smallest N of the sweep")->capture_default_str();
    twist_cmd->add_option("--fit-min-atoms", twist.config.fit_min_atoms, "Smallest N in the log-log fit")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    std::pair<CLI::App *, CommandOptions *> chosen{nullptr, nullptr};
    for (auto [cmd, opts] : {std::pair{spinwave_cmd, &spinwave}, std::pair{full_cmd, &full},
                             std::pair{partial_cmd, &partial}, std::pair{twist_cmd, &twist}}) {
        if (cmd->parsed()) {
            chosen = {cmd, opts};
        }
    }

    try {
        const ExperimentConfig config = finalize(chosen.first, *chosen.second);
        config.validate();
        const auto result = spinlattice::run_experiment(config);
        for (const auto &path : spinlattice::write_result(config, result)) {
            std::cout << "wrote " << path << '\n';
        }
    } catch (const spinlattice::ConfigError &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const spinlattice::CapacityError &e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
