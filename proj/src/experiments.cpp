#include "spinlattice/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <thread>

#include "spinlattice/evolution.hpp"

namespace spinlattice {

namespace {

using Row = std::vector<ExperimentResult::Cell>;

const std::vector<std::string> kSqueezeColumns = {"record",   "coupling",  "range",           "atoms",
                                                  "lattice_sites", "time", "theta_opt",  "variance",
                                                  "variance_stderr", "xi2", "realizations"};

ExperimentResult::Cell xi2_cell(const std::optional<double> &xi2) {
    if (xi2) {
        return *xi2;
    }
    return std::string("undefined");
}

SqueezePoint measure(const MomentSet<double> &m, int num_atoms, double t) {
    const auto opt = min_variance_theta(m);
    SqueezePoint p;
    p.time = t;
    p.theta_opt = opt.theta;
    p.min_variance = opt.min_variance;
    p.variance_minus_pi4 = variance_at(m, -std::numbers::pi / 4);
    p.jz = m.jz();
    p.xi2 = xi_squared(m, num_atoms, opt.theta);
    return p;
}

SqueezePoint measure(const StateVector<double> &state, double t) {
    return measure(collective_moments(state), state.num_sites(), t);
}

/// O with U^dag J_a U = sum_b O_ab J_b for a product U of collective rotations.
Eigen::Matrix3d rotation_frame(const std::vector<RotationLayer> &rotations) {
    Matrix2<double> u = Matrix2<double>::Identity();
    for (const auto &r : rotations) {
        u = (single_site_rotation<double>(r.axis, r.angle) * u).eval();
    }
    const Axis axes[3] = {Axis::x, Axis::y, Axis::z};
    Eigen::Matrix3d o;
    for (int a = 0; a < 3; ++a) {
        const Matrix2<double> conj = u.adjoint() * spin_operator<double>(axes[a]) * u;
        for (int b = 0; b < 3; ++b) {
            o(a, b) = 2.0 * (conj * spin_operator<double>(axes[b])).trace().real();
        }
    }
    return o;
}

/// Runs body(i) for i in [0, count) on a small thread pool.
void parallel_for(int count, int threads, const std::function<void(int)> &body) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(1, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = next++; i < count; i = next++) {
                    body(i);
                }
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    for (auto &e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

double mean_of(const std::vector<double> &v) {
    double s = 0.0;
    for (double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double> &v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<CouplingKind> squeeze_couplings(const ExperimentConfig &config) {
    if (!config.coupling) {
        return {CouplingKind::xx, CouplingKind::xx_minus_yy};
    }
    if (*config.coupling != CouplingKind::xx && *config.coupling != CouplingKind::xx_minus_yy) {
        throw ConfigError("squeezing experiments accept --coupling xx or xxyy");
    }
    return {*config.coupling};
}

TimeGrid squeeze_grid(const ExperimentConfig &config) {
    TimeGrid grid;
    grid.t_min = 0.0;
    grid.t_max = config.effective_t_max();
    grid.points = config.grid_points;
    return grid;
}

nlohmann::ordered_json grid_json(const TimeGrid &grid, double dt) {
    nlohmann::ordered_json j;
    j["t_min"] = grid.t_min;
    j["t_max"] = grid.t_max;
    j["points"] = grid.points;
    j["grid_step"] = (grid.t_max - grid.t_min) / (grid.points - 1);
    j["refinement"] = "golden-section, tolerance " + format_real(grid.tolerance) + " (exact couplings only)";
    j["trotter_sampling_step"] = dt;
    return j;
}

/// Richardson-extrapolated d/dt (Delta J_{-pi/4})^2 at t = 0 from two forward differences.
double initial_variance_slope(const HamiltonianSpec &spec, double h) {
    const double v0 = squeeze_point(spec, 0.0, h).variance_minus_pi4;
    const double v1 = squeeze_point(spec, h, h).variance_minus_pi4;
    const double v2 = squeeze_point(spec, 2 * h, h).variance_minus_pi4;
    const double d1 = (v1 - v0) / h;
    const double d2 = (v2 - v0) / (2 * h);
    return 2 * d1 - d2;
}

} // namespace

std::string to_string(Experiment e) {
    switch (e) {
    case Experiment::spinwave:
        return "spinwave";
    case Experiment::squeeze_full:
        return "squeeze_full";
    case Experiment::squeeze_partial:
        return "squeeze_partial";
    case Experiment::twist_scaling:
        return "twist_scaling";
    }
    return "?";
}

double ExperimentConfig::effective_t_max() const {
    if (t_max) {
        return *t_max;
    }
    return experiment == Experiment::spinwave ? 2.0 / chi : std::numbers::pi / (2.0 * chi);
}

void ExperimentConfig::validate() const {
    if (atoms < 2 || atoms > kMaxRegisterSites) {
        throw ConfigError("--atoms must lie in [2, " + std::to_string(kMaxRegisterSites) + "]");
    }
    if (!(filling > 0.0) || filling > 1.0) {
        throw ConfigError("--filling must satisfy 0 < p <= 1");
    }
    if ((experiment == Experiment::squeeze_full || experiment == Experiment::twist_scaling) && filling != 1.0) {
        throw ConfigError(to_string(experiment) + " requires a full lattice (--filling 1)");
    }
    if (range < 1) {
        throw ConfigError("--range must be at least 1");
    }
    if (!std::isfinite(chi) || !(chi > 0.0)) {
        throw ConfigError("--chi must be positive and finite");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("--dt must be positive");
    }
    const double tm = effective_t_max();
    if (!std::isfinite(tm) || tm < dt) {
        throw ConfigError("--tmax must be at least --dt");
    }
    if (stride < 1) {
        throw ConfigError("--stride must be at least 1");
    }
    if (realizations < 1) {
        throw ConfigError("--realizations must be at least 1");
    }
    if (grid_points < 2) {
        throw ConfigError("time grid needs at least 2 points");
    }
    if (experiment == Experiment::twist_scaling && (min_atoms < 2 || min_atoms > atoms)) {
        throw ConfigError("--min-atoms must lie in [2, --atoms]");
    }
    if (experiment == Experiment::spinwave && coupling && *coupling != CouplingKind::heisenberg &&
        *coupling != CouplingKind::zz) {
        throw ConfigError("spinwave accepts --coupling heisenberg or zz");
    }
    if (experiment == Experiment::squeeze_partial && coupling && *coupling != CouplingKind::xx) {
        throw ConfigError("squeeze_partial accepts only --coupling xx");
    }
    if ((experiment == Experiment::squeeze_full || experiment == Experiment::twist_scaling) && coupling) {
        squeeze_couplings(*this);
    }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = to_string(experiment);
    j["atoms"] = atoms;
    j["filling"] = filling;
    j["range"] = range;
    j["coupling"] = coupling ? to_string(*coupling) : std::string("default");
    j["chi"] = chi;
    j["dt"] = dt;
    j["t_max"] = effective_t_max();
    j["stride"] = stride;
    j["realizations"] = realizations;
    j["seed"] = seed;
    j["format"] = format == OutputFormat::csv ? "csv" : "json";
    j["grid_points"] = grid_points;
    if (experiment == Experiment::twist_scaling) {
        j["min_atoms"] = min_atoms;
        j["fit_min_atoms"] = fit_min_atoms;
    }
    return j;
}

HamiltonianSpec lattice_spec(CouplingKind kind, int atoms, int range, double chi) {
    HamiltonianSpec spec;
    spec.kind = kind;
    spec.chi = chi;
    spec.neighbor_range = range;
    spec.lattice = {atoms, Boundary::periodic};
    return spec;
}

HamiltonianSpec spinwave_spec(int atoms, double chi) {
    HamiltonianSpec spec = lattice_spec(CouplingKind::heisenberg, atoms, 1, chi);
    spec.eta = chi;
    spec.lambda = chi;
    return spec;
}

int spinwave_center(int atoms) { return atoms / 2; }

SqueezePoint squeeze_point(const HamiltonianSpec &spec, double t, double dt) {
    auto state = new_register<double>(spec.register_size());
    apply_schedule(state, compile(spec, t, dt));
    return measure(state, t);
}

SqueezeScan scan_squeezing(const HamiltonianSpec &spec, double dt, const TimeGrid &grid) {
    const int n = spec.register_size();
    if (n < 1) {
        throw ArgumentError("squeezing scan needs at least one atom");
    }
    if (grid.t_min != 0.0) {
        throw ArgumentError("squeezing scans start at t = 0");
    }
    SqueezeScan scan;
    auto state = new_register<double>(n);
    if (is_exact_kind(spec.kind)) {
        const auto times = grid_times(grid);
        const Schedule step = compile(spec, times[1] - times[0], dt);
        // Exact steps are [rotations, collisions, inverse rotations]; between
        // consecutive steps the rotations cancel, so the scan stays in the
        // rotated frame and maps the moments back.
        std::vector<RotationLayer> prefix;
        std::vector<RotationLayer> suffix;
        std::vector<Layer> collisions;
        if (!step.empty()) {
            for (const auto &layer : step.steps().front()) {
                if (const auto *rot = std::get_if<RotationLayer>(&layer)) {
                    (collisions.empty() ? prefix : suffix).push_back(*rot);
                } else {
                    collisions.push_back(layer);
                }
            }
        }
        for (const auto &rot : prefix) {
            apply_layer(state, Layer{rot});
        }
        const Eigen::Matrix3d frame = rotation_frame(suffix);
        std::vector<std::optional<double>> xi2_samples;
        std::vector<std::optional<double>> var_samples;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (i > 0) {
                for (const auto &layer : collisions) {
                    apply_layer(state, layer);
                }
            }
            MomentSet<double> m = collective_moments(state);
            m.mean = frame * m.mean;
            m.second = frame * m.second * frame.transpose();
            scan.curve.push_back(measure(m, n, times[i]));
            xi2_samples.push_back(scan.curve.back().xi2);
            var_samples.emplace_back(scan.curve.back().min_variance);
        }
        scan.min_xi2 = refine_grid_minimum(xi2_samples, grid, [&](double t) { return squeeze_point(spec, t, dt).xi2; });
        scan.min_variance = refine_grid_minimum(var_samples, grid, [&](double t) {
            return std::optional<double>(squeeze_point(spec, t, dt).min_variance);
        });
        return scan;
    }
    const int steps = static_cast<int>(std::floor(grid.t_max / dt + 1e-9));
    const Schedule step = compile(spec, dt, dt);
    scan.curve.push_back(measure(state, 0.0));
    for (int s = 1; s <= steps; ++s) {
        apply_schedule(state, step);
        scan.curve.push_back(measure(state, dt * s));
    }
    scan.min_xi2.grid_step = dt;
    scan.min_variance.grid_step = dt;
    for (const auto &p : scan.curve) {
        if (p.xi2 && (!scan.min_xi2.found || *p.xi2 < scan.min_xi2.value)) {
            scan.min_xi2 = {p.time, *p.xi2, dt, true};
        }
        if (!scan.min_variance.found || p.min_variance < scan.min_variance.value) {
            scan.min_variance = {p.time, p.min_variance, dt, true};
        }
    }
    return scan;
}

ExperimentResult run_spinwave(const ExperimentConfig &config) {
    config.validate();
    HamiltonianSpec spec = spinwave_spec(config.atoms, config.chi);
    if (config.coupling == CouplingKind::zz) {
        spec.kind = CouplingKind::zz;
        spec.eta = spec.lambda = 0.0;
    }
    const int center = spinwave_center(config.atoms);
    auto state = new_register<double>(config.atoms);
    apply_single_site_unitary(state, center, single_site_rotation<double>(Axis::x, std::numbers::pi));

    const double t_max = config.effective_t_max();
    Schedule schedule;
    if (spec.kind == CouplingKind::zz) {
        // Exact, but stepped at dt so the output grid matches the Heisenberg run.
        const int steps = std::max(1, static_cast<int>(std::ceil(t_max / config.dt - 1e-9)));
        const Schedule one = compile_zz(spec, t_max / steps);
        schedule = Schedule(one.num_sites(), t_max / steps, one.error_order());
        for (int s = 0; s < steps; ++s) {
            schedule.add_step(one.steps().front());
        }
    } else {
        schedule = compile(spec, t_max, config.dt);
    }
    const EvolutionTrace<double> trace = run_schedule(state, schedule, config.stride, Probes{true, false});

    ExperimentResult result;
    result.columns = {"record", "time", "site", "jz"};
    const double initial_sum = 1.0 - config.atoms / 2.0;
    double max_sum_dev = 0.0;
    double max_asym = 0.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const auto &jz = trace.records[i].site_jz;
        double sum = 0.0;
        for (int k = 0; k < config.atoms; ++k) {
            result.rows.push_back({std::string("site"), trace.times[i], std::int64_t{k}, jz[static_cast<std::size_t>(k)]});
            sum += jz[static_cast<std::size_t>(k)];
            const int mirror = ((2 * center - k) % config.atoms + config.atoms) % config.atoms;
            max_asym = std::max(max_asym, std::abs(jz[static_cast<std::size_t>(k)] - jz[static_cast<std::size_t>(mirror)]));
        }
        max_sum_dev = std::max(max_sum_dev, std::abs(sum - initial_sum));
    }
    result.metadata["center_site"] = center;
    result.metadata["boundary"] = "periodic";
    result.metadata["coupling"] = to_string(spec.kind);
    result.metadata["step_time"] = schedule.step_time();
    result.metadata["schedule_collision_layers"] = schedule.collision_layer_count();
    result.summary["initial_total_jz"] = initial_sum;
    result.summary["max_total_jz_deviation"] = max_sum_dev;
    result.summary["max_mirror_asymmetry"] = max_asym;
    result.summary["snapshots"] = trace.times.size();
    return result;
}

ExperimentResult run_squeeze_full(const ExperimentConfig &config) {
    config.validate();
    const TimeGrid grid = squeeze_grid(config);
    ExperimentResult result;
    result.columns = kSqueezeColumns;
    result.metadata["time_grid"] = grid_json(grid, config.dt);
    result.metadata["boundary"] = "periodic";
    for (CouplingKind kind : squeeze_couplings(config)) {
        nlohmann::ordered_json per_kind = nlohmann::ordered_json::object();
        for (int r = 1; r <= config.range; ++r) {
            const HamiltonianSpec spec = lattice_spec(kind, config.atoms, r, config.chi);
            const SqueezeScan scan = scan_squeezing(spec, config.dt, grid);
            const std::string kname = to_string(kind);
            for (const auto &p : scan.curve) {
                result.rows.push_back({std::string("curve"), kname, std::int64_t{r}, std::int64_t{config.atoms},
                                       std::int64_t{config.atoms}, p.time, p.theta_opt, p.min_variance, 0.0,
                                       xi2_cell(p.xi2), std::int64_t{1}});
            }
            nlohmann::ordered_json entry;
            if (scan.min_xi2.found) {
                const SqueezePoint at = squeeze_point(spec, scan.min_xi2.time, config.dt);
                result.rows.push_back({std::string("min_xi2"), kname, std::int64_t{r}, std::int64_t{config.atoms},
                                       std::int64_t{config.atoms}, scan.min_xi2.time, at.theta_opt, at.min_variance,
                                       0.0, scan.min_xi2.value, std::int64_t{1}});
                entry["min_xi2"] = scan.min_xi2.value;
                entry["time_at_min_xi2"] = scan.min_xi2.time;
            } else {
                entry["min_xi2"] = "undefined";
            }
            entry["min_variance"] = scan.min_variance.value;
            entry["time_at_min_variance"] = scan.min_variance.time;
            entry["grid_step"] = scan.min_xi2.grid_step;
            per_kind[std::to_string(r)] = entry;
        }
        result.summary[to_string(kind)] = per_kind;
    }
    return result;
}

ExperimentResult run_squeeze_partial(const ExperimentConfig &config) {
    config.validate();
    const long lattice_sites = std::lround(config.atoms / config.filling);
    if (lattice_sites > kMaxLatticeSites) {
        throw CapacityError("lattice of " + std::to_string(lattice_sites) + " sites exceeds cap of " +
                            std::to_string(kMaxLatticeSites) + "; use smaller --atoms or larger --filling");
    }
    const LatticeConfig lattice{static_cast<int>(lattice_sites), Boundary::periodic};
    const TimeGrid grid = squeeze_grid(config);
    const int realizations = config.realizations;

    std::vector<OccupancyMask> masks(static_cast<std::size_t>(realizations));
    for (int i = 0; i < realizations; ++i) {
        masks[static_cast<std::size_t>(i)] =
            sample_occupancy(lattice, config.atoms, realization_key(config.seed, static_cast<std::uint64_t>(i)));
    }

    ExperimentResult result;
    result.columns = kSqueezeColumns;
    result.metadata["time_grid"] = grid_json(grid, config.dt);
    result.metadata["lattice_sites"] = lattice.num_sites;
    result.metadata["boundary"] = "periodic";
    result.metadata["placement"] = "exactly --atoms atoms placed uniformly on round(atoms / filling) sites";
    result.metadata["slope_convention_kappa"] = kSlopeConvention;
    nlohmann::ordered_json mask_list = nlohmann::ordered_json::array();
    for (const auto &m : masks) {
        mask_list.push_back(m.to_string());
    }
    result.metadata["masks"] = mask_list;

    auto spec_for = [&](int r, const OccupancyMask &mask) {
        HamiltonianSpec spec = lattice_spec(CouplingKind::partial_xx, lattice.num_sites, r, config.chi);
        spec.mask = mask;
        return spec;
    };
    constexpr double kSlopeStep = 1e-3;

    for (int r = 1; r <= config.range; ++r) {
        std::vector<SqueezeScan> scans(static_cast<std::size_t>(realizations));
        std::vector<double> slopes(static_cast<std::size_t>(realizations));
        parallel_for(realizations, config.threads, [&](int i) {
            const HamiltonianSpec spec = spec_for(r, masks[static_cast<std::size_t>(i)]);
            TimeGrid unrefined = grid;
            unrefined.refine = false;
            scans[static_cast<std::size_t>(i)] = scan_squeezing(spec, config.dt, unrefined);
            slopes[static_cast<std::size_t>(i)] = initial_variance_slope(spec, kSlopeStep);
        });

        const std::size_t points = scans.front().curve.size();
        std::vector<std::optional<double>> mean_xi2(points);
        for (std::size_t p = 0; p < points; ++p) {
            std::vector<double> vars;
            double xi2_sum = 0.0;
            bool defined = true;
            for (const auto &scan : scans) {
                vars.push_back(scan.curve[p].min_variance);
                if (scan.curve[p].xi2) {
                    xi2_sum += *scan.curve[p].xi2;
                } else {
                    defined = false;
                }
            }
            if (defined) {
                mean_xi2[p] = xi2_sum / realizations;
            }
            result.rows.push_back({std::string("curve"), std::string("partial_xx"), std::int64_t{r},
                                   std::int64_t{config.atoms}, std::int64_t{lattice.num_sites},
                                   scans.front().curve[p].time, 0.0, mean_of(vars), stderr_of(vars),
                                   xi2_cell(mean_xi2[p]), std::int64_t{realizations}});
        }

        auto ensemble_xi2 = [&](double t) -> std::optional<double> {
            double sum = 0.0;
            for (const auto &mask : masks) {
                const auto p = squeeze_point(spec_for(r, mask), t, config.dt);
                if (!p.xi2) {
                    return std::nullopt;
                }
                sum += *p.xi2;
            }
            return sum / realizations;
        };
        const TimeMinimum best = refine_grid_minimum(mean_xi2, grid, ensemble_xi2);

        std::vector<WeightedPair> couplings;
        HamiltonianSpec table_spec = spec_for(r, OccupancyMask::full(lattice.num_sites));
        for (const auto &c : coupling_table(table_spec)) {
            couplings.push_back({c.first, c.second, config.chi * c.weight});
        }
        const double m = lattice.num_sites;
        const double n = config.atoms;
        const double predicted = initial_slope_prediction(
            couplings, [&](int k, int l) { return pair_correlation(masks, k, l); });
        const double bernoulli =
            initial_slope_prediction(couplings, [&](int, int) { return config.filling * config.filling; });
        const double hypergeometric =
            initial_slope_prediction(couplings, [&](int, int) { return n * (n - 1) / (m * (m - 1)); });

        nlohmann::ordered_json entry;
        if (best.found) {
            std::vector<double> vars;
            for (const auto &mask : masks) {
                vars.push_back(squeeze_point(spec_for(r, mask), best.time, config.dt).min_variance);
            }
            result.rows.push_back({std::string("min_xi2"), std::string("partial_xx"), std::int64_t{r},
                                   std::int64_t{config.atoms}, std::int64_t{lattice.num_sites}, best.time, 0.0,
                                   mean_of(vars), stderr_of(vars), best.value, std::int64_t{realizations}});
            entry["min_xi2"] = best.value;
            entry["time_at_min_xi2"] = best.time;
        } else {
            entry["min_xi2"] = "undefined";
        }
        entry["grid_step"] = best.grid_step;
        entry["initial_slope_simulated"] = mean_of(slopes);
        entry["initial_slope_stderr"] = stderr_of(slopes);
        entry["initial_slope_predicted"] = predicted;
        entry["initial_slope_predicted_bernoulli"] = bernoulli;
        entry["initial_slope_predicted_hypergeometric"] = hypergeometric;
        result.summary[std::to_string(r)] = entry;
    }
    return result;
}

ExperimentResult run_twist_scaling(const ExperimentConfig &config) {
    config.validate();
    const TimeGrid grid = squeeze_grid(config);
    ExperimentResult result;
    result.columns = kSqueezeColumns;
    result.metadata["time_grid"] = grid_json(grid, config.dt);
    result.metadata["coupling_range"] = "all-to-all (displacements 1..N-1)";
    for (CouplingKind kind : squeeze_couplings(config)) {
        const std::string kname = to_string(kind);
        nlohmann::ordered_json per_n = nlohmann::ordered_json::object();
        std::vector<double> log_n;
        std::vector<double> log_var;
        for (int n = config.min_atoms; n <= config.atoms; ++n) {
            const HamiltonianSpec spec = lattice_spec(kind, n, n - 1, config.chi);
            const SqueezeScan scan = scan_squeezing(spec, config.dt, grid);
            const SqueezePoint at_var = squeeze_point(spec, scan.min_variance.time, config.dt);
            result.rows.push_back({std::string("min_variance"), kname, std::int64_t{n - 1}, std::int64_t{n},
                                   std::int64_t{n}, scan.min_variance.time, at_var.theta_opt, scan.min_variance.value,
                                   0.0, xi2_cell(at_var.xi2), std::int64_t{1}});
            nlohmann::ordered_json entry;
            entry["min_variance"] = scan.min_variance.value;
            entry["time_at_min_variance"] = scan.min_variance.time;
            if (scan.min_xi2.found) {
                const SqueezePoint at_xi = squeeze_point(spec, scan.min_xi2.time, config.dt);
                result.rows.push_back({std::string("min_xi2"), kname, std::int64_t{n - 1}, std::int64_t{n},
                                       std::int64_t{n}, scan.min_xi2.time, at_xi.theta_opt, at_xi.min_variance, 0.0,
                                       scan.min_xi2.value, std::int64_t{1}});
                entry["min_xi2"] = scan.min_xi2.value;
                entry["time_at_min_xi2"] = scan.min_xi2.time;
            } else {
                entry["min_xi2"] = "undefined";
            }
            per_n[std::to_string(n)] = entry;
            if (n >= config.fit_min_atoms && scan.min_variance.value > 0.0) {
                log_n.push_back(std::log(static_cast<double>(n)));
                log_var.push_back(std::log(scan.min_variance.value));
            }
        }
        nlohmann::ordered_json kind_summary;
        kind_summary["by_atoms"] = per_n;
        if (log_n.size() >= 2) {
            const double mx = mean_of(log_n);
            const double my = mean_of(log_var);
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t i = 0; i < log_n.size(); ++i) {
                sxy += (log_n[i] - mx) * (log_var[i] - my);
                sxx += (log_n[i] - mx) * (log_n[i] - mx);
            }
            kind_summary["loglog_slope_min_variance"] = sxy / sxx;
            kind_summary["fit_atoms"] = std::to_string(config.fit_min_atoms) + ".." + std::to_string(config.atoms);
        }
        result.summary[kname] = kind_summary;
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentConfig &config) {
    switch (config.experiment) {
    case Experiment::spinwave:
        return run_spinwave(config);
    case Experiment::squeeze_full:
        return run_squeeze_full(config);
    case Experiment::squeeze_partial:
        return run_squeeze_partial(config);
    case Experiment::twist_scaling:
        return run_twist_scaling(config);
    }
    throw ConfigError("unknown experiment");
}

void write_csv(const ExperimentResult &result, std::ostream &os) {
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        os << (i ? "," : "") << result.columns[i];
    }
    os << '\n';
    for (const auto &row : result.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) {
                os << ',';
            }
            std::visit(
                [&](const auto &v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>) {
                        os << format_real(v);
                    } else {
                        os << v;
                    }
                },
                row[i]);
        }
        os << '\n';
    }
}

nlohmann::ordered_json sidecar_json(const ExperimentConfig &config, const ExperimentResult &result) {
    nlohmann::ordered_json j;
    j["config"] = config.to_json();
    j["metadata"] = result.metadata;
    j["summary"] = result.summary;
    return j;
}

nlohmann::ordered_json full_json(const ExperimentConfig &config, const ExperimentResult &result) {
    nlohmann::ordered_json j = sidecar_json(config, result);
    j["columns"] = result.columns;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto &row : result.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::array();
        for (const auto &cell : row) {
            std::visit([&](const auto &v) { r.push_back(v); }, cell);
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    return j;
}

std::vector<std::string> write_result(const ExperimentConfig &config, const ExperimentResult &result) {
    if (config.out.empty()) {
        throw ConfigError("--out path is required");
    }
    auto open = [](const std::string &path) {
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            throw ConfigError("cannot open output file " + path);
        }
        return f;
    };
    if (config.format == OutputFormat::json) {
        auto f = open(config.out);
        f << full_json(config, result).dump(2) << '\n';
        return {config.out};
    }
    auto csv = open(config.out);
    write_csv(result, csv);
    const std::string sidecar = config.out + ".json";
    auto js = open(sidecar);
    js << sidecar_json(config, result).dump(2) << '\n';
    return {config.out, sidecar};
}

} // namespace spinlattice
