#include "fujita/experiment.hpp"

#include "fujita/blowup.hpp"
#include "fujita/errors.hpp"
#include "fujita/fitted.hpp"
#include "fujita/kernel.hpp"
#include "fujita/lorentz.hpp"
#include "fujita/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>

namespace fujita {

namespace {

struct Csv {
    std::ofstream os;
    std::filesystem::path path;

    Csv(const std::filesystem::path& p, const std::string& header) : os(p, std::ios::binary | std::ios::trunc), path(p) {
        require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + p.string());
        os << header << '\n';
    }
    ~Csv() noexcept(false) {
        os.flush();
        if (!os && std::uncaught_exceptions() == 0) fail(ErrorCode::Io, "short write on " + path.string());
    }
};

std::string num(double v) {
    return format_double(v);
}

/// Configured radius, or `fallback` when grid.radius = auto.
GridPtr grid_for(const ExperimentConfig& c, double fallback) {
    const double radius = c.radius > 0.0 ? c.radius : fallback;
    return make_grid(c.weight, radius, c.cells, c.grading, c.geometry.value_or(default_geometry(c.weight)));
}

void write_manifest(const std::filesystem::path& dir, const RunRequest& req, const ExperimentConfig& c,
                    const FittedConstants& fitted, const std::vector<std::string>& outputs) {
    std::ofstream os(dir / "manifest.txt", std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + (dir / "manifest.txt").string());
    os << "# resolved configuration\n";
    os << "command = " << req.command << '\n';
    os << "config = " << req.config.string() << '\n';
    os << "jobs = " << req.jobs << '\n';
    for (const auto& [k, v] : c.resolved()) os << k << " = " << v << '\n';
    os << "# fitted constants\n";
    for (const auto& [k, v] : fitted.entries()) os << "fitted." << k << " = " << format_double(v) << '\n';
    os << "# outputs\n";
    for (const auto& o : outputs) os << "output = " << o << '\n';
    require(static_cast<bool>(os), ErrorCode::Io, "short write on manifest.txt");
}

double gaussian_error(const KernelTable& table) {
    const Grid& g = *table.grid;
    const auto x = g.nodes();
    const auto m = g.cell_mass();
    const double t = table.t;
    const bool mirror = g.geometry() == GridGeometry::HalfLineEven;
    auto gauss = [t](double z) { return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t); };
    const double rint = interior_radius(g, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (std::abs(x[i]) > rint) continue;
        double diff = 0.0, ref = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double G = gauss(x[i] - x[j]) + (mirror ? gauss(x[i] + x[j]) : 0.0);
            diff += std::abs(table(i, j) - G) * m[j];
            ref += G * m[j];
        }
        worst = std::max(worst, diff / ref);
    }
    return worst;
}

void kernel_verify(const ExperimentConfig& c, const RunRequest& req, std::ostream& log, FittedConstants& fitted,
                   std::vector<std::string>& outputs) {
    const double t_max = *std::max_element(c.kernel_times.begin(), c.kernel_times.end());
    const GridPtr grid = grid_for(c, std::max(20.0, 2.0 * 7.43 * std::sqrt(t_max)));
    std::mt19937_64 rng(c.seed);
    const BallMassFit ball = fit_ball_mass_constants(c.weight, rng);
    fitted.ball_lower = ball.constants.lower;
    fitted.ball_upper = ball.constants.upper;

    const KernelVerifyReport rep = verify_kernel(c.weight, grid, c.kernel_times, c.kernel_steps);
    fitted.kernel_c_star = rep.ball_mass_fit.constants.lower;
    fitted.kernel_C_star = rep.ball_mass_fit.constants.upper;
    fitted.kernel_d = rep.explicit_fit.constants.lower;
    fitted.kernel_D = rep.explicit_fit.constants.upper;

    {
        Csv csv(req.out_dir / "kernel_verify.csv",
                "t,row_mass_error,composition_error,symmetry_error,min_entry,origin_sup,origin_l2,origin_lorentz21,interior_rows");
        for (const auto& r : rep.times) {
            csv.os << num(r.t) << ',' << num(r.row_mass_error) << ',' << num(r.composition_error) << ','
                   << num(r.symmetry_error) << ',' << num(r.min_entry) << ',' << num(r.origin_sup) << ','
                   << num(r.origin_l2) << ',' << num(r.origin_lorentz21) << ',' << r.interior_rows << '\n';
        }
    }
    {
        Csv csv(req.out_dir / "kernel_slopes.csv", "quantity,fitted_slope,predicted_slope");
        csv.os << "origin_sup," << num(rep.sup_slope.slope) << ',' << num(rep.predicted_sup_slope) << '\n';
        csv.os << "origin_l2," << num(rep.l2_slope.slope) << ',' << num(rep.predicted_l2_slope) << '\n';
        csv.os << "origin_lorentz21," << num(rep.lorentz21_slope.slope) << ',' << num(rep.predicted_l2_slope) << '\n';
    }
    {
        Csv csv(req.out_dir / "kernel_envelopes.csv", "form,lower,upper,lower_coverage,upper_coverage,entries");
        for (const EnvelopeFit* f : {&rep.ball_mass_fit, &rep.explicit_fit}) {
            csv.os << to_string(f->constants.form) << ',' << num(f->constants.lower) << ',' << num(f->constants.upper)
                   << ',' << num(f->lower_coverage) << ',' << num(f->upper_coverage) << ',' << f->entries << '\n';
        }
    }
    outputs.insert(outputs.end(), {"kernel_verify.csv", "kernel_slopes.csv", "kernel_envelopes.csv"});

    double worst_mass = 0.0, worst_comp = 0.0, worst_sym = 0.0;
    for (const auto& r : rep.times) {
        worst_mass = std::max(worst_mass, r.row_mass_error);
        worst_comp = std::max(worst_comp, r.composition_error);
        worst_sym = std::max(worst_sym, r.symmetry_error);
    }
    log << "kernel-verify " << c.weight.describe() << ", " << grid->size() << " nodes, R = " << num(grid->radius())
        << '\n';
    log << "  row mass error " << num(worst_mass) << ", composition error " << num(worst_comp)
        << ", symmetry error " << num(worst_sym) << '\n';
    log << "  sup slope " << num(rep.sup_slope.slope) << " (predicted " << num(rep.predicted_sup_slope) << "), L2 slope "
        << num(rep.l2_slope.slope) << " (predicted " << num(rep.predicted_l2_slope) << ")\n";

    if (c.weight.kind == WeightCase::AxisPower && c.weight.exponent == 0.0) {
        Csv csv(req.out_dir / "kernel_gaussian.csv", "t,relative_weighted_l1_error");
        double worst = 0.0;
        for (double t : c.kernel_times) {
            const double e = gaussian_error(build_kernel(c.weight, grid, t, c.kernel_steps));
            worst = std::max(worst, e);
            csv.os << num(t) << ',' << num(e) << '\n';
        }
        outputs.push_back("kernel_gaussian.csv");
        log << "  gaussian match: max relative weighted L1 error " << num(worst) << (worst < 0.01 ? " (< 1%)" : " (>= 1%)")
            << '\n';
    }
}

GridFunction random_step_function(GridPtr grid, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pieces(2, 8);
    std::uniform_real_distribution<double> height(0.0, 4.0);
    const double R = grid->radius();
    const int k = pieces(rng);
    std::vector<double> cuts(static_cast<std::size_t>(k));
    std::uniform_real_distribution<double> where(0.0, R);
    for (double& x : cuts) x = where(rng);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> heights(static_cast<std::size_t>(k) + 1);
    for (double& h : heights) h = height(rng);
    heights.back() = 0.0;
    return GridFunction::sample(grid, [&](double x) {
        const auto it = std::upper_bound(cuts.begin(), cuts.end(), std::abs(x));
        return heights[static_cast<std::size_t>(it - cuts.begin())];
    });
}

void lorentz_selftest(const ExperimentConfig& c, const RunRequest& req, std::ostream& log, FittedConstants& fitted,
                      std::vector<std::string>& outputs) {
    const GridPtr grid = grid_for(c, 10.0);
    std::mt19937_64 rng(c.seed);
    Csv csv(req.out_dir / "lorentz_selftest.csv", "case,check,lhs,rhs,margin,holds");
    int failures = 0;
    std::string first_failure;
    auto row = [&](const std::string& name, const std::string& check, double lhs, double rhs, double margin, bool ok) {
        csv.os << name << ',' << check << ',' << num(lhs) << ',' << num(rhs) << ',' << num(margin) << ','
               << (ok ? "true" : "false") << '\n';
        if (!ok && failures++ == 0) first_failure = name + " " + check;
    };

    double sharp = 0.0;
    for (int k = 0; k < 50; ++k) {
        const GridFunction f = random_step_function(grid, rng);
        const GridFunction g = random_step_function(grid, rng);
        const std::string name = "step" + std::to_string(k);
        if (f.sup_norm() == 0.0 || g.sup_norm() == 0.0) continue;
        const InequalityReport rep = inequality_suite(f, g, InequalityParams{});
        for (const auto& ch : rep.checks) row(name, ch.name, ch.lhs, ch.rhs, ch.margin, ch.holds);
        sharp = std::max(sharp, rep.fitted_c1);
        for (double r : {1.0, 2.0, 4.0}) {
            const LorentzNorm ln = lorentz_norm(f, {r, r});
            const double direct = lebesgue_norm(f, r);
            const double rel = std::abs(ln.value - direct) / direct;
            row(name, "lorentz_rr_vs_lebesgue_r" + num(r), ln.value, direct, 1e-6 - rel, rel <= 1e-6);
            const double recon = std::abs(ln.rearrangement_form - ln.distribution_form) /
                                 std::max(ln.rearrangement_form, ln.distribution_form);
            row(name, "route_reconciliation_r" + num(r), ln.rearrangement_form, ln.distribution_form, 1e-8 - recon,
                recon <= 1e-8);
        }
    }
    fitted.sharp_C1 = sharp;

    {
        const GridPtr line = make_grid(WeightSpec::radial(0.0, 1), 100.0, 256, 2.0, GridGeometry::Radial);
        const GridFunction f =
            GridFunction::sample(line, [](double x) { return 1.0 / std::sqrt(std::abs(x)); }, Sampling::OuterEdge);
        const double w = weak_norm(f, 2.0);
        const double rel = std::abs(w - std::sqrt(2.0)) / std::sqrt(2.0);
        row("power_profile", "weak_l2_of_inverse_sqrt", w, std::sqrt(2.0), 1e-6 - rel, rel <= 1e-6);
    }
    outputs.push_back("lorentz_selftest.csv");
    log << "lorentz-selftest: " << (failures == 0 ? "all checks hold" : std::to_string(failures) + " failing checks")
        << ", fitted C1 " << num(sharp) << '\n';
    require(failures == 0, ErrorCode::InvariantViolation, "lorentz self-test failed: " + first_failure);
}

void write_functionals(const std::filesystem::path& file, const GlobalRun& run) {
    Csv csv(file, "q,kind,exponent,sup,last_quarter_slope,non_trending");
    for (const auto& f : run.functionals) {
        csv.os << num(f.q) << ',' << to_string(f.kind) << ',' << num(f.exponent) << ',' << num(f.sup) << ','
               << num(f.last_quarter_slope) << ',' << (f.non_trending ? "true" : "false") << '\n';
    }
}

void evolve_command(const ExperimentConfig& c, const RunRequest& req, std::ostream& log, FittedConstants& fitted,
                    std::vector<std::string>& outputs) {
    EvolveConfig cfg = c.evolve;
    const GridPtr grid = grid_for(c, auto_radius(cfg.horizon));
    const Propagator prop(grid);
    const GridFunction u0 = sample(c.u0, grid);
    Trajectory traj;
    switch (c.mode) {
        case EvolveMode::Picard:
            cfg.keep_snapshots = false;
            traj = picard_iterate(u0, cfg, prop);
            break;
        case EvolveMode::Local: {
            fit_evolution_constants(prop, cfg.p, fitted);
            cfg.keep_snapshots = false;
            const LocalRun run = solve_local(u0, cfg.p, prop, fitted, cfg);
            traj = run.trajectory;
            log << "  local time T = " << num(run.T) << ", sup u = " << num(run.observed_sup) << " <= 2 c** ||u0|| = "
                << num(run.bound) << '\n';
            break;
        }
        case EvolveMode::Global: {
            cfg.keep_snapshots = false;
            const GlobalRun run = solve_global_small(c.u0, grid, cfg.p, c.global_r, c.smallness, prop, cfg);
            traj = run.trajectory;
            write_functionals(req.out_dir / "decay_functionals.csv", run);
            outputs.push_back("decay_functionals.csv");
            log << "  smallness " << num(run.smallness) << " < " << num(run.delta) << ", sup decay slope "
                << num(run.sup_decay_slope) << ", accepted " << (run.accepted ? "yes" : "no") << '\n';
            break;
        }
    }
    write_trajectory_csv(req.out_dir / "trajectory.csv", traj);
    outputs.push_back("trajectory.csv");
    log << "evolve: " << to_string(traj.outcome);
    if (!traj.converged()) log << " at t = " << num(traj.escape_time);
    log << ", " << traj.windows << " windows, " << traj.picard_iterations << " Picard iterations\n";
}

void classify_command(const ExperimentConfig& c, const RunRequest& req, std::ostream& log, FittedConstants& fitted,
                      std::vector<std::string>& outputs) {
    DichotomyReport rep;
    rep.weight_case = c.weight.kind;
    rep.dimension = c.weight.dimension;
    rep.alphas = {c.weight.exponent};
    rep.ps = {c.evolve.p};
    rep.cells = {classify(c.weight, c.evolve.p, c.classify_config())};
    write_dichotomy_csv(req.out_dir / "classify.csv", rep);
    outputs.push_back("classify.csv");
    fitted.kaplan_C_star = std::exp(kaplan_log_cstar_bound(c.evolve.p));
    fitted.accepted_delta = rep.cells[0].accepted_delta;
    log << "classify p = " << num(c.evolve.p) << ": " << to_string(rep.cells[0].kind) << " (" << rep.cells[0].reason
        << ")\n";
}

void sweep_command(const ExperimentConfig& c, const RunRequest& req, std::ostream& log, FittedConstants& fitted,
                   std::vector<std::string>& outputs) {
    const DichotomyReport rep = sweep(c.weight.kind, c.weight.dimension, c.sweep_alpha, c.sweep_p,
                                      c.classify_config(), req.jobs);
    write_dichotomy_csv(req.out_dir / "dichotomy.csv", rep);
    write_dichotomy_svg(req.out_dir / "dichotomy.svg", rep);
    outputs.insert(outputs.end(), {"dichotomy.csv", "dichotomy.svg"});
    for (const auto& cell : rep.cells) {
        if (FittedConstants::is_set(cell.accepted_delta)) fitted.accepted_delta = cell.accepted_delta;
        log << "  alpha = " << num(cell.alpha) << ", p = " << num(cell.p) << ": " << to_string(cell.kind);
        if (cell.kind == CellKind::BlowUp) log << " at t = " << num(cell.escape_time);
        if (FittedConstants::is_set(cell.critical_log_slope)) log << ", log slope " << num(cell.critical_log_slope);
        if (cell.kind == CellKind::GlobalCandidate) log << ", sup slope " << num(cell.decay_slope);
        log << '\n';
    }
    log << "sweep: " << rep.cells.size() << " cells written\n";
}

void decay_fit_command(const ExperimentConfig& c, const RunRequest& req, std::ostream& log,
                       std::vector<std::string>& outputs) {
    const std::vector<double> times = c.decay_times.empty() ? geometric_ladder(1.0, 2.0, 9) : c.decay_times;
    const double t_max = *std::max_element(times.begin(), times.end());
    const GridPtr grid = grid_for(c, std::max(20.0, 2.0 * 7.43 * std::sqrt(t_max)));
    const Propagator prop(grid);
    const double h = grid->line_homogeneity();
    auto datum_for = [&](double q) {
        if (c.decay_phi) return sample(*c.decay_phi, grid);
        // an integrable datum decays at the q = 1 rate, so q > 1 needs the borderline tail
        if (q == 1.0) return sample(InitialDatum::bump(0.0, 1.0, 1.0), grid);
        return GridFunction::sample(grid, [&](double x) { return std::pow(std::abs(x), -h / q); }, Sampling::OuterEdge);
    };
    Csv fits(req.out_dir / "decay_fit.csv", "q,r,kind,fitted_slope,predicted_slope,relative_error,constant");
    Csv series(req.out_dir / "decay_series.csv", "q,r,kind,t,norm");
    for (std::size_t k = 0; k < c.decay_q.size(); ++k) {
        const DecayFit f = decay_rates(prop, datum_for(c.decay_q[k]), times, c.decay_q[k], c.decay_r[k], c.decay_kind);
        const double rel = std::abs(f.fit.slope - f.predicted_slope) / std::abs(f.predicted_slope);
        fits.os << num(f.q) << ',' << num(f.r) << ',' << to_string(f.kind) << ',' << num(f.fit.slope) << ','
                << num(f.predicted_slope) << ',' << num(rel) << ',' << num(f.constant) << '\n';
        for (std::size_t i = 0; i < f.times.size(); ++i) {
            series.os << num(f.q) << ',' << num(f.r) << ',' << to_string(f.kind) << ',' << num(f.times[i]) << ','
                      << num(f.norms[i]) << '\n';
        }
        log << "  (q, r) = (" << num(f.q) << ", " << num(f.r) << "): slope " << num(f.fit.slope) << ", predicted "
            << num(f.predicted_slope) << '\n';
    }
    outputs.insert(outputs.end(), {"decay_fit.csv", "decay_series.csv"});
    log << "decay-fit: " << c.decay_q.size() << " pairs\n";
}

}  // namespace

const std::vector<std::string>& experiment_commands() {
    static const std::vector<std::string> commands{"kernel-verify", "lorentz-selftest", "evolve",
                                                   "classify",      "sweep",            "decay-fit"};
    return commands;
}

double auto_radius(double t_max) {
    return std::max(20.0, 7.43 * std::sqrt(t_max));
}

void run_experiment(const RunRequest& req, std::ostream& log) {
    const auto& cmds = experiment_commands();
    require(std::find(cmds.begin(), cmds.end(), req.command) != cmds.end(), ErrorCode::Config,
            "unknown command '" + req.command + "'");
    require(req.jobs >= 1, ErrorCode::Config, "--jobs must be at least 1");
    ExperimentConfig c = ExperimentConfig::from_file(ConfigFile::load(req.config));
    if (req.seed) c.seed = *req.seed;

    std::error_code ec;
    std::filesystem::create_directories(req.out_dir, ec);
    require(!ec, ErrorCode::Io, "cannot create " + req.out_dir.string() + ": " + ec.message());

    FittedConstants fitted;
    std::vector<std::string> outputs;
    try {
        if (req.command == "kernel-verify") {
            kernel_verify(c, req, log, fitted, outputs);
        } else if (req.command == "lorentz-selftest") {
            lorentz_selftest(c, req, log, fitted, outputs);
        } else if (req.command == "evolve") {
            evolve_command(c, req, log, fitted, outputs);
        } else if (req.command == "classify") {
            classify_command(c, req, log, fitted, outputs);
        } else if (req.command == "sweep") {
            sweep_command(c, req, log, fitted, outputs);
        } else {
            decay_fit_command(c, req, log, outputs);
        }
    } catch (...) {
        write_manifest(req.out_dir, req, c, fitted, outputs);
        throw;
    }
    write_manifest(req.out_dir, req, c, fitted, outputs);
}

}  // namespace fujita
