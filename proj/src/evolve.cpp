#include "fujita/evolve.hpp"

#include "fujita/errors.hpp"
#include "fujita/lorentz.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fujita {

namespace {

// (1 - (1 + z) e^{-z}) / z^2, weight of the left node in the product trapezoid.
double phi_left(double z) {
    if (z < 0.1) {
        double term = 1.0, sum = 0.0;
        for (int k = 0; k < 14; ++k) {
            sum += term / (k + 2);
            term *= -z / (k + 1);
        }
        return sum;
    }
    return (1.0 - (1.0 + z) * std::exp(-z)) / (z * z);
}

// (z - 1 + e^{-z}) / z^2, weight of the right node.
double phi_right(double z) {
    if (z < 0.1) {
        double term = 1.0, sum = 0.0;
        for (int k = 0; k < 14; ++k) {
            sum += term / ((k + 1.0) * (k + 2.0));
            term *= -z / (k + 1);
        }
        return sum;
    }
    return (z - 1.0 + std::exp(-z)) / (z * z);
}

double sup_of(const Eigen::VectorXd& v) {
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

enum class WindowStatus { Converged, Exceeded, NotConverged };

struct WindowResult {
    WindowStatus status = WindowStatus::NotConverged;
    Eigen::VectorXd end_modal;
    double exceed_time = 0.0;
    int iterations = 0;
    double min_gap = kInf;
    double max_ratio = 0.0;
    std::vector<double> differences;
};

WindowResult solve_window(const Propagator& prop, const Eigen::VectorXd& start, double tau, double length,
                          const EvolveConfig& cfg, double threshold) {
    const int m = cfg.duhamel_steps;
    const auto mg = static_cast<Eigen::Index>(prop.size());
    const Eigen::VectorXd& lambda = prop.eigenvalues();

    std::vector<double> offset(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) {
        const double s = static_cast<double>(i) / m;
        offset[static_cast<std::size_t>(i)] = length * s * s;
    }
    offset[static_cast<std::size_t>(m)] = length;

    Eigen::MatrixXd lin(mg, m + 1);
    Eigen::MatrixXd decay(mg, m), left(mg, m), right(mg, m);
    for (int i = 0; i <= m; ++i) {
        lin.col(i) = (-lambda.array() * offset[static_cast<std::size_t>(i)]).exp() * start.array();
    }
    for (int i = 0; i < m; ++i) {
        const double h = offset[static_cast<std::size_t>(i) + 1] - offset[static_cast<std::size_t>(i)];
        for (Eigen::Index k = 0; k < mg; ++k) {
            const double z = lambda(k) * h;
            decay(k, i) = std::exp(-z);
            left(k, i) = h * phi_left(z);
            right(k, i) = h * phi_right(z);
        }
    }

    WindowResult res;
    auto first_exceed = [&](const Eigen::MatrixXd& u) -> int {
        for (int i = 0; i <= m; ++i) {
            if (u.col(i).maxCoeff() > threshold) return i;
        }
        return -1;
    };

    Eigen::MatrixXd u = prop.synthesis() * lin;
    if (const int i = first_exceed(u); i >= 0) {
        res.status = WindowStatus::Exceeded;
        res.exceed_time = tau + offset[static_cast<std::size_t>(i)];
        return res;
    }

    Eigen::MatrixXd duhamel(mg, m + 1);
    double prev_diff = 0.0;
    for (int n = 1; n <= cfg.max_picard; ++n) {
        const Eigen::MatrixXd f = u.cwiseMax(0.0).array().pow(cfg.p).matrix();
        const Eigen::MatrixXd fh = prop.analysis() * f;
        duhamel.col(0).setZero();
        for (int i = 0; i < m; ++i) {
            duhamel.col(i + 1) = decay.col(i).cwiseProduct(duhamel.col(i)) + left.col(i).cwiseProduct(fh.col(i)) +
                                 right.col(i).cwiseProduct(fh.col(i + 1));
        }
        Eigen::MatrixXd next = prop.synthesis() * (lin + duhamel);
        const Eigen::MatrixXd delta = next - u;
        const double diff = delta.cwiseAbs().maxCoeff();
        res.min_gap = std::min(res.min_gap, delta.minCoeff());
        res.differences.push_back(diff);
        if (n >= 2 && prev_diff > 1e-13 * std::max(1.0, next.cwiseAbs().maxCoeff())) {
            res.max_ratio = std::max(res.max_ratio, diff / prev_diff);
        }
        prev_diff = diff;
        res.iterations = n;
        u.swap(next);

        if (const int i = first_exceed(u); i >= 0) {
            res.status = WindowStatus::Exceeded;
            res.exceed_time = tau + offset[static_cast<std::size_t>(i)];
            return res;
        }
        if (!std::isfinite(diff)) return res;
        if (diff <= cfg.picard_tol * std::max(1.0, u.cwiseAbs().maxCoeff())) {
            res.status = WindowStatus::Converged;
            res.end_modal = lin.col(m) + duhamel.col(m);
            return res;
        }
    }
    return res;
}

double last_quarter_slope(const std::vector<double>& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    const std::size_t k = std::max<std::size_t>(3, (n + 3) / 4);
    require(n >= k, ErrorCode::InvalidArgument, "decay functional needs at least 3 recorded times");
    std::vector<double> ts(t.end() - static_cast<std::ptrdiff_t>(k), t.end());
    std::vector<double> vs(v.end() - static_cast<std::ptrdiff_t>(k), v.end());
    return fit_loglog(ts, vs).slope;
}

std::vector<double> uniform_times(double horizon, int count) {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) out[static_cast<std::size_t>(k) - 1] = horizon * k / count;
    out.back() = horizon;
    return out;
}

}  // namespace

InitialDatum InitialDatum::zero() {
    return {};
}

InitialDatum InitialDatum::bump(double center, double width, double height) {
    require(width > 0.0 && height >= 0.0, ErrorCode::InvalidArgument, "bump needs width > 0 and height >= 0");
    InitialDatum d;
    d.kind = Kind::Bump;
    d.center = center;
    d.width = width;
    d.height = height;
    return d;
}

InitialDatum InitialDatum::decay_profile(double delta, double p) {
    require(delta >= 0.0 && p > 1.0, ErrorCode::InvalidArgument, "decay profile needs delta >= 0 and p > 1");
    InitialDatum d;
    d.kind = Kind::DecayProfile;
    d.delta = delta;
    d.p = p;
    return d;
}

InitialDatum InitialDatum::indicator(double radius) {
    require(radius > 0.0, ErrorCode::InvalidArgument, "indicator needs a positive radius");
    InitialDatum d;
    d.kind = Kind::Indicator;
    d.radius = radius;
    d.height = 1.0;
    return d;
}

InitialDatum InitialDatum::table(const std::filesystem::path& file) {
    std::ifstream is(file);
    require(static_cast<bool>(is), ErrorCode::Io, "cannot read datum table " + file.string());
    InitialDatum d;
    d.kind = Kind::Table;
    d.source = file.string();
    d.height = 1.0;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        for (char& c : line) {
            if (c == ',') c = ' ';
        }
        std::istringstream ls(line);
        double x = 0.0, v = 0.0;
        if (!(ls >> x)) continue;
        require(static_cast<bool>(ls >> v), ErrorCode::Io,
                file.string() + ":" + std::to_string(lineno) + ": expected two columns");
        require(d.table_x.empty() || x > d.table_x.back(), ErrorCode::Io,
                file.string() + ":" + std::to_string(lineno) + ": abscissae must increase");
        require(v >= 0.0 && std::isfinite(v), ErrorCode::Io,
                file.string() + ":" + std::to_string(lineno) + ": values must be finite and nonnegative");
        d.table_x.push_back(x);
        d.table_v.push_back(v);
    }
    require(d.table_x.size() >= 2, ErrorCode::Io, "datum table needs at least two rows: " + file.string());
    return d;
}

double InitialDatum::operator()(double x) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Bump: {
            const double z = (x - center) / width;
            return height * std::exp(-z * z);
        }
        case Kind::DecayProfile: return delta / (1.0 + std::pow(std::abs(x), 2.0 / (p - 1.0)));
        case Kind::Indicator: return std::abs(x) <= radius ? height : 0.0;
        case Kind::Table: {
            const double ax = std::abs(x);
            if (ax < table_x.front() || ax > table_x.back()) return 0.0;
            const auto it = std::upper_bound(table_x.begin(), table_x.end(), ax);
            if (it == table_x.end()) return height * table_v.back();
            const auto k = static_cast<std::size_t>(it - table_x.begin());
            const double s = (ax - table_x[k - 1]) / (table_x[k] - table_x[k - 1]);
            return height * ((1.0 - s) * table_v[k - 1] + s * table_v[k]);
        }
    }
    return 0.0;
}

InitialDatum InitialDatum::scaled(double factor) const {
    InitialDatum d = *this;
    if (kind == Kind::DecayProfile) {
        d.delta *= factor;
    } else {
        d.height *= factor;
    }
    return d;
}

std::string InitialDatum::describe() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::Zero: os << "zero"; break;
        case Kind::Bump:
            os << "bump(" << format_double(center) << ", " << format_double(width) << ", " << format_double(height)
               << ")";
            break;
        case Kind::DecayProfile: os << "decay_profile(" << format_double(delta) << ", " << format_double(p) << ")"; break;
        case Kind::Indicator:
            os << "indicator(" << format_double(radius) << ")";
            if (height != 1.0) os << " * " << format_double(height);
            break;
        case Kind::Table:
            os << "table(" << source << ")";
            if (height != 1.0) os << " * " << format_double(height);
            break;
    }
    return os.str();
}

GridFunction sample(const InitialDatum& datum, GridPtr grid, Sampling sampling) {
    return GridFunction::sample(std::move(grid), [&datum](double x) { return datum(x); }, sampling);
}

std::string NormSpec::column() const {
    return std::string(kind == NormKind::Strong ? "strong_q" : "weak_q") + format_double(q);
}

void EvolveConfig::validate() const {
    require(p > 1.0 && std::isfinite(p), ErrorCode::InvalidArgument, "evolve.p must exceed 1");
    require(horizon > 0.0 && std::isfinite(horizon), ErrorCode::InvalidArgument, "evolve.horizon must be positive");
    require(duhamel_steps >= 2, ErrorCode::InvalidArgument, "evolve.duhamel_nodes must be at least 2");
    require(picard_tol > 0.0, ErrorCode::InvalidArgument, "evolve.picard_tol must be positive");
    require(blowup_threshold >= 0.0, ErrorCode::InvalidArgument, "evolve.blowup_threshold must be nonnegative");
    require(blowup_factor > 1.0, ErrorCode::InvalidArgument, "evolve.blowup_factor must exceed 1");
    require(max_picard >= 1, ErrorCode::InvalidArgument, "evolve.max_picard must be positive");
    require(contraction > 0.0 && contraction < 1.0, ErrorCode::InvalidArgument,
            "window contraction bound must lie in (0, 1)");
    for (const auto& n : norms) {
        require(n.q >= 1.0, ErrorCode::InvalidArgument, "recorded norm index must be >= 1");
    }
    for (std::size_t k = 0; k < record_times.size(); ++k) {
        require(record_times[k] > 0.0 && (k == 0 || record_times[k] > record_times[k - 1]),
                ErrorCode::InvalidArgument, "record times must be positive and increasing");
    }
}

double EvolveConfig::resolved_threshold(double u0_sup) const {
    if (blowup_threshold > 0.0) return blowup_threshold;
    return blowup_factor * std::max(u0_sup, 1e-300);
}

std::vector<double> record_ladder(double horizon, double t0, double ratio) {
    require(horizon > 0.0 && t0 > 0.0 && ratio > 1.0, ErrorCode::InvalidArgument, "record ladder parameters");
    std::vector<double> out;
    for (double t = t0; t < horizon * (1.0 - 1e-12); t *= ratio) out.push_back(t);
    out.push_back(horizon);
    return out;
}

const char* to_string(Outcome outcome) noexcept {
    switch (outcome) {
        case Outcome::Converged: return "converged";
        case Outcome::ThresholdExceeded: return "threshold_exceeded";
        case Outcome::IterationBudgetExhausted: return "iteration_budget_exhausted";
    }
    return "?";
}

const NormSeries* Trajectory::find(const NormSpec& spec) const {
    for (const auto& s : norms) {
        if (s.spec.kind == spec.kind && s.spec.q == spec.q) return &s;
    }
    return nullptr;
}

Trajectory picard_iterate(const GridFunction& u0, const EvolveConfig& cfg, const Propagator& prop) {
    cfg.validate();
    require(u0.grid == prop.grid() || u0.grid->hash() == prop.grid()->hash(), ErrorCode::GridMismatch,
            "picard_iterate: datum and propagator live on different grids");
    for (double v : u0.values) require(v >= 0.0, ErrorCode::InvalidArgument, "picard_iterate: datum must be nonnegative");

    const std::vector<double> records = cfg.record_times.empty() ? record_ladder(cfg.horizon) : cfg.record_times;
    require(records.back() <= cfg.horizon * (1.0 + 1e-12), ErrorCode::InvalidArgument,
            "record times extend past the horizon");

    Trajectory traj;
    traj.threshold = cfg.resolved_threshold(u0.sup_norm());
    traj.min_monotone_gap = kInf;
    traj.min_duhamel_gap = kInf;
    for (const auto& n : cfg.norms) traj.norms.push_back({n, {}});

    Eigen::VectorXd modal = prop.to_modal(u0.values);
    double tau = 0.0;
    double sup_now = u0.sup_norm();
    const double min_window = 1e-13;

    for (double target : records) {
        while (tau < target) {
            double length = target - tau;
            if (sup_now > 0.0) length = std::min(length, cfg.contraction / (cfg.p * std::pow(sup_now, cfg.p - 1.0)));
            WindowResult res;
            for (;;) {
                res = solve_window(prop, modal, tau, length, cfg, traj.threshold);
                traj.picard_iterations += res.iterations;
                if (res.status != WindowStatus::NotConverged) break;
                length *= 0.5;
                if (length < min_window * std::max(1.0, tau)) {
                    traj.outcome = Outcome::IterationBudgetExhausted;
                    traj.escape_time = tau;
                    break;
                }
            }
            if (traj.outcome == Outcome::IterationBudgetExhausted) break;
            traj.min_monotone_gap = std::min(traj.min_monotone_gap, res.min_gap);
            traj.max_contraction = std::max(traj.max_contraction, res.max_ratio);
            if (traj.windows == 0) traj.first_window_differences = res.differences;
            ++traj.windows;
            traj.max_window_iterations = std::max(traj.max_window_iterations, res.iterations);
            if (res.status == WindowStatus::Exceeded) {
                traj.outcome = Outcome::ThresholdExceeded;
                traj.escape_time = res.exceed_time;
                break;
            }
            modal = res.end_modal;
            tau = (length >= target - tau) ? target : tau + length;
            sup_now = sup_of(prop.synthesis() * modal);
        }
        if (traj.outcome != Outcome::Converged) break;

        GridFunction u(prop.grid(), prop.to_nodal(modal));
        const GridFunction lin = prop.apply(tau, u0);
        for (std::size_t i = 0; i < u.size(); ++i) traj.min_duhamel_gap = std::min(traj.min_duhamel_gap, u[i] - lin[i]);
        traj.times.push_back(tau);
        traj.sup.push_back(u.sup_norm());
        for (auto& s : traj.norms) s.values.push_back(norm_of(u, s.spec.q, s.spec.kind));
        if (cfg.keep_snapshots) traj.snapshots.push_back(std::move(u));
    }
    if (!std::isfinite(traj.min_monotone_gap)) traj.min_monotone_gap = 0.0;
    if (!std::isfinite(traj.min_duhamel_gap)) traj.min_duhamel_gap = 0.0;
    return traj;
}

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj) {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), ErrorCode::Io, "cannot write " + file.string());
    os << "time,sup_norm";
    for (const auto& s : traj.norms) os << ',' << s.spec.column();
    os << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << format_double(traj.times[k]) << ',' << format_double(traj.sup[k]);
        for (const auto& s : traj.norms) os << ',' << format_double(s.values[k]);
        os << '\n';
    }
    require(static_cast<bool>(os), ErrorCode::Io, "short write on " + file.string());
}

LocalRun solve_local(const GridFunction& u0, double p, const Propagator& prop, const FittedConstants& constants,
                     EvolveConfig cfg) {
    require(FittedConstants::is_set(constants.c_double_star) && FittedConstants::is_set(constants.local_C1),
            ErrorCode::InvalidArgument, "solve_local needs fitted c** and C1");
    const double c = constants.c_double_star;
    const double sup0 = u0.sup_norm();
    LocalRun run;
    run.T = sup0 > 0.0 ? 1.0 / (constants.local_C1 * std::pow(2.0, p) * std::pow(c * sup0, p - 1.0)) : 1.0;
    run.bound = 2.0 * c * sup0;
    cfg.p = p;
    cfg.horizon = run.T;
    cfg.record_times = uniform_times(run.T, 32);
    run.trajectory = picard_iterate(u0, cfg, prop);
    require(run.trajectory.converged(), ErrorCode::NonConvergence,
            std::string("local solve did not converge: ") + to_string(run.trajectory.outcome));
    for (double s : run.trajectory.sup) run.observed_sup = std::max(run.observed_sup, s);
    require(run.observed_sup <= run.bound * (1.0 + 1e-9), ErrorCode::InvariantViolation,
            "local bound sup u <= 2 c** ||u0|| violated: " + format_double(run.observed_sup) + " > " +
                format_double(run.bound));
    return run;
}

std::vector<GridFunction> split_step_solve(const GridFunction& u0, double p, std::span<const double> times,
                                           int steps_per_unit, int min_steps) {
    require(p > 1.0, ErrorCode::InvalidArgument, "split_step_solve: p must exceed 1");
    std::vector<double> u = u0.values;
    const Grid& grid = *u0.grid;
    const double e = 1.0 / (p - 1.0);
    auto react = [&](double dt) {
        for (double& v : u) {
            if (v <= 0.0) continue;
            const double den = 1.0 - (p - 1.0) * dt * std::pow(v, p - 1.0);
            require(den > 0.0, ErrorCode::NonConvergence, "split-step reaction blew up");
            v *= std::pow(den, -e);
        }
    };
    std::vector<GridFunction> out;
    double t = 0.0;
    for (double target : times) {
        require(target > t, ErrorCode::InvalidArgument, "split_step_solve: times must increase");
        const int steps = std::max(min_steps, static_cast<int>(std::ceil(steps_per_unit * (target - t))));
        const double dt = (target - t) / steps;
        for (int s = 0; s < steps; ++s) {
            react(0.5 * dt);
            u = implicit_evolve(grid, u, dt, 1);
            react(0.5 * dt);
        }
        t = target;
        out.emplace_back(u0.grid, u);
    }
    return out;
}

double balancing_lambda(const InitialDatum& datum, GridPtr grid, double p, double r) {
    const double beta = 2.0 / (p - 1.0);
    auto gap = [&](double log_lambda) {
        const double lam = std::exp(log_lambda);
        const double amp = std::pow(lam, beta);
        const GridFunction f = GridFunction::sample(grid, [&](double x) { return amp * datum(lam * x); });
        return std::log(lebesgue_norm(f, r)) - std::log(f.sup_norm());
    };
    const GridFunction base = sample(datum, grid);
    require(base.sup_norm() > 0.0, ErrorCode::Vacuous, "balancing_lambda: datum vanishes on the grid");
    double lo = 0.0, hi = 0.0;
    double g0 = gap(0.0);
    if (g0 == 0.0) return 1.0;
    // gap decreases in lambda: expand a bracket in log space.
    double step = std::log(2.0);
    if (g0 > 0.0) {
        hi = step;
        while (gap(hi) > 0.0) {
            hi += step;
            require(hi < 200.0, ErrorCode::FitFailure, "balancing_lambda: no sign change");
        }
        lo = hi - step;
    } else {
        lo = -step;
        while (gap(lo) < 0.0) {
            lo -= step;
            require(lo > -200.0, ErrorCode::FitFailure, "balancing_lambda: no sign change");
        }
        hi = lo + step;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

GlobalRun solve_global_small(const InitialDatum& datum, GridPtr grid, double p, double r, double delta,
                             const Propagator& prop, EvolveConfig cfg) {
    const double h = grid->line_homogeneity();
    const double p_star = 1.0 + 2.0 / h;
    require(p > p_star, ErrorCode::RegimeMismatch,
            "global small-data runs need p > p* = " + format_double(p_star) + ", got p = " + format_double(p));
    const double r_star = h / 2.0 * (p - 1.0);
    cfg.p = p;

    GlobalRun run;
    run.r = r;
    run.delta = delta;
    const GridFunction u0 = sample(datum, grid);
    const std::vector<double> ladder = cfg.record_times.empty() ? record_ladder(cfg.horizon) : cfg.record_times;

    double r_ref = r_star;
    std::vector<double> qs;
    if (r == 0.0) {
        run.smallness = weak_norm(u0, r_star);
        require(run.smallness < delta, ErrorCode::SmallnessUnmet,
                "smallness unmet: ||u0||_{L^{r*,inf}} = " + format_double(run.smallness) + " >= delta = " +
                    format_double(delta) + " (r* = " + format_double(r_star) + ")");
        qs = {r_star, 2.0 * r_star, kInf};
        cfg.norms.clear();
        for (double q : qs) cfg.norms.push_back({q, NormKind::Weak});
        cfg.record_times = ladder;
        run.trajectory = picard_iterate(u0, cfg, prop);
    } else {
        require(r >= 1.0 && r <= r_star, ErrorCode::InvalidArgument,
                "rescaled small-data runs need 1 <= r <= r* = " + format_double(r_star));
        const double nr = lebesgue_norm(u0, r);
        const double ns = u0.sup_norm();
        run.smallness = std::pow(nr, r / r_star) * std::pow(ns, 1.0 - r / r_star);
        require(run.smallness < delta, ErrorCode::SmallnessUnmet,
                "smallness unmet: ||u0||_r^{r/r*} ||u0||_inf^{1-r/r*} = " + format_double(run.smallness) +
                    " >= delta = " + format_double(delta));
        r_ref = r;
        qs = {r, 2.0 * r, kInf};
        run.rescaled = true;
        run.lambda = balancing_lambda(datum, grid, p, r);
        const double lam = run.lambda;
        const double beta = 2.0 / (p - 1.0);
        const double amp = std::pow(lam, beta);
        const GridFunction v0 = GridFunction::sample(grid, [&](double x) { return amp * datum(lam * x); });

        EvolveConfig scaled = cfg;
        scaled.norms.clear();
        for (double q : qs) scaled.norms.push_back({q, NormKind::Strong});
        scaled.horizon = cfg.horizon / (lam * lam);
        scaled.record_times.clear();
        for (double t : ladder) scaled.record_times.push_back(t / (lam * lam));
        scaled.keep_snapshots = false;
        if (cfg.blowup_threshold > 0.0) scaled.blowup_threshold = cfg.blowup_threshold * amp;
        Trajectory tv = picard_iterate(v0, scaled, prop);

        // u(x, t) = lambda^{-beta} v(x / lambda, t / lambda^2)
        Trajectory& tu = run.trajectory;
        tu = tv;
        for (double& t : tu.times) t *= lam * lam;
        for (double& s : tu.sup) s /= amp;
        for (auto& series : tu.norms) {
            const double f = std::isinf(series.spec.q) ? 1.0 / amp : std::pow(lam, h / series.spec.q) / amp;
            for (double& v : series.values) v *= f;
        }
        tu.escape_time *= lam * lam;
        tu.threshold /= amp;
        tu.min_monotone_gap /= amp;
        tu.min_duhamel_gap /= amp;
    }

    const Trajectory& tr = run.trajectory;
    bool all_flat = tr.converged() && tr.times.size() >= 3;
    for (const auto& series : tr.norms) {
        DecayFunctional f;
        f.q = series.spec.q;
        f.kind = series.spec.kind;
        f.exponent = h / 2.0 * (1.0 / r_ref - (std::isinf(f.q) ? 0.0 : 1.0 / f.q));
        for (std::size_t k = 0; k < tr.times.size(); ++k) {
            const double v = std::pow(1.0 + tr.times[k], f.exponent) * series.values[k];
            f.values.push_back(v);
            f.sup = std::max(f.sup, v);
        }
        if (tr.times.size() >= 3 && f.sup > 0.0) {
            f.last_quarter_slope = last_quarter_slope(tr.times, f.values);
            f.non_trending = std::abs(f.last_quarter_slope) <= kNonTrendingTolerance;
        } else {
            f.non_trending = f.sup == 0.0 && tr.converged();
        }
        all_flat = all_flat && f.non_trending;
        run.functionals.push_back(std::move(f));
    }
    if (tr.times.size() >= 3 && *std::min_element(tr.sup.begin(), tr.sup.end()) > 0.0) {
        run.sup_decay_slope = last_quarter_slope(tr.times, tr.sup);
    }
    run.accepted = all_flat || (tr.converged() && u0.sup_norm() == 0.0);
    return run;
}

double stability_check(const GridFunction& u01, const GridFunction& u02, double p, double sigma,
                       const Propagator& prop, EvolveConfig cfg) {
    require_same_grid(u01, u02);
    double d0 = 0.0;
    for (std::size_t i = 0; i < u01.size(); ++i) d0 = std::max(d0, std::abs(u01[i] - u02[i]));
    if (d0 == 0.0) return 0.0;
    cfg.p = p;
    cfg.horizon = sigma;
    cfg.record_times = uniform_times(sigma, 16);
    cfg.keep_snapshots = true;
    const Trajectory a = picard_iterate(u01, cfg, prop);
    const Trajectory b = picard_iterate(u02, cfg, prop);
    require(a.converged() && b.converged(), ErrorCode::NonConvergence,
            "stability_check: both solutions must exist on [0, sigma]");
    double ratio = 0.0;
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < u01.size(); ++i) d = std::max(d, std::abs(a.snapshots[k][i] - b.snapshots[k][i]));
        ratio = std::max(ratio, d / d0);
    }
    return ratio;
}

}  // namespace fujita
