#pragma once

#include "fujita/fitted.hpp"
#include "fujita/kernel.hpp"
#include "fujita/semigroup.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fujita {

/// Initial datum as a function of the grid coordinate (|x_1| or |x|).
struct InitialDatum {
    enum class Kind { Zero, Bump, DecayProfile, Indicator, Table };

    Kind kind = Kind::Zero;
    double center = 0.0;
    double width = 1.0;
    double height = 0.0;
    double delta = 0.0;
    double p = 2.0;
    double radius = 1.0;
    std::vector<double> table_x;
    std::vector<double> table_v;
    std::string source;

    static InitialDatum zero();
    /// height * exp(-((x - center)/width)^2)
    static InitialDatum bump(double center, double width, double height);
    /// delta / (1 + |x|^{2/(p-1)})
    static InitialDatum decay_profile(double delta, double p);
    /// 1 on |x| <= radius
    static InitialDatum indicator(double radius);
    /// Two whitespace-separated columns (x, value); linear in between, 0 outside.
    static InitialDatum table(const std::filesystem::path& file);

    double operator()(double x) const;
    /// Same shape, amplitude multiplied by `factor`.
    InitialDatum scaled(double factor) const;
    std::string describe() const;
};

GridFunction sample(const InitialDatum& datum, GridPtr grid, Sampling sampling = Sampling::Nodal);

struct NormSpec {
    double q = kInf;
    NormKind kind = NormKind::Weak;
    std::string column() const;
};

struct EvolveConfig {
    double p = 2.0;
    double horizon = 1.0;
    /// Duhamel quadrature nodes per window.
    int duhamel_steps = 64;
    /// Sup-norm Cauchy tolerance, scaled by max(1, sup u).
    double picard_tol = 1e-10;
    /// Sup level declaring numerical blow-up; 0 selects blowup_factor * ||u0||_inf.
    double blowup_threshold = 0.0;
    double blowup_factor = 1e6;
    int max_picard = 60;
    /// Window length bound kappa / (p ||u||^{p-1}).
    double contraction = 0.2;
    std::vector<NormSpec> norms;
    /// Times at which the trajectory is recorded; empty selects the ladder
    /// 0.25 * 2^k up to the horizon.
    std::vector<double> record_times;
    bool keep_snapshots = true;

    void validate() const;
    double resolved_threshold(double u0_sup) const;
};

/// Geometric ladder t0 * ratio^k up to and including the horizon.
std::vector<double> record_ladder(double horizon, double t0 = 0.25, double ratio = 2.0);

enum class Outcome { Converged, ThresholdExceeded, IterationBudgetExhausted };

const char* to_string(Outcome outcome) noexcept;

struct NormSeries {
    NormSpec spec;
    std::vector<double> values;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> sup;
    std::vector<NormSeries> norms;
    std::vector<GridFunction> snapshots;
    Outcome outcome = Outcome::Converged;
    /// First Duhamel node time with sup u above the threshold.
    double escape_time = 0.0;
    double threshold = 0.0;

    int windows = 0;
    int picard_iterations = 0;
    int max_window_iterations = 0;
    /// min over all nodes, node times and iterations of u_{n+1} - u_n.
    double min_monotone_gap = 0.0;
    /// min over record times and nodes of u(t) - S(t)u0 w.
    double min_duhamel_gap = 0.0;
    /// max ratio of successive Picard sup-differences.
    double max_contraction = 0.0;
    /// Successive sup-differences of the first window.
    std::vector<double> first_window_differences;

    bool converged() const { return outcome == Outcome::Converged; }
    const NormSeries* find(const NormSpec& spec) const;
};

/// Windowed Picard iteration of the mild formulation.
///
/// Each window [tau, tau + L] uses m nodes tau + L (i/m)^2 and iterates
/// u_{n+1}(t_i) = S(t_i - tau) u(tau) + Duhamel_i[u_n^p], starting from the
/// linear part. The Duhamel term is a product trapezoid in modal coordinates:
/// the exponential is integrated exactly against the piecewise linear
/// interpolant of u_n^p. A window that fails to converge is halved.
Trajectory picard_iterate(const GridFunction& u0, const EvolveConfig& cfg, const Propagator& prop);

void write_trajectory_csv(const std::filesystem::path& file, const Trajectory& traj);

struct LocalRun {
    Trajectory trajectory;
    double T = 0.0;
    double bound = 0.0;  ///< 2 c** ||u0||_inf
    double observed_sup = 0.0;
};

/// Local existence: T from C1 T 2^p (c** ||u0||)^{p-1} <= 1, then
/// Picard on [0, T]. Throws Error(InvariantViolation) if sup u exceeds 2 c** ||u0||.
LocalRun solve_local(const GridFunction& u0, double p, const Propagator& prop, const FittedConstants& constants,
                     EvolveConfig cfg = {});

/// Strang splitting: half reaction (exact ODE), implicit Euler diffusion, half reaction.
std::vector<GridFunction> split_step_solve(const GridFunction& u0, double p, std::span<const double> times,
                                           int steps_per_unit, int min_steps = 400);

struct DecayFunctional {
    double q = kInf;
    NormKind kind = NormKind::Weak;
    double exponent = 0.0;  ///< power of (1 + t)
    std::vector<double> values;
    double sup = 0.0;
    double last_quarter_slope = 0.0;
    bool non_trending = false;
};

struct GlobalRun {
    Trajectory trajectory;  ///< in original variables
    bool rescaled = false;
    double lambda = 1.0;
    double r = 0.0;  ///< 0 for the weak-norm smallness form
    double smallness = 0.0;  ///< measured smallness functional
    double delta = 0.0;      ///< threshold it was compared against
    std::vector<DecayFunctional> functionals;
    double sup_decay_slope = 0.0;  ///< last-quarter slope of log sup vs log t
    bool accepted = false;
};

/// Tolerance on the last-quarter slope of a decay functional.
inline constexpr double kNonTrendingTolerance = 0.05;

/// Small-data global run. With r = 0 the smallness functional is
/// ||u0||_{L^{r*,inf}} and the functionals use weak norms for q in
/// {r*, 2r*, inf}; with 1 <= r <= r* it is ||u0||_r^{r/r*} ||u0||_inf^{1-r/r*},
/// the datum is rescaled by lambda^beta u0(lambda x) so the two norms agree,
/// and the functionals use strong norms for q in {r, 2r, inf}.
/// Throws Error(SmallnessUnmet) when the functional is not below delta and
/// Error(RegimeMismatch) unless p > p*.
GlobalRun solve_global_small(const InitialDatum& datum, GridPtr grid, double p, double r, double delta,
                             const Propagator& prop, EvolveConfig cfg);

/// Balancing scale for the rescaled datum: ||u_{0,lambda}||_r = ||u_{0,lambda}||_inf.
double balancing_lambda(const InitialDatum& datum, GridPtr grid, double p, double r);

/// max over recorded t <= sigma of ||u1(t) - u2(t)||_inf / ||u01 - u02||_inf (0 for equal data).
double stability_check(const GridFunction& u01, const GridFunction& u02, double p, double sigma,
                       const Propagator& prop, EvolveConfig cfg = {});

}  // namespace fujita
