#pragma once

#include "fujita/evolve.hpp"
#include "fujita/kernel.hpp"
#include "fujita/weights.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fujita {

struct CriticalParameters {
    double homogeneity = 1.0;  ///< n + alpha
    double p_star = 3.0;       ///< 1 + 2/(n + alpha)
    double r_star = 1.0;       ///< (n + alpha)/2 (p - 1)
    /// r* <= 1: the small-data global theory does not apply.
    bool r_star_at_most_one = true;
};

CriticalParameters critical_parameters(const WeightSpec& spec, double p);

/// Relative distance at which p is treated as the critical exponent.
inline constexpr double kCriticalGuard = 1e-12;

/// True when |p - p*| <= kCriticalGuard * p*.
bool is_critical(const WeightSpec& spec, double p);

/// log A_k, A_1 = 1, A_{k+1} = A_k^p (p-1)/(p^{k+1}-1).
double kaplan_log_ak(double p, int k);

/// Upper bound (1 + log p) sum_{j>=2} j p^{-j} for log C*, truncated at
/// j = 60 with the closed-form remainder added.
double kaplan_log_cstar_bound(double p);

/// sum_{j>=2} p^{-j} log((p^j - 1)/(p - 1)) = -lim log A_k / p^k.
double kaplan_log_cstar_sum(double p);

struct KaplanSeries {
    std::vector<double> times;
    std::vector<double> values;  ///< t^{1/(p-1)} ||S(t)u0||_inf
    std::vector<double> log_ak;  ///< log A_k for k = 1..30
    double log_cstar_bound = 0.0;
    double cstar_estimate = 0.0;  ///< exp(log_cstar_bound)
    double max_value = 0.0;
    bool below_estimate = true;
};

/// Throws Error(Vacuous) for u0 = 0.
KaplanSeries kaplan_bound_series(const GridFunction& u0, double p, std::span<const double> times,
                                 const Propagator& prop);

struct EscapeEvidence {
    double exponent = 0.0;  ///< 1/(p-1) - (n+alpha)/2, positive below p*
    KaplanSeries series;
    /// First t with t^{1/(p-1)} ||S(t)u0||_inf > C*; NaN when the horizon is reached first.
    double crossing_time = 0.0;
    /// min over the ladder of the heat-core constant C in S(t)u0 >= C M t^{-(n+alpha)/2}.
    double core_constant = 0.0;
    bool core_bound_holds = false;
};

/// Linear-part contradiction witness on the ladder 0.25 * 2^{k/8} up to `horizon`.
/// Throws Error(RegimeMismatch) unless p < p*.
EscapeEvidence subcritical_escape(const GridFunction& u0, double p, const Propagator& prop, double horizon);

struct CriticalGrowth {
    std::vector<double> times;
    std::vector<double> core_integral;  ///< I(t) = int_{|x| <= sqrt t} u w dx
    double slope = 0.0;                 ///< of I against log t on t > 3
    bool conclusive = false;
    std::string reason;
    Outcome outcome = Outcome::Converged;
    double escape_time = 0.0;
};

/// Evolves on the ladder 0.25 * 2^{k/4} and regresses I(t) on log t for t > 3.
/// Needs three recorded times past t = 3. Throws Error(RegimeMismatch) unless
/// p is critical, Error(Vacuous) for u0 = 0.
CriticalGrowth critical_log_growth(const GridFunction& u0, double p, const Propagator& prop, EvolveConfig cfg);

enum class CellKind { BlowUp, GlobalCandidate, Inconclusive };

const char* to_string(CellKind kind) noexcept;

struct CellOutcome {
    double p = 0.0;
    double alpha = 0.0;
    CellKind kind = CellKind::Inconclusive;
    std::string reason;
    double escape_time = FittedConstants::kUnset;
    double decay_slope = FittedConstants::kUnset;
    double critical_log_slope = FittedConstants::kUnset;
    double kaplan_crossing_time = FittedConstants::kUnset;
    double accepted_delta = FittedConstants::kUnset;
};

struct ClassifyConfig {
    EvolveConfig evolve;
    /// Radius of the computational interval; 0 selects 7.43 sqrt(horizon).
    double radius = 0.0;
    int cells = 512;
    double grading = 2.0;
    /// Horizon for p <= p*.
    double blowup_horizon = 256.0;
    /// Horizon for p > p*.
    double global_horizon = 65536.0;
    /// Datum for p <= p*.
    InitialDatum blowup_u0 = InitialDatum::bump(0.0, 1.0, 1.0);
    /// Datum for p > p*. A decay profile has its delta calibrated by halving.
    InitialDatum global_u0 = InitialDatum::decay_profile(0.5, 3.0);
    /// Smallness gate on ||u0||_{L^{r*,inf}}.
    double smallness = 1.0;
    int max_halvings = 10;

    void validate() const;
};

/// One dichotomy cell. Failure modes are reported as outcomes.
CellOutcome classify(const WeightSpec& spec, double p, const ClassifyConfig& cfg);

struct DichotomyReport {
    WeightCase weight_case = WeightCase::AxisPower;
    int dimension = 1;
    std::vector<double> alphas;
    std::vector<double> ps;
    /// Row-major by alpha, then p.
    std::vector<CellOutcome> cells;

    const CellOutcome& at(std::size_t alpha_index, std::size_t p_index) const;
};

/// Runs every (alpha, p) cell on up to `jobs` threads. Cell order in the report
/// does not depend on scheduling.
DichotomyReport sweep(WeightCase weight_case, int dimension, std::span<const double> alphas,
                      std::span<const double> ps, const ClassifyConfig& cfg, int jobs);

/// Columns: p, alpha, outcome, escape_time, decay_slope, critical_log_slope,
/// kaplan_crossing_time, accepted_delta, reason.
void write_dichotomy_csv(const std::filesystem::path& file, const DichotomyReport& report);

/// Phase diagram in the (alpha, p) plane with the p*(alpha) curve.
void write_dichotomy_svg(const std::filesystem::path& file, const DichotomyReport& report);

}  // namespace fujita
