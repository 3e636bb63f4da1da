#pragma once

#include "fujita/kernel.hpp"
#include "fujita/numeric.hpp"

#include <span>
#include <vector>

namespace fujita {

/// (S(t) phi w)(x_i) = Sum_j K_ij phi_j cellMass_j.
GridFunction apply_semigroup(const KernelTable& table, const GridFunction& phi);

enum class NormKind { Strong, Weak };

const char* to_string(NormKind kind) noexcept;

/// ||f||_{L^r(w)} (strong) or ||f||_{L^{r,inf}(w)} (weak); r = inf gives the sup in both.
double norm_of(const GridFunction& f, double r, NormKind kind);

struct DecayFit {
    double q = 1.0;
    double r = kInf;
    NormKind kind = NormKind::Strong;
    std::vector<double> times;
    std::vector<double> norms;
    LineFit fit;
    double predicted_slope = 0.0;  ///< -(n+alpha)/2 (1/q - 1/r)
    /// max over times of ||S(t) phi w|| t^{-predicted} / ||phi||_q
    double constant = 0.0;
};

/// Regresses log ||S(t) phi w||_r against log t. Weak norms need q > 1.
DecayFit decay_rates(const Propagator& prop, const GridFunction& phi, std::span<const double> times, double q,
                     double r, NormKind kind);

struct HeatCoreReport {
    bool vacuous = false;
    double t = 0.0;
    double core_mass = 0.0;  ///< integral of phi w over |y| <= sqrt(t)
    double constant = 0.0;   ///< min over |x| <= sqrt(t) of S(t)phi w / (t^{-(n+alpha)/2} core_mass)
};

/// Empirical constant of the on-diagonal lower bound. Vacuous when phi has no
/// weighted mass within sqrt(t) of the origin.
HeatCoreReport heat_core_lower(const Propagator& prop, const GridFunction& phi, double t);

}  // namespace fujita
