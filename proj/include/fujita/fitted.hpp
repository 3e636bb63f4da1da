#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace fujita {

class Propagator;

/// Numerical stand-ins for constants that are only known to exist.
/// NaN marks a constant that has not been fitted in the current run.
struct FittedConstants {
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    double ball_lower = kUnset;      ///< C  in w(B(x,r)) >= C r^{n+alpha}
    double ball_upper = kUnset;      ///< C' in the two-branch upper bound
    double kernel_c_star = kUnset;   ///< c* of the ball-mass Gaussian envelope
    double kernel_C_star = kUnset;   ///< C* of the ball-mass Gaussian envelope
    double kernel_d = kUnset;        ///< d of the explicit envelope
    double kernel_D = kUnset;        ///< D of the explicit envelope
    double c1 = kUnset;              ///< strong smoothing constant (sup to sup)
    double c2 = kUnset;              ///< weak smoothing constant (L^{r*,inf} to weak L^q)
    double c_double_star = kUnset;   ///< max(c1, c2)
    double local_C1 = kUnset;        ///< Duhamel sup constant of the local-existence rule
    double sharp_C1 = kUnset;        ///< pointwise bound f# <= C_1 |x|^{-n/r}
    double weak_Cr = kUnset;         ///< weak-norm contraction constant
    double kaplan_C_star = kUnset;   ///< upper estimate of the necessary-condition constant
    double accepted_delta = kUnset;  ///< smallness accepted by the global-run search

    static bool is_set(double v) { return !std::isnan(v); }

    /// "fitted.<name> = <value>" lines for set constants, in a fixed order.
    std::vector<std::pair<std::string, double>> entries() const;
};

/// Fits c1, c2, c** and the local C1 on the given propagator for exponent p.
/// c1 from ||S(t)phi||_inf / ||phi||_inf over Gaussian bumps; c2 from
/// t^{(n+alpha)/2 (1/r* - 1/q)} ||S(t)phi||_{L^{q,inf}} / ||phi||_{L^{r*,inf}} over
/// profiles decaying like |x|^{-2/(p-1)}; C1 from the largest interior row mass.
void fit_evolution_constants(const Propagator& prop, double p, FittedConstants& out);

}  // namespace fujita
