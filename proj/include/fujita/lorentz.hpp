#pragma once

#include "fujita/weights.hpp"

#include <string>
#include <vector>

namespace fujita {

/// Index pair (r, sigma) of L^{r,sigma}(w); either entry may be +inf.
struct LorentzIndex {
    double r = 2.0;
    double sigma = 2.0;

    /// Throws Error(InvalidArgument) unless 1 <= r, sigma <= inf.
    void validate() const;
    std::string describe() const;
};

/// Step-function form of mu_f and f* for |f| read as piecewise constant on cells.
///
/// levels[k] are the distinct nonzero values of |f| in decreasing order and
/// cumulative[k] = w({|f| >= levels[k]}), so mu_f(lambda) = cumulative[k] for
/// levels[k+1] <= lambda < levels[k] and f*(s) = levels[k] for
/// cumulative[k-1] <= s < cumulative[k].
struct RearrangementTable {
    std::vector<double> levels;
    std::vector<double> cumulative;
    double total_mass = 0.0;
    int dimension = 1;

    double distribution(double lambda) const;
    double rearrangement(double s) const;
    /// f#(x) = f*(c_n |x|^n) with c_n the volume of the unit ball.
    double spherical(double x_norm) const;
};

RearrangementTable rearrange(const GridFunction& f);

double distribution_fn(const GridFunction& f, double lambda);
double rearrangement(const GridFunction& f, double s);

/// Value of a Lorentz norm together with both evaluation routes.
struct LorentzNorm {
    double value = 0.0;
    bool infinite = false;
    /// From f*: sup s^{1/r} f*(s), or the exact step integral for sigma < inf.
    double rearrangement_form = 0.0;
    /// From mu_f: sup lambda mu_f(lambda)^{1/r}, or r^{1/sigma} times the step integral.
    double distribution_form = 0.0;
};

/// Both routes are computed independently and must agree to 1e-8 relative;
/// a disagreement throws Error(InvariantViolation). Divergent norms come back
/// with `infinite` set and value +inf.
LorentzNorm lorentz_norm(const GridFunction& f, LorentzIndex idx);

/// Weak norm through the rearrangement route only.
double weak_norm(const GridFunction& f, double r);

/// Direct (sum |f|^r w)^{1/r}, or the sup for r = inf.
double lebesgue_norm(const GridFunction& f, double r);

/// K with ||f||_{L^{r,s2}} <= K ||f||_{L^{r,s1}} for s1 <= s2.
double embedding_constant(double r, double sigma1, double sigma2);

struct InequalityParams {
    /// Interpolation triple for the weak-norm interpolation inequality:
    /// 1/r = (1 - theta)/r0 + theta/r1.
    double r0 = 1.5;
    double r = 2.0;
    double r1 = 4.0;
    double theta = 0.4;
    /// Hoelder pair: f in L^{h1,1}, g in L^{h2,inf}, 1/h1 + 1/h2 = 1.
    double h1 = 2.0;
    double h2 = 2.0;
    /// Exponent of the pointwise bound f# <= C_1 |x|^{-n/r}.
    double sharp_r = 2.0;

    /// Throws Error(InvalidArgument) when an index relation fails.
    void validate() const;
};

struct InequalityCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    /// margin >= -1e-8 * rhs
    bool holds = false;
};

struct InequalityReport {
    std::vector<InequalityCheck> checks;
    /// Smallest C_1 with f# <= C_1 |x|^{-n/r} at every breakpoint.
    double fitted_c1 = 0.0;
    bool all_hold() const;
};

InequalityReport inequality_suite(const GridFunction& f, const GridFunction& g, const InequalityParams& params);

}  // namespace fujita
