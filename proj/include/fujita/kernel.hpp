#pragma once

#include "fujita/lorentz.hpp"
#include "fujita/numeric.hpp"
#include "fujita/weights.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace fujita {

/// Conservative semi-discrete operator M v' = -A v on a grid.
///
/// M is the diagonal of cell masses, A the symmetric tridiagonal stiffness
/// matrix with face conductances c_k = rho(face_k) / (x_{k+1} - x_k) and zero
/// flux at both ends of the grid.
struct Generator {
    std::vector<double> mass;
    std::vector<double> diagonal;
    std::vector<double> off_diagonal;  ///< A_{k,k+1} = -c_k
};

Generator assemble_generator(const Grid& grid);

/// Advances M v' = -A v by `steps` implicit Euler steps of size t / steps.
std::vector<double> implicit_evolve(const Grid& grid, std::span<const double> v0, double t, int steps);

/// Gamma(x_i, x_j, t) on a grid, with the grid's cell masses as quadrature weights.
///
/// For half-line even grids an entry is Gamma(x_i, x_j) + Gamma(x_i, -x_j);
/// for radial grids it is the spherical average of Gamma over |y| = x_j.
struct KernelTable {
    GridPtr grid;
    double t = 0.0;
    int steps = 0;  ///< implicit Euler steps; 0 for the exact time exponential
    Eigen::MatrixXd values;

    std::span<const double> mass() const { return grid->cell_mass(); }
    double operator()(std::size_t i, std::size_t j) const { return values(i, j); }

    /// The entry scaled so that it represents Gamma itself at (x_i, x_j):
    /// halves the origin row of half-line tables. Only meaningful for i = origin
    /// or for full-line and radial tables.
    double gamma_row_value(std::size_t i, std::size_t j) const;

    /// Factored value on R^n for the axis case: 1-D entry times the
    /// (n-1)-dimensional heat kernel at transverse distance `transverse`.
    double factored_value(std::size_t i, std::size_t j, double transverse) const;
};

/// Implicit Euler construction column by column. Throws Error(InvariantViolation)
/// on entries below -1e-10; entries in [-1e-10, 0) are set to zero.
KernelTable build_kernel(const WeightSpec& spec, GridPtr grid, double t, int steps);

/// Spectral form of the same semi-discrete operator: S = M^{-1/2} A M^{-1/2}
/// = Q diag(lambda) Q^T, computed once with LAPACK dstemr. S(t) is then exact
/// in time for the semi-discrete system.
class Propagator {
public:
    explicit Propagator(GridPtr grid);

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return eigenvalues_.size(); }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    /// Q^T diag(sqrt(M)): nodal values to modal coefficients.
    const Eigen::MatrixXd& analysis() const { return analysis_; }
    /// diag(1/sqrt(M)) Q: modal coefficients to nodal values.
    const Eigen::MatrixXd& synthesis() const { return synthesis_; }

    Eigen::VectorXd to_modal(std::span<const double> f) const;
    std::vector<double> to_nodal(const Eigen::VectorXd& coeffs) const;

    /// S(t) f = Sum_j K_ij f_j cellMass_j, evaluated in modal form.
    GridFunction apply(double t, const GridFunction& f) const;
    KernelTable table(double t) const;

private:
    GridPtr grid_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd analysis_;
    Eigen::MatrixXd synthesis_;
};

/// Gaussian-envelope parametrization for two-sided kernel bounds.
enum class EnvelopeForm {
    BallMass,  ///< c / sqrt(w(B(x,sqrt t)) w(B(y,sqrt t))) exp(-|x-y|^2 / (c t))
    Explicit,  ///< the min-branch lower form and D t^{-(n+alpha)/2} exp(-|x-y|^2/(D t))
};

const char* to_string(EnvelopeForm form) noexcept;

struct KernelEnvelopeConstants {
    EnvelopeForm form = EnvelopeForm::Explicit;
    double lower = 1.0;  ///< c* or d
    double upper = 1.0;  ///< C* or D
};

struct KernelBounds {
    double lower = 0.0;
    double upper = 0.0;
};

KernelBounds kernel_bounds(const WeightSpec& spec, std::span<const double> x, std::span<const double> y, double t,
                           KernelEnvelopeConstants constants = {});

/// Interior cutoff used for mass and envelope checks: R - 7.43 sqrt(t).
double interior_radius(const Grid& grid, double t);

struct KernelTimeReport {
    double t = 0.0;
    double row_mass_error = 0.0;      ///< max over interior rows of |Sum_j K_ij m_j - 1|
    double composition_error = 0.0;   ///< max over interior rows, weighted L1
    double symmetry_error = 0.0;      ///< max relative asymmetry
    double min_entry = 0.0;
    double origin_sup = 0.0;          ///< ||Gamma(x0, ., t)||_inf
    double origin_l2 = 0.0;           ///< ||Gamma(x0, ., t)||_{L^2(w)}
    double origin_lorentz21 = 0.0;    ///< ||Gamma(x0, ., t)||_{L^{2,1}(w)}
    std::size_t interior_rows = 0;
};

struct EnvelopeFit {
    KernelEnvelopeConstants constants;
    double lower_coverage = 0.0;
    double upper_coverage = 0.0;
    std::size_t entries = 0;
};

struct KernelVerifyReport {
    std::vector<KernelTimeReport> times;
    EnvelopeFit ball_mass_fit;  ///< (c*, C*)
    EnvelopeFit explicit_fit;   ///< (d, D)
    LineFit sup_slope;
    LineFit l2_slope;
    LineFit lorentz21_slope;
    double predicted_sup_slope = 0.0;  ///< -(n+alpha)/2
    double predicted_l2_slope = 0.0;   ///< -(n+alpha)/4
};

/// Target fraction of interior entries an envelope must bracket.
inline constexpr double kEnvelopeCoverage = 0.99;

/// Builds K(t) and K(t/2) with `steps` implicit Euler steps each, then
/// measures K1, K2, symmetry, fits envelope constants, and regresses the
/// origin-row norms. Throws Error(FitFailure) when no constant in
/// [1e-6, 1e6] brackets 99% of the interior entries.
KernelVerifyReport verify_kernel(const WeightSpec& spec, GridPtr grid, std::span<const double> times, int steps);

/// Fits the envelopes on already-built tables.
EnvelopeFit fit_envelope(const std::vector<KernelTable>& tables, EnvelopeForm form);

/// Origin row of a table as a function on the grid, scaled to represent Gamma(x0, ., t).
GridFunction origin_row(const KernelTable& table);

}  // namespace fujita
