#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace fujita {

enum class WeightCase { AxisPower, RadialPower };

/// Power weight on R^n: w(x) = |x_1|^a (AxisPower, 0 <= a < 1) or
/// w(x) = |x|^b (RadialPower, 0 <= b < n).
struct WeightSpec {
    WeightCase kind = WeightCase::AxisPower;
    double exponent = 0.0;
    int dimension = 1;

    static WeightSpec axis(double a, int n = 1);
    static WeightSpec radial(double b, int n);

    /// Throws Error(InvalidArgument) when the exponent is outside the admissible range.
    void validate() const;

    double alpha() const { return exponent; }
    /// n + alpha, the scaling exponent of weighted volume.
    double homogeneity() const { return dimension + exponent; }

    std::string describe() const;
};

double weight_at(const WeightSpec& spec, std::span<const double> point);

/// w(B(center, r)). Closed forms for centred balls and for the one-dimensional
/// axis case; tanh-sinh quadrature (relative tolerance 1e-10) otherwise.
double ball_mass(const WeightSpec& spec, std::span<const double> center, double r);

/// Which side of the two-branch upper envelope applied.
enum class EnvelopeBranch {
    InsideDistance,  ///< 0 < r <= dist(center, singular set)
    BeyondDistance,  ///< r > dist(center, singular set)
};

const char* to_string(EnvelopeBranch branch) noexcept;

struct EnvelopeConstants {
    double lower = 1.0;  ///< C  in  w(B) >= C r^{n+alpha}
    double upper = 1.0;  ///< C' in the two-branch upper bound
};

struct BallMassEnvelope {
    double lower = 0.0;
    double upper = 0.0;
    EnvelopeBranch branch = EnvelopeBranch::BeyondDistance;
};

BallMassEnvelope ball_mass_bounds(const WeightSpec& spec, std::span<const double> center, double r,
                                  EnvelopeConstants constants = {});

struct BallMassFit {
    EnvelopeConstants constants;
    /// Constants available in closed form from the centred-ball computation:
    /// lower = w(B(0,1)), upper = |B_1| * 2^alpha.
    EnvelopeConstants closed_form;
    int samples = 0;
};

/// Tightest (C, C') over `samples` random (center, r) pairs.
BallMassFit fit_ball_mass_constants(const WeightSpec& spec, std::mt19937_64& rng, int samples = 100);

/// How a one-dimensional grid represents functions on R^n.
enum class GridGeometry {
    HalfLineEven,  ///< axis case on [0, R]; even extension to [-R, R]
    FullLine,      ///< axis case on [-R, R]
    Radial,        ///< radial case on [0, R]; cell masses include |S^{n-1}|
};

const char* to_string(GridGeometry geometry) noexcept;

/// Graded one-dimensional mesh with node-centred cells and exact weighted cell masses.
///
/// Half-line nodes sit at R (k/N)^gamma, k = 0..N. Cells are bounded by node
/// midpoints, plus the endpoints 0 (or -R) and R, so there is one cell per node.
/// Cell masses integrate the reduced density |x|^a (axis) or
/// |S^{n-1}| r^{n-1+b} (radial) in closed form.
class Grid {
public:
    WeightSpec spec() const { return spec_; }
    GridGeometry geometry() const { return geometry_; }
    double radius() const { return radius_; }
    int cells() const { return cells_; }
    double grading() const { return grading_; }

    std::size_t size() const { return nodes_.size(); }
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> edges() const { return edges_; }
    std::span<const double> cell_mass() const { return cell_mass_; }
    /// Reduced density at the face between node i and node i+1.
    std::span<const double> face_weight() const { return face_weight_; }

    /// Copies of R^n represented by one cell: 2 for the even half line, else 1.
    double multiplicity() const;
    /// Weighted measure of cell i as a subset of the represented domain.
    double measure(std::size_t i) const { return multiplicity() * cell_mass_[i]; }
    double total_measure() const;

    /// Dimension of the measure the grid line carries (1 for axis grids, n for radial).
    int line_dimension() const;
    /// Homogeneity of the grid measure: 1 + a (axis) or n + b (radial).
    double line_homogeneity() const;

    /// Index of the node at the origin.
    std::size_t origin_index() const;
    /// Distance of node i from the singular set.
    double distance_from_origin(std::size_t i) const { return nodes_[i] < 0 ? -nodes_[i] : nodes_[i]; }

    /// Exact integral of the reduced density over [lo, hi].
    double reduced_mass(double lo, double hi) const;

    /// FNV-1a over the defining parameters, nodes and masses.
    std::uint64_t hash() const;

    friend std::shared_ptr<const Grid> make_grid(const WeightSpec&, double, int, double, GridGeometry);

private:
    Grid() = default;

    WeightSpec spec_;
    GridGeometry geometry_ = GridGeometry::HalfLineEven;
    double radius_ = 0.0;
    int cells_ = 0;
    double grading_ = 1.0;
    std::vector<double> nodes_;
    std::vector<double> edges_;
    std::vector<double> cell_mass_;
    std::vector<double> face_weight_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridGeometry default_geometry(const WeightSpec& spec);

/// Requires cells >= 16, grading >= 1, radius > 0.
GridPtr make_grid(const WeightSpec& spec, double radius, int cells, double grading,
                  GridGeometry geometry);

inline GridPtr make_grid(const WeightSpec& spec, double radius, int cells, double grading = 2.0) {
    return make_grid(spec, radius, cells, grading, default_geometry(spec));
}

enum class Sampling {
    Nodal,      ///< f(x_i)
    OuterEdge,  ///< f at the cell edge farthest from the origin
};

/// Nodal values on a grid, read as piecewise constant on cells for every
/// measure-theoretic operation.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v);

    static GridFunction zeros(GridPtr g);
    static GridFunction sample(GridPtr g, const std::function<double(double)>& f,
                               Sampling sampling = Sampling::Nodal);

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    double sup_norm() const;
    /// Integral of f over the represented domain with respect to w dx.
    double integral() const;
    /// Integral of f w dx over {|x| <= radius}; cells cut by the sphere count fractionally.
    double integral_within(double radius) const;
};

void require_same_grid(const GridFunction& a, const GridFunction& b);

}  // namespace fujita
