#include "fujita/weights.hpp"

#include "fujita/errors.hpp"
#include "fujita/numeric.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

namespace fujita {

namespace {

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// Signed antiderivative of |y|^beta.
double power_antiderivative(double y, double beta) {
    const double m = std::pow(std::abs(y), beta + 1.0) / (beta + 1.0);
    return y < 0 ? -m : m;
}

// Integral of |y|^beta over [lo, hi].
double power_mass(double lo, double hi, double beta) {
    return power_antiderivative(hi, beta) - power_antiderivative(lo, beta);
}

double tanh_sinh_integral(const std::function<double(double)>& f, double lo, double hi) {
    if (hi <= lo) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(f, lo, hi, 1e-10);
}

// Axis case, n > 1: slice the ball by hyperplanes x_1 = y.
double axis_ball_mass(double a, int n, double c, double r) {
    const double slab = unit_ball_volume(n - 1);
    const double half = 0.5 * (n - 1);
    auto f = [&](double y) {
        const double s = r * r - (y - c) * (y - c);
        return s <= 0.0 ? 0.0 : std::pow(std::abs(y), a) * slab * std::pow(s, half);
    };
    const double lo = c - r;
    const double hi = c + r;
    if (lo < 0.0 && hi > 0.0) return tanh_sinh_integral(f, lo, 0.0) + tanh_sinh_integral(f, 0.0, hi);
    return tanh_sinh_integral(f, lo, hi);
}

// Fraction of S^{n-1} with cos(angle to a fixed axis) >= c.
double cap_fraction(int n, double c) {
    if (c >= 1.0) return 0.0;
    if (c <= -1.0) return 1.0;
    const double half = 0.5 * boost::math::ibeta(0.5 * (n - 1), 0.5, 1.0 - c * c);
    return c >= 0.0 ? half : 1.0 - half;
}

// Radial case, n >= 2, |x| = d > 0: integrate spherical shells.
double radial_ball_mass(double b, int n, double d, double r) {
    const double area = unit_sphere_area(n);
    const double beta = n - 1 + b;
    const double inner = std::abs(d - r);
    double mass = 0.0;
    if (r > d) mass += area * std::pow(inner, beta + 1.0) / (beta + 1.0);
    auto f = [&](double rho) {
        if (rho <= 0.0) return 0.0;
        const double c = (rho * rho + d * d - r * r) / (2.0 * rho * d);
        return area * std::pow(rho, beta) * cap_fraction(n, c);
    };
    mass += tanh_sinh_integral(f, inner, d + r);
    return mass;
}

double centred_coefficient(const WeightSpec& spec) {
    const int n = spec.dimension;
    if (spec.kind == WeightCase::AxisPower) {
        return unit_ball_volume(n - 1) * boost::math::beta(0.5 * (spec.exponent + 1.0), 0.5 * (n + 1));
    }
    return unit_sphere_area(n) / (n + spec.exponent);
}

double singular_distance(const WeightSpec& spec, std::span<const double> x) {
    return spec.kind == WeightCase::AxisPower ? std::abs(x[0]) : norm2(x);
}

void require_dimension(const WeightSpec& spec, std::span<const double> point) {
    require(static_cast<int>(point.size()) == spec.dimension, ErrorCode::DimensionMismatch,
            "point has dimension " + std::to_string(point.size()) + ", weight lives on R^" +
                std::to_string(spec.dimension));
}

}  // namespace

WeightSpec WeightSpec::axis(double a, int n) {
    WeightSpec s{WeightCase::AxisPower, a, n};
    s.validate();
    return s;
}

WeightSpec WeightSpec::radial(double b, int n) {
    WeightSpec s{WeightCase::RadialPower, b, n};
    s.validate();
    return s;
}

void WeightSpec::validate() const {
    require(dimension >= 1, ErrorCode::InvalidArgument, "weight.dimension must be a positive integer");
    std::ostringstream os;
    if (kind == WeightCase::AxisPower) {
        if (std::isfinite(exponent) && exponent >= 0.0 && exponent < 1.0) return;
        os << "weight.exponent = " << exponent << " violates the axis-power condition (A): 0 <= a < 1";
    } else {
        if (std::isfinite(exponent) && exponent >= 0.0 && exponent < dimension) return;
        os << "weight.exponent = " << exponent << " violates the radial-power condition (B): 0 <= b < n = "
           << dimension;
    }
    fail(ErrorCode::InvalidArgument, os.str());
}

std::string WeightSpec::describe() const {
    std::ostringstream os;
    os << (kind == WeightCase::AxisPower ? "|x_1|^" : "|x|^") << exponent << " on R^" << dimension;
    return os.str();
}

double weight_at(const WeightSpec& spec, std::span<const double> point) {
    require_dimension(spec, point);
    if (spec.exponent == 0.0) return 1.0;
    return std::pow(singular_distance(spec, point), spec.exponent);
}

double ball_mass(const WeightSpec& spec, std::span<const double> center, double r) {
    require_dimension(spec, center);
    require(r > 0.0, ErrorCode::InvalidArgument, "ball radius must be positive");
    const int n = spec.dimension;
    const double alpha = spec.exponent;
    const double d = singular_distance(spec, center);
    if (d == 0.0) return centred_coefficient(spec) * std::pow(r, n + alpha);
    if (n == 1) return power_mass(center[0] - r, center[0] + r, alpha);
    if (spec.kind == WeightCase::AxisPower) return axis_ball_mass(alpha, n, center[0], r);
    return radial_ball_mass(alpha, n, d, r);
}

const char* to_string(EnvelopeBranch branch) noexcept {
    switch (branch) {
        case EnvelopeBranch::InsideDistance: return "r <= dist";
        case EnvelopeBranch::BeyondDistance: return "r >= dist";
    }
    return "?";
}

BallMassEnvelope ball_mass_bounds(const WeightSpec& spec, std::span<const double> center, double r,
                                  EnvelopeConstants constants) {
    require_dimension(spec, center);
    require(r > 0.0, ErrorCode::InvalidArgument, "ball radius must be positive");
    const int n = spec.dimension;
    const double alpha = spec.exponent;
    const double d = singular_distance(spec, center);
    BallMassEnvelope env;
    env.lower = constants.lower * std::pow(r, n + alpha);
    if (r <= d) {
        env.branch = EnvelopeBranch::InsideDistance;
        env.upper = constants.upper * std::pow(r, n) * std::pow(d, alpha);
    } else {
        env.branch = EnvelopeBranch::BeyondDistance;
        env.upper = constants.upper * std::pow(r, n + alpha);
    }
    return env;
}

BallMassFit fit_ball_mass_constants(const WeightSpec& spec, std::mt19937_64& rng, int samples) {
    spec.validate();
    require(samples > 0, ErrorCode::InvalidArgument, "need at least one sample");
    const int n = spec.dimension;
    std::uniform_real_distribution<double> log_r(std::log(1e-2), std::log(1e2));
    std::uniform_real_distribution<double> log_d(std::log(1e-3), std::log(1e2));
    std::normal_distribution<double> gauss(0.0, 1.0);

    BallMassFit fit;
    fit.samples = samples;
    fit.closed_form.lower = centred_coefficient(spec);
    fit.closed_form.upper = unit_ball_volume(n) * std::pow(2.0, spec.exponent);
    fit.constants.lower = kInf;
    fit.constants.upper = 0.0;

    std::vector<double> x(n);
    for (int s = 0; s < samples; ++s) {
        const double r = std::exp(log_r(rng));
        const double d = std::exp(log_d(rng));
        for (double& v : x) v = gauss(rng);
        const double len = norm2(x);
        for (double& v : x) v *= d / len;
        const double exact = ball_mass(spec, x, r);
        const BallMassEnvelope unit = ball_mass_bounds(spec, x, r);
        fit.constants.lower = std::min(fit.constants.lower, exact / unit.lower);
        fit.constants.upper = std::max(fit.constants.upper, exact / unit.upper);
    }
    return fit;
}

const char* to_string(GridGeometry geometry) noexcept {
    switch (geometry) {
        case GridGeometry::HalfLineEven: return "half_line_even";
        case GridGeometry::FullLine: return "full_line";
        case GridGeometry::Radial: return "radial";
    }
    return "?";
}

GridGeometry default_geometry(const WeightSpec& spec) {
    return spec.kind == WeightCase::AxisPower ? GridGeometry::HalfLineEven : GridGeometry::Radial;
}

double Grid::multiplicity() const {
    return geometry_ == GridGeometry::HalfLineEven ? 2.0 : 1.0;
}

double Grid::total_measure() const {
    double s = 0.0;
    for (double m : cell_mass_) s += m;
    return multiplicity() * s;
}

int Grid::line_dimension() const {
    return spec_.kind == WeightCase::AxisPower ? 1 : spec_.dimension;
}

double Grid::line_homogeneity() const {
    return line_dimension() + spec_.exponent;
}

std::size_t Grid::origin_index() const {
    return geometry_ == GridGeometry::FullLine ? static_cast<std::size_t>(cells_) : 0;
}

double Grid::reduced_mass(double lo, double hi) const {
    if (hi <= lo) return 0.0;
    if (spec_.kind == WeightCase::AxisPower) return power_mass(lo, hi, spec_.exponent);
    const double beta = spec_.dimension - 1 + spec_.exponent;
    return unit_sphere_area(spec_.dimension) * power_mass(lo, hi, beta);
}

std::uint64_t Grid::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const int kind = static_cast<int>(spec_.kind);
    const int geom = static_cast<int>(geometry_);
    mix(&kind, sizeof kind);
    mix(&spec_.exponent, sizeof spec_.exponent);
    mix(&spec_.dimension, sizeof spec_.dimension);
    mix(&geom, sizeof geom);
    mix(&radius_, sizeof radius_);
    mix(&cells_, sizeof cells_);
    mix(&grading_, sizeof grading_);
    mix(nodes_.data(), nodes_.size() * sizeof(double));
    mix(cell_mass_.data(), cell_mass_.size() * sizeof(double));
    return h;
}

GridPtr make_grid(const WeightSpec& spec, double radius, int cells, double grading, GridGeometry geometry) {
    spec.validate();
    require(radius > 0.0 && std::isfinite(radius), ErrorCode::InvalidArgument, "grid radius must be positive");
    require(cells >= 16, ErrorCode::InvalidArgument, "grid needs at least 16 cells");
    require(grading >= 1.0, ErrorCode::InvalidArgument, "grading exponent must be >= 1");
    require(spec.kind == WeightCase::AxisPower || geometry == GridGeometry::Radial, ErrorCode::InvalidArgument,
            "radial-power weights need the radial geometry");
    require(spec.kind == WeightCase::RadialPower || geometry != GridGeometry::Radial, ErrorCode::InvalidArgument,
            "axis-power weights need a line geometry");

    std::shared_ptr<Grid> g(new Grid());
    g->spec_ = spec;
    g->geometry_ = geometry;
    g->radius_ = radius;
    g->cells_ = cells;
    g->grading_ = grading;

    std::vector<double> half(cells + 1);
    for (int k = 0; k <= cells; ++k) half[k] = radius * std::pow(static_cast<double>(k) / cells, grading);
    half[cells] = radius;
    for (int k = 1; k <= cells; ++k) {
        require(half[k] > half[k - 1], ErrorCode::InvariantViolation, "grid nodes are not strictly increasing");
    }

    if (geometry == GridGeometry::FullLine) {
        g->nodes_.reserve(2 * cells + 1);
        for (int k = cells; k > 0; --k) g->nodes_.push_back(-half[k]);
        for (int k = 0; k <= cells; ++k) g->nodes_.push_back(half[k]);
    } else {
        g->nodes_ = half;
    }

    const auto& x = g->nodes_;
    const std::size_t m = x.size();
    g->edges_.resize(m + 1);
    g->edges_[0] = geometry == GridGeometry::FullLine ? -radius : 0.0;
    for (std::size_t i = 1; i < m; ++i) g->edges_[i] = 0.5 * (x[i - 1] + x[i]);
    g->edges_[m] = radius;

    const double beta =
        spec.kind == WeightCase::AxisPower ? spec.exponent : spec.dimension - 1 + spec.exponent;
    const double factor = spec.kind == WeightCase::AxisPower ? 1.0 : unit_sphere_area(spec.dimension);
    g->cell_mass_.resize(m);
    for (std::size_t i = 0; i < m; ++i) g->cell_mass_[i] = g->reduced_mass(g->edges_[i], g->edges_[i + 1]);
    g->face_weight_.resize(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        g->face_weight_[i] = factor * std::pow(std::abs(g->edges_[i + 1]), beta);
    }
    for (double cm : g->cell_mass_) {
        require(cm > 0.0, ErrorCode::InvariantViolation, "grid cell with non-positive mass");
    }
    return g;
}

GridFunction::GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    require(grid != nullptr, ErrorCode::InvalidArgument, "grid function without a grid");
    require(values.size() == grid->size(), ErrorCode::GridMismatch, "value count differs from node count");
    for (double val : values) require(std::isfinite(val), ErrorCode::InvalidArgument, "grid function value not finite");
}

GridFunction GridFunction::zeros(GridPtr g) {
    const std::size_t m = g->size();
    return GridFunction(std::move(g), std::vector<double>(m, 0.0));
}

GridFunction GridFunction::sample(GridPtr g, const std::function<double(double)>& f, Sampling sampling) {
    const auto x = g->nodes();
    const auto e = g->edges();
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double at = x[i];
        if (sampling == Sampling::OuterEdge) at = (x[i] < 0.0) ? e[i] : e[i + 1];
        v[i] = f(at);
    }
    return GridFunction(std::move(g), std::move(v));
}

double GridFunction::sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::abs(v));
    return s;
}

double GridFunction::integral() const {
    double s = 0.0;
    const auto cm = grid->cell_mass();
    for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * cm[i];
    return grid->multiplicity() * s;
}

double GridFunction::integral_within(double radius) const {
    const auto e = grid->edges();
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double lo = std::max(e[i], -radius);
        const double hi = std::min(e[i + 1], radius);
        if (hi > lo) s += values[i] * grid->reduced_mass(lo, hi);
    }
    return grid->multiplicity() * s;
}

void require_same_grid(const GridFunction& a, const GridFunction& b) {
    require(a.grid && b.grid && (a.grid == b.grid || a.grid->hash() == b.grid->hash()), ErrorCode::GridMismatch,
            "grid functions live on different grids");
}

}  // namespace fujita
