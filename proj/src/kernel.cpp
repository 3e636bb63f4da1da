#include "fujita/kernel.hpp"

#include "fujita/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fujita {

namespace {

constexpr double kNegativeTolerance = 1e-10;
// exp(-z^2/4t) >= 1e-8 keeps an entry in the envelope fits.
constexpr double kGaussianFloorExponent = 18.420680743952367;  // -log(1e-8)
constexpr double kEscapeFactor = 7.43;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Thomas factorization of M + dt A, reused for every right-hand side.
struct TridiagonalFactor {
    std::vector<double> inv_pivot;
    std::vector<double> upper;  // c'_i
    std::vector<double> lower;  // b_{i-1}

    TridiagonalFactor(const Generator& g, double dt) {
        const std::size_t m = g.mass.size();
        inv_pivot.resize(m);
        upper.assign(m, 0.0);
        lower.assign(m, 0.0);
        double prev_upper = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = g.mass[i] + dt * g.diagonal[i];
            const double b_prev = i > 0 ? dt * g.off_diagonal[i - 1] : 0.0;
            const double pivot = a - b_prev * prev_upper;
            require(pivot > 0.0, ErrorCode::NonConvergence, "implicit step matrix lost positivity");
            inv_pivot[i] = 1.0 / pivot;
            lower[i] = b_prev;
            upper[i] = i + 1 < m ? dt * g.off_diagonal[i] * inv_pivot[i] : 0.0;
            prev_upper = upper[i];
        }
    }

    // v <- (M + dt A)^{-1} M v, in place.
    void step(std::vector<double>& v, const std::vector<double>& mass) const {
        const std::size_t m = v.size();
        for (std::size_t i = 0; i < m; ++i) {
            double rhs = mass[i] * v[i];
            if (i > 0) rhs -= lower[i] * v[i - 1];
            v[i] = rhs * inv_pivot[i];
        }
        for (std::size_t i = m - 1; i-- > 0;) v[i] -= upper[i] * v[i + 1];
    }

    // Same update applied to every column of a row-major block.
    void step(RowMajor& v, const std::vector<double>& mass) const {
        const auto m = static_cast<Eigen::Index>(v.rows());
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i > 0) {
                v.row(i) = (mass[i] * v.row(i) - lower[i] * v.row(i - 1)) * inv_pivot[i];
            } else {
                v.row(i) *= mass[i] * inv_pivot[i];
            }
        }
        for (Eigen::Index i = m - 1; i-- > 0;) v.row(i) -= upper[i] * v.row(i + 1);
    }
};

void clean_negatives(Eigen::MatrixXd& k, const char* where) {
    for (Eigen::Index j = 0; j < k.cols(); ++j) {
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            double& v = k(i, j);
            if (v >= 0.0) continue;
            require(v >= -kNegativeTolerance, ErrorCode::InvariantViolation,
                    std::string(where) + ": kernel entry " + format_double(v) + " below -1e-10");
            v = 0.0;
        }
    }
}

double singular_distance_of(const WeightSpec& spec, std::span<const double> x) {
    if (spec.kind == WeightCase::AxisPower) return std::abs(x[0]);
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

// min{t^{-n/4} d^{-alpha/2}, t^{-(n+alpha)/4}}
double explicit_factor(const WeightSpec& spec, double dist, double t) {
    const double n = spec.dimension;
    const double alpha = spec.exponent;
    const double far = std::pow(t, -(n + alpha) / 4.0);
    if (alpha == 0.0) return far;
    if (dist == 0.0) return far;
    return std::min(std::pow(t, -n / 4.0) * std::pow(dist, -alpha / 2.0), far);
}

std::vector<double> on_axis(const WeightSpec& spec, double dist) {
    std::vector<double> p(static_cast<std::size_t>(spec.dimension), 0.0);
    p[0] = dist;
    return p;
}

// Unit-constant prefactors per node for one time.
std::vector<double> node_prefactors(const KernelTable& table, EnvelopeForm form) {
    const Grid& g = *table.grid;
    const WeightSpec spec = g.spec();
    std::vector<double> out(g.size());
    const double root = std::sqrt(table.t);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = g.distance_from_origin(i);
        if (form == EnvelopeForm::BallMass) {
            const auto c = on_axis(spec, d);
            out[i] = 1.0 / std::sqrt(ball_mass(spec, c, root));
        } else {
            out[i] = explicit_factor(spec, d, table.t);
        }
    }
    return out;
}

struct EnvelopeEntry {
    double value;
    double lower_pref;   // prefactor of the lower envelope
    double upper_pref;   // prefactor of the upper envelope
    double lower_dist2;  // squared distance used in the lower envelope
    double upper_dist2;  // squared distance used in the upper envelope
    double mirror_dist2; // second image for half-line tables, < 0 if none
    double t;
};

std::vector<EnvelopeEntry> collect_entries(const std::vector<KernelTable>& tables, EnvelopeForm form) {
    std::vector<EnvelopeEntry> out;
    for (const KernelTable& table : tables) {
        const Grid& g = *table.grid;
        const WeightSpec spec = g.spec();
        const double rint = interior_radius(g, table.t);
        if (rint <= 0.0) continue;
        const auto x = g.nodes();
        const std::vector<double> pref = node_prefactors(table, form);
        const double t = table.t;
        const double up_time = std::pow(t, -spec.homogeneity() / 2.0);
        const GridGeometry geom = g.geometry();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (std::abs(x[i]) > rint) continue;
            for (std::size_t j = 0; j < g.size(); ++j) {
                if (std::abs(x[j]) > rint) continue;
                const double near = (x[i] - x[j]) * (x[i] - x[j]);
                if (near / (4.0 * t) > kGaussianFloorExponent) continue;
                EnvelopeEntry e{};
                e.value = table(i, j);
                e.t = t;
                e.lower_pref = pref[i] * pref[j];
                e.upper_pref = form == EnvelopeForm::BallMass ? pref[i] * pref[j] : up_time;
                e.upper_dist2 = near;
                e.mirror_dist2 = -1.0;
                const double sum2 = (x[i] + x[j]) * (x[i] + x[j]);
                switch (geom) {
                    case GridGeometry::FullLine: e.lower_dist2 = near; break;
                    case GridGeometry::HalfLineEven:
                        e.lower_dist2 = near;
                        e.mirror_dist2 = sum2;
                        break;
                    case GridGeometry::Radial: e.lower_dist2 = sum2; break;
                }
                out.push_back(e);
            }
        }
    }
    return out;
}

double lower_coverage(const std::vector<EnvelopeEntry>& es, double c) {
    std::size_t ok = 0;
    for (const auto& e : es) {
        if (c * e.lower_pref * std::exp(-e.lower_dist2 / (c * e.t)) <= e.value) ++ok;
    }
    return es.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(es.size());
}

double upper_coverage(const std::vector<EnvelopeEntry>& es, double c) {
    std::size_t ok = 0;
    for (const auto& e : es) {
        double u = c * e.upper_pref * std::exp(-e.upper_dist2 / (c * e.t));
        if (e.mirror_dist2 >= 0.0) u += c * e.upper_pref * std::exp(-e.mirror_dist2 / (c * e.t));
        if (e.value <= u) ++ok;
    }
    return es.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(es.size());
}

}  // namespace

Generator assemble_generator(const Grid& grid) {
    const auto x = grid.nodes();
    const auto rho = grid.face_weight();
    const std::size_t m = grid.size();
    Generator g;
    g.mass.assign(grid.cell_mass().begin(), grid.cell_mass().end());
    g.diagonal.assign(m, 0.0);
    g.off_diagonal.assign(m - 1, 0.0);
    for (std::size_t k = 0; k + 1 < m; ++k) {
        const double c = rho[k] / (x[k + 1] - x[k]);
        g.diagonal[k] += c;
        g.diagonal[k + 1] += c;
        g.off_diagonal[k] = -c;
    }
    return g;
}

std::vector<double> implicit_evolve(const Grid& grid, std::span<const double> v0, double t, int steps) {
    require(v0.size() == grid.size(), ErrorCode::GridMismatch, "initial datum does not match the grid");
    require(t >= 0.0 && steps > 0, ErrorCode::InvalidArgument, "implicit evolution needs t >= 0 and steps > 0");
    std::vector<double> v(v0.begin(), v0.end());
    if (t == 0.0) return v;
    const Generator g = assemble_generator(grid);
    const TridiagonalFactor f(g, t / steps);
    for (int s = 0; s < steps; ++s) f.step(v, g.mass);
    return v;
}

double KernelTable::gamma_row_value(std::size_t i, std::size_t j) const {
    return values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) / grid->multiplicity();
}

double KernelTable::factored_value(std::size_t i, std::size_t j, double transverse) const {
    const WeightSpec spec = grid->spec();
    require(spec.kind == WeightCase::AxisPower, ErrorCode::InvalidArgument,
            "factored kernel values exist only for the axis-power case");
    const double k = values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    const int rest = spec.dimension - 1;
    if (rest == 0) return k;
    return k * std::pow(4.0 * std::numbers::pi * t, -0.5 * rest) * std::exp(-transverse * transverse / (4.0 * t));
}

KernelTable build_kernel(const WeightSpec& spec, GridPtr grid, double t, int steps) {
    require(grid != nullptr, ErrorCode::InvalidArgument, "build_kernel: no grid");
    require(t > 0.0, ErrorCode::InvalidArgument, "build_kernel: t must be positive");
    require(steps > 0, ErrorCode::InvalidArgument, "build_kernel: steps must be positive");
    const WeightSpec gs = grid->spec();
    require(gs.kind == spec.kind && gs.exponent == spec.exponent && gs.dimension == spec.dimension,
            ErrorCode::GridMismatch, "build_kernel: grid was made for a different weight");

    const Generator g = assemble_generator(*grid);
    const TridiagonalFactor f(g, t / steps);
    const auto m = static_cast<Eigen::Index>(grid->size());
    RowMajor v = RowMajor::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) v(j, j) = 1.0 / g.mass[static_cast<std::size_t>(j)];
    for (int s = 0; s < steps; ++s) f.step(v, g.mass);

    KernelTable table;
    table.grid = std::move(grid);
    table.t = t;
    table.steps = steps;
    table.values = v;
    clean_negatives(table.values, "build_kernel");
    return table;
}

Propagator::Propagator(GridPtr grid) : grid_(std::move(grid)) {
    require(grid_ != nullptr, ErrorCode::InvalidArgument, "Propagator: no grid");
    const Generator g = assemble_generator(*grid_);
    const auto n = static_cast<lapack_int>(g.mass.size());
    std::vector<double> root(g.mass.size());
    for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(g.mass[i]);

    std::vector<double> d(g.mass.size()), e(g.mass.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = g.diagonal[i] / g.mass[i];
    for (std::size_t i = 0; i + 1 < d.size(); ++i) e[i] = g.off_diagonal[i] / (root[i] * root[i + 1]);

    std::vector<double> w(static_cast<std::size_t>(n));
    Eigen::MatrixXd z(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    lapack_logical tryrac = 1;
    const lapack_int info = LAPACKE_dstemr(LAPACK_COL_MAJOR, 'V', 'A', n, d.data(), e.data(), 0.0, 0.0, 0, 0, &found,
                                           w.data(), z.data(), n, n, support.data(), &tryrac);
    require(info == 0 && found == n, ErrorCode::NonConvergence,
            "tridiagonal eigensolver failed (dstemr info " + std::to_string(info) + ")");

    eigenvalues_.resize(n);
    for (lapack_int k = 0; k < n; ++k) eigenvalues_(k) = std::max(0.0, w[static_cast<std::size_t>(k)]);
    Eigen::Map<const Eigen::VectorXd> r(root.data(), n);
    synthesis_ = r.cwiseInverse().asDiagonal() * z;
    analysis_ = z.transpose() * r.asDiagonal();
}

Eigen::VectorXd Propagator::to_modal(std::span<const double> f) const {
    require(f.size() == size(), ErrorCode::GridMismatch, "Propagator: value count differs from node count");
    Eigen::Map<const Eigen::VectorXd> v(f.data(), static_cast<Eigen::Index>(f.size()));
    return analysis_ * v;
}

std::vector<double> Propagator::to_nodal(const Eigen::VectorXd& coeffs) const {
    const Eigen::VectorXd v = synthesis_ * coeffs;
    return {v.data(), v.data() + v.size()};
}

GridFunction Propagator::apply(double t, const GridFunction& f) const {
    require(t >= 0.0, ErrorCode::InvalidArgument, "semigroup time must be nonnegative");
    require(f.grid == grid_ || f.grid->hash() == grid_->hash(), ErrorCode::GridMismatch,
            "function and propagator live on different grids");
    Eigen::VectorXd c = to_modal(f.values);
    c.array() *= (-eigenvalues_.array() * t).exp();
    return GridFunction(grid_, to_nodal(c));
}

KernelTable Propagator::table(double t) const {
    require(t > 0.0, ErrorCode::InvalidArgument, "kernel time must be positive");
    const Eigen::VectorXd half = (-eigenvalues_.array() * (0.5 * t)).exp();
    const Eigen::MatrixXd c = synthesis_ * half.asDiagonal();
    KernelTable table;
    table.grid = grid_;
    table.t = t;
    table.steps = 0;
    table.values = c * c.transpose();
    clean_negatives(table.values, "Propagator::table");
    return table;
}

const char* to_string(EnvelopeForm form) noexcept {
    return form == EnvelopeForm::BallMass ? "ball_mass" : "explicit";
}

KernelBounds kernel_bounds(const WeightSpec& spec, std::span<const double> x, std::span<const double> y, double t,
                           KernelEnvelopeConstants constants) {
    require(t > 0.0, ErrorCode::InvalidArgument, "kernel_bounds: t must be positive");
    require(static_cast<int>(x.size()) == spec.dimension && static_cast<int>(y.size()) == spec.dimension,
            ErrorCode::DimensionMismatch, "kernel_bounds: points must live in R^n");
    double dist2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) dist2 += (x[k] - y[k]) * (x[k] - y[k]);
    const double lo = constants.lower;
    const double hi = constants.upper;
    KernelBounds b;
    if (constants.form == EnvelopeForm::BallMass) {
        const double root = std::sqrt(t);
        const double pref = 1.0 / std::sqrt(ball_mass(spec, x, root) * ball_mass(spec, y, root));
        b.lower = lo * pref * std::exp(-dist2 / (lo * t));
        b.upper = hi * pref * std::exp(-dist2 / (hi * t));
    } else {
        const double fx = explicit_factor(spec, singular_distance_of(spec, x), t);
        const double fy = explicit_factor(spec, singular_distance_of(spec, y), t);
        b.lower = lo * fx * fy * std::exp(-dist2 / (lo * t));
        b.upper = hi * std::pow(t, -spec.homogeneity() / 2.0) * std::exp(-dist2 / (hi * t));
    }
    return b;
}

double interior_radius(const Grid& grid, double t) {
    return grid.radius() - kEscapeFactor * std::sqrt(t);
}

GridFunction origin_row(const KernelTable& table) {
    const std::size_t o = table.grid->origin_index();
    std::vector<double> v(table.grid->size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = table.gamma_row_value(o, j);
    return GridFunction(table.grid, std::move(v));
}

EnvelopeFit fit_envelope(const std::vector<KernelTable>& tables, EnvelopeForm form) {
    const std::vector<EnvelopeEntry> es = collect_entries(tables, form);
    require(!es.empty(), ErrorCode::FitFailure, "envelope fit: no interior kernel entries");
    const double lo_end = std::log(1e-6);
    const double hi_end = std::log(1e6);

    EnvelopeFit fit;
    fit.entries = es.size();
    fit.constants.form = form;

    require(lower_coverage(es, std::exp(lo_end)) >= kEnvelopeCoverage, ErrorCode::FitFailure,
            std::string("envelope fit (") + to_string(form) + "): no lower constant brackets 99% of entries");
    double a = lo_end, b = hi_end;
    if (lower_coverage(es, std::exp(b)) >= kEnvelopeCoverage) {
        a = b;
    } else {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (a + b);
            (lower_coverage(es, std::exp(mid)) >= kEnvelopeCoverage ? a : b) = mid;
        }
    }
    fit.constants.lower = std::exp(a);
    fit.lower_coverage = lower_coverage(es, fit.constants.lower);

    require(upper_coverage(es, std::exp(hi_end)) >= kEnvelopeCoverage, ErrorCode::FitFailure,
            std::string("envelope fit (") + to_string(form) + "): no upper constant brackets 99% of entries");
    a = lo_end;
    b = hi_end;
    if (upper_coverage(es, std::exp(a)) >= kEnvelopeCoverage) {
        b = a;
    } else {
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (a + b);
            (upper_coverage(es, std::exp(mid)) >= kEnvelopeCoverage ? b : a) = mid;
        }
    }
    fit.constants.upper = std::exp(b);
    fit.upper_coverage = upper_coverage(es, fit.constants.upper);
    return fit;
}

KernelVerifyReport verify_kernel(const WeightSpec& spec, GridPtr grid, std::span<const double> times, int steps) {
    require(times.size() >= 4, ErrorCode::InvalidArgument, "verify_kernel needs at least 4 times");
    for (std::size_t k = 1; k < times.size(); ++k) {
        require(times[k] > times[k - 1], ErrorCode::InvalidArgument, "verify_kernel times must increase");
    }
    const double ratio = times[1] / times[0];
    for (std::size_t k = 1; k < times.size(); ++k) {
        require(std::abs(times[k] / times[k - 1] - ratio) <= 1e-9 * ratio, ErrorCode::InvalidArgument,
                "verify_kernel times must be geometrically spaced");
    }

    KernelVerifyReport rep;
    std::vector<KernelTable> tables;
    const auto mass = grid->cell_mass();
    const auto x = grid->nodes();
    const auto m = static_cast<Eigen::Index>(grid->size());
    Eigen::Map<const Eigen::VectorXd> mv(mass.data(), m);

    for (double t : times) {
        KernelTable full = build_kernel(spec, grid, t, steps);
        const KernelTable half = build_kernel(spec, grid, 0.5 * t, steps);
        const Eigen::MatrixXd comp = half.values * mv.asDiagonal() * half.values;

        KernelTimeReport tr;
        tr.t = t;
        tr.min_entry = full.values.minCoeff();
        const double rint = interior_radius(*grid, t);
        const double maxk = full.values.maxCoeff();
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i + 1; j < m; ++j) {
                const double a = full.values(i, j);
                const double b = full.values(j, i);
                const double scale = std::max({std::abs(a), std::abs(b), 1e-12 * maxk});
                tr.symmetry_error = std::max(tr.symmetry_error, std::abs(a - b) / scale);
            }
            if (std::abs(x[static_cast<std::size_t>(i)]) > rint) continue;
            ++tr.interior_rows;
            const double row = full.values.row(i).dot(mv);
            tr.row_mass_error = std::max(tr.row_mass_error, std::abs(row - 1.0));
            const double diff = (full.values.row(i) - comp.row(i)).cwiseAbs().dot(mv);
            tr.composition_error = std::max(tr.composition_error, diff);
        }
        require(tr.interior_rows > 0, ErrorCode::InvalidArgument,
                "verify_kernel: grid radius too small for t = " + format_double(t));

        const GridFunction row = origin_row(full);
        tr.origin_sup = row.sup_norm();
        tr.origin_l2 = lebesgue_norm(row, 2.0);
        tr.origin_lorentz21 = lorentz_norm(row, {2.0, 1.0}).value;
        rep.times.push_back(tr);
        tables.push_back(std::move(full));
    }

    rep.ball_mass_fit = fit_envelope(tables, EnvelopeForm::BallMass);
    rep.explicit_fit = fit_envelope(tables, EnvelopeForm::Explicit);

    std::vector<double> ts, sup, l2, l21;
    for (const auto& tr : rep.times) {
        ts.push_back(tr.t);
        sup.push_back(tr.origin_sup);
        l2.push_back(tr.origin_l2);
        l21.push_back(tr.origin_lorentz21);
    }
    rep.sup_slope = fit_loglog(ts, sup);
    rep.l2_slope = fit_loglog(ts, l2);
    rep.lorentz21_slope = fit_loglog(ts, l21);
    const double h = grid->line_homogeneity();
    rep.predicted_sup_slope = -h / 2.0;
    rep.predicted_l2_slope = -h / 4.0;
    return rep;
}

}  // namespace fujita
