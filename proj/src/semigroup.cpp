#include "fujita/semigroup.hpp"

#include "fujita/errors.hpp"
#include "fujita/lorentz.hpp"

#include <algorithm>
#include <cmath>

namespace fujita {

GridFunction apply_semigroup(const KernelTable& table, const GridFunction& phi) {
    require(phi.grid == table.grid || phi.grid->hash() == table.grid->hash(), ErrorCode::GridMismatch,
            "apply_semigroup: kernel table and function live on different grids");
    const auto m = static_cast<Eigen::Index>(phi.size());
    const auto mass = table.mass();
    Eigen::VectorXd weighted(m);
    for (Eigen::Index j = 0; j < m; ++j) weighted(j) = phi[static_cast<std::size_t>(j)] * mass[static_cast<std::size_t>(j)];
    const Eigen::VectorXd out = table.values * weighted;
    return GridFunction(table.grid, std::vector<double>(out.data(), out.data() + m));
}

const char* to_string(NormKind kind) noexcept {
    return kind == NormKind::Strong ? "strong" : "weak";
}

double norm_of(const GridFunction& f, double r, NormKind kind) {
    if (std::isinf(r)) return f.sup_norm();
    return kind == NormKind::Strong ? lebesgue_norm(f, r) : weak_norm(f, r);
}

DecayFit decay_rates(const Propagator& prop, const GridFunction& phi, std::span<const double> times, double q,
                     double r, NormKind kind) {
    require(times.size() >= 2, ErrorCode::InvalidArgument, "decay_rates needs at least two times");
    require(q >= 1.0 && r >= q, ErrorCode::InvalidArgument, "decay_rates needs 1 <= q <= r");
    require(kind == NormKind::Strong || q > 1.0, ErrorCode::InvalidArgument,
            "weak-norm decay needs q > 1: the weak-type constant blows up as q -> 1");
    const double in = norm_of(phi, q, kind);
    require(in > 0.0 && std::isfinite(in), ErrorCode::Vacuous, "decay_rates: datum has zero or infinite norm");

    DecayFit out;
    out.q = q;
    out.r = r;
    out.kind = kind;
    const double h = prop.grid()->line_homogeneity();
    const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
    out.predicted_slope = -h / 2.0 * (1.0 / q - inv_r);
    for (double t : times) {
        const GridFunction u = prop.apply(t, phi);
        const double nv = norm_of(u, r, kind);
        out.times.push_back(t);
        out.norms.push_back(nv);
        out.constant = std::max(out.constant, nv * std::pow(t, -out.predicted_slope) / in);
    }
    out.fit = fit_loglog(out.times, out.norms);
    return out;
}

HeatCoreReport heat_core_lower(const Propagator& prop, const GridFunction& phi, double t) {
    require(t > 0.0, ErrorCode::InvalidArgument, "heat_core_lower: t must be positive");
    for (double v : phi.values) {
        require(v >= 0.0, ErrorCode::InvalidArgument, "heat_core_lower: datum must be nonnegative");
    }
    HeatCoreReport rep;
    rep.t = t;
    const double root = std::sqrt(t);
    rep.core_mass = phi.integral_within(root);
    if (rep.core_mass <= 0.0) {
        rep.vacuous = true;
        return rep;
    }
    const GridFunction u = prop.apply(t, phi);
    const double scale = std::pow(t, -prop.grid()->line_homogeneity() / 2.0) * rep.core_mass;
    const auto x = prop.grid()->nodes();
    double best = kInf;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(x[i]) <= root) best = std::min(best, u[i] / scale);
    }
    rep.constant = best;
    return rep;
}

}  // namespace fujita
