#include "fujita/fitted.hpp"

#include "fujita/errors.hpp"
#include "fujita/kernel.hpp"
#include "fujita/lorentz.hpp"
#include "fujita/semigroup.hpp"

#include <algorithm>

namespace fujita {

std::vector<std::pair<std::string, double>> FittedConstants::entries() const {
    const std::pair<const char*, double> all[] = {
        {"ball_mass.lower", ball_lower},
        {"ball_mass.upper", ball_upper},
        {"kernel.c_star", kernel_c_star},
        {"kernel.C_star", kernel_C_star},
        {"kernel.d", kernel_d},
        {"kernel.D", kernel_D},
        {"semigroup.c1", c1},
        {"semigroup.c2", c2},
        {"semigroup.c_double_star", c_double_star},
        {"local.C1", local_C1},
        {"lorentz.sharp_C1", sharp_C1},
        {"lorentz.weak_Cr", weak_Cr},
        {"kaplan.C_star", kaplan_C_star},
        {"global.accepted_delta", accepted_delta},
    };
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [k, v] : all) {
        if (is_set(v)) out.emplace_back(k, v);
    }
    return out;
}

void fit_evolution_constants(const Propagator& prop, double p, FittedConstants& out) {
    require(p > 1.0, ErrorCode::InvalidArgument, "fit_evolution_constants: p must exceed 1");
    const GridPtr& grid = prop.grid();
    const double h = grid->line_homogeneity();
    const double r_star = h / 2.0 * (p - 1.0);
    const double reach = std::min(256.0, std::pow(grid->radius() / 7.43, 2) / 4.0);
    std::vector<double> times;
    for (double t = 0.25; t <= std::max(0.25, reach); t *= 2.0) times.push_back(t);

    double c1 = 0.0;
    for (double width : {0.5, 1.0, 2.0}) {
        const GridFunction phi = GridFunction::sample(grid, [&](double x) { return std::exp(-(x / width) * (x / width)); });
        const double in = phi.sup_norm();
        for (double t : times) c1 = std::max(c1, prop.apply(t, phi).sup_norm() / in);
    }

    double c2 = 0.0;
    if (r_star > 1.0) {
        const double decay = 2.0 / (p - 1.0);
        for (double scale : {0.5, 1.0, 2.0}) {
            const GridFunction phi = GridFunction::sample(
                grid, [&](double x) { return 1.0 / (1.0 + std::pow(std::abs(x) / scale, decay)); }, Sampling::OuterEdge);
            const double in = weak_norm(phi, r_star);
            for (double q : {r_star, 2.0 * r_star, kInf}) {
                const double e = h / 2.0 * (1.0 / r_star - (std::isinf(q) ? 0.0 : 1.0 / q));
                for (double t : times) {
                    const GridFunction u = prop.apply(t, phi);
                    c2 = std::max(c2, std::pow(t, e) * norm_of(u, q, NormKind::Weak) / in);
                }
            }
        }
    }

    const KernelTable table = prop.table(times.front());
    const double rint = interior_radius(*grid, times.front());
    const auto x = grid->nodes();
    const auto m = grid->cell_mass();
    double row_max = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        if (std::abs(x[i]) > rint) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < grid->size(); ++j) s += table(i, j) * m[j];
        row_max = std::max(row_max, s);
    }

    out.c1 = c1;
    out.c2 = r_star > 1.0 ? c2 : FittedConstants::kUnset;
    out.c_double_star = std::max(c1, r_star > 1.0 ? c2 : 0.0);
    out.local_C1 = row_max;
}

}  // namespace fujita
