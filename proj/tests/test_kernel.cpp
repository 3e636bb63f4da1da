#include "fujita/errors.hpp"
#include "fujita/kernel.hpp"
#include "fujita/kernel_cache.hpp"

#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace fujita;

namespace {

// Gamma(0, y, t) = c t^{-h/2} exp(-y^2/4t) with h = n + alpha and
// c = 1 / (|S^{n-1}| 2^{h-1} Gamma(h/2)); the axis case reduces to n = 1.
double origin_kernel(double h, double sphere, double y, double t) {
    const double c = 1.0 / (sphere * std::pow(2.0, h - 1.0) * boost::math::tgamma(h / 2.0));
    return c * std::pow(t, -h / 2.0) * std::exp(-y * y / (4.0 * t));
}

}  // namespace

TEST_CASE("origin row matches the closed form") {
    const double t = 1.0;
    {
        const GridPtr g = make_grid(WeightSpec::axis(0.5), 20.0, 256);
        const KernelTable k = build_kernel(g->spec(), g, t, 512);
        const std::size_t o = g->origin_index();
        const auto x = g->nodes();
        double worst = 0.0;
        for (std::size_t j = 0; j < g->size(); ++j) {
            if (x[j] > 4.0) break;
            const double ref = origin_kernel(1.5, 2.0, x[j], t);
            worst = std::max(worst, std::abs(k.gamma_row_value(o, j) - ref) / ref);
        }
        CHECK(worst < 5e-3);
    }
    {
        const GridPtr g = make_grid(WeightSpec::radial(1.0, 2), 20.0, 256);
        const KernelTable k = build_kernel(g->spec(), g, t, 512);
        const auto x = g->nodes();
        double worst = 0.0;
        for (std::size_t j = 0; j < g->size(); ++j) {
            if (x[j] > 4.0) break;
            const double ref = origin_kernel(3.0, 2.0 * std::numbers::pi, x[j], t);
            worst = std::max(worst, std::abs(k.gamma_row_value(0, j) - ref) / ref);
        }
        CHECK(worst < 5e-3);
    }
}

TEST_CASE("structural checks on a small grid") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 20.0, 128);
    const std::vector<double> times{0.25, 0.5, 1.0, 2.0};
    const KernelVerifyReport rep = verify_kernel(g->spec(), g, times, 256);
    for (const auto& r : rep.times) {
        CHECK(r.row_mass_error < 1e-3);
        CHECK(r.composition_error < 2e-3);
        CHECK(r.symmetry_error < 1e-8);
        CHECK(r.min_entry >= 0.0);
    }
    CHECK(rep.sup_slope.slope == doctest::Approx(rep.predicted_sup_slope).epsilon(0.05));
    CHECK(rep.l2_slope.slope == doctest::Approx(rep.predicted_l2_slope).epsilon(0.05));
    CHECK(rep.ball_mass_fit.lower_coverage >= kEnvelopeCoverage);
    CHECK(rep.explicit_fit.upper_coverage >= kEnvelopeCoverage);
    CHECK(rep.ball_mass_fit.constants.lower < rep.ball_mass_fit.constants.upper);
}

TEST_CASE("implicit Euler tables converge to the exponential at first order") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 12.0, 64);
    const Propagator prop(g);
    const KernelTable exact = prop.table(0.5);
    const double e1 = (build_kernel(g->spec(), g, 0.5, 32).values - exact.values).cwiseAbs().maxCoeff();
    const double e2 = (build_kernel(g->spec(), g, 0.5, 64).values - exact.values).cwiseAbs().maxCoeff();
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("propagator applies a semigroup") {
    const GridPtr g = make_grid(WeightSpec::radial(0.0, 2), 15.0, 128);
    const Propagator prop(g);
    const GridFunction phi = GridFunction::sample(g, [](double r) { return std::exp(-r * r); });
    const GridFunction a = prop.apply(0.7, prop.apply(0.3, phi));
    const GridFunction b = prop.apply(1.0, phi);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9));
    // mass conservation under zero flux
    CHECK(b.integral() == doctest::Approx(phi.integral()).epsilon(1e-10));
}

TEST_CASE("kernel bounds and argument checks") {
    const std::vector<double> x{0.5}, y{1.0};
    const KernelBounds b = kernel_bounds(WeightSpec::axis(0.5), x, y, 1.0, {EnvelopeForm::BallMass, 0.5, 4.0});
    CHECK(b.lower > 0.0);
    CHECK(b.lower < b.upper);
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 12.0, 32);
    CHECK_THROWS_AS(build_kernel(g->spec(), g, -1.0, 10), Error);
    CHECK_THROWS_AS(build_kernel(g->spec(), g, 1.0, 0), Error);
}

TEST_CASE("kernel cache round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "fujita_kernel_cache_test";
    std::filesystem::remove_all(dir);
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 10.0, 32);
    const KernelCache cache(dir);
    CHECK_FALSE(cache.load(g, 0.5, 16).has_value());
    const KernelTable built = cache.get_or_build(g, 0.5, 16);
    const auto loaded = cache.load(g, 0.5, 16);
    REQUIRE(loaded.has_value());
    CHECK((loaded->values - built.values).cwiseAbs().maxCoeff() == 0.0);

    const GridPtr other = make_grid(WeightSpec::axis(0.5), 11.0, 32);
    CHECK_THROWS_AS(read_kernel_table(cache.path_for(*g, 0.5, 16), other), Error);
    std::filesystem::remove_all(dir);
}
