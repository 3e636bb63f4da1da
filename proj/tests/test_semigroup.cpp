#include "fujita/errors.hpp"
#include "fujita/kernel.hpp"
#include "fujita/semigroup.hpp"

#include <doctest.h>

#include <cmath>

using namespace fujita;

TEST_CASE("table application agrees with the propagator") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 15.0, 128);
    const Propagator prop(g);
    const GridFunction phi = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
    const GridFunction a = apply_semigroup(prop.table(1.0), phi);
    const GridFunction b = prop.apply(1.0, phi);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));
}

TEST_CASE("decay exponents") {
    const std::vector<double> times{4.0, 8.0, 16.0, 32.0, 64.0};
    for (const WeightSpec& spec : {WeightSpec::axis(0.5), WeightSpec::radial(1.0, 2)}) {
        const GridPtr g = make_grid(spec, 2.0 * 7.43 * 8.0, 384);
        const Propagator prop(g);
        const double h = spec.homogeneity();
        // An integrable datum decays at the q = 1 rate whatever q is; the q = 2
        // exponent needs the borderline tail |x|^{-h/2}.
        const GridFunction gaussian = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
        const GridFunction tail =
            GridFunction::sample(g, [h](double x) { return std::pow(std::abs(x), -h / 2.0); }, Sampling::OuterEdge);
        for (auto [q, r] : {std::pair{1.0, kInf}, std::pair{1.0, 2.0}, std::pair{2.0, kInf}}) {
            const GridFunction& phi = q == 1.0 ? gaussian : tail;
            const DecayFit f = decay_rates(prop, phi, times, q, r, NormKind::Strong);
            INFO(spec.describe() << " q = " << q << " r = " << r << " slope " << f.fit.slope);
            CHECK(f.predicted_slope == doctest::Approx(-h / 2.0 * (1.0 / q - (std::isinf(r) ? 0.0 : 1.0 / r))));
            CHECK(std::abs(f.fit.slope - f.predicted_slope) <= 0.05 * std::abs(f.predicted_slope));
        }
        const DecayFit w = decay_rates(prop, tail, times, 2.0, kInf, NormKind::Weak);
        CHECK(std::abs(w.fit.slope - w.predicted_slope) <= 0.05 * std::abs(w.predicted_slope));
    }
}

TEST_CASE("weak decay from q = 1 is refused") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 15.0, 64);
    const Propagator prop(g);
    const GridFunction phi = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
    const std::vector<double> times{1.0, 2.0};
    CHECK_THROWS_AS(decay_rates(prop, phi, times, 1.0, 2.0, NormKind::Weak), Error);
    CHECK_THROWS_AS(decay_rates(prop, GridFunction::zeros(g), times, 1.0, 2.0, NormKind::Strong), Error);
}

TEST_CASE("heat-core lower bound") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 120.0, 384);
    const Propagator prop(g);
    const GridFunction phi = GridFunction::sample(g, [](double x) { return std::abs(x) < 1.0 ? 1.0 : 0.0; });
    CHECK(heat_core_lower(prop, phi, 1e-4).vacuous == false);
    const GridFunction far = GridFunction::sample(g, [](double x) { return std::abs(x - 50.0) < 1.0 ? 1.0 : 0.0; });
    CHECK(heat_core_lower(prop, far, 1.0).vacuous);

    // the constant settles as t grows
    const double c16 = heat_core_lower(prop, phi, 16.0).constant;
    const double c64 = heat_core_lower(prop, phi, 64.0).constant;
    CHECK(c16 > 0.0);
    CHECK(std::abs(c64 - c16) <= 0.2 * c16);
}
