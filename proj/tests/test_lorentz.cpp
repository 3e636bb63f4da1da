#include "fujita/errors.hpp"
#include "fujita/lorentz.hpp"
#include "fujita/numeric.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace fujita;

namespace {

GridFunction random_steps(const GridPtr& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> cuts(5);
    for (double& c : cuts) c = g->radius() * u(rng);
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> h(6);
    for (double& v : h) v = 3.0 * u(rng);
    h.back() = 0.0;
    return GridFunction::sample(g, [&](double x) {
        return h[static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), std::abs(x)) - cuts.begin())];
    });
}

// Two-level oracle: value v1 on mass S1, v2 on the next S2 - S1.
double two_level(double v1, double S1, double v2, double S2, double r, double sigma) {
    if (std::isinf(sigma)) return std::max(v1 * std::pow(S1, 1.0 / r), v2 * std::pow(S2, 1.0 / r));
    // int_0^inf (s^{1/r} f*(s))^sigma ds / s
    const double e = sigma / r;
    const double I = std::pow(v1, sigma) * std::pow(S1, e) / e +
                     std::pow(v2, sigma) * (std::pow(S2, e) - std::pow(S1, e)) / e;
    return std::pow(I, 1.0 / sigma);
}

}  // namespace

TEST_CASE("two-level function against the hand formula") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 8.0, 256, 2.0);
    const GridFunction f = GridFunction::sample(g, [](double x) {
        const double a = std::abs(x);
        return a < 1.0 ? 3.0 : (a < 2.5 ? 1.0 : 0.0);
    });
    double S1 = 0.0, S2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] > 2.0) S1 += g->measure(i);
        if (f[i] > 0.5) S2 += g->measure(i);
    }
    for (double r : {1.0, 1.5, 2.0, 4.0}) {
        for (double s : {1.0, 2.0, 3.0, kInf}) {
            const LorentzNorm n = lorentz_norm(f, {r, s});
            CHECK(n.value == doctest::Approx(two_level(3.0, S1, 1.0, S2, r, s)).epsilon(1e-12));
        }
    }
    CHECK(distribution_fn(f, 2.0) == doctest::Approx(S1).epsilon(1e-14));
    CHECK(distribution_fn(f, 0.5) == doctest::Approx(S2).epsilon(1e-14));
    CHECK(rearrangement(f, 0.5 * S1) == 3.0);
    CHECK(rearrangement(f, 0.5 * (S1 + S2)) == 1.0);
    CHECK(rearrangement(f, 2.0 * S2) == 0.0);
}

TEST_CASE("L^{r,r} equals L^r and the two routes reconcile") {
    std::mt19937_64 rng(5);
    for (const WeightSpec& spec : {WeightSpec::axis(0.5), WeightSpec::radial(1.0, 2)}) {
        const GridPtr g = make_grid(spec, 6.0, 128);
        for (int k = 0; k < 10; ++k) {
            const GridFunction f = random_steps(g, rng);
            for (double r : {1.0, 2.0, 4.0}) {
                double direct = 0.0;
                for (std::size_t i = 0; i < f.size(); ++i) direct += std::pow(f[i], r) * g->measure(i);
                direct = std::pow(direct, 1.0 / r);
                const LorentzNorm n = lorentz_norm(f, {r, r});
                CHECK(n.value == doctest::Approx(direct).epsilon(1e-10));
                CHECK(std::abs(n.rearrangement_form - n.distribution_form) <= 1e-8 * n.value);
            }
        }
    }
}

TEST_CASE("weak norm of |x|^{-1/2} on the line is sqrt 2") {
    const GridPtr g = make_grid(WeightSpec::radial(0.0, 1), 100.0, 256, 2.0, GridGeometry::Radial);
    const GridFunction f =
        GridFunction::sample(g, [](double x) { return 1.0 / std::sqrt(std::abs(x)); }, Sampling::OuterEdge);
    CHECK(std::abs(weak_norm(f, 2.0) - std::sqrt(2.0)) <= 1e-6 * std::sqrt(2.0));
}

TEST_CASE("embedding constant bounds the second index") {
    std::mt19937_64 rng(9);
    const GridPtr g = make_grid(WeightSpec::axis(0.3), 5.0, 128);
    CHECK(embedding_constant(2.0, 2.0, 2.0) == 1.0);
    CHECK(embedding_constant(2.0, 1.0, kInf) == doctest::Approx(0.5));
    for (int k = 0; k < 10; ++k) {
        const GridFunction f = random_steps(g, rng);
        for (double s1 : {1.0, 2.0}) {
            for (double s2 : {2.0, 4.0, kInf}) {
                if (s2 < s1) continue;
                const double lhs = lorentz_norm(f, {2.0, s2}).value;
                const double rhs = embedding_constant(2.0, s1, s2) * lorentz_norm(f, {2.0, s1}).value;
                CHECK(lhs <= rhs * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("index edge cases") {
    const GridPtr g = make_grid(WeightSpec::axis(0.0), 4.0, 64);
    const GridFunction f = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
    CHECK(lorentz_norm(f, {kInf, kInf}).value == doctest::Approx(f.sup_norm()));
    CHECK(lorentz_norm(f, {kInf, 2.0}).infinite);
    CHECK(lorentz_norm(GridFunction::zeros(g), {2.0, 1.0}).value == 0.0);
    CHECK_THROWS_AS(lorentz_norm(f, {0.5, 1.0}), Error);
    CHECK_THROWS_AS(lorentz_norm(f, {2.0, 0.9}), Error);
}

TEST_CASE("inequality suite on random step functions") {
    std::mt19937_64 rng(21);
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 10.0, 128);
    for (int k = 0; k < 20; ++k) {
        const GridFunction f = random_steps(g, rng);
        const GridFunction h = random_steps(g, rng);
        const InequalityReport rep = inequality_suite(f, h, InequalityParams{});
        CHECK(rep.checks.size() == 3);
        for (const auto& c : rep.checks) {
            INFO(c.name << " lhs " << c.lhs << " rhs " << c.rhs);
            CHECK(c.holds);
        }
    }
    InequalityParams bad;
    bad.theta = 0.9;
    CHECK_THROWS_AS(bad.validate(), Error);
}
