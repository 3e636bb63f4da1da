#include "fujita/errors.hpp"
#include "fujita/evolve.hpp"
#include "fujita/fitted.hpp"
#include "fujita/lorentz.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace fujita;

namespace {

struct Setup {
    GridPtr grid;
    Propagator prop;
    explicit Setup(double radius = 30.0, int cells = 256)
        : grid(make_grid(WeightSpec::axis(0.5), radius, cells)), prop(grid) {}
};

double sup_diff(const GridFunction& a, const GridFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("zero datum is a fixed point") {
    Setup s;
    EvolveConfig cfg;
    cfg.horizon = 4.0;
    const Trajectory tr = picard_iterate(GridFunction::zeros(s.grid), cfg, s.prop);
    CHECK(tr.converged());
    CHECK(tr.max_window_iterations == 1);
    for (double v : tr.sup) CHECK(v == 0.0);
}

TEST_CASE("monotone iterates and the Duhamel lower bound") {
    Setup s;
    EvolveConfig cfg;
    cfg.p = 2.0;
    cfg.horizon = 2.0;
    const GridFunction u0 = sample(InitialDatum::bump(0.0, 1.0, 1.0), s.grid);
    const Trajectory tr = picard_iterate(u0, cfg, s.prop);
    REQUIRE(tr.converged());
    const double scale = std::max(1.0, *std::max_element(tr.sup.begin(), tr.sup.end()));
    CHECK(tr.min_monotone_gap >= -cfg.picard_tol * scale);
    CHECK(tr.min_duhamel_gap >= -cfg.picard_tol * scale);
}

TEST_CASE("small-data contraction") {
    Setup s;
    EvolveConfig cfg;
    cfg.p = 2.0;
    cfg.horizon = 1.0;
    cfg.record_times = {1.0};
    const GridFunction u0 = sample(InitialDatum::decay_profile(0.01, 2.0), s.grid);
    const Trajectory tr = picard_iterate(u0, cfg, s.prop);
    REQUIRE(tr.converged());
    const auto& d = tr.first_window_differences;
    REQUIRE(d.size() >= 2);
    for (std::size_t k = 1; k < d.size(); ++k) {
        if (d[k - 1] > 1e-13) CHECK(d[k] <= 0.5 * d[k - 1]);
    }
}

TEST_CASE("comparison in the initial data") {
    Setup s;
    EvolveConfig cfg;
    cfg.p = 2.0;
    cfg.horizon = 1.0;
    const GridFunction lo = sample(InitialDatum::bump(0.0, 1.0, 0.5), s.grid);
    const GridFunction hi = sample(InitialDatum::bump(0.0, 1.5, 0.6), s.grid);
    for (std::size_t i = 0; i < lo.size(); ++i) REQUIRE(lo[i] <= hi[i]);
    const Trajectory a = picard_iterate(lo, cfg, s.prop);
    const Trajectory b = picard_iterate(hi, cfg, s.prop);
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        for (std::size_t i = 0; i < lo.size(); ++i) CHECK(a.snapshots[k][i] <= b.snapshots[k][i] + 1e-10);
    }
}

TEST_CASE("local existence and the split-step oracle") {
    Setup s;
    FittedConstants fc;
    fit_evolution_constants(s.prop, 2.0, fc);
    // maximum principle: the sup ratio cannot exceed one
    CHECK(fc.c1 > 0.0);
    CHECK(fc.c1 <= 1.0 + 1e-9);
    CHECK(fc.local_C1 == doctest::Approx(1.0).epsilon(0.02));
    const GridFunction u0 = sample(InitialDatum::bump(0.0, 1.0, 1.0), s.grid);
    const LocalRun run = solve_local(u0, 2.0, s.prop, fc);
    CHECK(run.observed_sup <= 2.0 * fc.c_double_star * 1.0);
    CHECK(run.T == doctest::Approx(1.0 / (fc.local_C1 * 4.0 * fc.c_double_star)));

    const std::vector<double> half{run.T / 2.0};
    const auto oracle = split_step_solve(u0, 2.0, half, 4000);
    EvolveConfig cfg;
    cfg.p = 2.0;
    cfg.horizon = run.T / 2.0;
    cfg.record_times = half;
    const Trajectory tr = picard_iterate(u0, cfg, s.prop);
    CHECK(sup_diff(tr.snapshots[0], oracle[0]) <= 2e-3);

    const LocalRun zero = solve_local(GridFunction::zeros(s.grid), 2.0, s.prop, fc);
    CHECK(zero.observed_sup == 0.0);
}

TEST_CASE("threshold exit") {
    Setup s;
    EvolveConfig cfg;
    cfg.p = 2.0;
    cfg.horizon = 4.0;
    const GridFunction u0 = sample(InitialDatum::bump(0.0, 1.0, 3.0), s.grid);
    const Trajectory tr = picard_iterate(u0, cfg, s.prop);
    CHECK(tr.outcome == Outcome::ThresholdExceeded);
    CHECK(tr.escape_time > 0.0);
    CHECK(tr.escape_time < 4.0);
    CHECK(tr.threshold == doctest::Approx(3e6));
}

TEST_CASE("rescaling balances the two norms") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 200.0, 384);
    const double p = 3.0, r = 1.2;
    const InitialDatum d = InitialDatum::bump(0.0, 2.0, 0.3);
    const double lam = balancing_lambda(d, g, p, r);
    const double amp = std::pow(lam, 2.0 / (p - 1.0));
    const GridFunction v = GridFunction::sample(g, [&](double x) { return amp * d(lam * x); });
    CHECK(std::abs(lebesgue_norm(v, r) - v.sup_norm()) <= 1e-6 * v.sup_norm());
}

TEST_CASE("global small-data runs") {
    const GridPtr g = make_grid(WeightSpec::axis(0.5), 7.43 * 16.0, 384);
    const Propagator prop(g);
    EvolveConfig cfg;
    cfg.horizon = 256.0;
    cfg.keep_snapshots = false;

    SUBCASE("zero datum") {
        const GlobalRun run = solve_global_small(InitialDatum::zero(), g, 3.0, 0.0, 1.0, prop, cfg);
        CHECK(run.trajectory.converged());
        for (const auto& f : run.functionals) CHECK(f.sup == 0.0);
    }
    SUBCASE("weak form") {
        const GlobalRun run = solve_global_small(InitialDatum::decay_profile(0.05, 3.0), g, 3.0, 0.0, 1.0, prop, cfg);
        CHECK(run.trajectory.converged());
        CHECK(run.functionals.size() == 3);
        for (const auto& f : run.functionals) CHECK(std::isfinite(f.sup));
    }
    SUBCASE("strong form with rescaling") {
        const GlobalRun run = solve_global_small(InitialDatum::bump(0.0, 1.0, 0.05), g, 3.0, 1.0, 1.0, prop, cfg);
        CHECK(run.rescaled);
        CHECK(run.trajectory.converged());
        CHECK(run.trajectory.times.back() == doctest::Approx(256.0));
    }
    SUBCASE("preconditions") {
        CHECK_THROWS_AS(solve_global_small(InitialDatum::bump(0.0, 1.0, 50.0), g, 3.0, 0.0, 1.0, prop, cfg), Error);
        CHECK_THROWS_AS(solve_global_small(InitialDatum::bump(0.0, 1.0, 0.1), g, 2.0, 0.0, 1.0, prop, cfg), Error);
    }
}

TEST_CASE("stability estimate") {
    Setup s;
    const GridFunction a = sample(InitialDatum::bump(0.0, 1.0, 0.2), s.grid);
    CHECK(stability_check(a, a, 2.0, 1.0, s.prop) == 0.0);
    auto shifted = [&](double eps) {
        GridFunction b = a;
        for (double& v : b.values) v += eps;
        return b;
    };
    const double r1 = stability_check(a, shifted(1e-3), 2.0, 1.0, s.prop);
    const double r2 = stability_check(a, shifted(5e-4), 2.0, 1.0, s.prop);
    CHECK(std::isfinite(r1));
    CHECK(std::abs(r1 - r2) <= 0.2 * r2);
    const double short_ratio = stability_check(a, shifted(1e-3), 2.0, 0.1, s.prop);
    CHECK(short_ratio <= r1 * (1.0 + 1e-12));
}

TEST_CASE("trajectory CSV") {
    Setup s;
    EvolveConfig cfg;
    cfg.horizon = 1.0;
    cfg.norms = {{2.0, NormKind::Strong}, {2.0, NormKind::Weak}};
    const Trajectory tr = picard_iterate(sample(InitialDatum::bump(0.0, 1.0, 0.5), s.grid), cfg, s.prop);
    const auto file = std::filesystem::temp_directory_path() / "fujita_traj_test.csv";
    write_trajectory_csv(file, tr);
    std::ifstream is(file);
    std::string header;
    std::getline(is, header);
    CHECK(header == "time,sup_norm,strong_q2,weak_q2");
    std::filesystem::remove(file);
}

TEST_CASE("datum descriptors") {
    CHECK(InitialDatum::bump(0.0, 1.0, 2.0)(0.0) == 2.0);
    CHECK(InitialDatum::decay_profile(0.5, 3.0)(1.0) == doctest::Approx(0.25));
    CHECK(InitialDatum::indicator(1.0)(1.5) == 0.0);
    CHECK(InitialDatum::bump(0.0, 1.0, 2.0).scaled(2.0).height == 4.0);
    CHECK_THROWS_AS(InitialDatum::bump(0.0, 0.0, 1.0), Error);
    EvolveConfig bad;
    bad.p = 1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
}
