#include "fujita/fujita.h"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

TEST_CASE("weight handles and status codes") {
    fj_weight* w = nullptr;
    CHECK(fj_weight_create(FJ_AXIS_POWER, 1.2, 1, &w) == FJ_INVALID_ARGUMENT);
    CHECK(w == nullptr);
    CHECK(std::string(fj_last_error()).find("axis-power") != std::string::npos);
    CHECK(fj_weight_create(FJ_AXIS_POWER, 0.5, 1, nullptr) == FJ_INVALID_ARGUMENT);

    REQUIRE(fj_weight_create(FJ_AXIS_POWER, 0.5, 1, &w) == FJ_OK);
    CHECK(std::string(fj_last_error()).empty());
    const double origin[1] = {0.0};
    double mass = 0.0;
    REQUIRE(fj_ball_mass(w, origin, 1, 2.0, &mass) == FJ_OK);
    // 2 r^{1+a} / (1+a)
    CHECK(mass == doctest::Approx(2.0 * std::pow(2.0, 1.5) / 1.5).epsilon(1e-12));
    CHECK(fj_ball_mass(w, origin, 2, 2.0, &mass) == FJ_DIMENSION_MISMATCH);

    double p_star = 0.0, r_star = 0.0;
    int small = -1;
    REQUIRE(fj_critical_parameters(w, 2.5, &p_star, &r_star, &small) == FJ_OK);
    CHECK(p_star == doctest::Approx(7.0 / 3.0));
    CHECK(r_star == doctest::Approx(1.125));
    CHECK(small == 0);
    fj_weight_destroy(w);
    fj_weight_destroy(nullptr);
    CHECK(std::strcmp(fj_status_string(FJ_CONFIG), "") != 0);
    CHECK(std::strlen(fj_version()) > 0);
}

TEST_CASE("grid, kernel and norms through the C boundary") {
    fj_weight* w = nullptr;
    REQUIRE(fj_weight_create(FJ_AXIS_POWER, 0.5, 1, &w) == FJ_OK);
    fj_grid* g = nullptr;
    CHECK(fj_grid_create(w, 10.0, 4, 2.0, &g) == FJ_INVALID_ARGUMENT);
    REQUIRE(fj_grid_create(w, 10.0, 32, 2.0, &g) == FJ_OK);
    size_t n = 0;
    REQUIRE(fj_grid_size(g, &n) == FJ_OK);
    std::vector<double> x(n), m(n), phi(n), out(n);
    REQUIRE(fj_grid_nodes(g, x.data(), n) == FJ_OK);
    REQUIRE(fj_grid_measure(g, m.data(), n) == FJ_OK);
    CHECK(fj_grid_nodes(g, x.data(), n + 1) == FJ_DIMENSION_MISMATCH);

    fj_kernel* k = nullptr;
    CHECK(fj_kernel_build(g, -1.0, 16, &k) == FJ_INVALID_ARGUMENT);
    REQUIRE(fj_kernel_build(g, 0.5, 16, &k) == FJ_OK);
    for (size_t i = 0; i < n; ++i) phi[i] = std::exp(-x[i] * x[i]);
    REQUIRE(fj_kernel_apply(k, phi.data(), out.data(), n) == FJ_OK);
    double before = 0.0, after = 0.0;
    for (size_t i = 0; i < n; ++i) {
        before += phi[i] * m[i];
        after += out[i] * m[i];
    }
    CHECK(after == doctest::Approx(before).epsilon(1e-3));
    double v = 0.0;
    CHECK(fj_kernel_value(k, n, 0, &v) == FJ_INVALID_ARGUMENT);
    CHECK(fj_kernel_value(k, 0, 0, &v) == FJ_OK);
    CHECK(v > 0.0);

    double norm = 0.0;
    REQUIRE(fj_lorentz_norm(g, phi.data(), n, INFINITY, INFINITY, &norm) == FJ_OK);
    CHECK(norm == doctest::Approx(1.0));
    CHECK(fj_lorentz_norm(g, phi.data(), n, 0.5, 1.0, &norm) == FJ_INVALID_ARGUMENT);

    double la = 0.0;
    REQUIRE(fj_kaplan_log_ak(2.0, 2, &la) == FJ_OK);
    CHECK(std::exp(la) == doctest::Approx(1.0 / 3.0));
    REQUIRE(fj_kaplan_log_cstar_bound(2.0, &la) == FJ_OK);
    CHECK(la == doctest::Approx((1.0 + std::log(2.0)) * 1.5));

    fj_kernel_destroy(k);
    fj_grid_destroy(g);
    fj_weight_destroy(w);
}

TEST_CASE("fj_run maps configuration errors") {
    const auto out = std::filesystem::temp_directory_path() / "fujita_capi_run";
    const std::string bad = std::string(FUJITA_TEST_DATA) + "/bad_exponent.conf";
    CHECK(fj_run("evolve", bad.c_str(), out.string().c_str(), 1, 0, 0) == FJ_CONFIG);
    CHECK(std::string(fj_last_error()).find("axis-power") != std::string::npos);
    CHECK(fj_run("teleport", bad.c_str(), out.string().c_str(), 1, 0, 0) == FJ_CONFIG);
    CHECK(fj_run("evolve", "/nonexistent/x.conf", out.string().c_str(), 1, 0, 0) != FJ_OK);
    CHECK(fj_run(nullptr, bad.c_str(), out.string().c_str(), 1, 0, 0) == FJ_INVALID_ARGUMENT);
    std::filesystem::remove_all(out);
}
