#include "fujita/config.hpp"
#include "fujita/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace fujita;

namespace {

ConfigFile parse(const std::string& text) {
    std::istringstream is(text);
    return ConfigFile::parse(is, "test.conf");
}

std::string config_error(const std::string& text) {
    try {
        ExperimentConfig::from_file(parse(text));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("scalar parsing") {
    CHECK(parse_real("2.5") == 2.5);
    CHECK(parse_real(" 7/3 ") == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(std::isinf(parse_real("inf")));
    CHECK_THROWS_AS(parse_real("two"), Error);
    CHECK_THROWS_AS(parse_real("1/0"), Error);
    const auto list = parse_real_list("1.5, 2, critical", 7.0 / 3.0);
    REQUIRE(list.size() == 3);
    CHECK(list[2] == doctest::Approx(7.0 / 3.0));
    CHECK_THROWS_AS(parse_real_list("critical"), Error);
}

TEST_CASE("datum and norm parsing") {
    const InitialDatum b = parse_datum("bump(0, 1, 2) * 3", ".");
    CHECK(b.kind == InitialDatum::Kind::Bump);
    CHECK(b.height == 6.0);
    const InitialDatum c = parse_datum("decay_profile(0.5, 3)", ".");
    CHECK(c.kind == InitialDatum::Kind::DecayProfile);
    CHECK(c(0.0) == 0.5);
    CHECK(parse_datum("zero", ".").kind == InitialDatum::Kind::Zero);
    CHECK_THROWS_AS(parse_datum("bump(0, 1)", "."), Error);
    CHECK_THROWS_AS(parse_datum("gaussian(1)", "."), Error);

    const auto norms = parse_norms("weak:2, strong:1.5, inf");
    REQUIRE(norms.size() == 3);
    CHECK(norms[0].kind == NormKind::Weak);
    CHECK(norms[1].q == 1.5);
    CHECK(std::isinf(norms[2].q));
    CHECK(parse_norms("none").empty());
    CHECK_THROWS_AS(parse_norms("medium:2"), Error);
}

TEST_CASE("file-level errors carry line numbers") {
    CHECK(config_error("weight.case = axis\nweight.exponent = 1.2\n").find("test.conf:2:") == 0);
    CHECK(config_error("weight.exponent = 1.2\n").find("violates the axis-power condition (A): 0 <= a < 1") !=
          std::string::npos);
    CHECK(config_error("grid.cells = 64\n\n# c\ngrid.cell = 3\n") == "test.conf:4: unknown key 'grid.cell'");
    CHECK(config_error("evolve.p = 0.5\n").find("test.conf:1:") == 0);
    CHECK_THROWS_AS(parse("grid.cells = 1\ngrid.cells = 2\n"), Error);
    CHECK_THROWS_AS(parse("grid.cells 1\n"), Error);
}

TEST_CASE("sweep lists and the critical token") {
    const ExperimentConfig c =
        ExperimentConfig::from_file(parse("weight.exponent = 0.5\nsweep.p = 1.5, critical, 3\n"));
    REQUIRE(c.sweep_p.size() == 3);
    CHECK(c.sweep_p[1] == doctest::Approx(7.0 / 3.0).epsilon(1e-15));
    CHECK(config_error("sweep.alpha = 0, 0.5\nsweep.p = critical\n").find("test.conf:2:") == 0);
}

TEST_CASE("resolved configuration lists defaults") {
    const ExperimentConfig c = ExperimentConfig::from_file(parse("seed = 11\n"));
    const auto kv = c.resolved();
    auto value = [&](const std::string& k) {
        for (const auto& [key, v] : kv)
            if (key == k) return v;
        return std::string("<missing>");
    };
    CHECK(value("seed") == "11");
    CHECK(value("grid.cells") == "512");
    CHECK(value("evolve.mode") == "picard");
    CHECK(value("weight.case") == "axis");
    const ClassifyConfig cc = c.classify_config();
    CHECK(cc.blowup_horizon == 256.0);
    CHECK(cc.cells == 512);
}
