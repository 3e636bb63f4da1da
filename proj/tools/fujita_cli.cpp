#include "fujita/fujita.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <string>

namespace {

/// 2: configuration or argument problem; 3: numerical failure; 4: I/O.
int exit_code(fj_status s) {
    switch (s) {
        case FJ_OK: return 0;
        case FJ_CONFIG:
        case FJ_INVALID_ARGUMENT: return 2;
        case FJ_IO: return 4;
        default: return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for weighted semilinear heat equations", "fujita-cli"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(fj_version()));

    std::string config;
    std::string out = "out";
    int jobs = 1;
    std::uint64_t seed = 0;

    const char* commands[][2] = {
        {"kernel-verify", "Kernel structural checks, envelope fits and decay slopes"},
        {"lorentz-selftest", "Lorentz-norm identities and inequalities on random step functions"},
        {"evolve", "Single trajectory (Picard, local, or small-data global mode)"},
        {"classify", "Dichotomy outcome for one (p, alpha) cell"},
        {"sweep", "Dichotomy table and phase diagram over p and alpha"},
        {"decay-fit", "Semigroup norm decay regressions"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "Config file (dotted key = value)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "Output directory")->capture_default_str();
        sub->add_option("--jobs", jobs, "Worker threads for sweeps")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--seed", seed, "RNG seed, overrides the config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    const int has_seed = sub->count("--seed") > 0 ? 1 : 0;
    const fj_status s = fj_run(command.c_str(), config.c_str(), out.c_str(), jobs, has_seed, seed);
    if (s != FJ_OK) {
        std::fprintf(stderr, "fujita-cli %s: %s: %s\n", command.c_str(), fj_status_string(s), fj_last_error());
    }
    return exit_code(s);
}
