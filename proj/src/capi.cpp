#include "fujita/fujita.h"

#include "fujita/blowup.hpp"
#include "fujita/errors.hpp"
#include "fujita/experiment.hpp"
#include "fujita/kernel.hpp"
#include "fujita/lorentz.hpp"
#include "fujita/semigroup.hpp"
#include "fujita/weights.hpp"

#include <iostream>
#include <new>
#include <string>

struct fj_weight {
    fujita::WeightSpec spec;
};

struct fj_grid {
    fujita::GridPtr grid;
};

struct fj_kernel {
    fujita::KernelTable table;
};

namespace {

thread_local std::string last_error;

template <class F>
fj_status guarded(F&& body) {
    try {
        body();
        last_error.clear();
        return FJ_OK;
    } catch (const fujita::Error& e) {
        last_error = e.what();
        return static_cast<fj_status>(static_cast<int>(e.code()));
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return FJ_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return FJ_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    fujita::require(p != nullptr, fujita::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* fj_version(void) {
    return "1.0.0";
}

const char* fj_status_string(fj_status status) {
    switch (status) {
        case FJ_OK: return "ok";
        case FJ_INTERNAL: return "internal error";
        default: break;
    }
    const int c = static_cast<int>(status);
    if (c >= 1 && c <= 11) return fujita::to_string(static_cast<fujita::ErrorCode>(c));
    return "unknown status";
}

const char* fj_last_error(void) {
    return last_error.c_str();
}

fj_status fj_weight_create(fj_weight_case weight_case, double exponent, int dimension, fj_weight** out) {
    return guarded([&] {
        need(out, "out");
        *out = nullptr;
        fujita::WeightSpec spec;
        spec.kind = weight_case == FJ_RADIAL_POWER ? fujita::WeightCase::RadialPower : fujita::WeightCase::AxisPower;
        fujita::require(weight_case == FJ_AXIS_POWER || weight_case == FJ_RADIAL_POWER,
                        fujita::ErrorCode::InvalidArgument, "unknown weight case");
        spec.exponent = exponent;
        spec.dimension = dimension;
        fujita::require(dimension >= 1, fujita::ErrorCode::InvalidArgument, "dimension must be >= 1");
        spec.validate();
        *out = new fj_weight{spec};
    });
}

void fj_weight_destroy(fj_weight* weight) {
    delete weight;
}

fj_status fj_ball_mass(const fj_weight* weight, const double* center, int dimension, double r, double* out) {
    return guarded([&] {
        need(weight, "weight");
        need(center, "center");
        need(out, "out");
        fujita::require(dimension == weight->spec.dimension, fujita::ErrorCode::DimensionMismatch,
                        "center dimension does not match the weight");
        *out = fujita::ball_mass(weight->spec, std::span<const double>(center, static_cast<std::size_t>(dimension)), r);
    });
}

fj_status fj_critical_parameters(const fj_weight* weight, double p, double* p_star, double* r_star,
                                 int* r_star_at_most_one) {
    return guarded([&] {
        need(weight, "weight");
        const fujita::CriticalParameters cp = fujita::critical_parameters(weight->spec, p);
        if (p_star) *p_star = cp.p_star;
        if (r_star) *r_star = cp.r_star;
        if (r_star_at_most_one) *r_star_at_most_one = cp.r_star_at_most_one ? 1 : 0;
    });
}

fj_status fj_grid_create(const fj_weight* weight, double radius, int cells, double grading, fj_grid** out) {
    return guarded([&] {
        need(weight, "weight");
        need(out, "out");
        *out = nullptr;
        *out = new fj_grid{fujita::make_grid(weight->spec, radius, cells, grading)};
    });
}

void fj_grid_destroy(fj_grid* grid) {
    delete grid;
}

fj_status fj_grid_size(const fj_grid* grid, size_t* out) {
    return guarded([&] {
        need(grid, "grid");
        need(out, "out");
        *out = grid->grid->size();
    });
}

fj_status fj_grid_nodes(const fj_grid* grid, double* out, size_t n) {
    return guarded([&] {
        need(grid, "grid");
        need(out, "out");
        fujita::require(n == grid->grid->size(), fujita::ErrorCode::DimensionMismatch, "buffer size != grid size");
        const auto x = grid->grid->nodes();
        std::copy(x.begin(), x.end(), out);
    });
}

fj_status fj_grid_measure(const fj_grid* grid, double* out, size_t n) {
    return guarded([&] {
        need(grid, "grid");
        need(out, "out");
        fujita::require(n == grid->grid->size(), fujita::ErrorCode::DimensionMismatch, "buffer size != grid size");
        for (std::size_t i = 0; i < n; ++i) out[i] = grid->grid->measure(i);
    });
}

fj_status fj_kernel_build(const fj_grid* grid, double t, int steps, fj_kernel** out) {
    return guarded([&] {
        need(grid, "grid");
        need(out, "out");
        *out = nullptr;
        *out = new fj_kernel{fujita::build_kernel(grid->grid->spec(), grid->grid, t, steps)};
    });
}

void fj_kernel_destroy(fj_kernel* kernel) {
    delete kernel;
}

fj_status fj_kernel_value(const fj_kernel* kernel, size_t i, size_t j, double* out) {
    return guarded([&] {
        need(kernel, "kernel");
        need(out, "out");
        const std::size_t n = kernel->table.grid->size();
        fujita::require(i < n && j < n, fujita::ErrorCode::InvalidArgument, "kernel index out of range");
        *out = kernel->table(i, j);
    });
}

fj_status fj_kernel_apply(const fj_kernel* kernel, const double* phi, double* out, size_t n) {
    return guarded([&] {
        need(kernel, "kernel");
        need(phi, "phi");
        need(out, "out");
        fujita::require(n == kernel->table.grid->size(), fujita::ErrorCode::DimensionMismatch,
                        "buffer size != grid size");
        const fujita::GridFunction f(kernel->table.grid, std::vector<double>(phi, phi + n));
        const fujita::GridFunction u = fujita::apply_semigroup(kernel->table, f);
        std::copy(u.values.begin(), u.values.end(), out);
    });
}

fj_status fj_lorentz_norm(const fj_grid* grid, const double* f, size_t n, double r, double sigma, double* out) {
    return guarded([&] {
        need(grid, "grid");
        need(f, "f");
        need(out, "out");
        fujita::require(n == grid->grid->size(), fujita::ErrorCode::DimensionMismatch, "buffer size != grid size");
        const fujita::GridFunction g(grid->grid, std::vector<double>(f, f + n));
        *out = fujita::lorentz_norm(g, {r, sigma}).value;
    });
}

fj_status fj_kaplan_log_ak(double p, int k, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = fujita::kaplan_log_ak(p, k);
    });
}

fj_status fj_kaplan_log_cstar_bound(double p, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = fujita::kaplan_log_cstar_bound(p);
    });
}

fj_status fj_run(const char* command, const char* config_path, const char* out_dir, int jobs, int has_seed,
                 uint64_t seed) {
    return guarded([&] {
        need(command, "command");
        need(config_path, "config_path");
        need(out_dir, "out_dir");
        fujita::RunRequest req;
        req.command = command;
        req.config = config_path;
        req.out_dir = out_dir;
        req.jobs = jobs;
        if (has_seed) req.seed = seed;
        fujita::run_experiment(req, std::cout);
        std::cout.flush();
    });
}

}  // extern "C"
