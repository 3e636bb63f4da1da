#pragma once

#include <stddef.h>
#include <stdint.h>

#if defined(FUJITA_BUILDING_LIBRARY)
#define FJ_API __attribute__((visibility("default")))
#else
#define FJ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/// Status codes. Values 1..11 mirror the library error taxonomy.
typedef enum fj_status {
    FJ_OK = 0,
    FJ_INVALID_ARGUMENT = 1,
    FJ_DIMENSION_MISMATCH = 2,
    FJ_GRID_MISMATCH = 3,
    FJ_NON_CONVERGENCE = 4,
    FJ_INVARIANT_VIOLATION = 5,
    FJ_REGIME_MISMATCH = 6,
    FJ_SMALLNESS_UNMET = 7,
    FJ_VACUOUS = 8,
    FJ_FIT_FAILURE = 9,
    FJ_IO = 10,
    FJ_CONFIG = 11,
    FJ_INTERNAL = 99
} fj_status;

typedef enum fj_weight_case { FJ_AXIS_POWER = 0, FJ_RADIAL_POWER = 1 } fj_weight_case;

typedef struct fj_weight fj_weight;
typedef struct fj_grid fj_grid;
typedef struct fj_kernel fj_kernel;

FJ_API const char* fj_version(void);
FJ_API const char* fj_status_string(fj_status status);
/// Message of the last failing call on this thread; "" after success.
FJ_API const char* fj_last_error(void);

FJ_API fj_status fj_weight_create(fj_weight_case weight_case, double exponent, int dimension, fj_weight** out);
FJ_API void fj_weight_destroy(fj_weight* weight);
/// w(B(center, r)); `center` has `dimension` entries.
FJ_API fj_status fj_ball_mass(const fj_weight* weight, const double* center, int dimension, double r, double* out);
FJ_API fj_status fj_critical_parameters(const fj_weight* weight, double p, double* p_star, double* r_star,
                                        int* r_star_at_most_one);

/// Graded grid with the default geometry of the weight.
FJ_API fj_status fj_grid_create(const fj_weight* weight, double radius, int cells, double grading, fj_grid** out);
FJ_API void fj_grid_destroy(fj_grid* grid);
FJ_API fj_status fj_grid_size(const fj_grid* grid, size_t* out);
/// Copies `n` entries; n must equal the grid size.
FJ_API fj_status fj_grid_nodes(const fj_grid* grid, double* out, size_t n);
FJ_API fj_status fj_grid_measure(const fj_grid* grid, double* out, size_t n);

/// Kernel table at time t from `steps` implicit Euler steps.
FJ_API fj_status fj_kernel_build(const fj_grid* grid, double t, int steps, fj_kernel** out);
FJ_API void fj_kernel_destroy(fj_kernel* kernel);
FJ_API fj_status fj_kernel_value(const fj_kernel* kernel, size_t i, size_t j, double* out);
/// out = S(t) phi on the grid; both arrays have n entries.
FJ_API fj_status fj_kernel_apply(const fj_kernel* kernel, const double* phi, double* out, size_t n);

/// ||f||_{L^{r,sigma}(w)} for nodal values f; r or sigma may be INFINITY.
FJ_API fj_status fj_lorentz_norm(const fj_grid* grid, const double* f, size_t n, double r, double sigma, double* out);

FJ_API fj_status fj_kaplan_log_ak(double p, int k, double* out);
FJ_API fj_status fj_kaplan_log_cstar_bound(double p, double* out);

/// Runs a batch subcommand (kernel-verify, lorentz-selftest, evolve, classify,
/// sweep, decay-fit). The summary goes to stdout. `seed` is used when has_seed != 0.
FJ_API fj_status fj_run(const char* command, const char* config_path, const char* out_dir, int jobs, int has_seed,
                        uint64_t seed);

#ifdef __cplusplus
}
#endif
