#ifndef HOTELLING_H
#define HOTELLING_H

/* C interface of the hotelling library. Every call returns a hot_status;
   on failure hot_last_error() describes the problem (per thread). Handles
   are opaque and released with the matching *_destroy function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HOT_API __declspec(dllexport)
#else
#define HOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hot_status {
    HOT_OK = 0,
    HOT_INVALID_ARGUMENT = 1,
    HOT_DUPLICATE_SITES = 2,
    HOT_OUT_OF_DOMAIN = 3,
    HOT_DEGENERATE_POLYGON = 4,
    HOT_DIMENSION_MISMATCH = 5,
    HOT_INFEASIBLE_N = 6,
    HOT_DETERRENCE_IMPOSSIBLE = 7,
    HOT_BRACKETING_FAILURE = 8,
    HOT_NOT_CONVERGED = 9,
    HOT_CONFIG_ERROR = 10,
    HOT_IO_ERROR = 11,
    HOT_INTERNAL = 99
} hot_status;

typedef struct hot_point {
    double x1;
    double x2;
} hot_point;

typedef struct hot_params {
    double market_size;    /* M */
    double fixed_cost;     /* F */
    double transport_cost; /* t */
    double reservation;    /* a */
    double marginal_cost;  /* c */
} hot_params;

typedef struct hot_search {
    int location_resolution; /* odd, 9..129 */
    int leader_resolution;   /* 0: the location grid */
    int last_resolution;
    int entrant_resolution;
    int climb_starts;
    int threads;
    int grid_route;          /* final prices on the consumer grid instead of exact rays */
    int consumer_resolution;
    uint64_t seed;
} hot_search;

/* Unset fields keep the scenario file's values. */
typedef struct hot_overrides {
    int n_max;                  /* 0: keep */
    const double* market_sizes; /* replaces the file's M values when count > 0 */
    size_t market_size_count;
    int thresholds;             /* -1: keep, 0 or 1 */
    int figures;                /* -1: keep, 0 or 1 */
    int has_seed;
    uint64_t seed;
    int threads;                /* 0: keep */
} hot_overrides;

typedef struct hot_solver hot_solver;
typedef struct hot_result hot_result;
typedef struct hot_run hot_run;

HOT_API const char* hot_version(void);
HOT_API const char* hot_status_name(hot_status status);
HOT_API const char* hot_last_error(void);

HOT_API void hot_params_default(hot_params* params);
HOT_API void hot_search_default(hot_search* search);
HOT_API void hot_overrides_default(hot_overrides* overrides);

/* Nash equilibrium prices for fixed locations. prices_out holds n values. */
HOT_API hot_status hot_price_equilibrium(const hot_point* sites, size_t n, const hot_params* params,
                                         double* prices_out, int* converged_out);
/* Total transport cost with every consumer served by the nearest firm. */
HOT_API hot_status hot_social_cost(const hot_point* sites, size_t n, const hot_params* params,
                                   double* cost_out);
/* Locations minimizing the social cost; sites_out holds n points. */
HOT_API hot_status hot_social_optimum(int n, const hot_params* params, int starts, uint64_t seed,
                                      hot_point* sites_out, double* cost_out);

HOT_API hot_status hot_solver_create(const hot_params* params, const hot_search* search, hot_solver** out);
HOT_API void hot_solver_destroy(hot_solver* solver);

/* Best lattice location and profit of one more firm (n may be 0). */
HOT_API hot_status hot_entrant_best_response(hot_solver* solver, const hot_point* incumbents, size_t n,
                                             double market_size, hot_point* location_out,
                                             double* profit_out);
HOT_API hot_status hot_sequential_equilibrium(hot_solver* solver, int n, double market_size,
                                              hot_result** out);
HOT_API hot_status hot_deterrence_solve(hot_solver* solver, int n, double market_size, hot_result** out);
/* Both result handles are optional (may be NULL). */
HOT_API hot_status hot_threshold_sweep(hot_solver* solver, int n, double lo, double hi, double* m_enter_out,
                                       double* m_max_deter_out, hot_result** just_entered_out,
                                       hot_result** deterrence_out);

HOT_API void hot_result_destroy(hot_result* result);
HOT_API size_t hot_result_size(const hot_result* result);
HOT_API double hot_result_market_size(const hot_result* result);
HOT_API hot_status hot_result_firm(const hot_result* result, size_t i, hot_point* location_out,
                                   double* price_out, double* demand_out, double* profit_out);
HOT_API const char* hot_result_regime(const hot_result* result);
HOT_API int hot_result_entrant_blocked(const hot_result* result);
HOT_API double hot_result_best_entrant_profit(const hot_result* result);
HOT_API double hot_result_social_cost(const hot_result* result);
HOT_API int hot_result_prices_converged(const hot_result* result);

/* Loads a scenario file, applies overrides (may be NULL), solves it and
   writes the outputs into out_dir. */
HOT_API hot_status hot_run_scenario(const char* config_path, const char* out_dir,
                                    const hot_overrides* overrides, hot_run** out);
HOT_API void hot_run_destroy(hot_run* run);
HOT_API int hot_run_exit_code(const hot_run* run); /* 0 ok, 3 some case did not converge */
HOT_API size_t hot_run_record_count(const hot_run* run);
HOT_API size_t hot_run_failure_count(const hot_run* run);
HOT_API const char* hot_run_failure(const hot_run* run, size_t i);
HOT_API double hot_run_wall_seconds(const hot_run* run);

#ifdef __cplusplus
}
#endif

#endif
