/* C interface to the MTD scheduling library.
 *
 * Conventions:
 *   - Every function returning int yields an error code:
 *       0 success
 *       1 internal error (unexpected exception)
 *       2 validation error (bad input)
 *       3 infeasible request (well-formed, no solution)
 *       4 numerical failure (iteration did not converge / cross-check failed)
 *     mtd_last_error() returns the message for the calling thread's most
 *     recent failure.
 *   - Handles are opaque; free them with the matching *_free function.
 *   - String outputs (char**) are heap-allocated, NUL-terminated, and must be
 *     released with mtd_string_free.  Output pointers may be NULL when the
 *     caller does not want that piece.
 */
#ifndef MTDSCHED_H
#define MTDSCHED_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  MTD_OK = 0,
  MTD_ERR_INTERNAL = 1,
  MTD_ERR_VALIDATION = 2,
  MTD_ERR_INFEASIBLE = 3,
  MTD_ERR_NUMERICAL = 4
};

typedef struct mtd_structure mtd_structure;
typedef struct mtd_scenario mtd_scenario;

const char* mtd_version_string(void);
const char* mtd_last_error(void);
void mtd_string_free(char* s);

/* ---- attack structures ---- */
int mtd_structure_complete(int node_count, mtd_structure** out);
int mtd_structure_star(int leaves, mtd_structure** out);
int mtd_structure_path(int node_count, mtd_structure** out);
int mtd_structure_erdos_renyi(int node_count, double edge_probability, uint64_t seed,
                              mtd_structure** out);
int mtd_structure_load(const char* path, int directed, mtd_structure** out);
int mtd_structure_node_count(const mtd_structure* g);
int mtd_structure_edge_count(const mtd_structure* g); /* ordered (directed) edge count */
/* Largest-modulus eigenvalue of the attack matrix; tol <= 0 picks the
 * default tolerance. */
int mtd_structure_spectral_radius(const mtd_structure* g, double tol, double* out);
void mtd_structure_free(mtd_structure* g);

/* Convergence margin mu = beta - gamma * lambda1. */
int mtd_margin(double beta, double gamma, double lambda1, double* out);

/* ---- closed-form optimizers ----
 * margins: n entries in caller order, exactly one <= 0 (the violator).
 * mix outputs are n entries in the same caller order.
 * cost_kind: "affine" | "quadratic_shifted" | "sqrt_shifted" with
 * cost_params = [p0, p1], or "table" with cost_params = [m0, c0, m1, c1, ...]
 * (n_params even, >= 4). */
int mtd_max_pi1(const double* margins, int n, double delta, double* pi1_star, double* mix);
int mtd_min_cost(const double* margins, int n, double delta, double pi1,
                 const char* cost_kind, const double* cost_params, int n_params, double* cost,
                 double* mix, int* pair_l, int* pair_m);
int mtd_max_pi1_struct(const double* margins, int n, double a, double b, double c,
                       double delta, double* pi1_star, double* mix);
int mtd_min_cost_struct(const double* margins, int n, double a, double b, double c,
                        double delta, double pi1, const char* cost_kind,
                        const double* cost_params, int n_params, double* cost, double* mix);

/* ---- scenario-driven commands (JSON in, JSON/CSV out) ---- */
int mtd_scenario_parse(const char* json_text, const char* base_dir, mtd_scenario** out);
int mtd_scenario_load(const char* path, mtd_scenario** out);
void mtd_scenario_free(mtd_scenario* s);

/* Writes the report either way; returns 3 when no configuration satisfies
 * the convergence threshold on its own. */
int mtd_cmd_analyze(const mtd_scenario* s, char** report_json);
/* generator_csv is empty for parameter-switching scenarios. */
int mtd_cmd_optimize(const mtd_scenario* s, char** result_json, char** schedule_json,
                     char** generator_csv);
/* has_seed_override != 0 replaces the schedule spec's seed.  converged (may
 * be NULL) receives the convergence verdict (0/1). */
int mtd_cmd_simulate(const mtd_scenario* s, const char* schedule_spec_json,
                     int has_seed_override, uint64_t seed_override, char** summary_json,
                     char** trajectory_csv, char** schedule_csv, int* converged);
/* Writes the report either way; returns 4 when the grid oracle and the
 * closed form disagree beyond tolerance. */
int mtd_cmd_oracle(const mtd_scenario* s, double grid_step, char** report_json);

/* kind: "pi1_params" | "pi1_structs" (grid over (-mu1, mu_n) in [min, max])
 * or "cost_surface" (grid over (pi2, pi3); min/max ignored). */
int mtd_sweep(const mtd_scenario* s, const char* kind, double min, double max, double step,
              char** csv);

#ifdef __cplusplus
}
#endif

#endif /* MTDSCHED_H */
