#ifndef LATTICEVAR_H
#define LATTICEVAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(LATTICEVAR_BUILDING)
#define LV_API __attribute__((visibility("default")))
#else
#define LV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lv_status {
  LV_OK = 0,
  LV_ERR_INVALID_ARGUMENT = 1,
  LV_ERR_DEGENERATE = 2,
  LV_ERR_NO_CONVERGENCE = 3,
  LV_ERR_DIMENSION_OVERFLOW = 4,
  LV_ERR_NO_CROSSING = 5,
  LV_ERR_STEP_COLLAPSE = 6,
  LV_ERR_PURITY_PROJECTION = 7,
  LV_ERR_CALLBACK = 8,
  LV_ERR_INTERNAL = 99
} lv_status;

typedef enum lv_phase {
  LV_PHASE_MI = 0,
  LV_PHASE_DW = 1,
  LV_PHASE_SF = 2,
  LV_PHASE_SS = 3,
  LV_PHASE_NA = 4
} lv_phase;

/* Parameters in units of U, plus the lattice. */
typedef struct lv_model lv_model;

typedef struct lv_point_result {
  double energy; /* total over L sites */
  double phi_o_re, phi_o_im, phi_e_re, phi_e_im;
  double rho_o, rho_e;
  int phase;     /* lv_phase */
  int converged;
  long iterations;
  double residual;      /* method specific convergence measure */
  double purity_defect; /* Gaussian only, else 0 */
  double binder;        /* NaN when undefined or not computed */
} lv_point_result;

typedef struct lv_mf_options {
  int n_max;
  double mixing;
  double tol_energy;
  double tol_param;
  int max_iterations;
  int n_random;
} lv_mf_options;

typedef struct lv_coherent_options {
  double step;
  double grad_tol;
  long max_steps;
  int n_starts;
} lv_coherent_options;

typedef struct lv_gaussian_options {
  double step;
  double velocity_tol;
  long max_steps;
  double purity_tol;
  int n_starts;
  int compute_binder;
} lv_gaussian_options;

typedef struct lv_ed_options {
  double tol;
  long dense_threshold;
  int krylov_dim;
  int max_restarts;
} lv_ed_options;

/* Message of the last failing call on this thread. */
LV_API const char* lv_last_error(void);
LV_API const char* lv_status_name(lv_status status);
LV_API const char* lv_phase_name(int phase);

LV_API lv_status lv_model_create(double mu_over_u, double two_j_over_u, double two_v_over_u,
                                 double eps_over_u, int sites, int n_max, lv_model** out);
LV_API void lv_model_destroy(lv_model* model);

LV_API void lv_mf_options_default(lv_mf_options* options);
LV_API void lv_coherent_options_default(lv_coherent_options* options);
LV_API void lv_gaussian_options_default(lv_gaussian_options* options);
LV_API void lv_ed_options_default(lv_ed_options* options);

LV_API lv_status lv_solve_mf(const lv_model* model, const lv_mf_options* options, uint64_t seed,
                             lv_point_result* out);
LV_API lv_status lv_solve_coherent(const lv_model* model, const lv_coherent_options* options,
                                   uint64_t seed, lv_point_result* out);
LV_API lv_status lv_solve_gaussian(const lv_model* model, const lv_gaussian_options* options,
                                   uint64_t seed, lv_point_result* out);
/* Uses the lattice n_max of the model. */
LV_API lv_status lv_solve_ed(const lv_model* model, const lv_ed_options* options,
                             lv_point_result* out);

LV_API lv_status lv_atomic(const lv_model* model, int* n_odd, int* n_even, double* energy_per_pair);
/* Analytic insulator/superfluid hopping J_c/U at eps = 0. */
LV_API lv_status lv_critical_hopping(const lv_model* model, double* j_c_over_u);
/* mu_c/U = 4J/(2V/U - 1) - eps; *exists = 0 when 2V <= U. */
LV_API lv_status lv_ss_boundary_mu(const lv_model* model, double* mu_c_over_u, int* exists);
LV_API lv_status lv_coherent_is_staggered(const lv_model* model, int* staggered);

LV_API lv_status lv_makima(const double* x, const double* y, size_t n, double query, double* out);
LV_API lv_status lv_zero_threshold(const double* x, const double* y, size_t n, double zero_tol,
                                   double* out);
LV_API lv_status lv_crossing(const double* x1, const double* y1, size_t n1, const double* x2,
                             const double* y2, size_t n2, double* out);
LV_API lv_status lv_fss_fit(const double* sizes, const double* mu_c, size_t n, double* mu_inf,
                            double* beta, double* eta, double* rms_residual);

/* Return a label; a negative value aborts the bisection with LV_ERR_CALLBACK. */
typedef int (*lv_classifier)(double x, void* user);
LV_API lv_status lv_boundary_bisect(lv_classifier classifier, void* user, double lo, double hi,
                                    double tol, double* out, int* iterations);

#ifdef __cplusplus
}
#endif

#endif
