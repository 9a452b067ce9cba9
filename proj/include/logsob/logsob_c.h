/* C API for the logsob library: opaque handles, integer status codes.
 * All returned strings are heap-allocated JSON/CSV; release them with
 * logsob_string_free. Handles are released with the matching *_destroy.
 * On failure every function returns a nonzero status and leaves a message
 * retrievable through logsob_last_error().
 */
#ifndef LOGSOB_C_H
#define LOGSOB_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    LOGSOB_OK = 0,
    LOGSOB_EINVAL = 1,   /* contract violation / invalid input */
    LOGSOB_ENOCONV = 2,  /* iteration or solver did not converge */
    LOGSOB_EIO = 3,      /* file I/O or format error */
    LOGSOB_EINTERNAL = 4
} logsob_status;

typedef struct logsob_grid logsob_grid;
typedef struct logsob_field logsob_field;
typedef struct logsob_bubble logsob_bubble;

const char* logsob_version(void);
const char* logsob_last_error(void);
void logsob_string_free(char* s);

/* grids */
logsob_status logsob_grid_create(int dim, double radius, int points_per_axis, int stencil_order,
                                 logsob_grid** out);
void logsob_grid_destroy(logsob_grid* g);

/* fields */
void logsob_field_destroy(logsob_field* f);
logsob_status logsob_field_read(const char* path, logsob_field** out);
logsob_status logsob_field_write(const logsob_field* f, const char* path);
logsob_status logsob_field_size(const logsob_field* f, size_t* out);
logsob_status logsob_field_values(const logsob_field* f, const double** out); /* borrowed */

/* gauge: 0 = unit L2 mass, 1 = solution amplitude e^{(1+d)/2} */
logsob_status logsob_gaussian_create(const logsob_grid* g, double inverse_variance,
                                     const double* center, int gauge, logsob_field** out);

/* core operations */
logsob_status logsob_residual(const logsob_field* u, logsob_field** out);
logsob_status logsob_norms_json(const logsob_field* u, char** json);
logsob_status logsob_hminus1(const logsob_field* f, double* out);
logsob_status logsob_deficit_json(const logsob_field* u, int normalize, char** json);

/* kind: 0 = oscillator, 1 = around_bubbles (centers: dim-major pairs) */
logsob_status logsob_spectrum_json(const logsob_grid* g, int kind, const double* centers,
                                   int ncenters, int count, char** json);
logsob_status logsob_coercivity(const logsob_grid* g, const double* centers, int ncenters,
                                int include_radial, double* out);

/* nu = 0 detects the bubble count from the energy window */
logsob_status logsob_fit_json(const logsob_field* u, int nu, char** json);

/* two-bubble construction */
logsob_status logsob_bubble_create(double L, int dim, logsob_bubble** out);
void logsob_bubble_destroy(logsob_bubble* b);
logsob_status logsob_bubble_summary_json(const logsob_bubble* b, char** json);
/* which: 0 = rho, 1 = u, 2 = f */
logsob_status logsob_bubble_field(const logsob_bubble* b, int which, logsob_field** out);
logsob_status logsob_bubble_witness_json(const logsob_bubble* b, char** json);

/* sweeps and probes */
logsob_status logsob_sweep_json(const double* L_list, int n, int dim, char** json, char** csv);
logsob_status logsob_scalarmax_json(const double* eta_list, int n, char** json);
logsob_status logsob_interaction_json(const double* eta_list, int n, double sigma,
                                      double sigma_prime, char** json);
logsob_status logsob_probe_json(int nu, double L, const double* eps_list, int neps, int trials,
                                uint64_t seed, char** json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* LOGSOB_C_H */
