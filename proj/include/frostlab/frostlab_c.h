#ifndef FROSTLAB_C_H
#define FROSTLAB_C_H

/*
 * C interface of libfrostlab.
 *
 * Every function returns a status: FL_OK (0) or one of the error codes below.
 * On failure fl_last_error() gives a message for the calling thread.
 * Options and results are JSON strings; option strings may be NULL or ""
 * for the defaults. Returned strings belong to the caller and are released
 * with fl_string_free; measures with fl_measure_free.
 */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define FL_API __attribute__((visibility("default")))
#else
#define FL_API
#endif

typedef struct fl_measure fl_measure;

enum fl_status {
  FL_OK = 0,
  FL_EMPTY_SUPPORT,
  FL_ZERO_MASS_CUBE,
  FL_ZERO_MASS_SET,
  FL_BAD_NORMAL,
  FL_DEPTH_MISMATCH,
  FL_OUT_OF_RANGE,
  FL_HYPOTHESIS_FAILED,
  FL_NON_CONCENTRATION_FAILED,
  FL_EPS_TOO_SMALL_FOR_T,
  FL_BAD_DELTA,
  FL_SUPPORT_TOO_LARGE,
  FL_PRECONDITION_FAILED,
  FL_SINGULAR_POINT,
  FL_NOT_DOMINATED,
  FL_LINEARIZATION_OUT_OF_RANGE,
  FL_RHO_DECAY_FAILED,
  FL_NU_DECAY_FAILED,
  FL_DIMENSION_MISMATCH,
  FL_UNKNOWN_GENERATOR,
  FL_INVALID_ARGUMENT,
  FL_PARSE_ERROR,
  FL_IO_ERROR,
  FL_INTERNAL
};

FL_API const char* fl_version(void);
FL_API const char* fl_status_name(int status);
FL_API const char* fl_last_error(void);
FL_API void fl_string_free(char* s);

/* ---- measures ---- */

/* {"d":..,"m":..,"cells":[{"idx":[..],"mass":..},..]} */
FL_API int fl_measure_parse(const char* json, fl_measure** out);
FL_API int fl_measure_load(const char* path, fl_measure** out);
/* Generators: cantor_product, ifs_self_similar, train_track, grid,
   sphere_sample, random_tree, atom. */
FL_API int fl_measure_generate(const char* name, const char* params, fl_measure** out);
FL_API int fl_measure_to_json(const fl_measure* mu, char** out);
/* d, m, cells, total, per-level cube counts and entropies. */
FL_API int fl_measure_info(const fl_measure* mu, char** out);
FL_API void fl_measure_free(fl_measure* mu);

/* ---- operations ---- */

/* {"T", "ell", "eps", "with_cells", "classes_per_bit"} */
FL_API int fl_regularize(const fl_measure* mu, const char* opts, char** out);
/* {"function": {"a","b","values"} | "random": {"G","seed","monotone"},
    "mode": "linear"|"graded"|"superlinear"|"chain", "eps", "s", "t",
    "quantum"} */
FL_API int fl_lip_decompose(const char* request, char** out);
/* {"T", "sigma"?, "mode": "frostman"|"ahlfors", "u", "eps", "max_cubes",
    "max_centers"}; without sigma a regular subset is extracted first. */
FL_API int fl_multiscale(const fl_measure* mu, const char* opts, char** out);
/* {"map", "T", "intervals"?: [[lo, hi], ..] in levels} */
FL_API int fl_entropy_bound(const fl_measure* mu, const char* opts, char** out);
/* {"angle" | "theta": [..], "level"} */
FL_API int fl_project(const fl_measure* mu, const char* opts, fl_measure** out);
/* {"sigma", "exact_limit"} */
FL_API int fl_energy(const fl_measure* mu, const char* opts, char** out);
/* {"sigma", "kappa", "C", "directions", "tol"} */
FL_API int fl_kaufman(const fl_measure* mu, const char* opts, char** out);
/* {"kappa", "directions", "levels", "exact_limit"} */
FL_API int fl_falconer(const fl_measure* mu, const char* opts, char** out);
/* {"delta", "eta", "kappa", "C"} */
FL_API int fl_heavy_plates(const fl_measure* nu, const char* opts, char** out);
/* {"delta0", "eta", "depth", "kappa", "max_centers"} */
FL_API int fl_radial(const fl_measure* mu, const fl_measure* nu, const char* opts,
                     char** out);
/* {"train_track": m} or {"E": [[x,y],..], "A": [[a0,a1],..], "delta"};
   plus "family", "audit", "kappa", "eps". */
FL_API int fl_incidence(const char* request, char** out);
/* {"directions", "random", "seed", "level"}; csv may be NULL. */
FL_API int fl_sweep(const fl_measure* mu, const char* opts, char** out, char** csv);
/* {"pins": [[x,y],..] | "count", "seed", "lo", "hi", "level"} */
FL_API int fl_pinned(const fl_measure* mu, const char* opts, char** out, char** csv);
/* Full pipeline on a scenario; the report JSON comes back in out. */
FL_API int fl_run(const char* scenario, char** out);

#ifdef __cplusplus
}
#endif

#endif /* FROSTLAB_C_H */
