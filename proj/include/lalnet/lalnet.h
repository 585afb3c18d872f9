#ifndef LALNET_H
#define LALNET_H

/* C interface of the lalnet enhancement library.
 *
 * Every function returning int returns a lalnet_status. On failure the message of the
 * most recent error on the calling thread is available from lalnet_last_error().
 * Settings are passed as flat "key = value" text (one per line, '#' comments); see
 * lalnet_setting_key() for the recognised keys. NULL or "" means all defaults. */

#include <stddef.h>

#if defined(_WIN32)
#define LALNET_API __declspec(dllexport)
#else
#define LALNET_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lalnet_status {
  LALNET_OK = 0,
  LALNET_E_ARGUMENT = 1, /* null handle, bad shape, unknown name */
  LALNET_E_CONFIG = 2,   /* invalid settings */
  LALNET_E_IO = 3,       /* missing or unwritable file */
  LALNET_E_FORMAT = 4,   /* corrupt or unsupported image / checkpoint */
  LALNET_E_DIVERGED = 5, /* training produced a non-finite loss */
  LALNET_E_INTERNAL = 6
} lalnet_status;

typedef struct lalnet_model lalnet_model;

LALNET_API const char* lalnet_version(void);
LALNET_API const char* lalnet_status_name(int status);
/* Thread-local; empty string when the last call on this thread succeeded. */
LALNET_API const char* lalnet_last_error(void);

/* ---- settings ---- */
LALNET_API int lalnet_setting_count(void);
/* NULL when i is out of range. */
LALNET_API const char* lalnet_setting_key(int i);
LALNET_API const char* lalnet_setting_default(int i);
LALNET_API const char* lalnet_setting_help(int i);
LALNET_API int lalnet_settings_validate(const char* settings);

/* ---- models ---- */
/* Fresh, seeded initialisation; the seed is the `seed` setting. */
LALNET_API int lalnet_model_create(const char* settings, lalnet_model** out);
LALNET_API int lalnet_model_load(const char* path, lalnet_model** out);
LALNET_API int lalnet_model_save(const lalnet_model* model, const char* path);
LALNET_API void lalnet_model_destroy(lalnet_model* model);
LALNET_API int lalnet_model_param_count(const lalnet_model* model, long long* out);
/* Copies the model settings text (NUL-terminated) into buf when it fits; *needed gets
 * the required size including the terminator. */
LALNET_API int lalnet_model_settings(const lalnet_model* model, char* buf, size_t cap, size_t* needed);

/* Planar RGB float image, [3][height][width], any size >= 1. out may alias nothing else. */
LALNET_API int lalnet_enhance(const lalnet_model* model, const float* image, int height, int width, float* out);
/* PNG or PFM in, PNG (or PFM for a .pfm path) out, same dimensions. */
LALNET_API int lalnet_enhance_file(const lalnet_model* model, const char* in_path, const char* out_path);

/* ---- training / evaluation ---- */
typedef struct lalnet_metrics {
  double psnr;
  double ssim;
  double delta_e;
} lalnet_metrics;

typedef void (*lalnet_progress_fn)(int iteration, double loss, const lalnet_metrics* holdout, void* user);

/* Trains from the settings. data_path is a manifest CSV or image directory; NULL trains on
 * the synthetic corpus. `initial` (nullable) resumes from its weights and optimizer state.
 * out_dir (nullable) receives checkpoint.lalnet, curve.csv, eval.csv and settings.txt.
 * final_eval and baseline (nullable) receive held-out metrics of the model and of the
 * unprocessed input. out (nullable) receives the trained model. */
LALNET_API int lalnet_train(const char* settings, const char* data_path, const lalnet_model* initial,
                            const char* out_dir, lalnet_progress_fn progress, void* user, lalnet_metrics* final_eval,
                            lalnet_metrics* baseline, lalnet_model** out);

/* Per-image metrics of the model on a corpus, plus a final "mean" row, written to csv_path
 * (nullable). The corpus seed for on-the-fly degradation is `seed` (0 picks the default). */
LALNET_API int lalnet_evaluate(const lalnet_model* model, const char* data_path, unsigned long long seed,
                               const char* csv_path, lalnet_metrics* mean);

/* ---- analysis ---- */
/* Per-channel low/high frequency energy of every image in dir, as CSV. Unreadable files
 * are skipped and listed in csv_path + ".log". spectra_dir (nullable) receives
 * log-magnitude spectra PNGs. *skipped (nullable) gets the number of skipped files. */
LALNET_API int lalnet_analyze(const char* dir, const char* csv_path, int levels, const char* spectra_dir,
                              int* skipped);

/* ---- diagnostics ---- */
typedef void (*lalnet_gradcheck_fn)(const char* name, const char* group, double max_rel_error, long long coords,
                                    double seconds, void* user);
/* filter: NULL/"all", "op", "block" or a case name. *max_error gets the worst case. */
LALNET_API int lalnet_gradcheck(const char* filter, lalnet_gradcheck_fn report, void* user, double* max_error);
LALNET_API int lalnet_gradcheck_case_count(void);
LALNET_API const char* lalnet_gradcheck_case_name(int i);

typedef void (*lalnet_ablation_fn)(const char* variant, const char* description, long long params,
                                   const lalnet_metrics* metrics, int is_full, const char* note, void* user);
/* Trains each selected variant under the same settings and writes one CSV row per variant.
 * Diverged variants get NaN metrics and a note; the run continues. is_full marks rows whose
 * configuration is the unablated model. */
/* Checks a variant selection against the settings without training. */
LALNET_API int lalnet_ablation_validate(const char* settings, const char* variants);
LALNET_API int lalnet_ablate(const char* settings, const char* variants, const char* data_path, const char* csv_path,
                             lalnet_ablation_fn report, void* user);

#ifdef __cplusplus
}
#endif

#endif
