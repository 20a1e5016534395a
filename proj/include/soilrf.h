/* SPDX-License-Identifier: MIT
 *
 * C API for the soilrf shared library.
 *
 * Every function returns an srf_status; SRF_OK (0) means success. On any
 * failure the thread-local message returned by srf_last_error() describes
 * what went wrong. Objects are opaque handles created by srf_*_open /
 * returned through out-parameters and must be released with the matching
 * close function. Passing NULL where a handle or path is required yields
 * SRF_ERR_CONFIG.
 *
 * Heavy pipeline stages are path-level: they read input artifacts (spectrum
 * CSVs, dataset manifests) and write output artifacts (CSV/JSON), so callers
 * in any language can drive the pipeline without marshaling numeric arrays.
 */
#ifndef SOILRF_H
#define SOILRF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define SOILRF_API __declspec(dllexport)
#else
#  define SOILRF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum srf_status {
    SRF_OK = 0,
    SRF_ERR_CONFIG = 2,      /* invalid arguments / configuration */
    SRF_ERR_LOAD = 3,        /* missing or malformed input artifact */
    SRF_ERR_NUMERIC = 4,     /* numeric domain violation */
    SRF_ERR_CALIBRATION = 5, /* calibration targets unsatisfiable */
    SRF_ERR_CONTRACT = 6     /* internal invariant violated */
} srf_status;

/* Library semantic version, e.g. "1.0.0". Pointer is static storage. */
SOILRF_API const char* srf_version(void);

/* Message for the most recent failure on this thread ("" if none). The
 * pointer stays valid until the next failing call on the same thread. */
SOILRF_API const char* srf_last_error(void);

/* ---- spectrum handles ---------------------------------------------------- */

typedef struct srf_spectrum srf_spectrum;

SOILRF_API srf_status srf_spectrum_open(const char* csv_path, srf_spectrum** out);
SOILRF_API void srf_spectrum_close(srf_spectrum* s);
SOILRF_API srf_status srf_spectrum_size(const srf_spectrum* s, size_t* out);
SOILRF_API srf_status srf_spectrum_point(const srf_spectrum* s, size_t index,
                                         double* freq_mhz, double* power_dbm);
/* Difference features; the spectrum must cover the probed grid points. */
SOILRF_API srf_status srf_spectrum_diff800(const srf_spectrum* s, double* out);
SOILRF_API srf_status srf_spectrum_diff2300(const srf_spectrum* s, double* out);
SOILRF_API srf_status srf_spectrum_save(const srf_spectrum* s, const char* csv_path);

/* ---- dataset handles ----------------------------------------------------- */

typedef struct srf_dataset srf_dataset;

SOILRF_API srf_status srf_dataset_open(const char* manifest_path, srf_dataset** out);
SOILRF_API void srf_dataset_close(srf_dataset* d);
SOILRF_API srf_status srf_dataset_size(const srf_dataset* d, size_t* out);
SOILRF_API srf_status srf_dataset_sample_id(const srf_dataset* d, size_t index,
                                            char* buf, size_t buf_len);
SOILRF_API srf_status srf_dataset_content_hash(const srf_dataset* d, uint64_t* out);

/* ---- report handles ------------------------------------------------------ */

typedef struct srf_report srf_report;

SOILRF_API srf_status srf_report_open(const char* json_path, srf_report** out);
SOILRF_API void srf_report_close(srf_report* r);
SOILRF_API srf_status srf_report_accuracy(const srf_report* r, double* out);
SOILRF_API srf_status srf_report_recall(const srf_report* r, double* out);

/* ---- pipeline stages ------------------------------------------------------
 * Each stage reads/writes artifacts on disk. `out_dir` is created when
 * missing. Writes are atomic (temp file + rename). */

/* Simulate one sample's low+high spectra with the default bench fixtures.
 * Writes <out_dir>/<stem>_low.csv and <stem>_high.csv (plus sidecars). */
SOILRF_API srf_status srf_simulate_sample(double pb_ppm, double nacl_ppm,
                                          double moisture, double noise_sigma_dbm,
                                          uint64_t seed, const char* out_dir,
                                          const char* stem);

/* Simulate the built-in controlled spiking design (25 samples) into
 * <out_dir> with a manifest.json. */
SOILRF_API srf_status srf_generate_controlled(uint64_t seed, double noise_sigma_dbm,
                                              const char* out_dir);

/* Simulate the synthetic field-like dataset (n samples) into <out_dir>. */
SOILRF_API srf_status srf_generate_field_like(int n, uint64_t seed,
                                              double noise_sigma_dbm,
                                              const char* out_dir);

/* Run the threshold-gated acquisition sweep over both bands for one sample
 * configuration; writes per-band spectrum CSVs plus a trace CSV of
 * collected/recollected/skipped events. */
SOILRF_API srf_status srf_sweep_sample(double pb_ppm, double nacl_ppm,
                                       double moisture, double noise_sigma_dbm,
                                       uint64_t seed, const char* out_dir,
                                       const char* stem);

/* Extract features for every sample in a manifest.
 * scheme: "diffpair" | "hop" | "aggregate" | "weighted";
 * band: "low" | "high" | "both". Writes a feature CSV. */
SOILRF_API srf_status srf_featurize_manifest(const char* manifest_path,
                                             const char* scheme, double interval_mhz,
                                             const char* band, const char* out_csv);

/* Expand a feature CSV by Gaussian augmentation: r noisy copies of the whole
 * table, per-copy noise scale drawn uniformly from (0, sigma_max]. */
SOILRF_API srf_status srf_augment_features(const char* features_csv, int r,
                                           double sigma_max, uint64_t seed,
                                           const char* out_csv);

/* Fit the soft-voting ensemble on every sample in the manifest and write a
 * training-metrics report JSON. */
SOILRF_API srf_status srf_train_manifest(const char* manifest_path,
                                         const char* scheme, double interval_mhz,
                                         const char* band, double threshold_ppm,
                                         int r, double sigma_max, uint64_t seed,
                                         const char* out_json);

/* Repeated leave-one-out evaluation with in-fold augmentation.
 * space: "features" | "raw_spectra". parallel: 0 sequential, 1 threaded. */
SOILRF_API srf_status srf_evaluate_manifest(const char* manifest_path,
                                            const char* scheme, double interval_mhz,
                                            const char* band, double threshold_ppm,
                                            int r, double sigma_max, int repeats,
                                            uint64_t seed, const char* space,
                                            int parallel, const char* out_json,
                                            const char* trials_csv);

/* Verify/adjust the default salt fixtures against the built-in trend targets
 * and write the calibrated models JSON. */
SOILRF_API srf_status srf_calibrate_default(const char* out_json);

/* Two-feature linear regressions over a manifest: pb_ppm ~ diff800 and
 * nacl_ppm ~ diff2300 on the matching single-salt series. Writes slopes,
 * intercepts and R^2 values as JSON. */
SOILRF_API srf_status srf_regress_manifest(const char* manifest_path,
                                           const char* out_json);

/* Classification metrics from four confusion-matrix entries (tn, fp, fn, tp
 * order). Entries summing to ~1 are treated as proportions; otherwise they
 * are normalized as counts. */
SOILRF_API srf_status srf_metrics(double tn, double fp, double fn, double tp,
                                  double* accuracy, double* recall);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SOILRF_H */
