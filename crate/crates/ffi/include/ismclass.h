#ifndef ISMCLASS_H
#define ISMCLASS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of every fallible call.
 */
typedef enum {
  ISM_STATUS_OK = 0,
  ISM_STATUS_NULL_POINTER = 1,
  ISM_STATUS_INVALID_ARGUMENT = 2,
  ISM_STATUS_IO = 3,
  ISM_STATUS_PARSE = 4,
  ISM_STATUS_STATS_MISMATCH = 5,
  ISM_STATUS_RUNTIME = 6,
  ISM_STATUS_PANIC = 7,
} IsmStatus;

/*
 Detected bursts in sample order.
 */
typedef struct IsmBursts IsmBursts;

/*
 A trained classifier with its feature scaling.
 */
typedef struct IsmModel IsmModel;

/*
 A baseband recording, plus its truth when it was generated.
 */
typedef struct IsmRecording IsmRecording;

/*
 Detector parameters; start from [`ism_detector_config_default`].
 */
typedef struct {
  double alpha;
  size_t window_len_rising;
  size_t window_len_falling;
  size_t gap_delta;
  size_t smooth_len;
  double min_burst_us;
  double min_gap_us;
} IsmDetectorConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, NUL-terminated and static.
 */
const char *ism_version(void);

/*
 Message of the last failure on this thread, or NULL. Valid until the next
 failing call on the same thread.
 */
const char *ism_last_error(void);

void ism_clear_error(void);

IsmDetectorConfig ism_detector_config_default(void);

/*
 Synthesizes `scenario` ("beacon", "wifi", "bluetooth" or "mixed") with
 default timing.

 # Safety
 `scenario` must be a NUL-terminated string; `out_rec` must be writable.
 */
IsmStatus ism_recording_generate(const char *scenario,
                                 double duration_s,
                                 uint64_t seed,
                                 double sample_rate_hz,
                                 IsmRecording **out_rec);

/*
 Wraps `n_samples` interleaved I/Q float pairs.

 # Safety
 `iq` must point to `2 * n_samples` floats; `out_rec` must be writable.
 */
IsmStatus ism_recording_from_iq(const float *iq,
                                size_t n_samples,
                                double sample_rate_hz,
                                IsmRecording **out_rec);

/*
 Reads `<path>` and its `.meta.json` sidecar, plus `.truth.json` if present.

 # Safety
 `path` must be a NUL-terminated string; `out_rec` must be writable.
 */
IsmStatus ism_recording_read(const char *path, IsmRecording **out_rec);

/*
 Writes the samples, the meta sidecar and, when known, the truth sidecar.

 # Safety
 `rec` must be a live handle; `path` a NUL-terminated string.
 */
IsmStatus ism_recording_write(const IsmRecording *rec, const char *path);

/*
 # Safety
 `rec` must be a live handle; `out_len` must be writable.
 */
IsmStatus ism_recording_len(const IsmRecording *rec, size_t *out_len);

/*
 # Safety
 `rec` must be a live handle; `out_rate` must be writable.
 */
IsmStatus ism_recording_sample_rate(const IsmRecording *rec, double *out_rate);

/*
 Number of truth bursts; fails when the recording has no truth.

 # Safety
 `rec` must be a live handle; `out_len` must be writable.
 */
IsmStatus ism_recording_truth_len(const IsmRecording *rec, size_t *out_len);

/*
 Truth burst `index` as a half-open sample interval and a label code
 (0 Wi-Fi, 1 beacon, 2 Bluetooth).

 # Safety
 `rec` must be a live handle; the output pointers must be writable.
 */
IsmStatus ism_recording_truth_get(const IsmRecording *rec,
                                  size_t index,
                                  size_t *out_start,
                                  size_t *out_end,
                                  uint8_t *out_label);

/*
 Copy of `rec` with white Gaussian noise at `snr_db` relative to the mean
 power of its nonzero samples. Truth is carried over.

 # Safety
 `rec` must be a live handle; `out_rec` must be writable.
 */
IsmStatus ism_recording_add_awgn(const IsmRecording *rec,
                                 double snr_db,
                                 uint64_t seed,
                                 IsmRecording **out_rec);

/*
 # Safety
 `rec` must be NULL or a handle not yet freed.
 */
void ism_recording_free(IsmRecording *rec);

/*
 Runs the detector; `config` NULL selects the defaults.

 # Safety
 `rec` must be a live handle; `config` NULL or valid; `out_bursts` writable.
 */
IsmStatus ism_detect(const IsmRecording *rec,
                     const IsmDetectorConfig *config,
                     IsmBursts **out_bursts);

/*
 # Safety
 `bursts` must be a live handle; `out_len` must be writable.
 */
IsmStatus ism_bursts_len(const IsmBursts *bursts, size_t *out_len);

/*
 Burst `index` as a half-open sample interval.

 # Safety
 `bursts` must be a live handle; the output pointers must be writable.
 */
IsmStatus ism_bursts_get(const IsmBursts *bursts, size_t index, size_t *out_start, size_t *out_end);

/*
 Precision and recall of `bursts` against the truth of `rec`.

 # Safety
 Both handles must be live; the output pointers must be writable.
 */
IsmStatus ism_bursts_score(const IsmBursts *bursts,
                           const IsmRecording *rec,
                           double *out_precision,
                           double *out_recall);

/*
 # Safety
 `bursts` must be NULL or a handle not yet freed.
 */
void ism_bursts_free(IsmBursts *bursts);

/*
 Features of every burst but the first, as rows of
 `(frame_width_us, silence_gap_us, papr_db)`. `out_rows` receives the row
 count. With `rows` NULL only the count is reported; otherwise `rows` must
 hold `3 * capacity` doubles and a short buffer fails without writing.

 # Safety
 Handles must be live; `rows` NULL or valid for `3 * capacity` doubles.
 */
IsmStatus ism_extract_features(const IsmRecording *rec,
                               const IsmBursts *bursts,
                               double *rows,
                               size_t capacity,
                               size_t *out_rows);

/*
 Loads a model JSON written by `ismclass train`.

 # Safety
 `path` must be a NUL-terminated string; `out_model` must be writable.
 */
IsmStatus ism_model_read(const char *path, IsmModel **out_model);

/*
 Trains `method` ("svm-linear", "svm-poly", "svm-rbf" or "knn") with
 default hyperparameters on a raw or standardized dataset CSV. `features`
 is "time" or "time+papr".

 # Safety
 Strings must be NUL-terminated; `out_model` must be writable.
 */
IsmStatus ism_model_train_csv(const char *csv_path,
                              const char *method,
                              const char *features,
                              IsmModel **out_model);

/*
 Writes the model as JSON.

 # Safety
 `model` must be a live handle; `path` a NUL-terminated string.
 */
IsmStatus ism_model_write(const IsmModel *model, const char *path);

/*
 Classifies one raw feature vector; `out_label` receives the label code.

 # Safety
 `model` must be a live handle; `out_label` must be writable.
 */
IsmStatus ism_model_predict(const IsmModel *model,
                            double frame_width_us,
                            double silence_gap_us,
                            double papr_db,
                            uint8_t *out_label);

/*
 # Safety
 `model` must be NULL or a handle not yet freed.
 */
void ism_model_free(IsmModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISMCLASS_H */
