#ifndef DIGITSTEG_H
#define DIGITSTEG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_FILE_NOT_FOUND = 3,
  DS_STATUS_UNSUPPORTED_FORMAT = 4,
  DS_STATUS_CORRUPT_IMAGE = 5,
  DS_STATUS_INVALID_KEY = 6,
  DS_STATUS_CAPACITY_EXCEEDED = 7,
  DS_STATUS_NO_PAYLOAD_FOUND = 8,
  DS_STATUS_PAYLOAD_OUT_OF_RANGE = 9,
  DS_STATUS_IMAGE_TOO_SMALL = 10,
  DS_STATUS_OVERLAY_ERROR = 11,
  DS_STATUS_DIMENSION_MISMATCH = 12,
  DS_STATUS_IO = 13,
  DS_STATUS_PANIC = 14,
} DsStatus;

/**
 * An image held as three colour planes.
 */
typedef struct DsGrid DsGrid;

/**
 * The outcome of an embedding.
 */
typedef struct DsRecord DsRecord;

/**
 * Detector outputs; absent scores are NaN.
 */
typedef struct DsScores {
  double primary_sets;
  double chi_square;
  double sample_pairs;
  double rs_analysis;
  double fusion;
  bool crossed_threshold;
  uint64_t estimated_bytes;
} DsScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ds_last_error_message(void);

/**
 * Loads a 24-bit BMP.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DsStatus ds_grid_load(const char *path, struct DsGrid **out);

/**
 * Builds an image from interleaved B,G,R bytes, row-major from the top row.
 *
 * # Safety
 * `bgr` must point to `len` readable bytes and `out` must be valid.
 */
enum DsStatus ds_grid_new_from_bgr(size_t width,
                                   size_t height,
                                   const uint8_t *bgr,
                                   size_t len,
                                   struct DsGrid **out);

/**
 * Copies the image as interleaved B,G,R bytes into `buf`, which must hold
 * `width * height * 3` bytes.
 *
 * # Safety
 * `grid` must be a live handle and `buf` must point to `len` writable bytes.
 */
enum DsStatus ds_grid_to_bgr(const struct DsGrid *grid, uint8_t *buf, size_t len);

/**
 * # Safety
 * `grid` must be NULL or a handle not yet freed. Handles obtained from
 * [`ds_record_stego`] belong to their record and must not be passed here.
 */
void ds_grid_free(struct DsGrid *grid);

/**
 * Width in pixels, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t ds_grid_width(const struct DsGrid *grid);

/**
 * Height in pixels, 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live handle.
 */
size_t ds_grid_height(const struct DsGrid *grid);

/**
 * Writes the image as a 24-bit BMP.
 *
 * # Safety
 * `grid` must be a live handle and `path` a NUL-terminated string.
 */
enum DsStatus ds_grid_save(const struct DsGrid *grid, const char *path);

/**
 * Embeds `payload` under the one-letter `key`, drawing the key overlay when
 * `overlay` is true.
 *
 * # Safety
 * `cover` must be a live handle, `payload` must point to `len` bytes (it may
 * be NULL when `len` is 0) and `out` must be valid.
 */
enum DsStatus ds_embed(const struct DsGrid *cover,
                       const uint8_t *payload,
                       size_t len,
                       char key,
                       bool overlay,
                       struct DsRecord **out);

/**
 * The stego image, owned by the record.
 *
 * # Safety
 * `record` must be NULL or a live handle.
 */
const struct DsGrid *ds_record_stego(const struct DsRecord *record);

/**
 * Payload channel: 0 blue, 1 green, 2 red; -1 for NULL.
 *
 * # Safety
 * `record` must be NULL or a live handle.
 */
int32_t ds_record_channel(const struct DsRecord *record);

/**
 * Top-left corner of the key overlay. Returns false when no overlay was drawn.
 *
 * # Safety
 * `record` must be NULL or a live handle; `col` and `row` must be valid.
 */
bool ds_record_overlay_origin(const struct DsRecord *record, size_t *col, size_t *row);

/**
 * # Safety
 * `record` must be NULL or a handle not yet freed.
 */
void ds_record_free(struct DsRecord *record);

/**
 * Extracts a payload. `channel` is 0, 1 or 2, or -1 to search. The bytes
 * are returned in a buffer released with [`ds_bytes_free`].
 *
 * # Safety
 * `stego` must be a live handle; `out` and `out_len` must be valid.
 */
enum DsStatus ds_extract(const struct DsGrid *stego,
                         char key,
                         int32_t channel,
                         uint8_t **out,
                         size_t *out_len);

/**
 * # Safety
 * `bytes` and `len` must come from one [`ds_extract`] call, or `bytes` is NULL.
 */
void ds_bytes_free(uint8_t *bytes, size_t len);

/**
 * PSNR in dB; infinite for identical images.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` valid.
 */
enum DsStatus ds_psnr(const struct DsGrid *a, const struct DsGrid *b, double *out);

/**
 * Mean SSIM of the grayscale images.
 *
 * # Safety
 * `a` and `b` must be live handles and `out` valid.
 */
enum DsStatus ds_ssim(const struct DsGrid *a, const struct DsGrid *b, double *out);

/**
 * Runs the four detectors and fuses them against `threshold`.
 *
 * # Safety
 * `grid` must be a live handle and `out` valid.
 */
enum DsStatus ds_analyze(const struct DsGrid *grid, double threshold, struct DsScores *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIGITSTEG_H */
