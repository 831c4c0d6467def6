#ifndef PHFEAT_H
#define PHFEAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum PhStatus {
  PH_STATUS_OK = 0,
  PH_STATUS_NULL_POINTER = 1,
  PH_STATUS_INVALID_ARGUMENT = 2,
  PH_STATUS_PARSE_ERROR = 3,
  PH_STATUS_DIMENSION_MISMATCH = 4,
  PH_STATUS_BUFFER_TOO_SMALL = 5,
  PH_STATUS_IO_ERROR = 6,
  PH_STATUS_PANIC = 7,
} PhStatus;

/**
 * Vectorization method.
 */
typedef enum PhMethod {
  /**
   * Betti curve.
   */
  PH_METHOD_BC = 0,
  /**
   * Persistent statistics.
   */
  PH_METHOD_PS = 1,
  /**
   * Entropy summary.
   */
  PH_METHOD_ES = 2,
  /**
   * Persistence landscape.
   */
  PH_METHOD_PL = 3,
  /**
   * Tropical coordinates.
   */
  PH_METHOD_TC = 4,
} PhMethod;

/**
 * Opaque barcode of a single homology dimension.
 */
typedef struct PhBarcode PhBarcode;

/**
 * Opaque grayscale image.
 */
typedef struct PhImage PhImage;

/**
 * One interval, copied out of a barcode.
 */
typedef struct PhBar {
  double birth;
  double death;
  bool essential;
} PhBar;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *ph_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ph_version(void);

/**
 * Creates an image from `width * height` row-major intensities.
 *
 * # Safety
 * `pixels` must point to `width * height` readable doubles and `out` must
 * be writable.
 */
enum PhStatus ph_image_new(size_t width, size_t height, const double *pixels, struct PhImage **out);

/**
 * Loads a PGM (P2/P5) or CSV-matrix image.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum PhStatus ph_image_load(const char *path, struct PhImage **out);

/**
 * # Safety
 * `image` must be NULL or a handle from `ph_image_new`/`ph_image_load` not
 * yet freed.
 */
void ph_image_free(struct PhImage *image);

/**
 * Width in pixels, or 0 for NULL.
 *
 * # Safety
 * `image` must be NULL or a live handle.
 */
size_t ph_image_width(const struct PhImage *image);

/**
 * Height in pixels, or 0 for NULL.
 *
 * # Safety
 * `image` must be NULL or a live handle.
 */
size_t ph_image_height(const struct PhImage *image);

/**
 * Sublevel-set persistence of the image; writes one new barcode per
 * dimension.
 *
 * # Safety
 * `image` must be a live handle; `dim0` and `dim1` must be writable.
 */
enum PhStatus ph_cubical_persistence(const struct PhImage *image,
                                     struct PhBarcode **dim0,
                                     struct PhBarcode **dim1);

/**
 * Vietoris–Rips persistence of the pixels matching the uniform pattern
 * `G{geometry}R{rotation}`. A negative or NaN `max_scale` means the largest
 * pairwise distance; infinite values are rejected.
 *
 * # Safety
 * `image` must be a live handle; `dim0` and `dim1` must be writable.
 */
enum PhStatus ph_landmark_rips_persistence(const struct PhImage *image,
                                           uint8_t geometry,
                                           uint8_t rotation,
                                           double max_scale,
                                           struct PhBarcode **dim0,
                                           struct PhBarcode **dim1);

/**
 * Creates an empty barcode of homology dimension `dim`.
 *
 * # Safety
 * `out` must be writable.
 */
enum PhStatus ph_barcode_new(uint8_t dim, struct PhBarcode **out);

/**
 * Appends a bar. For an essential bar, `death` is its cap.
 *
 * # Safety
 * `barcode` must be a live handle.
 */
enum PhStatus ph_barcode_push(struct PhBarcode *barcode,
                              double birth,
                              double death,
                              bool essential);

/**
 * Number of bars, or 0 for NULL.
 *
 * # Safety
 * `barcode` must be NULL or a live handle.
 */
size_t ph_barcode_len(const struct PhBarcode *barcode);

/**
 * Homology dimension, or 0 for NULL.
 *
 * # Safety
 * `barcode` must be NULL or a live handle.
 */
uint8_t ph_barcode_dim(const struct PhBarcode *barcode);

/**
 * Copies bar `index` into `out`.
 *
 * # Safety
 * `barcode` must be a live handle and `out` writable.
 */
enum PhStatus ph_barcode_get(const struct PhBarcode *barcode, size_t index, struct PhBar *out);

/**
 * Multiset union of `count` barcodes of one dimension into a new barcode.
 *
 * # Safety
 * `items` must point to `count` live handles (it may be NULL when `count`
 * is 0); `out` must be writable.
 */
enum PhStatus ph_barcode_aggregate(const struct PhBarcode *const *items,
                                   size_t count,
                                   struct PhBarcode **out);

/**
 * # Safety
 * `barcode` must be NULL or a live handle not yet freed.
 */
void ph_barcode_free(struct PhBarcode *barcode);

/**
 * Length of the vector [`ph_vectorize`] produces for these parameters.
 *
 * # Safety
 * `len` must be writable.
 */
enum PhStatus ph_vectorize_len(enum PhMethod method,
                               size_t gamma,
                               size_t levels,
                               uint32_t r,
                               size_t *len);

/**
 * Vectorizes `barcode` into `out`. Grid methods sample `[t_min, t_max]` at
 * `gamma` points; `levels` applies to landscapes and `r` to tropical
 * coordinates. Returns `PH_STATUS_BUFFER_TOO_SMALL` (and sets `written`
 * to the required length) if `out_len` is short.
 *
 * # Safety
 * `barcode` must be a live handle, `out` must point to `out_len` writable
 * doubles, and `written` must be writable.
 */
enum PhStatus ph_vectorize(const struct PhBarcode *barcode,
                           enum PhMethod method,
                           size_t gamma,
                           size_t levels,
                           uint32_t r,
                           double t_min,
                           double t_max,
                           double *out,
                           size_t out_len,
                           size_t *written);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHFEAT_H */
