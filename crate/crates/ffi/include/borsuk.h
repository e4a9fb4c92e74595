/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef BORSUK_H
#define BORSUK_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum BorsukStatus {
  BORSUK_STATUS_OK = 0,
  BORSUK_STATUS_NULL_POINTER = 1,
  BORSUK_STATUS_INVALID_ARGUMENT = 2,
  BORSUK_STATUS_DIMENSION_MISMATCH = 3,
  BORSUK_STATUS_SIZE_GUARD = 4,
  BORSUK_STATUS_SINGULAR = 5,
  BORSUK_STATUS_REGIME = 6,
  BORSUK_STATUS_PARSE = 7,
  BORSUK_STATUS_BUFFER_TOO_SMALL = 8,
  BORSUK_STATUS_INTERNAL = 9,
} BorsukStatus;

typedef enum BorsukMethod {
  BORSUK_METHOD_CUBE = 0,
  BORSUK_METHOD_HADAMARD_CELL = 1,
  BORSUK_METHOD_CROSSPOLYTOPE = 2,
} BorsukMethod;

// A point cloud.
typedef struct BorsukCloud BorsukCloud;

// An invertible linear map.
typedef struct BorsukLinearMap BorsukLinearMap;

// A partition of a point cloud.
typedef struct BorsukPartition BorsukPartition;

typedef struct BorsukDiameter {
  double value;
  size_t index_a;
  size_t index_b;
} BorsukDiameter;

typedef struct BorsukVerifyReport {
  bool valid;
  double ratio;
  double original_diameter;
  double max_part_diameter;
  size_t nonempty_parts;
} BorsukVerifyReport;

typedef struct BorsukCertificate {
  // Largest p-norm of an image of a cube vertex.
  double r;
  // Largest q-norm of a row of the inverse.
  double dual_margin;
  // `dual_margin <= 1 + 1e-9`.
  bool valid;
} BorsukCertificate;

typedef struct BorsukCoverReport {
  bool covered;
  double worst_margin;
  double lambda;
  size_t samples_used;
} BorsukCoverReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into the library on this thread.
const char *borsuk_last_error(void);

// Library version as a static NUL-terminated string.
const char *borsuk_version(void);

// `||x||_p` for `x` of length `len`.
//
// # Safety
// `x` must point to `len` doubles; `out` must be writable.
enum BorsukStatus borsuk_pnorm(const double *x, size_t len, double p, double *out_value);

// Copies `n_points * dim` row-major coordinates into a new cloud.
//
// # Safety
// `coords` must point to `n_points * dim` doubles; `out_cloud` must be writable.
enum BorsukStatus borsuk_cloud_new(size_t dim,
                                   const double *coords,
                                   size_t n_points,
                                   struct BorsukCloud **out_cloud);

// Parses `{"dim": int, "points": [[...], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out_cloud` must be writable.
enum BorsukStatus borsuk_cloud_from_json(const char *json, struct BorsukCloud **out_cloud);

// Number of points; 0 for `NULL`.
//
// # Safety
// `cloud` must be `NULL` or a live handle.
size_t borsuk_cloud_len(const struct BorsukCloud *cloud);

// Dimension; 0 for `NULL`.
//
// # Safety
// `cloud` must be `NULL` or a live handle.
size_t borsuk_cloud_dim(const struct BorsukCloud *cloud);

// # Safety
// `cloud` must be `NULL` or a handle not yet freed.
void borsuk_cloud_free(struct BorsukCloud *cloud);

// Exact pairwise p-diameter with the attaining index pair.
//
// # Safety
// `cloud` must be a live handle; `out_diameter` must be writable.
enum BorsukStatus borsuk_diameter(const struct BorsukCloud *cloud,
                                  double p,
                                  struct BorsukDiameter *out_diameter);

// Partitions a 4-dimensional cloud into at most 16 parts of smaller diameter.
//
// # Safety
// `cloud` must be a live handle; `out_partition` must be writable.
enum BorsukStatus borsuk_partition(const struct BorsukCloud *cloud,
                                   double p,
                                   struct BorsukPartition **out_partition);

// Copies the labels into `labels`, which must hold one entry per point.
//
// # Safety
// `part` must be a live handle; `labels` must point to `capacity` writable entries.
enum BorsukStatus borsuk_partition_labels(const struct BorsukPartition *part,
                                          size_t *labels,
                                          size_t capacity);

// Largest part diameter over the cloud diameter; NaN for `NULL`.
//
// # Safety
// `part` must be `NULL` or a live handle.
double borsuk_partition_ratio(const struct BorsukPartition *part);

// Number of nonempty parts; 0 for `NULL`.
//
// # Safety
// `part` must be `NULL` or a live handle.
size_t borsuk_partition_nonempty_parts(const struct BorsukPartition *part);

// Number of labels (points); 0 for `NULL`.
//
// # Safety
// `part` must be `NULL` or a live handle.
size_t borsuk_partition_len(const struct BorsukPartition *part);

// # Safety
// `part` must be a live handle; `out_method` must be writable.
enum BorsukStatus borsuk_partition_method(const struct BorsukPartition *part,
                                          enum BorsukMethod *out_method);

// Writes the full result as NUL-terminated JSON. `out_len` (optional)
// receives the length without the terminator, also when the buffer is too small.
//
// # Safety
// `part` must be a live handle; `buffer` must point to `capacity` writable bytes.
enum BorsukStatus borsuk_partition_to_json(const struct BorsukPartition *part,
                                           char *buffer,
                                           size_t capacity,
                                           size_t *out_len);

// Recomputes every part diameter of `part` over `cloud`.
//
// # Safety
// `cloud` and `part` must be live handles; `out_report` must be writable.
enum BorsukStatus borsuk_partition_verify(const struct BorsukCloud *cloud,
                                          const struct BorsukPartition *part,
                                          double p,
                                          struct BorsukVerifyReport *out_report);

// # Safety
// `part` must be `NULL` or a handle not yet freed.
void borsuk_partition_free(struct BorsukPartition *part);

// The Hadamard construction for `C_n` against `C_(n,p)`, `1 <= p <= 2`, `n <= 20`.
//
// # Safety
// `out_map` must be writable.
enum BorsukStatus borsuk_build_g(size_t n, double p, struct BorsukLinearMap **out_map);

// A general invertible map from `dim * dim` row-major entries.
//
// # Safety
// `entries` must point to `dim * dim` doubles; `out_map` must be writable.
enum BorsukStatus borsuk_linear_map_new(size_t dim,
                                        const double *entries,
                                        struct BorsukLinearMap **out_map);

// Dimension; 0 for `NULL`.
//
// # Safety
// `map` must be `NULL` or a live handle.
size_t borsuk_linear_map_dim(const struct BorsukLinearMap *map);

// # Safety
// `map` must be `NULL` or a handle not yet freed.
void borsuk_linear_map_free(struct BorsukLinearMap *map);

// Sandwich certificate by exhaustive vertex enumeration. When
// `argmax_vertex` is non-null it receives the attaining sign vector and
// must hold `dim` entries.
//
// # Safety
// `map` must be a live handle; `out_certificate` must be writable;
// `argmax_vertex` must be `NULL` or point to `dim` writable bytes.
enum BorsukStatus borsuk_bm_certificate(const struct BorsukLinearMap *map,
                                        double p,
                                        struct BorsukCertificate *out_certificate,
                                        int8_t *argmax_vertex);

// `2^(1/2 - 1/p) sqrt(n)` for `1 <= p < 2`.
//
// # Safety
// `out_value` must be writable.
enum BorsukStatus borsuk_bm_lower_bound(size_t n, double p, double *out_value);

// Verifies the covering of `C_(n,p)` by the 2n translates `lambda C_(n,p) ± n^(-1/p) e_i`.
// `lambda <= 0` selects `((n-1)/n)^(1/p)`. `witness` (optional) receives `n` coordinates
// of the worst tested point.
//
// # Safety
// `out_report` must be writable; `witness` must be `NULL` or point to `n` writable doubles.
enum BorsukStatus borsuk_verify_cover(size_t n,
                                      double p,
                                      double lambda,
                                      size_t samples,
                                      uint64_t seed,
                                      struct BorsukCoverReport *out_report,
                                      double *witness);

// Exact check of `H H^T = order I` for `order * order` row-major entries.
//
// # Safety
// `entries` must point to `order * order` integers; `out_result` must be writable.
enum BorsukStatus borsuk_is_hadamard(size_t order, const int64_t *entries, bool *out_result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BORSUK_H */
