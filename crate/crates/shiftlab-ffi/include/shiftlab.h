#ifndef SHIFTLAB_H
#define SHIFTLAB_H

/* Generated by cbindgen from shiftlab-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by the run entry points.
 */
typedef enum ShiftlabStatus {
  SHIFTLAB_STATUS_OK = 0,
  /**
   * A null pointer or malformed UTF-8 argument.
   */
  SHIFTLAB_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The instance JSON failed to parse or validate.
   */
  SHIFTLAB_STATUS_PARSE_ERROR = 2,
  /**
   * The algorithm rejected the instance or the name is unknown.
   */
  SHIFTLAB_STATUS_RUN_ERROR = 3,
} ShiftlabStatus;

/**
 * Opaque parsed instance.
 */
typedef struct ShiftlabInstance ShiftlabInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a JSON instance description. Returns null on failure (see
 * `shiftlab_last_error`). The result must be freed with
 * `shiftlab_instance_free`.
 *
 * # Safety
 * `json` must be a valid NUL-terminated UTF-8 string.
 */
struct ShiftlabInstance *shiftlab_instance_parse(const char *json);

/**
 * Releases an instance handle. Passing null is a no-op.
 *
 * # Safety
 * `handle` must come from `shiftlab_instance_parse` and not be freed twice.
 */
void shiftlab_instance_free(struct ShiftlabInstance *handle);

/**
 * Runs one algorithm (by its kebab-case name) on a parsed instance and writes
 * a NUL-terminated JSON report into `out_json`. On success the caller owns the
 * string and must free it with `shiftlab_string_free`.
 *
 * # Safety
 * `handle` and `algorithm` must be valid pointers; `out_json` must point to
 * writable storage for one pointer.
 */
enum ShiftlabStatus shiftlab_run(const struct ShiftlabInstance *handle,
                                 const char *algorithm,
                                 char **out_json);

/**
 * Frees a string returned by `shiftlab_run`. Passing null is a no-op.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void shiftlab_string_free(char *s);

/**
 * The last error message raised on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *shiftlab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *shiftlab_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SHIFTLAB_H */
