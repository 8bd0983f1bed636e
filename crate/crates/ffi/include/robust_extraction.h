#ifndef ROBUST_EXTRACTION_H
#define ROBUST_EXTRACTION_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum ReStatus {
  /**
   * The call succeeded and the checked property holds.
   */
  RE_STATUS_OK = 0,
  /**
   * The call succeeded and the checked property fails.
   */
  RE_STATUS_FAILS = 1,
  /**
   * The search budget ran out before a decision.
   */
  RE_STATUS_UNKNOWN = 2,
  RE_STATUS_NULL_POINTER = 10,
  RE_STATUS_INVALID_UTF8 = 11,
  RE_STATUS_INVALID_INPUT = 12,
  RE_STATUS_INTERNAL = 13,
} ReStatus;

/**
 * Opaque validated instance.
 */
typedef struct ReInstance ReInstance;

/**
 * Parses and validates an instance from JSON. On success `*out` receives a
 * handle to release with `re_instance_free`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum ReStatus re_instance_from_json(const char *json, struct ReInstance **out);

/**
 * # Safety
 * `handle` must come from `re_instance_from_json` and not be used afterwards.
 */
void re_instance_free(struct ReInstance *handle);

/**
 * Number of types, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live instance handle.
 */
size_t re_instance_type_count(const struct ReInstance *handle);

/**
 * Writes the classification report. Returns `Unknown` when the weak
 * convex independence search exhausts its budget.
 *
 * # Safety
 * `handle` must be a live instance handle and `out` a writable pointer.
 */
enum ReStatus re_classify(const struct ReInstance *handle, uint64_t seed, char **out);

/**
 * Synthesizes a menu. `mode` is `"full"` or `"weak"`. Returns `Fails` when
 * the belief condition for that mode fails; the reason is in `re_last_error`.
 *
 * # Safety
 * `handle` must be a live instance handle, `mode` a NUL-terminated string and
 * `out` a writable pointer.
 */
enum ReStatus re_synthesize(const struct ReInstance *handle,
                            const char *mode,
                            uint64_t seed,
                            char **out);

/**
 * Verifies a JSON menu. `check` is one of `full`, `weak`, `optimal`,
 * `maximal`. Writes the report and returns `Ok` or `Fails`.
 *
 * # Safety
 * Pointers must be valid as for `re_synthesize`.
 */
enum ReStatus re_verify(const struct ReInstance *handle,
                        const char *menu_json,
                        const char *check,
                        char **out);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void re_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *re_last_error(void);

#endif  /* ROBUST_EXTRACTION_H */
