#ifndef GAOPT_H
#define GAOPT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes shared by all functions.
 */
typedef enum GaStatus {
  GA_STATUS_OK = 0,
  GA_STATUS_NULL_POINTER = 1,
  GA_STATUS_INVALID_UTF8 = 2,
  GA_STATUS_INVALID_ARGUMENT = 3,
  GA_STATUS_INVALID_CONFIG = 4,
  GA_STATUS_FITNESS_FAILED = 5,
  GA_STATUS_RUNTIME = 6,
  GA_STATUS_OUT_OF_RANGE = 7,
  GA_STATUS_BUFFER_TOO_SMALL = 8,
  GA_STATUS_IO = 9,
  GA_STATUS_PANIC = 10,
} GaStatus;

/**
 * Opaque configuration handle.
 */
typedef struct GaConfigHandle GaConfigHandle;

/**
 * Opaque run result handle.
 */
typedef struct GaResultHandle GaResultHandle;

/**
 * Scores `genes[0..len)`. Write the score to `*out` and return 0, or return
 * non-zero to abort the run.
 */
typedef int (*GaFitnessFn)(const double *genes,
                           size_t len,
                           size_t index,
                           void *user_data,
                           double *out);

/**
 * Called after each generation with its zero-based index. Return non-zero
 * to stop the run.
 */
typedef int (*GaGenerationFn)(size_t generation, double best_fitness, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ga_last_error_message(void);

/**
 * Creates a configuration with default operators.
 */
struct GaConfigHandle *ga_config_new(size_t num_generations,
                                     size_t sol_per_pop,
                                     size_t num_parents_mating,
                                     size_t num_genes);

/**
 * Creates the preset configuration of a built-in problem
 * (`linear`, `onemax` or `xor`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum GaStatus ga_config_for_problem(const char *name, struct GaConfigHandle **out);

/**
 * # Safety
 * `handle` must come from this library and not be used afterwards.
 */
void ga_config_free(struct GaConfigHandle *handle);

/**
 * Sets one field using the configuration-file syntax, e.g.
 * `("parent_selection", "tournament:3")`.
 *
 * # Safety
 * `handle` must be live; `key` and `value` NUL-terminated strings.
 */
enum GaStatus ga_config_set(struct GaConfigHandle *handle, const char *key, const char *value);

/**
 * Checks the configuration without running it.
 *
 * # Safety
 * `handle` must be live.
 */
enum GaStatus ga_config_validate(const struct GaConfigHandle *handle);

/**
 * Runs the engine with a user fitness callback. `on_generation` may be null.
 *
 * # Safety
 * `config` must be live, `out` valid, and the callbacks must be safe to
 * call with `user_data`.
 */
enum GaStatus ga_run(const struct GaConfigHandle *config,
                     GaFitnessFn fitness,
                     GaGenerationFn on_generation,
                     void *user_data,
                     struct GaResultHandle **out);

/**
 * Runs a built-in problem. A null `config` uses the problem preset.
 *
 * # Safety
 * `name` must be NUL-terminated, `config` null or live, `out` valid.
 */
enum GaStatus ga_run_problem(const char *name,
                             const struct GaConfigHandle *config,
                             GaGenerationFn on_generation,
                             void *user_data,
                             struct GaResultHandle **out);

/**
 * # Safety
 * `handle` must come from this library and not be used afterwards.
 */
void ga_result_free(struct GaResultHandle *handle);

/**
 * Completed generations; 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or live.
 */
size_t ga_result_completed_generations(const struct GaResultHandle *handle);

/**
 * Number of history entries (completed generations plus one).
 *
 * # Safety
 * `handle` must be null or live.
 */
size_t ga_result_history_len(const struct GaResultHandle *handle);

/**
 * 1 if an `on_generation` callback stopped the run, else 0.
 *
 * # Safety
 * `handle` must be null or live.
 */
int ga_result_stopped_early(const struct GaResultHandle *handle);

/**
 * Best fitness of history entry `generation`.
 *
 * # Safety
 * `handle` must be live and `out` valid.
 */
enum GaStatus ga_result_best_fitness(const struct GaResultHandle *handle,
                                     size_t generation,
                                     double *out);

/**
 * Mean fitness of history entry `generation`.
 *
 * # Safety
 * `handle` must be live and `out` valid.
 */
enum GaStatus ga_result_mean_fitness(const struct GaResultHandle *handle,
                                     size_t generation,
                                     double *out);

/**
 * Copies the best solution over the run into `genes[0..capacity)`.
 * `len_out` always receives the chromosome length; `fitness_out` and
 * `index_out` may be null.
 *
 * # Safety
 * `genes` must hold `capacity` doubles; other pointers null or valid.
 */
enum GaStatus ga_result_best_solution(const struct GaResultHandle *handle,
                                      double *genes,
                                      size_t capacity,
                                      size_t *len_out,
                                      double *fitness_out,
                                      size_t *index_out);

/**
 * Writes the fitness history CSV to `path`.
 *
 * # Safety
 * `handle` must be live and `path` NUL-terminated.
 */
enum GaStatus ga_result_write_csv(const struct GaResultHandle *handle, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAOPT_H */
