/* indexlab C API: numerical index-theory laboratory.
 *
 * All entry points are thread-compatible (no shared mutable state besides
 * the per-thread error message). Results are returned through opaque
 * handles; every successfully created handle must be released with
 * indexlab_result_free.
 */
#ifndef INDEXLAB_H
#define INDEXLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  INDEXLAB_OK = 0,
  INDEXLAB_ERR_CONFIG = 1,       /* malformed or unknown configuration */
  INDEXLAB_ERR_PRECONDITION = 2, /* experiment-level precondition failed */
  INDEXLAB_ERR_NUMERICAL = 3,    /* solver or classification failure */
  INDEXLAB_ERR_IO = 4,           /* file system problem */
  INDEXLAB_ERR_INTERNAL = 5
} indexlab_status;

/* Opaque result of one experiment run or one suite run. */
typedef struct indexlab_result indexlab_result;

const char* indexlab_version(void);

/* Message describing the most recent failure on this thread. */
const char* indexlab_last_error(void);

/* Run a single experiment from a JSON config string. out_dir overrides the
 * config's output directory when non-NULL. On success *out owns a handle. */
indexlab_status indexlab_run_config_json(const char* config_json,
                                         const char* out_dir,
                                         indexlab_result** out);

/* Same, reading the config from a file. */
indexlab_status indexlab_run_config_file(const char* path, const char* out_dir,
                                         indexlab_result** out);

/* Run a named suite ("paper-acceptance"). jobs <= 1 runs criteria
 * sequentially. tol_overrides is a comma-separated "key=value" list or
 * NULL. */
indexlab_status indexlab_suite_run(const char* suite_name, const char* out_dir,
                                   int jobs, const char* tol_overrides,
                                   indexlab_result** out);

/* 1 if every check in the run passed. */
int indexlab_result_pass(const indexlab_result* r);

/* Full result as JSON (owned by the handle). */
const char* indexlab_result_json(const indexlab_result* r);

/* Human-readable pass/fail lines (owned by the handle). */
const char* indexlab_result_summary(const indexlab_result* r);

void indexlab_result_free(indexlab_result* r);

/* Newline-separated list of known experiment names (static storage). */
const char* indexlab_experiments(void);

#ifdef __cplusplus
}
#endif

#endif /* INDEXLAB_H */
