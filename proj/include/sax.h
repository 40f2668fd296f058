/* Public C interface to the mode-indexed session-process toolchain.
 *
 * All entry points return SAX_OK on success and SAX_ERR when the input is
 * rejected; diagnostics are then available via sax_diagnostics(). Strings
 * returned through out-parameters are owned by the caller and must be
 * released with sax_string_free().
 */
#ifndef SAX_H
#define SAX_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct sax_env sax_env;

enum {
  SAX_OK = 0,
  SAX_ERR = 1,      /* input rejected; see sax_diagnostics() */
  SAX_USAGE = 2,    /* misuse of the API (bad argument, wrong order) */
};

sax_env* sax_env_new(void);
void sax_env_free(sax_env* env);

/* Parses a source file (resolving includes) and validates the signature. */
int sax_load_file(sax_env* env, const char* path);

/* Elaborates sugar to the kernel and typechecks every definition. */
int sax_check(sax_env* env);

/* Accumulated diagnostics, one "file:line:col: code: message" per line.
 * The pointer stays valid until the next call on this environment. */
const char* sax_diagnostics(sax_env* env);

/* Kernel program text after a successful sax_check(). */
int sax_expand(sax_env* env, char** out);

/* Runs an entry process (a nullary declaration). policy is "fifo", "lifo"
 * or "random"; when want_trace is nonzero *out carries the step trace
 * followed by the summary, otherwise the summary alone. The summary lists
 * the run status, the step count and the decoded root value. */
int sax_run(sax_env* env, const char* entry, const char* policy,
            uint64_t seed, uint64_t max_steps, int want_trace, char** out);

/* Replays an entry run and checks preservation, progress, confluence and,
 * for programs with a sequential mode, the single-active-thread property.
 * *out is a human-readable report, or a JSON object when json is set.
 * Returns SAX_ERR when any property fails. */
int sax_verify(sax_env* env, const char* entry, uint64_t max_steps, int json,
               char** out);

void sax_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
