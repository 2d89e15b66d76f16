/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * C interface to the flowstitch solver library.
 *
 * Every function returns an fst_status. On failure the message is available
 * from fst_last_error() until the next call on the same thread. Strings
 * handed out through char** parameters are owned by the caller and released
 * with fst_string_free(). Numbers that may exceed 64 bits (costs, times) are
 * exchanged as decimal strings.
 */

#ifndef FLOWSTITCH_FLOWSTITCH_H
#define FLOWSTITCH_FLOWSTITCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FST_API __declspec(dllexport)
#elif defined(__GNUC__)
#define FST_API __attribute__((visibility("default")))
#else
#define FST_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fst_status {
  FST_OK = 0,
  FST_ERR_PARSE = 1,
  FST_ERR_INVALID_ARGUMENT = 2,
  FST_ERR_TOO_LARGE = 3,
  FST_ERR_STRUCTURAL = 4,
  FST_ERR_INTERNAL = 5,
  FST_ERR_IO = 6,
  FST_ERR_VALIDATION = 7, /* a schedule or cover failed verification */
  FST_ERR_NULL = 8
} fst_status;

typedef struct fst_instance fst_instance;
typedef struct fst_schedule fst_schedule;
typedef struct fst_report fst_report;

FST_API const char* fst_last_error(void);
FST_API const char* fst_status_name(fst_status status);
FST_API void fst_string_free(char* s);

/* Instances */

FST_API fst_status fst_instance_parse(const char* text, fst_instance** out);
FST_API fst_status fst_instance_load(const char* path, fst_instance** out);
FST_API fst_status fst_instance_to_text(const fst_instance* inst, char** out);
FST_API size_t fst_instance_size(const fst_instance* inst);
FST_API void fst_instance_free(fst_instance* inst);

typedef struct fst_gen_options {
  size_t n;
  int classes;
  unsigned long max_weight;
  const char* density; /* rational, e.g. "1/2"; NULL for the default */
  uint64_t seed;
} fst_gen_options;

FST_API void fst_gen_options_init(fst_gen_options* opts);
FST_API fst_status fst_instance_generate(const fst_gen_options* opts, fst_instance** out);

/* Solving */

typedef struct fst_solve_options {
  const char* alg;       /* "exact", "hdf" or "unitslot" */
  const char* stitch;    /* "none", "standard" or "windowed" */
  const char* eps;       /* windowed: rational in (0, 1/2); NULL for 1/4 */
  unsigned long gamma;   /* windowed */
  int window;            /* windowed: explicit b, 0 to derive from eps and gamma */
  const char* prune_eps; /* light-job pruning threshold, NULL to disable */
  size_t exact_limit;
  int parallel;          /* solve class windows concurrently */
  int collect_r2c;       /* keep every step's cover instance in the report */
} fst_solve_options;

FST_API void fst_solve_options_init(fst_solve_options* opts);

/* `report` may be NULL. */
FST_API fst_status fst_solve(const fst_instance* inst, const fst_solve_options* opts, fst_schedule** out,
                             fst_report** report);

/* Schedules */

FST_API fst_status fst_schedule_parse(const char* text, fst_schedule** out);
FST_API fst_status fst_schedule_load(const char* path, fst_schedule** out);
FST_API fst_status fst_schedule_to_text(const fst_schedule* sched, char** out);
FST_API void fst_schedule_free(fst_schedule* sched);

/* Weighted flow-time of `sched` for `inst`, as a decimal string. */
FST_API fst_status fst_schedule_cost(const fst_schedule* sched, const fst_instance* inst, char** out);

/* FST_OK if `sched` is valid for `inst`, FST_ERR_VALIDATION otherwise. A
 * diagnostic goes to `message` when it is not NULL. */
FST_API fst_status fst_verify(const fst_instance* inst, const fst_schedule* sched, char** message);

/* Checks every block of an R2C dump: dangerous points coverable, a recorded
 * selection covers every point at its stated cost, and the fractional level
 * weights give each point mass at least 1. */
FST_API fst_status fst_verify_r2c(const char* text, char** message);

/* Reports */

FST_API fst_status fst_report_csv(const fst_report* report, char** out);
FST_API fst_status fst_report_summary(const fst_report* report, char** out);
FST_API fst_status fst_report_r2c(const fst_report* report, char** out);
FST_API void fst_report_free(fst_report* report);

/* Bench */

typedef struct fst_bench_options {
  const char* algs;      /* comma-separated tokens: ALG, standard:ALG, windowed:ALG */
  const char* eps;
  unsigned long gamma;
  int window;
  size_t exact_limit;
  int trivial_bound;     /* nonzero: always use sum w p as the bound */
  int parallel;
} fst_bench_options;

FST_API void fst_bench_options_init(fst_bench_options* opts);

/* Runs every token on every .txt instance in `corpus_dir`. `csv` receives the
 * rows, `summary` (may be NULL) the per-solver ratio distribution.
 * `failures` (may be NULL) receives the number of failed rows. */
FST_API fst_status fst_bench(const char* corpus_dir, const fst_bench_options* opts, char** csv, char** summary,
                             size_t* failures);

#ifdef __cplusplus
}
#endif

#endif /* FLOWSTITCH_FLOWSTITCH_H */
