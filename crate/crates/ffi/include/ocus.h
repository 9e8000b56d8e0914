#ifndef OCUS_H
#define OCUS_H

#include <stddef.h>
#include <stdint.h>

typedef enum OcusStatus {
  OCUS_STATUS_OK = 0,
  /*
   No unsatisfiable subset satisfies the constraint.
   */
  OCUS_STATUS_NONE_EXISTS = 1,
  OCUS_STATUS_NULL_POINTER = 2,
  OCUS_STATUS_INVALID_ARGUMENT = 3,
  /*
   Malformed input document or label.
   */
  OCUS_STATUS_PARSE = 4,
  /*
   The sequence does not pass verification.
   */
  OCUS_STATUS_INVALID_SEQUENCE = 5,
  /*
   The output buffer is too small; the needed length was still written.
   */
  OCUS_STATUS_BUFFER_TOO_SMALL = 6,
  OCUS_STATUS_TIMEOUT = 7,
  OCUS_STATUS_INTERNAL = 8,
  /*
   A panic was caught at the boundary.
   */
  OCUS_STATUS_PANIC = 9,
} OcusStatus;

/*
 A weighted CNF formula under construction.
 */
typedef struct OcusFormula OcusFormula;

/*
 An explanation problem.
 */
typedef struct OcusProblem OcusProblem;

/*
 A generated explanation sequence, together with its configuration label.
 */
typedef struct OcusSequence OcusSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 The message of the last failing call on this thread, or null. Owned by the
 library; valid until the next failing call on this thread.
 */
const char *ocus_last_error(void);

/*
 Frees a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void ocus_string_free(char *s);

/*
 Parses a problem document or logic-grid puzzle from JSON text.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum OcusStatus ocus_problem_from_json(const char *json, struct OcusProblem **out);

/*
 # Safety
 `problem` must be null or come from [`ocus_problem_from_json`] and not have been freed.
 */
void ocus_problem_free(struct OcusProblem *problem);

/*
 Number of atoms of the problem, or 0 for null.

 # Safety
 `problem` must be null or a live handle.
 */
uint32_t ocus_problem_atom_count(const struct OcusProblem *problem);

/*
 Number of literals still to be explained, or 0 for null.

 # Safety
 `problem` must be null or a live handle.
 */
size_t ocus_problem_remaining(const struct OcusProblem *problem);

/*
 Explains the whole problem under `config` (for example
 `"ocus+shared@max:actual:unif"` or `"mus"`). A `timeout_ms` of 0 means no limit.

 # Safety
 `problem` must be a live handle, `config` NUL-terminated, `out` writable.
 */
enum OcusStatus ocus_problem_explain(const struct OcusProblem *problem,
                                     const char *config,
                                     uint64_t timeout_ms,
                                     struct OcusSequence **out);

/*
 # Safety
 `seq` must be null or come from [`ocus_problem_explain`] and not have been freed.
 */
void ocus_sequence_free(struct OcusSequence *seq);

/*
 Number of steps, or 0 for null.

 # Safety
 `seq` must be null or a live handle.
 */
size_t ocus_sequence_len(const struct OcusSequence *seq);

/*
 Summed step costs, or 0 for null.

 # Safety
 `seq` must be null or a live handle.
 */
uint64_t ocus_sequence_total_cost(const struct OcusSequence *seq);

/*
 Cost of step `index`.

 # Safety
 `seq` must be a live handle and `cost` writable.
 */
enum OcusStatus ocus_sequence_step_cost(const struct OcusSequence *seq,
                                        size_t index,
                                        uint64_t *cost);

/*
 The sequence document as JSON; free with [`ocus_string_free`]. Null on failure.

 # Safety
 `seq` must be null or a live handle.
 */
char *ocus_sequence_to_json(const struct OcusSequence *seq);

/*
 Re-checks `seq` against `problem`: [`OcusStatus::Ok`] if every step is
 entailed, uses only known facts and the sequence derives the whole target.

 # Safety
 Both handles must be live.
 */
enum OcusStatus ocus_sequence_verify(const struct OcusProblem *problem,
                                     const struct OcusSequence *seq);

/*
 An empty formula over atoms `1..=atom_count`.
 */
struct OcusFormula *ocus_formula_new(uint32_t atom_count);

/*
 # Safety
 `formula` must be null or come from [`ocus_formula_new`] and not have been freed.
 */
void ocus_formula_free(struct OcusFormula *formula);

/*
 Number of clauses, or 0 for null.

 # Safety
 `formula` must be null or a live handle.
 */
size_t ocus_formula_len(const struct OcusFormula *formula);

/*
 Appends a clause of DIMACS literals with a positive weight.

 # Safety
 `formula` must be a live handle; `lits` must point to `len` values.
 */
enum OcusStatus ocus_formula_add_clause(struct OcusFormula *formula,
                                        const int32_t *lits,
                                        size_t len,
                                        uint64_t weight);

/*
 Computes a cheapest unsatisfiable subset of `formula` holding exactly one
 of the `domain_len` clause indices in `domain` (no constraint if
 `domain_len` is 0). `grow` is a label such as `"max:actual:unif"`.

 On [`OcusStatus::Ok`] the sorted 0-based indices go to `subset` (capacity
 `capacity`), their number to `subset_len` and the cost to `cost`. If the
 buffer is too small, `subset_len` still receives the needed length.

 # Safety
 `formula` must be a live handle, `grow` NUL-terminated, `domain` valid for
 `domain_len` reads, `subset` valid for `capacity` writes, and
 `subset_len` and `cost` writable.
 */
enum OcusStatus ocus_formula_solve(const struct OcusFormula *formula,
                                   const size_t *domain,
                                   size_t domain_len,
                                   const char *grow,
                                   size_t *subset,
                                   size_t capacity,
                                   size_t *subset_len,
                                   uint64_t *cost);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OCUS_H */
