#ifndef REPLICABILITY_H
#define REPLICABILITY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The first five match the command-line exit codes.
 */
typedef enum ReplStatus {
  REPL_STATUS_OK = 0,
  REPL_STATUS_USAGE = 1,
  REPL_STATUS_DATA = 2,
  REPL_STATUS_APPLICABILITY = 3,
  REPL_STATUS_IO = 4,
  REPL_STATUS_NULL_POINTER = 5,
  REPL_STATUS_PANIC = 6,
} ReplStatus;

typedef enum ReplSelectionKind {
  /**
   * Rows that carry a follow-up p-value.
   */
  REPL_SELECTION_KIND_FOLLOWED = 0,
  /**
   * BH on the primary p-values at `level`.
   */
  REPL_SELECTION_KIND_BH = 1,
  /**
   * p1 <= level / m.
   */
  REPL_SELECTION_KIND_BONFERRONI = 2,
  /**
   * The `k` smallest primary p-values.
   */
  REPL_SELECTION_KIND_TOP_K = 3,
  /**
   * p1 <= level.
   */
  REPL_SELECTION_KIND_THRESHOLD = 4,
} ReplSelectionKind;

typedef enum ReplDependence {
  REPL_DEPENDENCE_INDEPENDENT = 0,
  REPL_DEPENDENCE_PRDS = 1,
  REPL_DEPENDENCE_ITEM1 = 2,
  /**
   * Uses the threshold argument t.
   */
  REPL_DEPENDENCE_ITEM2 = 3,
  /**
   * Uses t when it is positive, otherwise the item-1 primary level.
   */
  REPL_DEPENDENCE_BOTH = 4,
} ReplDependence;

typedef enum ReplFwerMethod {
  REPL_FWER_METHOD_BONFERRONI = 0,
  REPL_FWER_METHOD_HOLM = 1,
} ReplFwerMethod;

/**
 * Dataset under construction.
 */
typedef struct ReplDataset ReplDataset;

/**
 * Result of a procedure run.
 */
typedef struct ReplReport ReplReport;

typedef struct ReplSelection {
  enum ReplSelectionKind kind;
  double level;
  size_t k;
} ReplSelection;

/**
 * Score of a followed-up hypothesis.
 */
typedef struct ReplScore {
  /**
   * Row index in insertion order.
   */
  size_t index;
  double z;
  double adjusted_p;
} ReplScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none.
 */
const char *repl_last_error_message(void);

struct ReplDataset *repl_dataset_new(void);

/**
 * Appends a row. `p2` is ignored unless `has_p2` is true.
 *
 * # Safety
 * `ds` must come from this library and `id` must be a NUL-terminated string.
 */
enum ReplStatus repl_dataset_push(struct ReplDataset *ds,
                                  const char *id,
                                  double p1,
                                  double p2,
                                  bool has_p2);

/**
 * Declares the family size m; 0 clears it.
 *
 * # Safety
 * `ds` must come from this library.
 */
enum ReplStatus repl_dataset_set_m(struct ReplDataset *ds, size_t m);

/**
 * Declares the follow-up set size R1; 0 clears it.
 *
 * # Safety
 * `ds` must come from this library.
 */
enum ReplStatus repl_dataset_set_r1(struct ReplDataset *ds, size_t r1);

/**
 * Reads a CSV file with header id,p1,p2.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum ReplStatus repl_dataset_from_csv(const char *path, struct ReplDataset **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `ds` must be null or come from this library.
 */
size_t repl_dataset_len(const struct ReplDataset *ds);

/**
 * # Safety
 * `ds` must be null or come from this library, and not be used afterwards.
 */
void repl_dataset_free(struct ReplDataset *ds);

/**
 * Two-stage FDR procedure at (q1, q).
 *
 * # Safety
 * `ds` must come from this library and `out` be writable.
 */
enum ReplStatus repl_fdr_two_stage(const struct ReplDataset *ds,
                                   struct ReplSelection selection,
                                   double q1,
                                   double q,
                                   enum ReplDependence dep,
                                   double t,
                                   struct ReplReport **out);

/**
 * Two-stage FWER procedure at (alpha1, alpha).
 *
 * # Safety
 * `ds` must come from this library and `out` be writable.
 */
enum ReplStatus repl_fwer_two_stage(const struct ReplDataset *ds,
                                    struct ReplSelection selection,
                                    double alpha1,
                                    double alpha,
                                    enum ReplFwerMethod method,
                                    struct ReplReport **out);

/**
 * Symmetric procedure: study one as primary at weight w1, the reverse at
 * 1 - w1. `selection2` selects on study-two p-values.
 *
 * # Safety
 * `ds` must come from this library and `out` be writable.
 */
enum ReplStatus repl_fdr_symmetric(const struct ReplDataset *ds,
                                   struct ReplSelection selection1,
                                   struct ReplSelection selection2,
                                   double w1,
                                   double q1,
                                   double q,
                                   struct ReplReport **out);

/**
 * Follow-up set size R1.
 *
 * # Safety
 * `r` must be null or come from this library.
 */
size_t repl_report_r1(const struct ReplReport *r);

/**
 * Number of rejections R2.
 *
 * # Safety
 * `r` must be null or come from this library.
 */
size_t repl_report_r2(const struct ReplReport *r);

/**
 * Id of the i-th rejection in input order, or null when out of range.
 *
 * # Safety
 * `r` must be null or come from this library.
 */
const char *repl_report_rejected_id(const struct ReplReport *r, size_t i);

/**
 * Row index of the i-th rejection, or `usize::MAX` when out of range.
 *
 * # Safety
 * `r` must be null or come from this library.
 */
size_t repl_report_rejected_index(const struct ReplReport *r, size_t i);

/**
 * Number of scored hypotheses.
 *
 * # Safety
 * `r` must be null or come from this library.
 */
size_t repl_report_score_count(const struct ReplReport *r);

/**
 * # Safety
 * `r` must come from this library and `out` be writable.
 */
enum ReplStatus repl_report_score(const struct ReplReport *r, size_t i, struct ReplScore *out);

/**
 * # Safety
 * `r` must be null or come from this library, and not be used afterwards.
 */
void repl_report_free(struct ReplReport *r);

double repl_std_normal_cdf(double x);

double repl_std_normal_sf(double x);

/**
 * Upper-tail quantile: z with 1 - Φ(z) = p.
 *
 * # Safety
 * `out` must be writable.
 */
enum ReplStatus repl_std_normal_isf(double p, double *out);

/**
 * Harmonic number H_k.
 *
 * # Safety
 * `out` must be writable.
 */
enum ReplStatus repl_harmonic(size_t k, double *out);

/**
 * Oracle primary level q' for null fractions f00, f01.
 *
 * # Safety
 * `out` must be writable.
 */
enum ReplStatus repl_oracle_qprime(double f00, double f01, double q, double w1, double *out);

/**
 * Power of Bonferroni on max(p1, p2) for one non-null pair.
 *
 * # Safety
 * `out` must be writable.
 */
enum ReplStatus repl_power_bonf_max(double mu11, double mu21, size_t m, double alpha, double *out);

/**
 * Power of the two-stage Bonferroni procedure for one non-null pair.
 *
 * # Safety
 * `out` must be writable.
 */
enum ReplStatus repl_power_two_stage(double mu11,
                                     double mu21,
                                     size_t m,
                                     double alpha1,
                                     double alpha,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REPLICABILITY_H */
