#ifndef KHOVANOV_CAPI_H
#define KHOVANOV_CAPI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define KH_OK 0

#define KH_ERR_PARSE 1

#define KH_ERR_COMPUTE 2

#define KH_ERR_NULL 3

/**
 * Opaque homology table handle.
 */
typedef struct KhTable KhTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The most recent error message on this thread. Borrowed; valid until the
 * next failing call on the same thread.
 */
const char *kh_last_error(void);

/**
 * Engine version string. Static; do not free.
 */
const char *kh_version(void);

/**
 * Compute the bigraded homology table of a link expression over a ring
 * (`"Z"`, `"Q"`, or `"Zp:<p>"`). `basepoints` is an optional comma list of
 * 1-based strands, or `"auto"`, or null. `tensor_sums` nonzero reduces the
 * connected-sum factors individually and tensors them over R.
 *
 * # Safety
 * `expr` and `ring` must be valid NUL-terminated strings; `out` must point
 * to writable storage for one pointer.
 */
int32_t kh_compute(const char *expr,
                   const char *ring,
                   const char *basepoints,
                   int32_t tensor_sums,
                   struct KhTable **out);

/**
 * The table as JSON in the fixed schema
 * `{"ring": …, "groups": [{"h","q","free","torsion"}...]}`.
 * Returns null on null input. Free with [`kh_string_free`].
 *
 * # Safety
 * `table` must be a live handle from [`kh_compute`].
 */
char *kh_table_json(const struct KhTable *table);

/**
 * The table as CSV (`h,q,free,torsion`). Free with [`kh_string_free`].
 *
 * # Safety
 * `table` must be a live handle from [`kh_compute`].
 */
char *kh_table_csv(const struct KhTable *table);

/**
 * Free rank at (h, q); 0 when the group is trivial, −1 on null input.
 *
 * # Safety
 * `table` must be a live handle from [`kh_compute`].
 */
int64_t kh_table_free_rank(const struct KhTable *table, int32_t h, int32_t q);

/**
 * Number of direct summands of exactly order `order` at (h, q) (prime-power
 * orders count elementary divisors by their p-part). −1 on null input.
 *
 * # Safety
 * `table` must be a live handle from [`kh_compute`].
 */
int64_t kh_table_summand_count(const struct KhTable *table, int32_t h, int32_t q, uint64_t order);

/**
 * Predicted torsion bidegree of Kh(L3^k): writes (h, q, min multiplicity)
 * for the ℤ/3ˡ family at index m. p must be 3.
 *
 * # Safety
 * The three out-pointers must be valid or null (null skips that output).
 */
int32_t kh_predict(uint32_t p,
                   uint32_t k,
                   uint32_t l,
                   uint32_t m,
                   int32_t *out_h,
                   int32_t *out_q,
                   uint64_t *out_min_multiplicity);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void kh_string_free(char *s);

/**
 * Release a table handle.
 *
 * # Safety
 * `table` must come from [`kh_compute`] and not have been freed already.
 */
void kh_table_free(struct KhTable *table);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* KHOVANOV_CAPI_H */
