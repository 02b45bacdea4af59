#ifndef PERMSTAB_H
#define PERMSTAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  // A guaranteed bound failed inside the library.
  PS_STATUS_INVARIANT_VIOLATION = 3,
  // A rational did not fit in 64 bits.
  PS_STATUS_OVERFLOW = 4,
  PS_STATUS_PANIC = 5,
} PsStatus;

// The outcome of a repair.
typedef struct PsCorrection PsCorrection;

// A finite group given by its multiplication table.
typedef struct PsGroup PsGroup;

// A map from a group into `Sym(n)`.
typedef struct PsMap PsMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *ps_last_error(void);

// Library version as a static NUL-terminated string.
const char *ps_version(void);

// `ℤ/m`.
enum PsStatus ps_group_cyclic(size_t m, struct PsGroup **out);

// `Sym(k)` for `k ≤ 6`, elements in lexicographic order of their images.
enum PsStatus ps_group_symmetric(size_t k, struct PsGroup **out);

// A group from a row-major `order × order` table, `table[a*order + b] = a*b`.
//
// # Safety
// `table` must point to `order * order` readable values.
enum PsStatus ps_group_from_table(size_t order, const size_t *table, struct PsGroup **out);

// # Safety
// `group` must come from a `ps_group_*` constructor.
size_t ps_group_order(const struct PsGroup *group);

// # Safety
// `group` must come from a `ps_group_*` constructor and not be used afterwards.
void ps_group_free(struct PsGroup *group);

// A map from `|Γ| · degree` images, row `g` holding `f(g)(0..degree)`.
//
// # Safety
// `group` must be live and `images` must point to `order * degree` values.
enum PsStatus ps_map_new(const struct PsGroup *group,
                         size_t degree,
                         const size_t *images,
                         struct PsMap **out);

// Left multiplication of the group on itself.
//
// # Safety
// `group` must be live.
enum PsStatus ps_map_regular(const struct PsGroup *group, struct PsMap **out);

// # Safety
// `map` must be live.
size_t ps_map_degree(const struct PsMap *map);

// Copies `f(g)` into `buf`, which holds `len` values; `len` must equal the degree.
//
// # Safety
// `map` must be live and `buf` writable for `len` values.
enum PsStatus ps_map_image(const struct PsMap *map, size_t g, size_t *buf, size_t len);

// Uniform and mean local defect.
//
// # Safety
// `map` must be live and all four outputs writable.
enum PsStatus ps_map_defects(const struct PsMap *map,
                             int64_t *inf_num,
                             int64_t *inf_den,
                             int64_t *mean_num,
                             int64_t *mean_den);

// # Safety
// `map` must be live and `out` writable.
enum PsStatus ps_map_is_homomorphism(const struct PsMap *map, bool *out);

// # Safety
// `map` must be live.
enum PsStatus ps_symmetrize(const struct PsMap *map, struct PsMap **out);

// # Safety
// `map` must come from a `ps_map_*` constructor and not be used afterwards.
void ps_map_free(struct PsMap *map);

// Symmetrizes and repairs `map` into an exact action.
//
// # Safety
// `map` must be live.
enum PsStatus ps_correct(const struct PsMap *map, struct PsCorrection **out);

// A new handle to the repaired action.
//
// # Safety
// `c` must be live.
enum PsStatus ps_correction_map(const struct PsCorrection *c, struct PsMap **out);

// Degree `N` of the repaired action.
//
// # Safety
// `c` must be live.
size_t ps_correction_degree(const struct PsCorrection *c);

// Whether the repair fell back to the trivial action.
//
// # Safety
// `c` must be live.
bool ps_correction_used_fallback(const struct PsCorrection *c);

// `d_∞` and `d₁` between the input map and the repaired action.
//
// # Safety
// `c` must be live and all four outputs writable.
enum PsStatus ps_correction_distance(const struct PsCorrection *c,
                                     int64_t *inf_num,
                                     int64_t *inf_den,
                                     int64_t *mean_num,
                                     int64_t *mean_den);

// # Safety
// `c` must come from `ps_correct` and not be used afterwards.
void ps_correction_free(struct PsCorrection *c);

// Normalized Hamming distance between permutations of possibly different degrees.
//
// # Safety
// `a` and `b` must point to `na` and `nb` values.
enum PsStatus ps_hamming(const size_t *a,
                         size_t na,
                         const size_t *b,
                         size_t nb,
                         int64_t *num,
                         int64_t *den);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PERMSTAB_H */
