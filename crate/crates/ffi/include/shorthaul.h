#ifndef SHORTHAUL_H
#define SHORTHAUL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Weight limit used for exceedance and requisite density.
 */
typedef enum ShLimit {
  SH_LIMIT_MLW = 0,
  SH_LIMIT_MTOW = 1,
} ShLimit;

/**
 * Result codes. Zero is success.
 */
typedef enum ShStatus {
  SH_STATUS_OK = 0,
  SH_STATUS_NULL_POINTER = 1,
  SH_STATUS_INVALID_ARGUMENT = 2,
  SH_STATUS_NOT_FOUND = 3,
  SH_STATUS_IO = 4,
  SH_STATUS_PARSE = 5,
  /**
   * The model has no answer for these inputs, e.g. no mass left for a battery.
   */
  SH_STATUS_INFEASIBLE = 6,
  SH_STATUS_INTERNAL = 7,
} ShStatus;

/**
 * Opaque per-country emissions ledger.
 */
typedef struct ShLedger ShLedger;

/**
 * Opaque aircraft registry.
 */
typedef struct ShRegistry ShRegistry;

/**
 * Model constants; start from `sh_params_default`.
 */
typedef struct ShParams {
  double lhv_mj_per_kg;
  double eta_fossil;
  double eta_electric;
  double wh_per_mj;
  double battery_density_wh_per_kg;
  double pax_mass_kg;
  double ci_fuel_kg_per_kg;
  double short_haul_nm;
  double dirty_grid_g_per_kwh;
} ShParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sh_version(void);

/**
 * Default model constants.
 */
struct ShParams sh_params_default(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to
 * `len`) and returns the full message length excluding the NUL. `buf` may be null to query
 * the length.
 *
 * # Safety
 * `buf` must be null or point to at least `len` writable bytes.
 */
size_t sh_last_error_message(char *buf, size_t len);

/**
 * Battery mass (kg) replacing `fuel_kg` of kerosene.
 *
 * # Safety
 * `params` and `out_mass_kg` must be valid pointers.
 */
enum ShStatus sh_battery_mass(double fuel_kg, const struct ShParams *params, double *out_mass_kg);

/**
 * Grid intensity (g/kWh) at which electric and kerosene emissions are equal.
 *
 * # Safety
 * `params` and `out_g_per_kwh` must be valid pointers.
 */
enum ShStatus sh_closed_form_tipping(const struct ShParams *params, double *out_g_per_kwh);

/**
 * Loads the bundled 47-aircraft registry.
 *
 * # Safety
 * `out_registry` must be a valid pointer; the handle written there must be freed with
 * `sh_registry_free`.
 */
enum ShStatus sh_registry_bundled(struct ShRegistry **out_registry);

/**
 * Loads an aircraft registry CSV.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_registry` a valid pointer.
 */
enum ShStatus sh_registry_open(const char *path, struct ShRegistry **out_registry);

/**
 * Number of aircraft models, or 0 for a null handle.
 *
 * # Safety
 * `registry` must be null or a live handle.
 */
size_t sh_registry_len(const struct ShRegistry *registry);

/**
 * # Safety
 * `registry` must be null or a handle not yet freed.
 */
void sh_registry_free(struct ShRegistry *registry);

/**
 * Loaded mass over the weight limit for aircraft `code` with a full battery. `limit` is an
 * `ShLimit` value.
 *
 * # Safety
 * All pointers must be valid; `code` must be NUL-terminated.
 */
enum ShStatus sh_exceedance(const struct ShRegistry *registry,
                            const char *code,
                            const struct ShParams *params,
                            uint32_t limit,
                            double *out_ratio);

/**
 * Battery density (Wh/kg) at which aircraft `code` lands exactly at the `ShLimit` `limit`.
 *
 * # Safety
 * All pointers must be valid; `code` must be NUL-terminated.
 */
enum ShStatus sh_requisite_density(const struct ShRegistry *registry,
                                   const char *code,
                                   const struct ShParams *params,
                                   uint32_t limit,
                                   double *out_wh_per_kg);

/**
 * Loads the bundled per-country ledger.
 *
 * # Safety
 * `params` and `out_ledger` must be valid pointers; free the handle with `sh_ledger_free`.
 */
enum ShStatus sh_ledger_bundled(const struct ShParams *params, struct ShLedger **out_ledger);

/**
 * Loads a per-country ledger CSV.
 *
 * # Safety
 * `path` must be NUL-terminated; `params` and `out_ledger` must be valid pointers.
 */
enum ShStatus sh_ledger_open(const char *path,
                             const struct ShParams *params,
                             struct ShLedger **out_ledger);

/**
 * Number of countries, or 0 for a null handle.
 *
 * # Safety
 * `ledger` must be null or a live handle.
 */
size_t sh_ledger_len(const struct ShLedger *ledger);

/**
 * Net savings over all countries, kg CO2e (negative means a net increase).
 *
 * # Safety
 * `ledger` and `out_kg` must be valid pointers.
 */
enum ShStatus sh_ledger_global_net_kg(const struct ShLedger *ledger, double *out_kg);

/**
 * Savings change for `country` when its grid gets `fraction` cleaner. `out_relative_pct`
 * is set to NaN when the country's savings are zero.
 *
 * # Safety
 * All pointers must be valid; `country` must be NUL-terminated.
 */
enum ShStatus sh_ledger_scenario(const struct ShLedger *ledger,
                                 const char *country,
                                 double fraction,
                                 double *out_absolute_kg,
                                 double *out_relative_pct);

/**
 * # Safety
 * `ledger` must be null or a handle not yet freed.
 */
void sh_ledger_free(struct ShLedger *ledger);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SHORTHAUL_H */
