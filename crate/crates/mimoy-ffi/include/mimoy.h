/* C interface of the mimoy scheduling laboratory. */

#ifndef MIMOY_H
#define MIMOY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Analytical outage evaluator selector.
typedef enum MimoyBound {
  MimoyBound_LbCs = 0,
  MimoyBound_UbCs = 1,
  MimoyBound_LbGs = 2,
  MimoyBound_UbGs = 3,
  MimoyBound_HsLbCs = 4,
  MimoyBound_HsUbCs = 5,
  MimoyBound_HsLbGs = 6,
  MimoyBound_HsUbGs = 7,
} MimoyBound;

// Transmission chain selector.
typedef enum MimoyMode {
  MimoyMode_MinUa = 0,
  MimoyMode_ErUa = 1,
} MimoyMode;

// Scheduling pattern selector for DMT predictions.
typedef enum MimoyPattern {
  MimoyPattern_ClusterWise = 0,
  MimoyPattern_GroupWise = 1,
} MimoyPattern;

// Status codes returned by every fallible entry point.
typedef enum MimoyStatus {
  MimoyStatus_Ok = 0,
  MimoyStatus_NullPointer = 1,
  MimoyStatus_InvalidArgument = 2,
  MimoyStatus_ConfigInvariant = 3,
  MimoyStatus_Io = 4,
  MimoyStatus_NumericInstability = 5,
  MimoyStatus_DegenerateChannel = 6,
} MimoyStatus;

// Opaque network configuration handle.
typedef struct MimoyConfig MimoyConfig;

// One estimated outage point.
typedef struct MimoyOutagePoint {
  double snr_db;
  uint64_t trials;
  uint64_t outages;
  double p_hat;
  double ci_low;
  double ci_high;
} MimoyOutagePoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a configuration with symmetric unit noise and the antenna layout
// implied by the mode (`N_T = 2N` or `3N`, `N_R = 3N`). Returns null on
// invalid arguments.
struct MimoyConfig *mimoy_config_new(enum MimoyMode mode,
                                     uint32_t n_streams,
                                     uint32_t m1,
                                     uint32_t m2,
                                     uint32_t m3);

// Loads a configuration from a `key = value` file.
//
// # Safety
// `path` must point to a NUL-terminated string.
struct MimoyConfig *mimoy_config_from_file(const char *path);

// Sets the symmetric-SNR operating point (`P_T = P_R = SNR`, unit noise).
//
// # Safety
// `cfg` must be a live handle from a `mimoy_config_*` constructor.
enum MimoyStatus mimoy_config_set_snr_db(struct MimoyConfig *cfg, double snr_db);

// Releases a configuration handle.
//
// # Safety
// `cfg` must be a pointer previously returned by one of the
// `mimoy_config_*` constructors and not yet freed.
void mimoy_config_free(struct MimoyConfig *cfg);

// Evaluates one analytical outage bound or high-SNR approximation at the
// given threshold and SNR (dB). Group-wise bounds read `m1` as the group
// count.
enum MimoyStatus mimoy_outage_bound(enum MimoyBound bound,
                                    double rho_th,
                                    double snr_db,
                                    uint32_t m1,
                                    uint32_t m2,
                                    uint32_t m3,
                                    double *out);

// Predicted diversity-multiplexing tradeoff `d(r)`: cluster-wise uses the
// smallest of the three cluster sizes, group-wise reads `m1` as the group
// count.
double mimoy_dmt_predicted(enum MimoyPattern pattern,
                           double r,
                           uint32_t m1,
                           uint32_t m2,
                           uint32_t m3);

// Runs a deterministic Monte Carlo outage estimate at one SNR point.
// `scheme` is one of the CLI scheme names (`centralized-cs`, ...).
//
// # Safety
// `cfg` must be a live handle; `scheme` a NUL-terminated string; `out`
// writable.
enum MimoyStatus mimoy_simulate_point(const struct MimoyConfig *cfg,
                                      const char *scheme,
                                      double snr_db,
                                      double rho_th,
                                      uint64_t trials,
                                      uint64_t seed,
                                      uint32_t workers,
                                      struct MimoyOutagePoint *out);

// Modified Bessel function of the second kind, order one.
enum MimoyStatus mimoy_bessel_k1(double x, double *out);

// Digamma function.
enum MimoyStatus mimoy_digamma(double x, double *out);

// Static description of a status code.
const char *mimoy_status_message(enum MimoyStatus status);

// Library version string (static).
const char *mimoy_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMOY_H */
