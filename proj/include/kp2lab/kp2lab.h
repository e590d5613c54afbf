#ifndef KP2LAB_KP2LAB_H
#define KP2LAB_KP2LAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define KP2LAB_API __declspec(dllexport)
#else
#define KP2LAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning kp2lab_status leaves a message for
   kp2lab_last_error() on failure. Messages are per thread. */
typedef enum kp2lab_status {
  KP2LAB_OK = 0,
  KP2LAB_INVALID_ARGUMENT = 1,
  KP2LAB_NONZERO_X_MEAN = 2,
  KP2LAB_AMPLITUDE_COLLAPSE = 3,
  KP2LAB_NON_FINITE = 4,
  KP2LAB_TAIL_NOT_DECAYED = 5,
  KP2LAB_SINGULAR_P = 6,
  KP2LAB_RESOLUTION_EXCEEDED = 7,
  KP2LAB_NO_CREST = 8,
  KP2LAB_NO_CONVERGENCE = 9,
  KP2LAB_CONE_EMPTY = 10,
  KP2LAB_IO = 11,
  KP2LAB_CHECK_FAILED = 100,
  KP2LAB_INTERNAL = 101
} kp2lab_status;

typedef struct kp2lab_config kp2lab_config;
typedef struct kp2lab_result kp2lab_result;
typedef struct kp2lab_field kp2lab_field;

KP2LAB_API const char* kp2lab_version(void);
KP2LAB_API const char* kp2lab_status_name(kp2lab_status status);
/* Message of the last failure on this thread ("" when none). */
KP2LAB_API const char* kp2lab_last_error(void);

/* ---- configuration: flat "section.key" = value pairs ---- */
KP2LAB_API kp2lab_status kp2lab_config_new(kp2lab_config** out);
KP2LAB_API kp2lab_status kp2lab_config_load(const char* path, kp2lab_config** out);
KP2LAB_API kp2lab_status kp2lab_config_set(kp2lab_config* cfg, const char* key, const char* value);
/* Copies the value (NUL terminated) into buf when it fits; *needed receives
   the length including the terminator. INVALID_ARGUMENT for a missing key. */
KP2LAB_API kp2lab_status kp2lab_config_get(const kp2lab_config* cfg, const char* key, char* buf, size_t cap,
                                           size_t* needed);
/* Parses and checks every key without running anything. */
KP2LAB_API kp2lab_status kp2lab_config_validate(const kp2lab_config* cfg);
KP2LAB_API void kp2lab_config_free(kp2lab_config* cfg);

/* ---- commands ---- */
KP2LAB_API size_t kp2lab_command_count(void);
KP2LAB_API const char* kp2lab_command_name(size_t index);

/* Runs a command, writing its files under out_dir. The seed is taken from
   the config unless use_seed is nonzero. Failed checks still return OK; ask
   the result. */
KP2LAB_API kp2lab_status kp2lab_run(const char* command, const kp2lab_config* cfg, const char* out_dir, int use_seed,
                                    uint64_t seed, kp2lab_result** out);
KP2LAB_API int kp2lab_result_passed(const kp2lab_result* r);
KP2LAB_API const char* kp2lab_result_report(const kp2lab_result* r);
KP2LAB_API size_t kp2lab_result_check_count(const kp2lab_result* r);
/* Any output pointer may be NULL. Strings live as long as the result. */
KP2LAB_API kp2lab_status kp2lab_result_check(const kp2lab_result* r, size_t index, const char** name, double* value,
                                             const char** bound, int* pass);
KP2LAB_API void kp2lab_result_free(kp2lab_result* r);

/* ---- fields: row-major nx * ny doubles, x fastest ---- */
KP2LAB_API kp2lab_status kp2lab_field_from_values(size_t nx, size_t ny, double lx, double ly, const double* values,
                                                  kp2lab_field** out);
KP2LAB_API kp2lab_status kp2lab_field_read(const char* path, kp2lab_field** out);
KP2LAB_API kp2lab_status kp2lab_field_write(const kp2lab_field* f, const char* path);
KP2LAB_API kp2lab_status kp2lab_field_dims(const kp2lab_field* f, size_t* nx, size_t* ny, double* lx, double* ly);
KP2LAB_API const double* kp2lab_field_data(const kp2lab_field* f);
KP2LAB_API void kp2lab_field_free(kp2lab_field* f);

/* ---- scalar evaluations ---- */
/* Line soliton profile phi_c(x). */
KP2LAB_API kp2lab_status kp2lab_soliton(double x, double c, double* out);
/* Self-similar Burgers profile with parameter m (|m| < 2) and sign +-1, t > 0. */
KP2LAB_API kp2lab_status kp2lab_burgers_profile(double t, double y, double m, int sign, double* out);
/* 2x2 propagator exp(t A(eta)) in row-major order, default constants. */
KP2LAB_API kp2lab_status kp2lab_propagator(double eta, double t, double out[4]);

#ifdef __cplusplus
}
#endif

#endif
