/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "kp2lab/kp2lab.h"

static int failures = 0;

#define EXPECT(cond)                                               \
  do {                                                             \
    if (!(cond)) {                                                 \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                  \
    }                                                              \
  } while (0)

static void config_roundtrip(void) {
  kp2lab_config* cfg = NULL;
  EXPECT(kp2lab_config_new(&cfg) == KP2LAB_OK);
  EXPECT(kp2lab_config_set(cfg, "grid.nx", "256") == KP2LAB_OK);
  char buf[16];
  size_t need = 0;
  EXPECT(kp2lab_config_get(cfg, "grid.nx", buf, sizeof buf, &need) == KP2LAB_OK);
  EXPECT(need == 4);
  EXPECT(strcmp(buf, "256") == 0);
  EXPECT(kp2lab_config_get(cfg, "grid.ny", buf, sizeof buf, &need) == KP2LAB_INVALID_ARGUMENT);
  EXPECT(strstr(kp2lab_last_error(), "grid.ny") != NULL);

  EXPECT(kp2lab_config_set(cfg, "grid.nz", "1") == KP2LAB_OK);
  EXPECT(kp2lab_config_validate(cfg) == KP2LAB_INVALID_ARGUMENT);
  kp2lab_config_free(cfg);

  EXPECT(kp2lab_config_load("/nonexistent/kp2lab.ini", &cfg) == KP2LAB_IO);
  EXPECT(cfg == NULL);
  EXPECT(kp2lab_config_new(NULL) == KP2LAB_INVALID_ARGUMENT);
}

static void fields(void) {
  const size_t nx = 64, ny = 64;
  double* v = malloc(nx * ny * sizeof *v);
  for (size_t i = 0; i < nx * ny; ++i) v[i] = sin(0.1 * (double)i);
  kp2lab_field* f = NULL;
  EXPECT(kp2lab_field_from_values(nx, ny, 40.0, 40.0, v, &f) == KP2LAB_OK);
  EXPECT(kp2lab_field_write(f, "capi_field.bin") == KP2LAB_OK);
  kp2lab_field* g = NULL;
  EXPECT(kp2lab_field_read("capi_field.bin", &g) == KP2LAB_OK);
  size_t gx = 0, gy = 0;
  double lx = 0, ly = 0;
  EXPECT(kp2lab_field_dims(g, &gx, &gy, &lx, &ly) == KP2LAB_OK);
  EXPECT(gx == nx && gy == ny && lx == 40.0 && ly == 40.0);
  EXPECT(memcmp(kp2lab_field_data(g), v, nx * ny * sizeof *v) == 0);
  kp2lab_field_free(f);
  kp2lab_field_free(g);
  remove("capi_field.bin");

  EXPECT(kp2lab_field_from_values(48, ny, 40.0, 40.0, v, &f) == KP2LAB_INVALID_ARGUMENT);
  EXPECT(kp2lab_field_read("/nonexistent/field.bin", &f) == KP2LAB_IO);
  free(v);
}

static void scalars(void) {
  double x = 0.0;
  EXPECT(kp2lab_soliton(0.0, 2.0, &x) == KP2LAB_OK);
  EXPECT(fabs(x - 2.0) < 1e-15);
  EXPECT(kp2lab_soliton(0.0, -1.0, &x) == KP2LAB_INVALID_ARGUMENT);
  EXPECT(kp2lab_burgers_profile(1.0, 0.0, 0.0, 1, &x) == KP2LAB_OK);
  EXPECT(x == 0.0);
  EXPECT(kp2lab_burgers_profile(1.0, 0.0, 3.0, 1, &x) == KP2LAB_INVALID_ARGUMENT);
  EXPECT(kp2lab_burgers_profile(0.0, 0.0, 1.0, 1, &x) == KP2LAB_INVALID_ARGUMENT);
  double m[4];
  EXPECT(kp2lab_propagator(0.3, 0.0, m) == KP2LAB_OK);
  EXPECT(fabs(m[0] - 1.0) < 1e-14 && fabs(m[1]) < 1e-14 && fabs(m[2]) < 1e-14 && fabs(m[3] - 1.0) < 1e-14);
}

static void commands(void) {
  EXPECT(kp2lab_command_count() == 5);
  EXPECT(strcmp(kp2lab_command_name(0), "verify-eigen") == 0);
  EXPECT(kp2lab_command_name(99) == NULL);

  kp2lab_config* cfg = NULL;
  kp2lab_config_new(&cfg);
  kp2lab_result* r = NULL;
  EXPECT(kp2lab_run("verify-eigen", cfg, "capi_eigen", 0, 0, &r) == KP2LAB_OK);
  EXPECT(kp2lab_result_passed(r) == 1);
  EXPECT(strstr(kp2lab_result_report(r), "result: PASS") != NULL);
  EXPECT(kp2lab_result_check_count(r) == 7);
  const char* name = NULL;
  int pass = 0;
  EXPECT(kp2lab_result_check(r, 0, &name, NULL, NULL, &pass) == KP2LAB_OK);
  EXPECT(name != NULL && pass == 1);
  EXPECT(kp2lab_result_check(r, 7, NULL, NULL, NULL, NULL) == KP2LAB_INVALID_ARGUMENT);
  kp2lab_result_free(r);

  EXPECT(kp2lab_run("unknown", cfg, "capi_eigen", 0, 0, &r) == KP2LAB_INVALID_ARGUMENT);
  EXPECT(r == NULL);
  kp2lab_config_set(cfg, "perturbation.epsilon", "0.5");
  EXPECT(kp2lab_run("simulate", cfg, "capi_eigen", 1, 5, &r) == KP2LAB_INVALID_ARGUMENT);
  kp2lab_config_free(cfg);
}

int main(void) {
  EXPECT(strcmp(kp2lab_status_name(KP2LAB_CONE_EMPTY), "cone empty") == 0);
  EXPECT(strlen(kp2lab_version()) > 0);
  config_roundtrip();
  fields();
  scalars();
  commands();
  if (failures) {
    fprintf(stderr, "%d failures\n", failures);
    return 1;
  }
  printf("C interface: all checks passed\n");
  return 0;
}
