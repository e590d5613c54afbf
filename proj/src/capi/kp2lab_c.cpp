#include "kp2lab/kp2lab.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "burgers.hpp"
#include "config.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "grid.hpp"
#include "modulation.hpp"
#include "soliton.hpp"

struct kp2lab_config {
  kp2::Config cfg;
};

struct kp2lab_result {
  kp2::CommandResult r;
};

struct kp2lab_field {
  kp2::Field2D f;
};

namespace {

thread_local std::string last_error;

kp2lab_status fail(kp2lab_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

// Maps any exception escaping the core to a status code.
template <class F>
kp2lab_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return KP2LAB_OK;
  } catch (const kp2::Error& e) {
    return fail(static_cast<kp2lab_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(KP2LAB_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KP2LAB_INTERNAL, e.what());
  } catch (...) {
    return fail(KP2LAB_INTERNAL, "unknown failure");
  }
}

kp2lab_status null_arg(const char* what) { return fail(KP2LAB_INVALID_ARGUMENT, std::string(what) + " is NULL"); }

}  // namespace

extern "C" {

const char* kp2lab_version(void) { return "1.0.0"; }

const char* kp2lab_status_name(kp2lab_status s) {
  switch (s) {
    case KP2LAB_OK: return "ok";
    case KP2LAB_INVALID_ARGUMENT: return "invalid argument";
    case KP2LAB_NONZERO_X_MEAN: return "nonzero x-mean";
    case KP2LAB_AMPLITUDE_COLLAPSE: return "amplitude collapse";
    case KP2LAB_NON_FINITE: return "non-finite value";
    case KP2LAB_TAIL_NOT_DECAYED: return "tail not decayed";
    case KP2LAB_SINGULAR_P: return "singular projection";
    case KP2LAB_RESOLUTION_EXCEEDED: return "resolution exceeded";
    case KP2LAB_NO_CREST: return "no crest";
    case KP2LAB_NO_CONVERGENCE: return "no convergence";
    case KP2LAB_CONE_EMPTY: return "cone empty";
    case KP2LAB_IO: return "i/o error";
    case KP2LAB_CHECK_FAILED: return "check failed";
    case KP2LAB_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kp2lab_last_error(void) { return last_error.c_str(); }

kp2lab_status kp2lab_config_new(kp2lab_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new kp2lab_config{}; });
}

kp2lab_status kp2lab_config_load(const char* path, kp2lab_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new kp2lab_config{kp2::Config::load(path)}; });
}

kp2lab_status kp2lab_config_set(kp2lab_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("config");
  if (!key || !value) return null_arg("key or value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

kp2lab_status kp2lab_config_get(const kp2lab_config* cfg, const char* key, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return null_arg("config");
  if (!key) return null_arg("key");
  return guarded([&] {
    const auto v = cfg->cfg.get(key);
    if (!v) throw kp2::InvalidArgument(std::string("no config key '") + key + "'");
    if (needed) *needed = v->size() + 1;
    if (buf && cap > v->size()) std::memcpy(buf, v->c_str(), v->size() + 1);
  });
}

kp2lab_status kp2lab_config_validate(const kp2lab_config* cfg) {
  if (!cfg) return null_arg("config");
  return guarded([&] { (void)kp2::ExperimentConfig::from(cfg->cfg); });
}

void kp2lab_config_free(kp2lab_config* cfg) { delete cfg; }

size_t kp2lab_command_count(void) { return kp2::command_names().size(); }

const char* kp2lab_command_name(size_t index) {
  const auto& n = kp2::command_names();
  return index < n.size() ? n[index].c_str() : nullptr;
}

kp2lab_status kp2lab_run(const char* command, const kp2lab_config* cfg, const char* out_dir, int use_seed,
                         uint64_t seed, kp2lab_result** out) {
  if (!command) return null_arg("command");
  if (!cfg) return null_arg("config");
  if (!out_dir) return null_arg("out_dir");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto e = kp2::ExperimentConfig::from(cfg->cfg);
    auto res = std::make_unique<kp2lab_result>();
    res->r = kp2::run_command(command, e, out_dir, use_seed ? seed : e.seed);
    *out = res.release();
  });
}

int kp2lab_result_passed(const kp2lab_result* r) { return r && r->r.passed() ? 1 : 0; }

const char* kp2lab_result_report(const kp2lab_result* r) { return r ? r->r.report.c_str() : ""; }

size_t kp2lab_result_check_count(const kp2lab_result* r) { return r ? r->r.checks.size() : 0; }

kp2lab_status kp2lab_result_check(const kp2lab_result* r, size_t index, const char** name, double* value,
                                  const char** bound, int* pass) {
  if (!r) return null_arg("result");
  if (index >= r->r.checks.size()) return fail(KP2LAB_INVALID_ARGUMENT, "check index out of range");
  const auto& c = r->r.checks[index];
  if (name) *name = c.name.c_str();
  if (value) *value = c.value;
  if (bound) *bound = c.bound.c_str();
  if (pass) *pass = c.pass ? 1 : 0;
  return KP2LAB_OK;
}

void kp2lab_result_free(kp2lab_result* r) { delete r; }

kp2lab_status kp2lab_field_from_values(size_t nx, size_t ny, double lx, double ly, const double* values,
                                       kp2lab_field** out) {
  if (!values) return null_arg("values");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto g = kp2::Grid2D::make(nx, ny, lx, ly);
    *out = new kp2lab_field{kp2::Field2D::from_values(g, std::vector<double>(values, values + g.size()))};
  });
}

kp2lab_status kp2lab_field_read(const char* path, kp2lab_field** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new kp2lab_field{kp2::read_snapshot(path)}; });
}

kp2lab_status kp2lab_field_write(const kp2lab_field* f, const char* path) {
  if (!f) return null_arg("field");
  if (!path) return null_arg("path");
  return guarded([&] { kp2::write_snapshot(path, f->f); });
}

kp2lab_status kp2lab_field_dims(const kp2lab_field* f, size_t* nx, size_t* ny, double* lx, double* ly) {
  if (!f) return null_arg("field");
  const auto& g = f->f.grid();
  if (nx) *nx = g.nx;
  if (ny) *ny = g.ny;
  if (lx) *lx = g.lx;
  if (ly) *ly = g.ly;
  return KP2LAB_OK;
}

const double* kp2lab_field_data(const kp2lab_field* f) { return f ? f->f.values().data() : nullptr; }

void kp2lab_field_free(kp2lab_field* f) { delete f; }

kp2lab_status kp2lab_soliton(double x, double c, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    if (!(c > 0.0)) throw kp2::InvalidArgument("soliton amplitude must be positive");
    *out = kp2::phi(x, c);
  });
}

kp2lab_status kp2lab_burgers_profile(double t, double y, double m, int sign, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    const kp2::BurgersProfile p{m, sign};
    p.validate();
    *out = kp2::u_B(t, y, p);
  });
}

kp2lab_status kp2lab_propagator(double eta, double t, double out[4]) {
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto m = kp2::exp_tA(eta, t);
    out[0] = m[0][0];
    out[1] = m[0][1];
    out[2] = m[1][0];
    out[3] = m[1][1];
  });
}

}  // extern "C"
