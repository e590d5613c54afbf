// kp2lab <command> --config <path> [--out <dir>] [--seed N] [--set section.key=value ...]
// Exit status: 0 all checks pass, 1 some check failed, 2 usage or config error, 3 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kp2lab/kp2lab.h"

namespace {

enum Exit { kPass = 0, kCheckFailed = 1, kUsage = 2, kRuntime = 3 };

struct ConfigHandle {
  kp2lab_config* p = nullptr;
  ~ConfigHandle() { kp2lab_config_free(p); }
};
struct ResultHandle {
  kp2lab_result* p = nullptr;
  ~ResultHandle() { kp2lab_result_free(p); }
};

bool config_error(kp2lab_status s) { return s == KP2LAB_INVALID_ARGUMENT || s == KP2LAB_IO; }

int report_failure(const char* stage, kp2lab_status s, int code) {
  std::fprintf(stderr, "kp2lab: %s: %s: %s\n", stage, kp2lab_status_name(s), kp2lab_last_error());
  return code;
}

int run(const std::string& command, const std::string& config, const std::string& out,
        const std::optional<std::uint64_t>& seed, const std::vector<std::string>& overrides, bool quiet) {
  ConfigHandle cfg;
  if (auto s = kp2lab_config_load(config.c_str(), &cfg.p); s != KP2LAB_OK) return report_failure("config", s, kUsage);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "kp2lab: --set expects section.key=value, got '%s'\n", kv.c_str());
      return kUsage;
    }
    kp2lab_config_set(cfg.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
  }
  if (auto s = kp2lab_config_validate(cfg.p); s != KP2LAB_OK) return report_failure("config", s, kUsage);

  ResultHandle res;
  const auto s = kp2lab_run(command.c_str(), cfg.p, out.c_str(), seed.has_value(), seed.value_or(0), &res.p);
  if (s != KP2LAB_OK) return report_failure(command.c_str(), s, config_error(s) && s != KP2LAB_IO ? kUsage : kRuntime);
  if (!quiet) std::fputs(kp2lab_result_report(res.p), stdout);
  return kp2lab_result_passed(res.p) ? kPass : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line-soliton stability experiments for the KP-II equation"};
  app.set_version_flag("--version", kp2lab_version());
  app.require_subcommand(1);

  std::string config, out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  bool quiet = false;
  std::string chosen;

  for (std::size_t i = 0; i < kp2lab_command_count(); ++i) {
    const std::string name = kp2lab_command_name(i);
    auto* sub = app.add_subcommand(name, "run the " + name + " suite");
    sub->add_option("--config,-c", config, "INI config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out,-o", out, "output directory (default out/<command>)");
    sub->add_option("--seed", seed, "override experiment.seed");
    sub->add_option("--set", overrides, "override a config value, section.key=value");
    sub->add_flag("--quiet,-q", quiet, "do not print the report");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kUsage;
  }
  if (out.empty()) out = "out/" + chosen;
  return run(chosen, config, out, seed, overrides, quiet);
}
