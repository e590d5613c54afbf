#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kp2 {

/// Flat `section.key -> value` store read from an INI-style file:
///
///   [grid]
///   nx = 512
///
/// Keys outside any section are stored without a prefix. Lookups are typed;
/// a value that fails to parse raises InvalidArgument naming the key.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// Throws InvalidArgument for the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;
  /// Round-trippable INI text.
  std::string to_ini() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace kp2
