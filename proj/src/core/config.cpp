#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <sstream>

#include "error.hpp"

namespace kp2 {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  const std::string s = trim(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "' is not a number: '" + v + "'");
  }
  if (used != s.size()) throw InvalidArgument("config key '" + key + "' is not a number: '" + v + "'");
  return out;
}

Config from_tree(const boost::property_tree::ptree& tree) {
  Config c;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      c.set(name, node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) c.set(name + "." + key, leaf.data());
  }
  return c;
}

}  // namespace

Config Config::load(const std::filesystem::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    if (!std::filesystem::exists(path)) throw IoError("cannot open config " + path.string());
    throw InvalidArgument("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return from_tree(tree);
}

Config Config::parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream is(text);
  try {
    boost::property_tree::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument("config: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return from_tree(tree);
}

void Config::set(const std::string& key, const std::string& value) { entries_[trim(key)] = trim(value); }

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(key, *v) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const std::string s = trim(*v);
  long out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw InvalidArgument("config key '" + key + "' is not an integer: '" + *v + "'");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::string s = trim(*v);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw InvalidArgument("config key '" + key + "' is not a boolean: '" + *v + "'");
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(key, item));
  }
  if (out.empty()) throw InvalidArgument("config key '" + key + "' holds an empty list");
  return out;
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : entries_) {
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw InvalidArgument("unknown config key '" + k + "'");
  }
}

std::string Config::to_ini() const {
  std::ostringstream os;
  std::string section;
  bool first = true;
  for (const auto& [k, v] : entries_) {
    if (k.find('.') == std::string::npos) os << k << " = " << v << '\n';
  }
  for (const auto& [k, v] : entries_) {
    const auto dot = k.find('.');
    if (dot == std::string::npos) continue;
    const std::string s = k.substr(0, dot);
    if (first || s != section) {
      os << (first ? "" : "\n") << '[' << s << "]\n";
      section = s;
      first = false;
    }
    os << k.substr(dot + 1) << " = " << v << '\n';
  }
  return os.str();
}

}  // namespace kp2
