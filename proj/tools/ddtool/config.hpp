#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ddtool {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plain `key = value` text. Blank lines and lines starting with '#' are
/// ignored. The first entry must be `format = <name>/<version>`; anything else
/// is rejected so configs never drift silently between releases.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string_view format, int version);
  static KeyValueConfig load(const std::filesystem::path& path, std::string_view format, int version);

  bool has(const std::string& key) const { return entries_.contains(key); }
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  /// Comma-separated list; empty items are rejected.
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::uint64_t> get_seeds(const std::string& key) const;

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(std::initializer_list<std::string_view> known) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }
  nlohmann::json snapshot() const;

 private:
  std::map<std::string, std::string> entries_;
  std::map<std::string, int> lines_;
};

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::vector<std::string> split_list(std::string_view text);

}  // namespace ddtool
