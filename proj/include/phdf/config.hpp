#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "phdf/io.hpp"

namespace phdf {

/// Value parsers shared by the config and list-valued keys; `key` only
/// labels the error message.
double parse_real(const std::string& key, const std::string& value);
std::uint64_t parse_count(const std::string& key, const std::string& value);
bool parse_flag(const std::string& key, const std::string& value);

/// Flat key-value run configuration with one INI section per subcommand.
/// Every key has a default; files may only override known keys.
class RunConfig {
 public:
  static RunConfig defaults();
  /// Defaults overridden by an INI file.
  static RunConfig load(const std::filesystem::path& file);
  static RunConfig parse(const std::string& ini_text);

  /// "section.key"; the key must exist.
  void set(const std::string& key, const std::string& value);

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  /// Comma-separated block sizes, e.g. "1000,10000".
  std::vector<std::uint64_t> sizes(const std::string& key) const;

  std::string to_ini() const;
  io::Json to_json() const;

 private:
  boost::property_tree::ptree tree_;
};

}  // namespace phdf
