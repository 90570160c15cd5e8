#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "phdf/maxlaw.hpp"
#include "phdf/processes.hpp"

namespace phdf::io {

using Json = nlohmann::ordered_json;

/// %.17g, so every double written round-trips exactly.
std::string fmt(double v);

/// 64-bit FNV-1a of the canonical spec text, as 16 hex digits.
std::string spec_hash(const std::string& canonical_spec);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);
void write_csv(const std::filesystem::path& file, const CsvTable& table);
void write_json(const std::filesystem::path& file, const Json& doc);

/// Columnar path export: a "# key=value" header (spec_hash, spec, seed,
/// length, burn_in), a "value" column, and regeneration marks in a sibling
/// "<stem>.marks.csv" file when the path has any.
void write_path(const std::filesystem::path& file, const SamplePath& path);
SamplePath read_path(const std::filesystem::path& file);

CsvTable maxlaw_table(const MaxLawEstimate& est);

}  // namespace phdf::io
