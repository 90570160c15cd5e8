#include "phdf/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "phdf/error.hpp"

namespace phdf::io {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string spec_hash(const std::string& canonical_spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_spec) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write " + file.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::io, "write failed for " + file.string());
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const std::filesystem::path& file, const CsvTable& table) {
  std::string text;
  auto line = [&text](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += cells[i];
    }
    text += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) line(row);
  write_text(file, text);
}

void write_json(const std::filesystem::path& file, const Json& doc) { write_text(file, doc.dump(2) + "\n"); }

void write_path(const std::filesystem::path& file, const SamplePath& path) {
  std::string text;
  text += "# spec_hash=" + spec_hash(path.spec) + "\n";
  text += "# spec=" + path.spec + "\n";
  text += "# seed=" + std::to_string(path.seed) + "\n";
  text += "# length=" + std::to_string(path.values.size()) + "\n";
  text += "# burn_in=" + std::to_string(path.burn_in) + "\n";
  text += "value\n";
  for (double v : path.values) text += fmt(v) + "\n";
  write_text(file, text);
  if (!path.regeneration_marks.empty()) {
    std::string marks = "index\n";
    for (auto m : path.regeneration_marks) marks += std::to_string(m) + "\n";
    auto marks_file = file;
    marks_file.replace_extension(".marks.csv");
    write_text(marks_file, marks);
  }
}

SamplePath read_path(const std::filesystem::path& file) {
  std::istringstream in(read_text(file));
  SamplePath p;
  std::string line;
  std::string hash;
  bool header_done = false;
  while (std::getline(in, line)) {
    if (!header_done && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      require(eq != std::string::npos, ErrorKind::io, "malformed header line in " + file.string());
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "spec_hash") hash = value;
      if (key == "spec") p.spec = value;
      if (key == "seed") p.seed = std::stoull(value);
      if (key == "burn_in") p.burn_in = std::stoull(value);
      continue;
    }
    if (!header_done) {
      require(line == "value", ErrorKind::io, "missing value column in " + file.string());
      header_done = true;
      continue;
    }
    if (!line.empty()) p.values.push_back(std::stod(line));
  }
  require(hash == spec_hash(p.spec), ErrorKind::io, "spec hash mismatch in " + file.string());
  auto marks_file = file;
  marks_file.replace_extension(".marks.csv");
  if (std::filesystem::exists(marks_file)) {
    std::istringstream marks(read_text(marks_file));
    std::getline(marks, line);
    while (std::getline(marks, line)) {
      if (!line.empty()) p.regeneration_marks.push_back(std::stoull(line));
    }
  }
  return p;
}

CsvTable maxlaw_table(const MaxLawEstimate& est) {
  CsvTable t;
  t.header = {"n", "level", "p_hat", "se"};
  for (const auto& tab : est.tables) {
    for (std::size_t i = 0; i < tab.levels.size(); ++i) {
      t.add({std::to_string(tab.n), fmt(tab.levels[i]), fmt(tab.p_hat[i]), fmt(tab.se[i])});
    }
  }
  return t;
}

}  // namespace phdf::io
