#include "phdf/config.hpp"

#include <cmath>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "phdf/error.hpp"

namespace phdf {

namespace pt = boost::property_tree;

namespace {

constexpr const char* kDefaults = R"([run]
process = iid(exp(1))
gamma = 0.36787944117144233
seed = 20240611
replicas = 1000
workers = 1
exact = false
out = phdf_out

[simulate]
length = 100000

[phantom-fit]
horizon = 100000
verify_n = 1000,10000
tolerance = 0.05
theta_n = 10,100,1000,10000
bt_T = 2
bt_n = 100,1000

[verify]
phantom = phantom.txt
n = 1000,10000
tolerance = 0.05

[bt-check]
T = 2
n = 100,1000,10000

[regen]
length = 1000000
verify_n = 1000,10000
zero_cycle_n = 1,10,100
smooth = true
tolerance = 0.05
band_quantile = 0.99

[rates]
kind = theta
beta = 4
b = 1
case = none
case_param = 0
delta0 = false
delta_xi =

[extremal-index]
n = 10,100,1000,10000

[acceptance]
tolerance_scale = 1
only =
)";

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& what) {
  fail(ErrorKind::invalid_argument, "config: " + key + " = '" + value + "' is not " + what);
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  std::istringstream in(kDefaults);
  pt::read_ini(in, c.tree_);
  return c;
}

RunConfig RunConfig::parse(const std::string& ini_text) {
  RunConfig c = defaults();
  pt::ptree user;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, user);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::invalid_argument, std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : user) {
    require(c.tree_.get_child_optional(section).has_value(), ErrorKind::invalid_argument,
            "config: unknown section [" + section + "]");
    for (const auto& [key, value] : body) c.set(section + "." + key, value.data());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  require(std::filesystem::exists(file), ErrorKind::invalid_argument, "config: no such file " + file.string());
  return parse(io::read_text(file));
}

void RunConfig::set(const std::string& key, const std::string& value) {
  require(tree_.get_optional<std::string>(key).has_value(), ErrorKind::invalid_argument,
          "config: unknown key '" + key + "'");
  tree_.put(key, value);
}

std::string RunConfig::text(const std::string& key) const {
  const auto v = tree_.get_optional<std::string>(key);
  require(v.has_value(), ErrorKind::invalid_argument, "config: unknown key '" + key + "'");
  return *v;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a number");
  }
  if (used != v.size() || std::isnan(x)) bad_value(key, v, "a number");
  return x;
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  if (v.empty() || v.front() == '-') bad_value(key, v, "a non-negative integer");
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    bad_value(key, v, "a non-negative integer");
  }
  if (used != v.size()) bad_value(key, v, "a non-negative integer");
  return x;
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

double RunConfig::real(const std::string& key) const { return parse_real(key, text(key)); }
std::uint64_t RunConfig::count(const std::string& key) const { return parse_count(key, text(key)); }
bool RunConfig::flag(const std::string& key) const { return parse_flag(key, text(key)); }

std::vector<std::uint64_t> RunConfig::sizes(const std::string& key) const {
  const std::string v = text(key);
  std::vector<std::uint64_t> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::uint64_t x = parse_count(key, item);
    if (x == 0) bad_value(key, v, "a comma-separated list of block sizes");
    out.push_back(x);
  }
  if (out.empty()) bad_value(key, v, "a comma-separated list of block sizes");
  return out;
}

std::string RunConfig::to_ini() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, body] : tree_) {
    if (!first) out << "\n";
    first = false;
    out << "[" << section << "]\n";
    for (const auto& [key, value] : body) out << key << " = " << value.data() << "\n";
  }
  return out.str();
}

io::Json RunConfig::to_json() const {
  io::Json doc = io::Json::object();
  for (const auto& [section, body] : tree_) {
    io::Json s = io::Json::object();
    for (const auto& [key, value] : body) s[key] = value.data();
    doc[section] = s;
  }
  return doc;
}

}  // namespace phdf
