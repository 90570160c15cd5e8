#include "phdf/phantom.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "phdf/error.hpp"
#include "phdf/numeric.hpp"

namespace phdf {

namespace {

void check_gamma(double gamma) {
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::invalid_argument, "gamma must lie strictly inside (0,1)");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Largest n >= from with rule(n) <= x, given rule(from) <= x.
std::uint64_t rule_index_at(const LevelRule& rule, std::uint64_t from, double x) {
  return first_index_where([&](std::uint64_t k) { return rule.level(k) > x; }, from, kMaxIndex) - 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// DrivingSequence

DrivingSequence DrivingSequence::from_plateaus(double gamma, std::vector<Plateau> plateaus,
                                               std::optional<LevelRule> rule) {
  check_gamma(gamma);
  require(!plateaus.empty(), ErrorKind::invalid_argument, "driving sequence needs at least one level");
  for (std::size_t i = 0; i < plateaus.size(); ++i) {
    require(std::isfinite(plateaus[i].level) && plateaus[i].index >= 1, ErrorKind::invalid_argument,
            "driving sequence levels must be finite");
    if (i > 0) {
      require(plateaus[i].index > plateaus[i - 1].index && plateaus[i].level > plateaus[i - 1].level,
              ErrorKind::invalid_argument, "driving sequence levels must be non-decreasing");
    }
  }
  if (rule) {
    const auto last = plateaus.back();
    require(rule->level(last.index + 1) > last.level, ErrorKind::invalid_argument,
            "level rule must continue strictly above the stored prefix");
  }
  DrivingSequence d;
  d.gamma_ = gamma;
  d.plateaus_ = std::move(plateaus);
  d.rule_ = std::move(rule);
  return d;
}

DrivingSequence DrivingSequence::from_levels(double gamma, const std::vector<double>& levels,
                                             std::optional<LevelRule> rule) {
  check_gamma(gamma);
  require(!levels.empty(), ErrorKind::invalid_argument, "driving sequence needs at least one level");
  std::vector<Plateau> plateaus;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(std::isfinite(levels[i]), ErrorKind::invalid_argument, "driving sequence levels must be finite");
    if (i + 1 < levels.size()) {
      require(levels[i] <= levels[i + 1], ErrorKind::invalid_argument,
              "driving sequence levels must be non-decreasing");
      if (levels[i] == levels[i + 1]) continue;
    }
    plateaus.push_back({static_cast<std::uint64_t>(i + 1), levels[i]});
  }
  return from_plateaus(gamma, std::move(plateaus), std::move(rule));
}

DrivingSequence DrivingSequence::from_rule(double gamma, LevelRule rule, std::uint64_t prefix) {
  require(prefix >= 1, ErrorKind::invalid_argument, "rule-backed driving sequence needs a prefix >= 1");
  std::vector<Plateau> plateaus;
  plateaus.reserve(prefix);
  for (std::uint64_t n = 1; n <= prefix; ++n) plateaus.push_back({n, rule.level(n)});
  return from_plateaus(gamma, std::move(plateaus), std::move(rule));
}

double DrivingSequence::level(std::uint64_t n) const {
  require(n >= 1, ErrorKind::invalid_argument, "level index starts at 1");
  if (n <= prefix_size()) {
    auto it = std::lower_bound(plateaus_.begin(), plateaus_.end(), n,
                               [](const Plateau& p, std::uint64_t k) { return p.index < k; });
    return it->level;
  }
  require(rule_.has_value(), ErrorKind::invalid_argument,
          "level " + std::to_string(n) + " lies beyond the stored prefix and no rule is attached");
  return rule_->level(n);
}

std::vector<std::uint64_t> DrivingSequence::plateau_index() const {
  std::vector<std::uint64_t> out;
  out.reserve(plateaus_.size());
  for (const auto& p : plateaus_) out.push_back(p.index);
  return out;
}

double DrivingSequence::sup_level() const { return rule_ ? rule_->sup : plateaus_.back().level; }

std::vector<double> DrivingSequence::materialize(std::uint64_t count) const {
  std::vector<double> out;
  out.reserve(count);
  for (std::uint64_t n = 1; n <= count; ++n) out.push_back(level(n));
  return out;
}

bool DrivingSequence::operator==(const DrivingSequence& other) const {
  if (gamma_ != other.gamma_ || plateaus_ != other.plateaus_) return false;
  if (rule_.has_value() != other.rule_.has_value()) return false;
  return !rule_ || rule_->name == other.rule_->name;
}

// ---------------------------------------------------------------------------
// Continuous phantom

PhantomLaw::PhantomLaw(DrivingSequence driving)
    : driving_(std::move(driving)), log_gamma_(std::log(driving_.gamma())), sup_(driving_.sup_level()) {
  const auto& plateaus = driving_.plateaus();
  require(plateaus.size() >= 2 || driving_.rule(), ErrorKind::degenerate_driving_sequence,
          "all levels of the driving sequence are equal");
  for (const auto& p : plateaus) {
    knot_x_.push_back(p.level);
    knot_g_.push_back(1.0 / static_cast<double>(p.index));
  }
  if (!driving_.rule()) knot_g_.back() = 0.0;
}

double PhantomLaw::g(double x) const {
  if (x >= sup_) return 0.0;
  if (x < knot_x_.front()) return knot_x_.front() - x + knot_g_.front();
  if (x >= knot_x_.back()) {
    // only reachable with a rule: continue with knots (v_n, 1/n)
    const LevelRule& rule = *driving_.rule();
    const std::uint64_t n = rule_index_at(rule, driving_.prefix_size(), x);
    const double lo = rule.level(n);
    const double g_lo = 1.0 / static_cast<double>(n);
    if (lo == x) return g_lo;
    const double hi = rule.level(n + 1);
    if (!std::isfinite(hi) || !(hi > lo)) return g_lo;
    const double g_hi = 1.0 / static_cast<double>(n + 1);
    return g_lo + (g_hi - g_lo) * ((x - lo) / (hi - lo));
  }
  const auto i = static_cast<std::size_t>(std::upper_bound(knot_x_.begin(), knot_x_.end(), x) - knot_x_.begin()) - 1;
  if (knot_x_[i] == x) return knot_g_[i];
  const double t = (x - knot_x_[i]) / (knot_x_[i + 1] - knot_x_[i]);
  return knot_g_[i] + (knot_g_[i + 1] - knot_g_[i]) * t;
}

double PhantomLaw::log_cdf(double x) const { return g(x) * log_gamma_; }
double PhantomLaw::cdf(double x) const { return std::exp(log_cdf(x)); }
double PhantomLaw::sf(double x) const { return -std::expm1(log_cdf(x)); }

std::string PhantomLaw::describe() const {
  std::string s = "phantom(gamma=" + fmt17(driving_.gamma()) +
                  ",plateaus=" + std::to_string(driving_.plateaus().size());
  if (driving_.rule()) s += ",rule=" + driving_.rule()->name;
  return s + ")";
}

PhantomDistFn::PhantomDistFn(DrivingSequence driving)
    : law_(std::make_shared<PhantomLaw>(std::move(driving))) {}

double PhantomDistFn::pow_n(double x, double n) const { return std::exp(n * log_cdf(x)); }

std::string PhantomDistFn::serialize() const {
  const auto& d = driving();
  std::ostringstream out;
  out << "phantom\n";
  out << "gamma " << fmt17(d.gamma()) << "\n";
  out << "rule " << (d.rule() ? d.rule()->name : std::string("none")) << "\n";
  out << "sup " << fmt17(d.sup_level()) << "\n";
  out << "knots " << d.plateaus().size() << "\n";
  for (const auto& p : d.plateaus()) {
    out << fmt17(p.level) << " " << fmt17(g(p.level)) << " " << p.index << "\n";
  }
  return out.str();
}

PhantomDistFn PhantomDistFn::deserialize(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  std::string key;
  double gamma = 0.0;
  std::string rule_name;
  std::string sup_text;
  std::size_t count = 0;
  in >> tag;
  require(tag == "phantom", ErrorKind::invalid_spec, "not a phantom table");
  in >> key >> gamma;
  require(in && key == "gamma", ErrorKind::invalid_spec, "phantom table: missing gamma");
  in >> key >> rule_name;
  require(in && key == "rule", ErrorKind::invalid_spec, "phantom table: missing rule");
  in >> key >> sup_text;
  require(in && key == "sup", ErrorKind::invalid_spec, "phantom table: missing sup");
  in >> key >> count;
  require(in && key == "knots" && count >= 1, ErrorKind::invalid_spec, "phantom table: missing knots");
  std::vector<Plateau> plateaus(count);
  for (auto& p : plateaus) {
    std::string x_text;
    std::string g_text;
    in >> x_text >> g_text >> p.index;
    require(static_cast<bool>(in), ErrorKind::invalid_spec, "phantom table: truncated knot list");
    p.level = std::strtod(x_text.c_str(), nullptr);
  }
  std::optional<LevelRule> rule;
  if (rule_name != "none") rule = level_rule(rule_name);
  return PhantomDistFn(DrivingSequence::from_plateaus(gamma, std::move(plateaus), std::move(rule)));
}

PhantomDistFn build_continuous_phantom(const DrivingSequence& d) { return PhantomDistFn(d); }

// ---------------------------------------------------------------------------
// Jump phantom

JumpPhantomLaw::JumpPhantomLaw(DrivingSequence driving)
    : driving_(std::move(driving)), log_gamma_(std::log(driving_.gamma())) {
  require(driving_.plateaus().size() >= 2 || driving_.rule(), ErrorKind::degenerate_driving_sequence,
          "all levels of the driving sequence are equal");
}

std::optional<std::uint64_t> JumpPhantomLaw::run_index(double x) const {
  if (x >= driving_.sup_level()) return std::nullopt;
  const auto& plateaus = driving_.plateaus();
  if (x < plateaus.front().level) return 0;
  if (x >= plateaus.back().level) return rule_index_at(*driving_.rule(), driving_.prefix_size(), x);
  auto it = std::upper_bound(plateaus.begin(), plateaus.end(), x,
                             [](double v, const Plateau& p) { return v < p.level; });
  return std::prev(it)->index;
}

double JumpPhantomLaw::log_cdf(double x) const {
  const auto n = run_index(x);
  if (!n) return 0.0;
  if (*n == 0) return -kInf;
  return log_gamma_ / static_cast<double>(*n);
}

double JumpPhantomLaw::cdf(double x) const { return std::exp(log_cdf(x)); }
double JumpPhantomLaw::sf(double x) const { return -std::expm1(log_cdf(x)); }

double JumpPhantomLaw::atom_mass(double x) const {
  if (!std::isfinite(x)) return 0.0;
  return cdf(x) - cdf(std::nextafter(x, -kInf));
}

double JumpPhantomLaw::left_end() const { return driving_.plateaus().front().level; }

std::string JumpPhantomLaw::describe() const {
  return "jump-phantom(gamma=" + fmt17(driving_.gamma()) +
         ",plateaus=" + std::to_string(driving_.plateaus().size()) + ")";
}

JumpPhantom::JumpPhantom(DrivingSequence driving)
    : law_(std::make_shared<JumpPhantomLaw>(std::move(driving))) {}

double JumpPhantom::pow_n(double x, double n) const {
  const double lc = law_->log_cdf(x);
  if (lc == -kInf) return 0.0;
  return std::exp(n * lc);
}

JumpPhantom build_jump_phantom(const DrivingSequence& d) { return JumpPhantom(d); }

double phantom_gap(const PhantomDistFn& continuous, const JumpPhantom& jump, double n,
                   const LevelGrid& grid) {
  require(continuous.driving() == jump.driving(), ErrorKind::invalid_argument,
          "phantoms built from different driving sequences");
  require(!grid.levels.empty(), ErrorKind::invalid_argument, "empty level grid");
  double worst = 0.0;
  for (double x : grid.levels) worst = std::max(worst, std::fabs(continuous.pow_n(x, n) - jump.pow_n(x, n)));
  return worst;
}

// ---------------------------------------------------------------------------
// Verification and extremal index

VerifyReport verify_phantom(const DistFn& g, const MaxLawEstimate& maxlaw, double tolerance, const PowerSe& phantom_se) {
  require(!maxlaw.tables.empty(), ErrorKind::invalid_argument, "maximum law has no tables");
  VerifyReport report;
  report.tolerance = tolerance;
  report.pass = true;
  const double replicas = static_cast<double>(maxlaw.replicas);
  for (const auto& table : maxlaw.tables) {
    require(table.levels.size() == table.p_hat.size() && table.levels.size() == table.se.size(),
            ErrorKind::invalid_argument, "malformed maximum law table");
    VerifyRow row;
    row.n = table.n;
    row.levels_in_band = static_cast<std::size_t>(std::count_if(
        table.p_hat.begin(), table.p_hat.end(), [](double p) { return p >= 0.01 && p <= 0.99; }));
    require(row.levels_in_band >= 16, ErrorKind::insufficient_grid,
            "n=" + std::to_string(table.n) + ": only " + std::to_string(row.levels_in_band) +
                " levels with P(M_n <= x) in [0.01, 0.99]");
    row.worst_excess = -kInf;
    for (std::size_t i = 0; i < table.levels.size(); ++i) {
      const double model = g.pow_n(table.levels[i], static_cast<double>(table.n));
      const double d = std::fabs(table.p_hat[i] - model);
      const double se_model = replicas > 0.0 ? std::sqrt(model * (1.0 - model) / replicas) : 0.0;
      double se_d = std::max(table.se[i], se_model);
      if (phantom_se) se_d = std::hypot(se_d, phantom_se(table.levels[i], static_cast<double>(table.n)));
      const double excess = d - 3.0 * se_d;
      row.worst_excess = std::max(row.worst_excess, excess);
      if (d > row.gap) {
        row.gap = d;
        row.level = table.levels[i];
        row.se = table.se[i];
      }
    }
    row.pass = row.worst_excess <= tolerance;
    report.pass = report.pass && row.pass;
    report.sup_gap = std::max(report.sup_gap, row.gap);
    report.per_n.push_back(row);
  }
  return report;
}

double extremal_index_from_gammas(double gamma, double gamma_prime) {
  check_gamma(gamma);
  require(gamma_prime >= 0.0 && gamma_prime < 1.0, ErrorKind::invalid_argument,
          "gamma' must lie in [0,1)");
  if (gamma_prime == 0.0) return 0.0;
  return std::log(gamma) / std::log(gamma_prime);
}

ThetaTrack extremal_index_tail_ratio(const DistFn& g, const DistFn& f, const ProbePolicy& probe) {
  require(g.right_end() == f.right_end(), ErrorKind::invalid_argument,
          "extremal index tail ratio needs a common right end point");
  ThetaTrack out;
  for (double x : probe_levels(f, probe)) {
    const double s = f.sf(x);
    if (!(s > 0.0)) continue;
    out.probe_levels.push_back(x);
    out.ratio_track.push_back(g.sf(x) / s);
  }
  out.verdict = "divergent";
  if (out.ratio_track.empty()) return out;
  const std::size_t start = out.ratio_track.size() - std::max<std::size_t>(1, out.ratio_track.size() / 4);
  const std::span<const double> tail(out.ratio_track.data() + start, out.ratio_track.size() - start);
  const double mean = std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
  const bool settled = std::all_of(tail.begin(), tail.end(),
                                   [&](double r) { return std::fabs(r - mean) <= probe.epsilon; });
  if (settled && mean >= -probe.epsilon && mean <= 1.0 + probe.epsilon) {
    out.limit = std::clamp(mean, 0.0, 1.0);
    out.verdict = "converged";
  }
  return out;
}

}  // namespace phdf
