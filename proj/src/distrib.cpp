#include <algorithm>
#include <cmath>
#include <limits>

#include "phdf/distrib.hpp"
#include "phdf/error.hpp"

namespace phdf {

std::vector<double> probe_levels(const DistFn& f, const ProbePolicy& probe) {
  std::vector<double> levels;
  if (!probe.explicit_levels.empty()) {
    levels = probe.explicit_levels;
    require(levels.size() >= kMinProbeLevels, ErrorKind::invalid_argument,
            "probe grid needs at least " + std::to_string(kMinProbeLevels) + " levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      require(!std::isnan(levels[i]), ErrorKind::invalid_argument, "probe level is NaN");
      if (i > 0) {
        require(levels[i] >= levels[i - 1], ErrorKind::invalid_argument, "probe grid not ascending");
      }
    }
    return levels;
  }
  require(probe.depth >= static_cast<int>(kMinProbeLevels), ErrorKind::invalid_argument,
          "probe depth must be at least " + std::to_string(kMinProbeLevels));
  levels.reserve(static_cast<std::size_t>(probe.depth));
  for (int j = 1; j <= probe.depth; ++j) levels.push_back(f.isf(std::ldexp(1.0, -j)));
  return levels;
}

bool last_quarter_within(std::span<const double> track, double target, double eps) {
  if (track.empty()) return false;
  const std::size_t start = track.size() - std::max<std::size_t>(1, track.size() / 4);
  for (std::size_t i = start; i < track.size(); ++i) {
    if (!(std::fabs(track[i] - target) <= eps)) return false;
  }
  return true;
}

RegularityReport regularity_check(const DistFn& f, const ProbePolicy& probe) {
  const double right = f.right_end();
  require(right != -kInf, ErrorKind::degenerate_distribution, "right end point is -inf");
  RegularityReport report;
  report.mass_at_right_end = std::isfinite(right) ? f.atom_mass(right) : 0.0;
  for (double x : probe_levels(f, probe)) {
    const double s = f.sf(x);
    if (!(s > 0.0)) continue;
    report.probe_levels.push_back(x);
    report.ratio_track.push_back(f.sf_left(x) / s);
  }
  report.is_regular =
      report.mass_at_right_end == 0.0 && last_quarter_within(report.ratio_track, 1.0, probe.epsilon);
  return report;
}

std::string_view to_string(TailVerdict verdict) {
  switch (verdict) {
    case TailVerdict::equivalent: return "equivalent";
    case TailVerdict::ratio_to_zero: return "ratio->0";
    case TailVerdict::ratio_to_infinity: return "ratio->inf";
    case TailVerdict::divergent: return "divergent";
    case TailVerdict::mismatched_right_ends: return "mismatched-right-ends";
  }
  return "divergent";
}

TailVerdict classify_ratio_track(std::span<const double> track, double epsilon) {
  if (last_quarter_within(track, 1.0, epsilon)) return TailVerdict::equivalent;
  if (track.empty()) return TailVerdict::divergent;
  const std::size_t start = track.size() - std::max<std::size_t>(1, track.size() / 4);
  const auto tail = track.subspan(start);
  if (std::all_of(tail.begin(), tail.end(), [&](double r) { return r <= epsilon; }))
    return TailVerdict::ratio_to_zero;
  if (std::all_of(tail.begin(), tail.end(), [&](double r) { return r >= 1.0 / epsilon; }))
    return TailVerdict::ratio_to_infinity;
  return TailVerdict::divergent;
}

TailComparison strict_tail_equivalence(const DistFn& g, const DistFn& h, const ProbePolicy& probe) {
  TailComparison out;
  if (g.right_end() != h.right_end()) {
    out.verdict = TailVerdict::mismatched_right_ends;
    return out;
  }
  std::vector<double> levels = probe_levels(g, probe);
  if (probe.explicit_levels.empty()) {
    auto more = probe_levels(h, probe);
    levels.insert(levels.end(), more.begin(), more.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }
  for (double x : levels) {
    const double sg = g.sf(x);
    const double sh = h.sf(x);
    if (!(sg > 0.0) || !(sh > 0.0)) continue;
    out.probe_levels.push_back(x);
    out.ratio_track.push_back(sh / sg);
  }
  out.verdict = classify_ratio_track(out.ratio_track, probe.epsilon);
  return out;
}

namespace {

void append_power_levels(const DistFn& f, double n, std::size_t points, std::vector<double>& out) {
  // logistic spacing in P = F^n over (1e-6, 1 - 1e-6)
  const double span = 13.8;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(points - 1);
    const double log_p = -std::log1p(std::exp(-t));
    const double tail = -std::expm1(log_p / n);
    const double x = f.isf(tail);
    if (std::isfinite(x)) out.push_back(x);
  }
}

}  // namespace

LevelGrid power_grid(const DistFn& g, const DistFn& h, double n, std::size_t points) {
  require(n > 0.0, ErrorKind::invalid_argument, "power_grid: n must be positive");
  require(points >= 2, ErrorKind::invalid_argument, "power_grid: need at least 2 points");
  LevelGrid grid;
  append_power_levels(g, n, points, grid.levels);
  append_power_levels(h, n, points, grid.levels);
  const double low = g.quantile(1e-3 / n);
  if (std::isfinite(low)) grid.levels.push_back(low);
  std::sort(grid.levels.begin(), grid.levels.end());
  grid.levels.erase(std::unique(grid.levels.begin(), grid.levels.end()), grid.levels.end());
  return grid;
}

double sup_power_distance(const DistFn& g, const DistFn& h, double n, const LevelGrid& grid) {
  require(!grid.levels.empty(), ErrorKind::invalid_argument, "empty level grid");
  require(n > 0.0, ErrorKind::invalid_argument, "n must be positive");
  double worst = 0.0;
  for (double x : grid.levels) worst = std::max(worst, std::fabs(g.pow_n(x, n) - h.pow_n(x, n)));
  return worst;
}

DeltaConditionResult delta_condition(const DistFn& f, double xi, const ProbePolicy& probe) {
  require(xi >= 0.0 && std::isfinite(xi), ErrorKind::invalid_argument, "xi must be >= 0");
  DeltaConditionResult out;
  if (f.atom_model() == AtomModel::continuous) return out;
  double sup = 0.0;
  for (double x : probe_levels(f, probe)) {
    if (!out.atoms.empty() && x <= out.atoms.back()) continue;
    const double mass = f.atom_mass(x);
    const double s = f.sf(x);
    if (!(mass > 0.0) || !(s > 0.0)) continue;
    const double r = mass / std::pow(s, 1.0 + xi);
    out.atoms.push_back(x);
    out.ratio_track.push_back(r);
    if (s >= probe.truncation_tail) sup = std::max(sup, r);
  }
  if (out.atoms.empty()) return out;
  if (xi == 0.0) {
    out.sup_value = sup;
    out.holds = last_quarter_within(out.ratio_track, 0.0, probe.epsilon);
  } else {
    out.holds = sup <= probe.cap;
    out.sup_value = out.holds ? sup : kInf;
  }
  return out;
}

ConcentrationResult concentration_exponent(const DistFn& f, double b, const ProbePolicy& probe) {
  require(b > 0.0 && b <= 1.0, ErrorKind::invalid_argument, "concentration exponent b must lie in (0,1]");
  std::vector<double> xs;
  for (int k = 0; k <= 64; ++k) xs.push_back(f.quantile(k / 64.0));
  for (int j = 1; j <= probe.depth; ++j) {
    xs.push_back(f.quantile(std::ldexp(1.0, -j)));
    xs.push_back(f.isf(std::ldexp(1.0, -j)));
  }
  std::vector<double> atoms;
  if (f.atom_model() != AtomModel::continuous) {
    for (double x : xs) {
      if (std::isfinite(x) && f.atom_mass(x) > 0.0) atoms.push_back(x);
    }
  }
  const double median = f.quantile(0.5);
  double worst = 0.0;
  auto visit = [&](double x, double u) {
    if (!std::isfinite(x)) return;
    const double x2 = x + u;
    const double step = x2 - x;
    if (!(step > 0.0)) return;
    const bool upper = x >= median;
    const double a = upper ? f.sf(x2) : f.cdf(x);
    const double c = upper ? f.sf(x) : f.cdf(x2);
    const double mass = c - a;
    // differences at the rounding level of the values carry no information
    if (mass > 64.0 * std::numeric_limits<double>::epsilon() * std::max(a, c))
      worst = std::max(worst, mass / std::pow(step, b));
  };
  for (int i = -60; i <= 10; ++i) {
    const double u = std::ldexp(1.0, i);
    for (double x : xs) visit(x, u);
    for (double a : atoms) visit(a - 0.5 * u, u);
  }
  ConcentrationResult out;
  out.satisfied = worst <= probe.cap;
  out.b_hat = out.satisfied ? worst : kInf;
  return out;
}

}  // namespace phdf
