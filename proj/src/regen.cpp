#include <algorithm>
#include <cmath>
#include <numeric>

#include "phdf/error.hpp"
#include "phdf/estimate.hpp"

namespace phdf {

RegenStats decompose_regenerative(const SamplePath& path) {
  const auto& marks = path.regeneration_marks;
  require(!marks.empty(), ErrorKind::not_regenerative, "path of '" + path.spec + "' has no regeneration marks");
  RegenStats s;
  const auto first = static_cast<std::size_t>(marks.front());
  s.W0 = static_cast<double>(first);
  s.Y0 = first > 0 ? *std::max_element(path.values.begin(), path.values.begin() + static_cast<std::ptrdiff_t>(first)) : 0.0;
  for (std::size_t j = 1; j < marks.size(); ++j) {
    const auto a = static_cast<std::ptrdiff_t>(marks[j - 1]);
    const auto b = static_cast<std::ptrdiff_t>(marks[j]);
    s.W.push_back(static_cast<double>(b - a));
    s.Y.push_back(*std::max_element(path.values.begin() + a, path.values.begin() + b));
  }
  s.cycles = s.W.size();
  if (s.cycles > 0) {
    const double J = static_cast<double>(s.cycles);
    s.mu_hat = std::accumulate(s.W.begin(), s.W.end(), 0.0) / J;
    double ss = 0.0;
    for (double w : s.W) ss += (w - s.mu_hat) * (w - s.mu_hat);
    s.mu_se = s.cycles > 1 ? std::sqrt(ss / (J - 1.0) / J) : 0.0;
  }
  return s;
}

void zero_cycle_diagnostic(const ProcessSpec& spec, const std::vector<std::uint64_t>& n_list, std::size_t replicas,
                           std::uint64_t seed, unsigned workers, RegenStats& stats) {
  require(!n_list.empty(), ErrorKind::invalid_argument, "empty n list");
  require(replicas >= kMinReplicas, ErrorKind::invalid_argument,
          "at least " + std::to_string(kMinReplicas) + " replicas are required");
  std::vector<std::uint64_t> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  const std::uint64_t need = ns.back();
  std::vector<std::vector<char>> hit(replicas);
  const std::uint64_t base = derive_seed(seed, streams::regen);
  parallel_for(replicas, workers, [&](std::size_t r) {
    std::uint64_t length = std::max<std::uint64_t>(1000, 8 * need);
    RegenStats s;
    for (;;) {
      // paths are pure functions of (seed, length), so a longer path extends the shorter one
      const SamplePath path = generate(spec, base + r, length);
      if (path.regeneration_marks.size() > need) {
        s = decompose_regenerative(path);
        break;
      }
      require(length < (std::uint64_t{1} << 40), ErrorKind::insufficient_data, "too few regeneration cycles");
      length *= 2;
    }
    auto& row = hit[r];
    double running = -kInf;
    std::size_t j = 0;
    for (auto n : ns) {
      for (; j < n; ++j) running = std::max(running, s.Y[j]);
      row.push_back(s.Y0 > running ? 1 : 0);
    }
  });
  stats.zero_cycle_n = ns;
  stats.zero_cycle_diag.clear();
  stats.zero_cycle_se.clear();
  const double R = static_cast<double>(replicas);
  for (std::size_t i = 0; i < ns.size(); ++i) {
    double c = 0.0;
    for (const auto& row : hit) c += row[i];
    const double p = c / R;
    stats.zero_cycle_diag.push_back(p);
    stats.zero_cycle_se.push_back(std::sqrt(p * (1.0 - p) / R));
  }
}

RootzenLaw::RootzenLaw(std::vector<double> cycle_maxima, double mu, bool smooth, double mu_se)
    : mu_(mu), smooth_(smooth), mu_se_(mu_se), cycles_(static_cast<double>(cycle_maxima.size())) {
  require(!cycle_maxima.empty(), ErrorKind::insufficient_data, "no cycle maxima");
  require(mu > 0.0 && std::isfinite(mu), ErrorKind::invalid_argument, "mean cycle length must be positive");
  std::sort(cycle_maxima.begin(), cycle_maxima.end());
  const double N = static_cast<double>(cycle_maxima.size());
  for (std::size_t i = 0; i < cycle_maxima.size(); ++i) {
    if (i + 1 < cycle_maxima.size() && cycle_maxima[i + 1] == cycle_maxima[i]) continue;
    sorted_.push_back(cycle_maxima[i]);
    ecdf_.push_back(static_cast<double>(i + 1) / N);
  }
}

double RootzenLaw::cycle_cdf(double x) const {
  if (x < sorted_.front()) return 0.0;
  if (x >= sorted_.back()) return 1.0;
  const auto i = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin()) - 1;
  if (!smooth_ || x == sorted_[i]) return ecdf_[i];
  const double t = (x - sorted_[i]) / (sorted_[i + 1] - sorted_[i]);
  return ecdf_[i] + (ecdf_[i + 1] - ecdf_[i]) * t;
}

double RootzenLaw::log_cdf(double x) const {
  const double h = cycle_cdf(x);
  return h > 0.0 ? std::log(h) / mu_ : -kInf;
}

double RootzenLaw::cdf(double x) const { return std::exp(log_cdf(x)); }

double RootzenLaw::sf(double x) const { return -std::expm1(log_cdf(x)); }

double RootzenLaw::power_se(double x, double n) const {
  const double h = cycle_cdf(x);
  if (h <= 0.0 || h >= 1.0) return 0.0;
  const double k = n / mu_;
  const double gn = std::exp(k * std::log(h));
  const double from_h = k * gn * std::sqrt((1.0 - h) / (h * cycles_));
  const double from_mu = k / mu_ * std::fabs(std::log(h)) * gn * mu_se_;
  return std::hypot(from_h, from_mu);
}

double RootzenLaw::atom_mass(double x) const {
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  if (it == sorted_.end() || *it != x) return 0.0;
  const auto i = static_cast<std::size_t>(it - sorted_.begin());
  if (i == 0) return cdf(x);
  if (smooth_) return 0.0;
  return cdf(x) - std::exp(std::log(ecdf_[i - 1]) / mu_);
}

std::string RootzenLaw::describe() const {
  return std::string(smooth_ ? "rootzen-smooth" : "rootzen-raw") + "(cycles=" + std::to_string(ecdf_.size()) +
         ",mu=" + std::to_string(mu_) + ")";
}

DistFn rootzen_phantom(const RegenStats& stats, bool smooth) {
  require(stats.cycles >= kMinCycles, ErrorKind::insufficient_data,
          "need at least " + std::to_string(kMinCycles) + " complete cycles, got " + std::to_string(stats.cycles));
  return DistFn(std::make_shared<RootzenLaw>(stats.Y, stats.mu_hat, smooth, stats.mu_se));
}

}  // namespace phdf
