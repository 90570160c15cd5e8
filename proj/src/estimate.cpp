#include "phdf/estimate.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "phdf/error.hpp"
#include "phdf/numeric.hpp"

namespace phdf {

namespace {

std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void require_replicas(std::size_t replicas) {
  require(replicas >= kMinReplicas, ErrorKind::invalid_argument,
          "at least " + std::to_string(kMinReplicas) + " replicas are required, got " + std::to_string(replicas));
}

bool use_exact(const ProcessSpec& spec, const EstimateOptions& opts) { return opts.exact && has_exact_max_law(spec); }

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() > 1 ? v.size() - 1 : 1));
}

double binomial_se(double p, std::size_t replicas) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(replicas));
}

// Maxima over half-open index intervals [start, end) of one path.
std::vector<double> interval_maxima(const ProcessSpec& spec, std::uint64_t seed,
                                    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& intervals) {
  std::set<std::uint64_t> cuts;
  for (const auto& [a, b] : intervals) {
    cuts.insert(a);
    cuts.insert(b);
  }
  const std::vector<std::uint64_t> bounds(cuts.begin(), cuts.end());
  const SamplePath path = generate(spec, seed, bounds.back());
  std::vector<double> segment(bounds.size() - 1, -kInf);
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    for (std::uint64_t i = bounds[s]; i < bounds[s + 1]; ++i) segment[s] = std::max(segment[s], path.values[i]);
  }
  std::vector<double> out;
  out.reserve(intervals.size());
  for (const auto& [a, b] : intervals) {
    const auto s0 = static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), a) - bounds.begin());
    const auto s1 = static_cast<std::size_t>(std::lower_bound(bounds.begin(), bounds.end(), b) - bounds.begin());
    double m = -kInf;
    for (std::size_t s = s0; s < s1; ++s) m = std::max(m, segment[s]);
    out.push_back(m);
  }
  return out;
}

// Exact marginal, or the empirical law of one long path.
DistFn marginal_or_empirical(const ProcessSpec& spec, std::uint64_t seed, std::uint64_t length, bool& exact) {
  if (auto f = marginal_law(spec)) {
    exact = true;
    return *f;
  }
  exact = false;
  return laws::empirical(generate(spec, derive_seed(seed, streams::marginal), length).values);
}

}  // namespace

std::vector<std::vector<double>> simulate_running_maxima(const ProcessSpec& spec, const std::vector<std::uint64_t>& sizes,
                                                         std::size_t replicas, std::uint64_t stream_seed,
                                                         unsigned workers) {
  std::vector<std::vector<double>> out(replicas);
  parallel_for(replicas, workers, [&](std::size_t r) { out[r] = running_maxima(spec, stream_seed + r, sizes); });
  return out;
}

double empirical_quantile_sorted(const std::vector<double>& sorted, double p) {
  require(!sorted.empty(), ErrorKind::insufficient_data, "quantile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  const double k = std::clamp(std::ceil(p * n), 1.0, n);
  return sorted[static_cast<std::size_t>(k) - 1];
}

// ---------------------------------------------------------------------------
// Maximum law and driving sequence

MaxLawEstimate estimate_max_cdf(const ProcessSpec& spec, const std::vector<std::uint64_t>& block_sizes,
                                const std::vector<std::vector<double>>& level_grid, std::size_t replicas,
                                std::uint64_t seed, const EstimateOptions& opts) {
  require(!block_sizes.empty(), ErrorKind::invalid_argument, "no block sizes");
  require(level_grid.size() == block_sizes.size() || level_grid.size() == 1, ErrorKind::invalid_argument,
          "level grid must be shared or given per block size");
  for (auto n : block_sizes) require(n >= 1, ErrorKind::invalid_argument, "block sizes must be >= 1");
  MaxLawEstimate out;
  out.spec = spec.describe();
  const bool exact = use_exact(spec, opts);
  if (!exact) require_replicas(replicas);
  out.exact = exact;
  out.replicas = exact ? 0 : replicas;

  std::vector<std::uint64_t> sizes = sorted_unique(block_sizes);
  std::vector<std::vector<double>> maxima;
  if (!exact) maxima = simulate_running_maxima(spec, sizes, replicas, derive_seed(seed, streams::max_law), opts.workers);

  for (std::size_t i = 0; i < block_sizes.size(); ++i) {
    MaxLawTable t;
    t.n = block_sizes[i];
    t.levels = level_grid.size() == 1 ? level_grid[0] : level_grid[i];
    std::sort(t.levels.begin(), t.levels.end());
    if (exact) {
      for (double x : t.levels) {
        t.p_hat.push_back(exact_max_cdf(spec, t.n, x));
        t.se.push_back(0.0);
      }
    } else {
      const auto j = static_cast<std::size_t>(std::lower_bound(sizes.begin(), sizes.end(), t.n) - sizes.begin());
      std::vector<double> sample(replicas);
      for (std::size_t r = 0; r < replicas; ++r) sample[r] = maxima[r][j];
      std::sort(sample.begin(), sample.end());
      for (double x : t.levels) {
        const double p = static_cast<double>(std::upper_bound(sample.begin(), sample.end(), x) - sample.begin()) /
                         static_cast<double>(replicas);
        t.p_hat.push_back(p);
        t.se.push_back(binomial_se(p, replicas));
      }
    }
    out.tables.push_back(std::move(t));
  }
  return out;
}

double DrivingSeqEstimate::level_at(std::uint64_t block) const {
  auto it = std::find(n.begin(), n.end(), block);
  require(it != n.end(), ErrorKind::invalid_argument,
          "driving sequence estimate has no level for n=" + std::to_string(block));
  return v_hat[static_cast<std::size_t>(it - n.begin())];
}

DrivingSeqEstimate estimate_driving_sequence(const ProcessSpec& spec, double gamma,
                                             const std::vector<std::uint64_t>& block_sizes, std::size_t replicas,
                                             std::uint64_t seed, const EstimateOptions& opts) {
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::invalid_argument, "gamma must lie in (0,1)");
  require(!block_sizes.empty(), ErrorKind::invalid_argument, "no block sizes");
  for (auto n : block_sizes) require(n >= 1, ErrorKind::invalid_argument, "block sizes must be >= 1");
  DrivingSeqEstimate out;
  out.gamma = gamma;
  out.n = sorted_unique(block_sizes);
  if (use_exact(spec, opts)) {
    out.method = "exact";
    for (auto n : out.n) {
      const double v = exact_max_quantile(spec, n, gamma);
      out.v_hat.push_back(v);
      out.ci_lo.push_back(v);
      out.ci_hi.push_back(v);
      out.p_at_v.push_back(exact_max_cdf(spec, n, v));
    }
    return out;
  }
  require_replicas(replicas);
  out.method = "monte-carlo";
  out.replicas = replicas;
  const auto maxima = simulate_running_maxima(spec, out.n, replicas, derive_seed(seed, streams::driving), opts.workers);
  const double half_width = 1.959963984540054 * std::sqrt(gamma * (1.0 - gamma) / static_cast<double>(replicas));
  for (std::size_t j = 0; j < out.n.size(); ++j) {
    std::vector<double> sample(replicas);
    for (std::size_t r = 0; r < replicas; ++r) sample[r] = maxima[r][j];
    std::sort(sample.begin(), sample.end());
    const double v = empirical_quantile_sorted(sample, gamma);
    out.v_hat.push_back(v);
    out.ci_lo.push_back(empirical_quantile_sorted(sample, std::max(gamma - half_width, 0.0)));
    out.ci_hi.push_back(empirical_quantile_sorted(sample, std::min(gamma + half_width, 1.0)));
    out.p_at_v.push_back(static_cast<double>(std::upper_bound(sample.begin(), sample.end(), v) - sample.begin()) /
                         static_cast<double>(replicas));
  }
  for (std::size_t j = 1; j < out.v_hat.size(); ++j) {
    if (out.v_hat[j] < out.v_hat[j - 1]) ++out.raw_violations;
  }
  if (out.raw_violations > 0) out.v_hat = isotonic_increasing(out.v_hat);
  return out;
}

// ---------------------------------------------------------------------------
// Condition B_T

std::vector<PQFraction> default_pq_grid(double T) {
  require(T > 0.0, ErrorKind::invalid_argument, "T must be positive");
  const std::vector<double> fractions = {0.0, 0.1, 0.5, 1.0, T / 2.0};
  std::vector<PQFraction> grid;
  for (double p : fractions) {
    for (double q : fractions) {
      if (p + q <= T) grid.push_back({p, q});
    }
  }
  return grid;
}

BTReport check_BT(const ProcessSpec& spec, const DrivingSeqEstimate& dse, double T, const std::vector<std::uint64_t>& n_list,
                  const std::vector<PQFraction>& pq_grid, std::size_t replicas, std::uint64_t seed,
                  const EstimateOptions& opts) {
  require(T > 0.0, ErrorKind::invalid_argument, "T must be positive");
  require(!n_list.empty() && !pq_grid.empty(), ErrorKind::invalid_argument, "empty n list or (p,q) grid");
  BTReport report;
  report.T = T;
  const bool exact = use_exact(spec, opts);
  report.method = exact ? "exact" : "monte-carlo";
  if (!exact) require_replicas(replicas);
  const std::vector<std::uint64_t> ns = sorted_unique(n_list);

  // pairs per n
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, std::uint64_t>>> pairs;
  for (auto n : ns) {
    auto& list = pairs[n];
    for (const auto& f : pq_grid) {
      const auto p = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(f.p * static_cast<double>(n))));
      const auto q = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(f.q * static_cast<double>(n))));
      require(static_cast<double>(p + q) <= T * static_cast<double>(n), ErrorKind::invalid_argument,
              "pair (p,q)=(" + std::to_string(p) + "," + std::to_string(q) + ") violates p+q <= T n at n=" +
                  std::to_string(n));
      if (std::find(list.begin(), list.end(), std::make_pair(p, q)) == list.end()) list.emplace_back(p, q);
    }
  }

  // marginal tail and r_n, chosen before any simulation
  bool exact_marginal = false;
  const DistFn marginal = marginal_or_empirical(spec, seed, std::max<std::uint64_t>(100000, 10 * ns.back()), exact_marginal);
  std::vector<double> tails;
  for (auto n : ns) tails.push_back(marginal.sf(dse.level_at(n)));
  auto r_of = [&](std::uint64_t n) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), report.r_exponent))));
  };
  auto decays = [&] {
    for (std::size_t i = 1; i < ns.size(); ++i) {
      if (!(static_cast<double>(r_of(ns[i])) * tails[i] < static_cast<double>(r_of(ns[i - 1])) * tails[i - 1])) return false;
    }
    return true;
  };
  report.r_tail_decays = decays();
  for (int attempt = 0; attempt < 3 && !report.r_tail_decays; ++attempt) {
    report.r_exponent /= 2.0;
    report.r_adjusted = true;
    report.r_tail_decays = decays();
  }

  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const std::uint64_t n = ns[ni];
    const double v = dse.level_at(n);
    const auto& list = pairs[n];
    const std::uint64_t r = r_of(n);
    BTPairRow worst{n, 0, 0, -1.0, 0.0};

    // covariance pair: the largest p + q with p > r
    std::optional<std::pair<std::uint64_t, std::uint64_t>> cov_pair;
    for (const auto& pq : list) {
      if (pq.first > r && (!cov_pair || pq.first + pq.second > cov_pair->first + cov_pair->second)) cov_pair = pq;
    }
    BTCovarianceRow cov_row;
    cov_row.n = n;
    cov_row.r = r;
    cov_row.r_tail = static_cast<double>(r) * tails[ni];

    if (exact) {
      for (const auto& [p, q] : list) {
        const double b = std::fabs(exact_max_cdf(spec, p + q, v) - exact_max_cdf(spec, p, v) * exact_max_cdf(spec, q, v));
        report.pairs.push_back({n, p, q, b, 0.0});
      }
      if (cov_pair) {
        const auto [p, q] = *cov_pair;
        cov_row.p = p;
        cov_row.q = q;
        cov_row.covariance = exact_joint_block_cdf(spec, p - r, r, q, v) - exact_max_cdf(spec, p - r, v) * exact_max_cdf(spec, q, v);
      }
    } else {
      // intervals: prefixes of every length used, plus the covariance blocks
      std::vector<std::pair<std::uint64_t, std::uint64_t>> intervals;
      auto index_of = [&](std::uint64_t a, std::uint64_t b) {
        const auto key = std::make_pair(a, b);
        auto it = std::find(intervals.begin(), intervals.end(), key);
        if (it != intervals.end()) return static_cast<std::size_t>(it - intervals.begin());
        intervals.push_back(key);
        return intervals.size() - 1;
      };
      std::vector<std::array<std::size_t, 3>> pair_idx;
      for (const auto& [p, q] : list) pair_idx.push_back({index_of(0, p), index_of(0, q), index_of(0, p + q)});
      std::size_t cov_a = 0;
      std::size_t cov_b = 0;
      if (cov_pair) {
        cov_a = index_of(0, cov_pair->first - r);
        cov_b = index_of(cov_pair->first, cov_pair->first + cov_pair->second);
      }
      std::vector<std::vector<double>> below(replicas);
      const std::uint64_t base = derive_seed(derive_seed(seed, streams::bt), n);
      parallel_for(replicas, opts.workers, [&](std::size_t rep) {
        const auto m = interval_maxima(spec, base + rep, intervals);
        below[rep].resize(m.size());
        for (std::size_t i = 0; i < m.size(); ++i) below[rep][i] = m[i] <= v ? 1.0 : 0.0;
      });
      auto mean_col = [&](std::size_t c) {
        double s = 0.0;
        for (const auto& row : below) s += row[c];
        return s / static_cast<double>(replicas);
      };
      for (std::size_t i = 0; i < list.size(); ++i) {
        const auto [ia, ib, ic] = pair_idx[i];
        const double A = mean_col(ia);
        const double B = mean_col(ib);
        const double C = mean_col(ic);
        std::vector<double> psi(replicas);
        for (std::size_t rep = 0; rep < replicas; ++rep)
          psi[rep] = below[rep][ic] - B * below[rep][ia] - A * below[rep][ib];
        report.pairs.push_back({n, list[i].first, list[i].second, std::fabs(C - A * B),
                                sd_of(psi) / std::sqrt(static_cast<double>(replicas))});
      }
      if (cov_pair) {
        cov_row.p = cov_pair->first;
        cov_row.q = cov_pair->second;
        const double A = mean_col(cov_a);
        const double B = mean_col(cov_b);
        std::vector<double> prod(replicas);
        for (std::size_t rep = 0; rep < replicas; ++rep)
          prod[rep] = (below[rep][cov_a] - A) * (below[rep][cov_b] - B);
        cov_row.covariance = mean_of(prod);
        cov_row.se = sd_of(prod) / std::sqrt(static_cast<double>(replicas));
      }
    }
    for (auto it = report.pairs.end() - static_cast<std::ptrdiff_t>(list.size()); it != report.pairs.end(); ++it) {
      if (it->b_value > worst.b_value) worst = *it;
    }
    report.worst.push_back(worst);
    if (cov_pair) report.covariance.push_back(cov_row);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Lemma-type diagnostics

CnDiagnostic estimate_Cn(const ProcessSpec& spec, const DrivingSeqEstimate& dse, std::uint64_t n, std::uint64_t m,
                         std::uint64_t k, std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts) {
  require(m >= 1 && k >= 1, ErrorKind::invalid_argument, "m and k must be >= 1");
  require(k * m <= n, ErrorKind::invalid_argument,
          "k m = " + std::to_string(k * m) + " exceeds n = " + std::to_string(n));
  CnDiagnostic out;
  out.n = n;
  out.m = m;
  out.k = k;
  out.v = dse.level_at(n);
  const double v = out.v;
  const double gamma = dse.gamma;

  if (use_exact(spec, opts)) {
    out.p_x1 = exact_max_cdf(spec, 1, v);
    out.p_max = exact_max_cdf(spec, n, v);
    for (std::uint64_t j = 2; j <= k; ++j) {
      const double c = std::fabs(exact_skeleton_cdf(spec, m, j, v) - out.p_x1 * exact_skeleton_cdf(spec, m, j - 1, v));
      out.c_hat = std::max(out.c_hat, c);
    }
    out.bound_product = static_cast<double>(k) * out.c_hat;
    const double slack = 1e-12;
    out.sandwich_holds = out.p_max >= gamma - slack &&
                         out.p_max <= std::pow(out.p_x1, static_cast<double>(k)) + out.bound_product + slack;
    return out;
  }

  require_replicas(replicas);
  // columns: X_1, Z_1..Z_k, M_n
  std::vector<std::vector<double>> ind(replicas);
  const std::uint64_t base = derive_seed(derive_seed(seed, streams::cn), n * 1000003ULL + m * 1009ULL + k);
  parallel_for(replicas, opts.workers, [&](std::size_t rep) {
    const SamplePath path = generate(spec, base + rep, n);
    auto& row = ind[rep];
    row.assign(k + 2, 0.0);
    row[0] = path.values[0] <= v ? 1.0 : 0.0;
    double z = -kInf;
    for (std::uint64_t j = 1; j <= k; ++j) {
      z = std::max(z, path.values[j * m - 1]);
      row[j] = z <= v ? 1.0 : 0.0;
    }
    row[k + 1] = *std::max_element(path.values.begin(), path.values.end()) <= v ? 1.0 : 0.0;
  });
  auto mean_col = [&](std::size_t c) {
    double s = 0.0;
    for (const auto& row : ind) s += row[c];
    return s / static_cast<double>(replicas);
  };
  const double R = static_cast<double>(replicas);
  out.p_x1 = mean_col(0);
  out.p_max = mean_col(k + 1);
  out.p_max_se = binomial_se(out.p_max, replicas);
  for (std::uint64_t j = 2; j <= k; ++j) {
    const double zj = mean_col(j);
    const double zprev = mean_col(j - 1);
    const double c = std::fabs(zj - out.p_x1 * zprev);
    if (c >= out.c_hat) {
      std::vector<double> psi(replicas);
      for (std::size_t rep = 0; rep < replicas; ++rep)
        psi[rep] = ind[rep][j] - out.p_x1 * ind[rep][j - 1] - zprev * ind[rep][0];
      out.c_hat = c;
      out.c_se = sd_of(psi) / std::sqrt(R);
    }
  }
  out.bound_product = static_cast<double>(k) * out.c_hat;
  const double se_x1 = binomial_se(out.p_x1, replicas);
  const double kd = static_cast<double>(k);
  const double upper_se = out.p_max_se + kd * out.c_se + kd * std::pow(out.p_x1, kd - 1.0) * se_x1;
  out.sandwich_holds = out.p_max >= gamma - 3.0 * out.p_max_se &&
                       out.p_max <= std::pow(out.p_x1, kd) + out.bound_product + 3.0 * upper_se;
  return out;
}

IndexRule parse_index_rule(std::string_view text) {
  const std::string t(text);
  if (t == "n") return {t, [](std::uint64_t n) { return n; }};
  if (t == "sqrt") return {t, [](std::uint64_t n) { return std::max<std::uint64_t>(1, integer_sqrt(n)); }};
  if (t.rfind("n^", 0) == 0) {
    char* end = nullptr;
    const double e = std::strtod(t.c_str() + 2, &end);
    require(end != t.c_str() + 2 && *end == '\0' && e > 0.0 && e <= 1.0, ErrorKind::invalid_spec,
            "bad index rule '" + t + "'");
    return {t, [e](std::uint64_t n) {
              return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(std::pow(static_cast<double>(n), e) + 1e-9)));
            }};
  }
  const std::string digits = t.rfind("const:", 0) == 0 ? t.substr(6) : t;
  char* end = nullptr;
  const double c = std::strtod(digits.c_str(), &end);
  require(end != digits.c_str() && *end == '\0' && c >= 1.0 && c == std::floor(c), ErrorKind::invalid_spec,
          "bad index rule '" + t + "'");
  const auto value = static_cast<std::uint64_t>(c);
  return {t, [value](std::uint64_t) { return value; }};
}

bool diverges_per_rule(const std::vector<std::uint64_t>& n, const std::vector<double>& values, double min_decades) {
  require(n.size() == values.size(), ErrorKind::invalid_argument, "series and block sizes differ in length");
  if (n.size() < 2) return false;
  const double span = std::log10(static_cast<double>(n.back()) / static_cast<double>(n.front()));
  if (span < min_decades - 1e-9) return false;
  for (std::size_t i = 1; i < n.size(); ++i) {
    const double decades = std::log10(static_cast<double>(n[i]) / static_cast<double>(n[i - 1]));
    if (!(values[i - 1] > 0.0) || !(values[i] >= values[i - 1] * std::pow(2.0, decades))) return false;
  }
  return true;
}

PropbasicSeries propbasic_series(const ProcessSpec& spec, const DrivingSeqEstimate& dse, const IndexRule& k_rule,
                                 const IndexRule& m_rule, const std::vector<std::uint64_t>& n_list,
                                 std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts) {
  const std::vector<std::uint64_t> ns = sorted_unique(n_list);
  require(!ns.empty(), ErrorKind::invalid_argument, "empty n list");
  for (auto n : ns) {
    const auto k = k_rule.at(n);
    const auto m = m_rule.at(n);
    require(k * m <= n, ErrorKind::invalid_argument,
            "k_n m_n = " + std::to_string(k * m) + " exceeds n = " + std::to_string(n));
  }
  bool exact_marginal = false;
  const DistFn marginal = marginal_or_empirical(spec, seed, std::max<std::uint64_t>(100000, 10 * ns.back()), exact_marginal);
  PropbasicSeries out;
  std::vector<double> series;
  for (auto n : ns) {
    PropbasicRow row;
    row.n = n;
    row.k = k_rule.at(n);
    row.m = m_rule.at(n);
    row.tail = marginal.sf(dse.level_at(n));
    row.k_tail = static_cast<double>(row.k) * row.tail;
    const auto cn = estimate_Cn(spec, dse, n, row.m, row.k, replicas, derive_seed(seed, streams::propbasic), opts);
    row.k_c_hat = cn.bound_product;
    series.push_back(row.k_tail);
    out.rows.push_back(row);
  }
  out.bounded = !diverges_per_rule(ns, series, 1.0);
  return out;
}

double alpha_delta_exponent(double beta) {
  require(beta > 0.0 && !std::isnan(beta), ErrorKind::invalid_argument, "beta must be positive");
  if (std::isinf(beta)) return 1.0;
  return beta / (1.0 + beta);
}

// ---------------------------------------------------------------------------
// Extremal index

ThetaEstimate estimate_theta_single_sequence(const ProcessSpec& spec, double gamma,
                                             const std::vector<std::uint64_t>& n_list, std::size_t replicas,
                                             std::uint64_t seed, const EstimateOptions& opts) {
  const DrivingSeqEstimate dse =
      estimate_driving_sequence(spec, gamma, n_list, replicas, derive_seed(seed, streams::theta), opts);
  ThetaEstimate out;
  out.gamma = gamma;
  out.method = dse.method;
  bool exact_marginal = false;
  const DistFn marginal =
      marginal_or_empirical(spec, seed, std::max<std::uint64_t>(1000000, 20 * dse.n.back()), exact_marginal);
  out.marginal = exact_marginal ? "exact" : "empirical";
  const double neg_log_gamma = -std::log(gamma);
  auto theta_at = [&](std::uint64_t n, double v) {
    const double nt = static_cast<double>(n) * marginal.sf(v);
    return nt > 0.0 ? neg_log_gamma / nt : kInf;
  };
  std::vector<double> n_tails;
  for (std::size_t i = 0; i < dse.n.size(); ++i) {
    ThetaRow row;
    row.n = dse.n[i];
    row.v_hat = dse.v_hat[i];
    row.tail = marginal.sf(row.v_hat);
    row.n_tail = static_cast<double>(row.n) * row.tail;
    row.gamma_prime = std::exp(-row.n_tail);
    row.theta = theta_at(row.n, row.v_hat);
    if (dse.method != "exact") {
      row.theta_se = (theta_at(row.n, dse.ci_hi[i]) - theta_at(row.n, dse.ci_lo[i])) / (2.0 * 1.959963984540054);
    }
    n_tails.push_back(row.n_tail);
    out.rows.push_back(row);
  }
  if (diverges_per_rule(dse.n, n_tails)) {
    out.verdict = "zero";
    out.theta_hat = 0.0;
    out.theta_se = 0.0;
  } else {
    out.verdict = "positive";
    out.theta_hat = out.rows.back().theta;
    out.theta_se = out.rows.back().theta_se;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Phantom fitting

PhantomDistFn fit_continuous_phantom(const ProcessSpec& spec, double gamma, std::uint64_t horizon_n,
                                     std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts,
                                     PhantomFit* fit_out) {
  require(horizon_n >= 2, ErrorKind::invalid_argument, "phantom fit needs a horizon of at least 2");
  PhantomFit fit;
  fit.horizon_n = horizon_n;
  const double decades = std::log10(static_cast<double>(horizon_n));
  const int points = std::max(2, static_cast<int>(std::ceil(32.0 * decades)) + 1);
  for (int i = 0; i < points; ++i) {
    fit.m_grid.push_back(static_cast<std::uint64_t>(std::llround(std::pow(10.0, decades * i / (points - 1)))));
  }
  fit.m_grid.back() = horizon_n;
  fit.m_grid = sorted_unique(fit.m_grid);
  const DrivingSeqEstimate dse =
      estimate_driving_sequence(spec, gamma, fit.m_grid, replicas, derive_seed(seed, streams::fit), opts);
  fit.v_grid = dse.v_hat;

  std::vector<double> levels(horizon_n);
  std::size_t seg = 0;
  for (std::uint64_t n = 1; n <= horizon_n; ++n) {
    while (seg + 1 < fit.m_grid.size() && fit.m_grid[seg + 1] <= n) ++seg;
    const std::uint64_t m0 = fit.m_grid[seg];
    if (m0 == n || seg + 1 == fit.m_grid.size()) {
      levels[n - 1] = fit.v_grid[seg];
      continue;
    }
    const std::uint64_t m1 = fit.m_grid[seg + 1];
    const double t = std::log(static_cast<double>(n) / static_cast<double>(m0)) /
                     std::log(static_cast<double>(m1) / static_cast<double>(m0));
    levels[n - 1] = fit.v_grid[seg] + (fit.v_grid[seg + 1] - fit.v_grid[seg]) * t;
  }
  for (std::size_t i = 1; i < levels.size(); ++i) levels[i] = std::max(levels[i], levels[i - 1]);

  // past the horizon the levels continue linearly in ln n, with the slope of
  // the last decade of the grid (or of the whole grid when that is flat)
  const double h = static_cast<double>(horizon_n);
  auto slope_from = [&](std::size_t i) {
    const double span = std::log(h / static_cast<double>(fit.m_grid[i]));
    return span > 0.0 ? (fit.v_grid.back() - fit.v_grid[i]) / span : 0.0;
  };
  std::size_t decade = 0;
  while (decade + 1 < fit.m_grid.size() && static_cast<double>(fit.m_grid[decade + 1]) * 10.0 <= h) ++decade;
  double slope = slope_from(decade);
  if (!(slope > 0.0)) slope = slope_from(0);
  require(slope > 0.0, ErrorKind::degenerate_driving_sequence, "estimated levels are all equal");
  char name[96];
  std::snprintf(name, sizeof name, "logext:%.17g:%.17g:%.17g", h, levels.back(), slope);
  LevelRule rule = level_rule(name);
  if (fit_out) *fit_out = fit;
  return build_continuous_phantom(DrivingSequence::from_levels(gamma, levels, rule));
}

std::vector<double> verification_grid(const DistFn& g, std::uint64_t n, const std::vector<double>& sample_maxima,
                                      std::size_t points) {
  std::vector<double> grid;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = -6.0 + 12.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    const double log_p = -std::log1p(std::exp(-t));
    const double x = g.isf(-std::expm1(log_p / static_cast<double>(n)));
    if (std::isfinite(x)) grid.push_back(x);
  }
  if (!sample_maxima.empty()) {
    std::vector<double> sorted = sample_maxima;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < points; ++i) {
      grid.push_back(empirical_quantile_sorted(sorted, (static_cast<double>(i) + 0.5) / static_cast<double>(points)));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace phdf
