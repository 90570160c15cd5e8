#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phdf/distrib.hpp"
#include "phdf/maxlaw.hpp"
#include "phdf/phantom.hpp"
#include "phdf/processes.hpp"

namespace phdf {

struct EstimateOptions {
  bool exact = false;  // use closed-form laws when the process has them
  unsigned workers = 1;
};

/// Stream identifiers for derive_seed; each estimation stage draws replica r
/// from derive_seed(seed, stream) + r.
namespace streams {
inline constexpr std::uint64_t max_law = 1;
inline constexpr std::uint64_t driving = 2;
inline constexpr std::uint64_t bt = 3;
inline constexpr std::uint64_t cn = 4;
inline constexpr std::uint64_t propbasic = 5;
inline constexpr std::uint64_t theta = 6;
inline constexpr std::uint64_t regen = 7;
inline constexpr std::uint64_t fit = 8;
inline constexpr std::uint64_t marginal = 9;
inline constexpr std::uint64_t path = 10;
}  // namespace streams

inline constexpr std::size_t kMinReplicas = 200;

/// R x k running maxima M_n (n = sizes[j]) from R independent paths.
std::vector<std::vector<double>> simulate_running_maxima(const ProcessSpec& spec, const std::vector<std::uint64_t>& sizes,
                                                         std::size_t replicas, std::uint64_t stream_seed,
                                                         unsigned workers);

/// Type-1 empirical quantile of an ascending sample.
double empirical_quantile_sorted(const std::vector<double>& sorted, double p);

MaxLawEstimate estimate_max_cdf(const ProcessSpec& spec, const std::vector<std::uint64_t>& block_sizes,
                                const std::vector<std::vector<double>>& level_grid, std::size_t replicas,
                                std::uint64_t seed, const EstimateOptions& opts = {});

struct DrivingSeqEstimate {
  double gamma = 0.5;
  std::string method;  // "exact" or "monte-carlo"
  std::vector<std::uint64_t> n;
  std::vector<double> v_hat;
  std::vector<double> ci_lo;
  std::vector<double> ci_hi;
  std::vector<double> p_at_v;  // P^(M_n <= v^_n) on the training sample
  std::size_t replicas = 0;
  std::size_t raw_violations = 0;  // non-monotone raw quantiles fixed by the isotonic pass

  double level_at(std::uint64_t block) const;
};

DrivingSeqEstimate estimate_driving_sequence(const ProcessSpec& spec, double gamma,
                                             const std::vector<std::uint64_t>& block_sizes, std::size_t replicas,
                                             std::uint64_t seed, const EstimateOptions& opts = {});

/// (p, q) pairs as fractions of n; a fraction f maps to max(1, round(f n)).
struct PQFraction {
  double p = 1.0;
  double q = 1.0;
};

std::vector<PQFraction> default_pq_grid(double T);

struct BTPairRow {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t q = 0;
  double b_value = 0.0;
  double se = 0.0;
};

struct BTCovarianceRow {
  std::uint64_t n = 0;
  std::uint64_t p = 0;
  std::uint64_t q = 0;
  std::uint64_t r = 0;
  double covariance = 0.0;
  double se = 0.0;
  double r_tail = 0.0;  // r_n P(X_1 > v_n)
};

struct BTReport {
  double T = 1.0;
  std::string method;
  std::vector<BTPairRow> pairs;
  std::vector<BTPairRow> worst;  // one row per n
  std::vector<BTCovarianceRow> covariance;
  double r_exponent = 1.0 / 3.0;  // r_n = floor(n^r_exponent)
  bool r_adjusted = false;
  bool r_tail_decays = false;
};

BTReport check_BT(const ProcessSpec& spec, const DrivingSeqEstimate& dse, double T, const std::vector<std::uint64_t>& n_list,
                  const std::vector<PQFraction>& pq_grid, std::size_t replicas, std::uint64_t seed,
                  const EstimateOptions& opts = {});

struct CnDiagnostic {
  std::uint64_t n = 0;
  std::uint64_t m = 0;
  std::uint64_t k = 0;
  double v = 0.0;
  double c_hat = 0.0;
  double c_se = 0.0;
  double bound_product = 0.0;  // k C_hat
  double p_x1 = 0.0;           // P(X_1 <= v_n)
  double p_max = 0.0;          // P(M_n <= v_n)
  double p_max_se = 0.0;
  bool sandwich_holds = false;
};

CnDiagnostic estimate_Cn(const ProcessSpec& spec, const DrivingSeqEstimate& dse, std::uint64_t n, std::uint64_t m,
                         std::uint64_t k, std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts = {});

/// Integer sequence rule for k_n and m_n: "n", "sqrt", "1", "n^0.4", "const:5".
struct IndexRule {
  std::string name;
  std::function<std::uint64_t(std::uint64_t)> at;
};
IndexRule parse_index_rule(std::string_view text);

struct PropbasicRow {
  std::uint64_t n = 0;
  std::uint64_t k = 0;
  std::uint64_t m = 0;
  double tail = 0.0;      // P(X_1 > v_n)
  double k_tail = 0.0;    // k_n P(X_1 > v_n)
  double k_c_hat = 0.0;   // k_n C_n(m_n; k_n)
};

struct PropbasicSeries {
  std::vector<PropbasicRow> rows;
  bool bounded = false;  // k_n P(X_1 > v_n) does not diverge per the divergence rule
};

PropbasicSeries propbasic_series(const ProcessSpec& spec, const DrivingSeqEstimate& dse, const IndexRule& k_rule,
                                 const IndexRule& m_rule, const std::vector<std::uint64_t>& n_list,
                                 std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts = {});

/// Upper end of the admissible exponents delta < beta / (1 + beta).
double alpha_delta_exponent(double beta);

/// Divergence rule: the series grows by a factor >= 2 per decade of n between
/// every consecutive pair, across at least `min_decades` decades.
bool diverges_per_rule(const std::vector<std::uint64_t>& n, const std::vector<double>& values,
                       double min_decades = 3.0);

struct ThetaRow {
  std::uint64_t n = 0;
  double v_hat = 0.0;
  double tail = 0.0;         // 1 - F(v_n)
  double n_tail = 0.0;       // n (1 - F(v_n))
  double gamma_prime = 0.0;  // exp(-n (1 - F(v_n)))
  double theta = 0.0;
  double theta_se = 0.0;
};

struct ThetaEstimate {
  double gamma = 0.5;
  std::string method;
  std::string marginal;  // "exact" or "empirical"
  std::vector<ThetaRow> rows;
  std::string verdict;   // "zero" or "positive"
  double theta_hat = 0.0;  // at the largest n (0 under the zero verdict)
  double theta_se = 0.0;
};

ThetaEstimate estimate_theta_single_sequence(const ProcessSpec& spec, double gamma,
                                             const std::vector<std::uint64_t>& n_list, std::size_t replicas,
                                             std::uint64_t seed, const EstimateOptions& opts = {});

// ---------------------------------------------------------------------------
// Regenerative structure

struct RegenStats {
  std::size_t cycles = 0;         // complete cycles
  std::vector<double> W;          // cycle lengths W_1..W_J
  std::vector<double> Y;          // cycle maxima Y_1..Y_J
  double W0 = 0.0;                // delayed first cycle
  double Y0 = 0.0;
  double mu_hat = 0.0;
  double mu_se = 0.0;
  std::vector<std::uint64_t> zero_cycle_n;
  std::vector<double> zero_cycle_diag;  // P(Y_0 > max_{1<=j<=n} Y_j)
  std::vector<double> zero_cycle_se;
};

RegenStats decompose_regenerative(const SamplePath& path);

/// Fraction of replicas whose delayed-cycle maximum exceeds the first n
/// complete cycle maxima.
void zero_cycle_diagnostic(const ProcessSpec& spec, const std::vector<std::uint64_t>& n_list, std::size_t replicas,
                           std::uint64_t seed, unsigned workers, RegenStats& stats);

/// Empirical law of the cycle maxima, linearly interpolated between order
/// statistics (smooth) or raw, raised to the power 1/mu.
class RootzenLaw final : public Law {
 public:
  RootzenLaw(std::vector<double> cycle_maxima, double mu, bool smooth, double mu_se = 0.0);
  double cdf(double x) const override;
  double sf(double x) const override;
  double log_cdf(double x) const override;
  double left_end() const override { return sorted_.front(); }
  double right_end() const override { return sorted_.back(); }
  AtomModel atom_model() const override { return AtomModel::mixed; }
  double atom_mass(double x) const override;
  std::string describe() const override;
  /// Smoothed empirical cdf of the cycle maxima.
  double cycle_cdf(double x) const;
  /// Delta-method SE of G(x)^n = H(x)^{n/mu} from the binomial error of
  /// H(x) over the cycles and the SE of mu.
  double power_se(double x, double n) const;

 private:
  std::vector<double> sorted_;  // distinct values
  std::vector<double> ecdf_;    // empirical cdf at sorted_
  double mu_;
  bool smooth_;
  double mu_se_;
  double cycles_;
};

inline constexpr std::size_t kMinCycles = 500;

DistFn rootzen_phantom(const RegenStats& stats, bool smooth = true);

// ---------------------------------------------------------------------------
// Phantom fitting

struct PhantomFit {
  std::vector<std::uint64_t> m_grid;
  std::vector<double> v_grid;  // estimated levels on the grid
  std::uint64_t horizon_n = 0;  // levels materialized for n <= horizon_n
};

/// Estimates v_m on a geometric grid of m up to horizon_n, interpolates
/// linearly in ln m, and returns the phantom built from the materialized
/// levels.
PhantomDistFn fit_continuous_phantom(const ProcessSpec& spec, double gamma, std::uint64_t horizon_n,
                                     std::size_t replicas, std::uint64_t seed, const EstimateOptions& opts,
                                     PhantomFit* fit_out = nullptr);

/// Level grid for verification at block size n: quantiles of G^n and
/// empirical quantiles of the simulated maxima.
std::vector<double> verification_grid(const DistFn& g, std::uint64_t n, const std::vector<double>& sample_maxima,
                                      std::size_t points = 60);

}  // namespace phdf
