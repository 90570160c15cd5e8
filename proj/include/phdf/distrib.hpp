#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phdf/random.hpp"

namespace phdf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// How atoms of a law are declared. Atoms are never detected numerically.
enum class AtomModel { continuous, jump, mixed };

/// A distribution function on the extended real line.
///
/// Implementations override whatever they know in closed form; sf() and
/// isf() should stay accurate deep in the upper tail because every tail
/// ratio in the library is formed from them.
class Law {
 public:
  virtual ~Law() = default;

  virtual double cdf(double x) const = 0;
  virtual double sf(double x) const { return 1.0 - cdf(x); }
  virtual double log_cdf(double x) const;
  virtual double atom_mass(double /*x*/) const { return 0.0; }
  /// inf{x : cdf(x) >= p}
  virtual double quantile(double p) const;
  /// inf{x : sf(x) <= q}
  virtual double isf(double q) const;
  virtual double left_end() const { return -kInf; }
  virtual double right_end() const { return kInf; }
  virtual AtomModel atom_model() const { return AtomModel::continuous; }
  virtual std::optional<double> pdf(double /*x*/) const { return std::nullopt; }
  virtual std::optional<double> mean() const { return std::nullopt; }
  virtual double sample(Rng& rng) const;
  virtual std::string describe() const = 0;
};

/// Strictly increasing level rule n -> v_n (n >= 1), used by jump laws and by
/// driving sequences that extend beyond a stored prefix.
struct LevelRule {
  std::string name;
  std::function<double(std::uint64_t)> level;
  double sup = kInf;
};

/// Named rules: "n" (v_n = n), "sqrt" (v_n = sqrt n), "superheavy" (v_n = n^{ln n}),
/// "logext:h:v:s" (v_n = v + s ln(n/h), s > 0).
LevelRule level_rule(std::string_view name);

/// Value-semantic handle to an immutable law; cheap to copy and safe to
/// share between threads.
class DistFn {
 public:
  DistFn() = default;
  explicit DistFn(std::shared_ptr<const Law> law);

  double cdf(double x) const { return law_->cdf(x); }
  double sf(double x) const { return law_->sf(x); }
  double log_cdf(double x) const { return law_->log_cdf(x); }
  double atom_mass(double x) const { return law_->atom_mass(x); }
  /// F(x-)
  double left_limit(double x) const { return cdf(x) - atom_mass(x); }
  /// 1 - F(x-)
  double sf_left(double x) const { return sf(x) + atom_mass(x); }
  double quantile(double p) const { return law_->quantile(p); }
  double isf(double q) const { return law_->isf(q); }
  double left_end() const { return law_->left_end(); }
  double right_end() const { return law_->right_end(); }
  AtomModel atom_model() const { return law_->atom_model(); }
  std::optional<double> pdf(double x) const { return law_->pdf(x); }
  std::optional<double> mean() const { return law_->mean(); }
  double sample(Rng& rng) const { return law_->sample(rng); }
  std::string describe() const { return law_->describe(); }

  /// F(x)^n evaluated as exp(n log F(x)).
  double pow_n(double x, double n) const;

  const Law& law() const { return *law_; }
  explicit operator bool() const { return static_cast<bool>(law_); }

 private:
  std::shared_ptr<const Law> law_;
};

namespace laws {

DistFn exponential(double rate);
/// Tail (1 + x/scale)^{-alpha} for x >= 0.
DistFn pareto(double alpha, double scale);
DistFn uniform(double a, double b);
DistFn beta(double c, double d);
/// P(X = k) = p (1-p)^{k-1}, k = 1, 2, ...
DistFn geometric(double p);
/// 1 - F(x) = x^{-1/sqrt(ln x)} = exp(-sqrt(ln x)) for x > 1.
DistFn superheavy();
/// Density (alpha/2)(1+|x|)^{-alpha-1}: a Pareto tail on both sides.
DistFn symmetric_pareto(double alpha);
/// F_k(x) = 0 below v_{k^2}, 1 - 1/n on [v_n, v_{n+1}) for n >= k^2.
DistFn thm2_component(std::uint64_t k, LevelRule levels);
/// Purely jump law with 1 - F(levels[i]) = tails[i]; the last tail must be 0.
DistFn jump_sequence(std::vector<double> levels, std::vector<double> tails);
/// Purely jump law from rules: atoms at level(n), 1 - F(level(n)) = tail(n) for n >= first.
DistFn jump_rule(LevelRule levels, std::function<double(std::uint64_t)> tail, std::uint64_t first,
                 std::string description);
/// Law of X + offset.
DistFn shifted(DistFn base, double offset);
/// F^exponent, exponent > 0 (law of the maximum of `exponent` copies when integral).
DistFn power(DistFn base, double exponent);
/// Empirical law of a sample (type-1 quantile convention).
DistFn empirical(std::vector<double> sample);

struct CustomLaw {
  std::function<double(double)> sf;
  std::function<double(double)> isf;  // optional; bisection on sf otherwise
  std::function<double(double)> pdf;  // optional
  double left_end = -kInf;
  double right_end = kInf;
  std::string description = "custom";
};
/// Continuous law given by its survival function.
DistFn custom(CustomLaw spec);

}  // namespace laws

/// Parses catalog expressions such as "exp(1)", "pareto(2,1)",
/// "shift(pareto(2,1),-2)", "thm2-component(3,n)", "jumpseq([1,2],[0.5,0])".
DistFn parse_law(std::string_view text);

// ---------------------------------------------------------------------------
// Tail analyses

/// Probe levels ascending to the right end. By default levels sit at
/// isf(2^-j), j = 1..depth, i.e. geometric spacing in tail probability.
struct ProbePolicy {
  int depth = 40;
  double epsilon = 0.02;          // "ratio -> target" band over the last quarter
  double truncation_tail = 1e-8;  // suprema only over levels with 1 - F >= this
  double cap = 1e8;               // suprema above this count as infinite
  std::vector<double> explicit_levels;
};

inline constexpr std::size_t kMinProbeLevels = 32;

std::vector<double> probe_levels(const DistFn& f, const ProbePolicy& probe);

/// True when every value in the last quarter of `track` lies in
/// [target - eps, target + eps].
bool last_quarter_within(std::span<const double> track, double target, double eps);

struct RegularityReport {
  bool is_regular = false;
  std::vector<double> probe_levels;
  std::vector<double> ratio_track;  // (1 - F(x-)) / (1 - F(x))
  double mass_at_right_end = 0.0;   // 1 - F(F_*-)
};

RegularityReport regularity_check(const DistFn& f, const ProbePolicy& probe = {});

enum class TailVerdict { equivalent, ratio_to_zero, ratio_to_infinity, divergent, mismatched_right_ends };
std::string_view to_string(TailVerdict verdict);

struct TailComparison {
  std::vector<double> probe_levels;
  std::vector<double> ratio_track;  // (1 - H(x)) / (1 - G(x))
  TailVerdict verdict = TailVerdict::divergent;
};

/// Classifies a tail-ratio track with the probe's epsilon.
TailVerdict classify_ratio_track(std::span<const double> track, double epsilon);

TailComparison strict_tail_equivalence(const DistFn& g, const DistFn& h, const ProbePolicy& probe = {});

struct LevelGrid {
  std::vector<double> levels;
};

/// Grid on which G^n and H^n sweep (0, 1), plus the low quantile 1e-3/n of G.
LevelGrid power_grid(const DistFn& g, const DistFn& h, double n, std::size_t points = 400);

/// max over the grid of |G(x)^n - H(x)^n|
double sup_power_distance(const DistFn& g, const DistFn& h, double n, const LevelGrid& grid);

struct DeltaConditionResult {
  bool holds = true;
  double sup_value = 0.0;           // +inf when beyond the cap
  std::vector<double> atoms;        // atoms visited, ascending
  std::vector<double> ratio_track;  // dF/(1-F)^{1+xi} at those atoms
};

/// Condition Delta_0 (xi = 0: dF/(1-F) -> 0 along atoms) or Delta_xi
/// (xi > 0: sup dF/(1-F)^{1+xi} finite).
DeltaConditionResult delta_condition(const DistFn& f, double xi, const ProbePolicy& probe = {});

struct ConcentrationResult {
  double b_hat = 0.0;  // max (F(x+u) - F(x)) / u^b over probe pairs
  bool satisfied = false;
};

ConcentrationResult concentration_exponent(const DistFn& f, double b, const ProbePolicy& probe = {});

}  // namespace phdf
