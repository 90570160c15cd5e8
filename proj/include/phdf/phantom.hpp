#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phdf/distrib.hpp"
#include "phdf/maxlaw.hpp"

namespace phdf {

/// Last index p of a constancy run of the levels together with v_p.
struct Plateau {
  std::uint64_t index = 0;
  double level = 0.0;
  bool operator==(const Plateau&) const = default;
};

/// Pair (gamma, v_1 <= v_2 <= ...). Levels are stored compressed as plateau
/// ends; an optional strictly increasing rule extends them past the stored
/// prefix.
class DrivingSequence {
 public:
  static DrivingSequence from_levels(double gamma, const std::vector<double>& levels,
                                     std::optional<LevelRule> rule = std::nullopt);
  /// Levels v_n = rule(n) for n <= prefix, extended by the rule afterwards.
  static DrivingSequence from_rule(double gamma, LevelRule rule, std::uint64_t prefix);
  static DrivingSequence from_plateaus(double gamma, std::vector<Plateau> plateaus,
                                       std::optional<LevelRule> rule = std::nullopt);

  double gamma() const { return gamma_; }
  std::uint64_t prefix_size() const { return plateaus_.empty() ? 0 : plateaus_.back().index; }
  /// v_n; beyond the stored prefix only when a rule is present.
  double level(std::uint64_t n) const;
  const std::vector<Plateau>& plateaus() const { return plateaus_; }
  std::vector<std::uint64_t> plateau_index() const;
  const std::optional<LevelRule>& rule() const { return rule_; }
  /// sup_n v_n: the rule's supremum, or the last stored level.
  double sup_level() const;
  std::vector<double> materialize(std::uint64_t count) const;

  bool operator==(const DrivingSequence& other) const;

 private:
  double gamma_ = 0.5;
  std::vector<Plateau> plateaus_;
  std::optional<LevelRule> rule_;
};

/// Continuous phantom G(x) = gamma^{g(x)}: g(x) = v_{p_1} - x + 1/p_1 below the
/// first plateau end, g(v_{p_k}) = 1/p_k, linear in x between plateau ends,
/// and g = 0 from the supremum of the levels on. A finite stored prefix ends
/// at its last level, where g reaches 0.
class PhantomLaw final : public Law {
 public:
  explicit PhantomLaw(DrivingSequence driving);

  double g(double x) const;
  double cdf(double x) const override;
  double sf(double x) const override;
  double log_cdf(double x) const override;
  double right_end() const override { return sup_; }
  std::string describe() const override;
  const DrivingSequence& driving() const { return driving_; }

 private:
  DrivingSequence driving_;
  std::vector<double> knot_x_;
  std::vector<double> knot_g_;
  double log_gamma_;
  double sup_;
};

class PhantomDistFn {
 public:
  explicit PhantomDistFn(DrivingSequence driving);

  double g(double x) const { return law_->g(x); }
  double cdf(double x) const { return law_->cdf(x); }
  double sf(double x) const { return law_->sf(x); }
  double log_cdf(double x) const { return law_->log_cdf(x); }
  /// G(x)^n = exp(n g(x) ln gamma)
  double pow_n(double x, double n) const;
  const DrivingSequence& driving() const { return law_->driving(); }
  DistFn as_distfn() const { return DistFn(law_); }

  /// Plain-text table: "gamma", "rule", "sup", "knots K", then "x g" lines,
  /// all numbers with 17 significant digits.
  std::string serialize() const;
  static PhantomDistFn deserialize(const std::string& text);

 private:
  std::shared_ptr<const PhantomLaw> law_;
};

PhantomDistFn build_continuous_phantom(const DrivingSequence& d);

/// Step phantom: gamma^{1/n} on [v_n, v_{n+1}), 0 below v_1, 1 from sup v_n on.
class JumpPhantomLaw final : public Law {
 public:
  explicit JumpPhantomLaw(DrivingSequence driving);

  double cdf(double x) const override;
  double log_cdf(double x) const override;
  double sf(double x) const override;
  double atom_mass(double x) const override;
  double left_end() const override;
  double right_end() const override { return driving_.sup_level(); }
  AtomModel atom_model() const override { return AtomModel::jump; }
  std::string describe() const override;
  const DrivingSequence& driving() const { return driving_; }

 private:
  // Index n of the run containing x (largest n with v_n <= x), 0 below v_1,
  // nullopt at or above the supremum.
  std::optional<std::uint64_t> run_index(double x) const;

  DrivingSequence driving_;
  double log_gamma_;
};

class JumpPhantom {
 public:
  explicit JumpPhantom(DrivingSequence driving);
  double cdf(double x) const { return law_->cdf(x); }
  double pow_n(double x, double n) const;
  const DrivingSequence& driving() const { return law_->driving(); }
  DistFn as_distfn() const { return DistFn(law_); }

 private:
  std::shared_ptr<const JumpPhantomLaw> law_;
};

JumpPhantom build_jump_phantom(const DrivingSequence& d);

/// max over the grid of |G(x)^n - G~(x)^n|.
double phantom_gap(const PhantomDistFn& continuous, const JumpPhantom& jump, double n,
                   const LevelGrid& grid);

struct VerifyRow {
  std::uint64_t n = 0;
  double gap = 0.0;        // max_x |P(M_n <= x) - G(x)^n|
  double level = 0.0;      // where the gap is attained
  double se = 0.0;         // Monte Carlo SE at that level
  double worst_excess = 0.0;  // max_x (|d| - 3 se_d), <= tolerance iff pass
  std::size_t levels_in_band = 0;
  bool pass = false;
};

struct VerifyReport {
  double sup_gap = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<VerifyRow> per_n;
};

/// Standard error of an estimated phantom's G(x)^n, for phantoms that are
/// themselves estimates.
using PowerSe = std::function<double(double x, double n)>;

/// Compares G^n against the maximum law table by table. A level passes when
/// |P - G^n| <= 3 se_d + tolerance, with se_d = max(se, se_model) and
/// se_model the binomial SE of G^n at the table's replica count. When
/// `phantom_se` is given, se_d = sqrt(max(se, se_model)^2 + phantom_se^2).
VerifyReport verify_phantom(const DistFn& g, const MaxLawEstimate& maxlaw, double tolerance = 0.0,
                            const PowerSe& phantom_se = nullptr);

/// theta = ln gamma / ln gamma', and 0 when gamma' = 0.
double extremal_index_from_gammas(double gamma, double gamma_prime);

struct ThetaTrack {
  std::vector<double> probe_levels;
  std::vector<double> ratio_track;  // (1 - G(x)) / (1 - F(x))
  std::optional<double> limit;      // set when the track settles
  std::string verdict;              // "converged" or "divergent"
};

ThetaTrack extremal_index_tail_ratio(const DistFn& g, const DistFn& f, const ProbePolicy& probe = {});

}  // namespace phdf
