#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phdf/distrib.hpp"

namespace phdf {

enum class ProcessKind { iid, lindley, metropolis, exchangeable_mixture, moving_max };

std::string_view to_string(ProcessKind kind);

struct ProcessSpec {
  ProcessKind kind = ProcessKind::iid;
  /// iid: marginal; lindley: step law of Z; metropolis: target law (its pdf
  /// is the target density); moving_max: base law.
  DistFn law;
  DistFn proposal;          // metropolis, symmetric about 0
  LevelRule levels;         // exchangeable_mixture
  std::uint64_t window = 1;     // moving_max
  std::uint64_t burn_in = 0;    // lindley / metropolis; resolved by the factories

  static ProcessSpec iid(DistFn f);
  /// burn_in = 0 selects max(1e4, 20/|E Z|).
  static ProcessSpec lindley(DistFn step, std::uint64_t burn_in = 0);
  /// burn_in = 0 selects 1e4.
  static ProcessSpec metropolis(DistFn target, DistFn proposal, std::uint64_t burn_in = 0);
  static ProcessSpec exchangeable_mixture(LevelRule levels);
  static ProcessSpec moving_max(std::uint64_t window, DistFn base);

  bool is_markov() const { return kind == ProcessKind::lindley || kind == ProcessKind::metropolis; }
  /// Canonical text, parseable by parse_process.
  std::string describe() const;
};

/// "iid(exp(1))", "lindley(shift(pareto(2,1),-2))", "lindley(<law>, 20000)",
/// "metropolis(sympareto(2), uniform(-1,1))", "mixture(n)",
/// "moving_max(2, uniform(0,1))".
ProcessSpec parse_process(std::string_view text);

struct SamplePath {
  std::string spec;
  std::uint64_t seed = 0;
  std::uint64_t burn_in = 0;
  std::vector<double> values;
  std::vector<std::uint64_t> regeneration_marks;  // 0-based indices; Lindley visits to 0
  std::optional<std::uint64_t> mixture_component;  // drawn Pi
};

/// Stationary-regime path; a pure function of (spec, seed, length).
SamplePath generate(const ProcessSpec& spec, std::uint64_t seed, std::uint64_t length);

/// Running maxima max(X_1..X_n) of one path recorded at the requested
/// (ascending) n, without storing the path.
std::vector<double> running_maxima(const ProcessSpec& spec, std::uint64_t seed, const std::vector<std::uint64_t>& at);

/// Marginal law when known in closed form (iid, moving_max, mixture,
/// metropolis target).
std::optional<DistFn> marginal_law(const ProcessSpec& spec);

bool has_exact_max_law(const ProcessSpec& spec);

/// P(M_n <= x) for iid, moving_max and exchangeable_mixture.
double exact_max_cdf(const ProcessSpec& spec, std::uint64_t n, double x);

/// inf{x : P(M_n <= x) >= gamma} for the exactly computable kinds.
double exact_max_quantile(const ProcessSpec& spec, std::uint64_t n, double gamma);

/// P(max of X_1..X_a <= x, max of X_{a+gap+1}..X_{a+gap+b} <= x).
double exact_joint_block_cdf(const ProcessSpec& spec, std::uint64_t a, std::uint64_t gap, std::uint64_t b,
                             double x);

/// P(max(X_m, X_2m, ..., X_jm) <= x).
double exact_skeleton_cdf(const ProcessSpec& spec, std::uint64_t m, std::uint64_t j, double x);

/// Mixture helpers: index N of the level run containing x (0 below v_1) and
/// P(Pi <= floor(sqrt N)).
std::uint64_t mixture_level_index(const LevelRule& levels, double x);
std::uint64_t integer_sqrt(std::uint64_t n);

struct MetropolisConfigCheck {
  bool ok = false;
  bool support_connected = false;  // (i)
  bool monotone_on_interval = false;  // (ii)
  bool proposal_bounded_below = false;  // (iii)
  double k_h = 0.0;
  std::vector<std::string> details;
};

MetropolisConfigCheck metropolis_config_check(const std::function<double(double)>& target_density,
                                              const std::function<double(double)>& proposal_density, double a,
                                              double b);

struct TailConditionResult {
  bool holds = false;
  std::vector<double> probe_levels;
  std::vector<double> ratio_track;  // (1 - F(u + m)) / (1 - F(u))
};

TailConditionResult target_tail_condition(const DistFn& target, double m, const ProbePolicy& probe = {});

/// (1 - H(x)) / (1 - F^(x)) with F^ the empirical law of a stationary path,
/// on levels up to its 0.999 quantile.
TailComparison lindley_step_tail_vs_stationary(const DistFn& step, const std::vector<double>& path_values,
                                               const ProbePolicy& probe = {});

}  // namespace phdf
