#include "phdf/processes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>

#include "phdf/error.hpp"
#include "phdf/numeric.hpp"

namespace phdf {

std::string_view to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::iid: return "iid";
    case ProcessKind::lindley: return "lindley";
    case ProcessKind::metropolis: return "metropolis";
    case ProcessKind::exchangeable_mixture: return "mixture";
    case ProcessKind::moving_max: return "moving_max";
  }
  return "iid";
}

// ---------------------------------------------------------------------------
// Specs

ProcessSpec ProcessSpec::iid(DistFn f) {
  require(static_cast<bool>(f), ErrorKind::invalid_spec, "iid: missing marginal law");
  ProcessSpec s;
  s.kind = ProcessKind::iid;
  s.law = std::move(f);
  return s;
}

ProcessSpec ProcessSpec::lindley(DistFn step, std::uint64_t burn_in) {
  require(static_cast<bool>(step), ErrorKind::invalid_spec, "lindley: missing step law");
  const auto mean = step.mean();
  require(mean.has_value() && std::isfinite(*mean), ErrorKind::invalid_spec,
          "lindley: step law " + step.describe() + " has no finite mean");
  require(*mean < 0.0, ErrorKind::invalid_spec,
          "lindley: step mean must be negative for a stable chain (got " + std::to_string(*mean) + ")");
  ProcessSpec s;
  s.kind = ProcessKind::lindley;
  s.law = std::move(step);
  s.burn_in = burn_in > 0 ? burn_in
                          : std::max<std::uint64_t>(10000, static_cast<std::uint64_t>(std::ceil(20.0 / -*mean)));
  return s;
}

ProcessSpec ProcessSpec::metropolis(DistFn target, DistFn proposal, std::uint64_t burn_in) {
  require(static_cast<bool>(target) && static_cast<bool>(proposal), ErrorKind::invalid_spec,
          "metropolis: missing target or proposal");
  require(target.pdf(target.quantile(0.5)).has_value(), ErrorKind::invalid_spec,
          "metropolis: target law " + target.describe() + " has no density");
  bool positive = false;
  for (int i = -400; i <= 400 && !positive; ++i) positive = *target.pdf(i * 0.25) > 0.0;
  for (int j = 1; j <= 40 && !positive; ++j) positive = *target.pdf(target.isf(std::ldexp(1.0, -j))) > 0.0;
  require(positive, ErrorKind::invalid_spec, "metropolis: target density is not positive on the probe grid");
  for (int i = 1; i <= 64; ++i) {
    const double x = proposal.isf(i / 128.0);
    require(std::fabs(proposal.cdf(x) + proposal.cdf(-x) - 1.0 - proposal.atom_mass(-x)) <= 1e-12,
            ErrorKind::invalid_spec, "metropolis: proposal law must be symmetric about 0");
  }
  ProcessSpec s;
  s.kind = ProcessKind::metropolis;
  s.law = std::move(target);
  s.proposal = std::move(proposal);
  s.burn_in = burn_in > 0 ? burn_in : 10000;
  return s;
}

ProcessSpec ProcessSpec::exchangeable_mixture(LevelRule levels) {
  ProcessSpec s;
  s.kind = ProcessKind::exchangeable_mixture;
  s.levels = std::move(levels);
  return s;
}

ProcessSpec ProcessSpec::moving_max(std::uint64_t window, DistFn base) {
  require(window >= 1, ErrorKind::invalid_spec, "moving_max: window must be >= 1");
  require(static_cast<bool>(base), ErrorKind::invalid_spec, "moving_max: missing base law");
  ProcessSpec s;
  s.kind = ProcessKind::moving_max;
  s.window = window;
  s.law = std::move(base);
  return s;
}

std::string ProcessSpec::describe() const {
  switch (kind) {
    case ProcessKind::iid: return "iid(" + law.describe() + ")";
    case ProcessKind::lindley: return "lindley(" + law.describe() + "," + std::to_string(burn_in) + ")";
    case ProcessKind::metropolis:
      return "metropolis(" + law.describe() + "," + proposal.describe() + "," + std::to_string(burn_in) + ")";
    case ProcessKind::exchangeable_mixture: return "mixture(" + levels.name + ")";
    case ProcessKind::moving_max: return "moving_max(" + std::to_string(window) + "," + law.describe() + ")";
  }
  return {};
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  require(end != text.c_str() && *end == '\0' && v >= 0 && v == std::floor(v) && v < 1e18,
          ErrorKind::invalid_spec, what + " must be a non-negative integer, got '" + text + "'");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

ProcessSpec parse_process(std::string_view text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  require(open != std::string::npos && t.back() == ')', ErrorKind::invalid_spec,
          "cannot parse process '" + t + "'");
  const std::string name = trim(std::string_view(t).substr(0, open));
  const auto args = split_top_level(std::string_view(t).substr(open + 1, t.size() - open - 2));
  auto need = [&](std::size_t lo, std::size_t hi) {
    require(args.size() >= lo && args.size() <= hi && !args[0].empty(), ErrorKind::invalid_spec,
            name + ": wrong number of arguments in '" + t + "'");
  };
  try {
    if (name == "iid") {
      need(1, 1);
      return ProcessSpec::iid(parse_law(args[0]));
    }
    if (name == "lindley") {
      need(1, 2);
      return ProcessSpec::lindley(parse_law(args[0]), args.size() > 1 ? parse_count(args[1], "burn-in") : 0);
    }
    if (name == "metropolis") {
      need(2, 3);
      return ProcessSpec::metropolis(parse_law(args[0]), parse_law(args[1]),
                                     args.size() > 2 ? parse_count(args[2], "burn-in") : 0);
    }
    if (name == "mixture") {
      need(1, 1);
      return ProcessSpec::exchangeable_mixture(level_rule(args[0]));
    }
    if (name == "moving_max") {
      need(2, 2);
      return ProcessSpec::moving_max(parse_count(args[0], "window"), parse_law(args[1]));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_spec) throw;
    fail(ErrorKind::invalid_spec, e.what());
  }
  fail(ErrorKind::invalid_spec, "unknown process kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Simulation

std::uint64_t integer_sqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

namespace {

class Stepper {
 public:
  Stepper(const ProcessSpec& spec, std::uint64_t seed) : spec_(spec), rng_(make_rng(seed)) {
    switch (spec_.kind) {
      case ProcessKind::iid: break;
      case ProcessKind::lindley:
        state_ = 0.0;
        for (std::uint64_t i = 0; i < spec_.burn_in; ++i) next();
        break;
      case ProcessKind::metropolis:
        state_ = spec_.law.quantile(0.5);
        density_ = *spec_.law.pdf(state_);
        for (std::uint64_t i = 0; i < spec_.burn_in; ++i) next();
        break;
      case ProcessKind::exchangeable_mixture: {
        const double u = uniform01(rng_);
        component_ = static_cast<std::uint64_t>(std::min(std::floor(1.0 / u), static_cast<double>(kMaxIndex)));
        first_ = component_ >= (std::uint64_t{1} << 31) ? kMaxIndex : component_ * component_;
        break;
      }
      case ProcessKind::moving_max:
        for (std::uint64_t i = 0; i + 1 < spec_.window; ++i) window_.push_back(spec_.law.sample(rng_));
        break;
    }
  }

  double next() {
    switch (spec_.kind) {
      case ProcessKind::iid: return spec_.law.sample(rng_);
      case ProcessKind::lindley:
        state_ = std::max(0.0, state_ + spec_.law.sample(rng_));
        return state_;
      case ProcessKind::metropolis: {
        const double y = state_ + spec_.proposal.sample(rng_);
        const double fy = *spec_.law.pdf(y);
        const double psi = density_ > 0.0 ? std::min(fy / density_, 1.0) : 1.0;
        if (uniform01(rng_) <= psi) {
          state_ = y;
          density_ = fy;
        }
        return state_;
      }
      case ProcessKind::exchangeable_mixture: {
        const double u = uniform01(rng_);
        const auto n = static_cast<std::uint64_t>(std::min(std::ceil(1.0 / u), static_cast<double>(kMaxIndex)));
        return spec_.levels.level(std::max(first_, n));
      }
      case ProcessKind::moving_max: {
        window_.push_back(spec_.law.sample(rng_));
        const double m = *std::max_element(window_.begin(), window_.end());
        window_.pop_front();
        return m;
      }
    }
    return 0.0;
  }

  std::optional<std::uint64_t> component() const {
    if (spec_.kind == ProcessKind::exchangeable_mixture) return component_;
    return std::nullopt;
  }

 private:
  const ProcessSpec& spec_;
  Rng rng_;
  double state_ = 0.0;
  double density_ = 0.0;
  std::uint64_t component_ = 0;
  std::uint64_t first_ = 1;
  std::deque<double> window_;
};

}  // namespace

SamplePath generate(const ProcessSpec& spec, std::uint64_t seed, std::uint64_t length) {
  require(length >= 1, ErrorKind::invalid_argument, "path length must be >= 1");
  Stepper stepper(spec, seed);
  SamplePath path;
  path.spec = spec.describe();
  path.seed = seed;
  path.burn_in = spec.is_markov() ? spec.burn_in : 0;
  path.mixture_component = stepper.component();
  path.values.resize(length);
  for (std::uint64_t i = 0; i < length; ++i) {
    path.values[i] = stepper.next();
    if (spec.kind == ProcessKind::lindley && path.values[i] == 0.0) path.regeneration_marks.push_back(i);
  }
  return path;
}

std::vector<double> running_maxima(const ProcessSpec& spec, std::uint64_t seed, const std::vector<std::uint64_t>& at) {
  require(!at.empty() && at.front() >= 1 && std::is_sorted(at.begin(), at.end()), ErrorKind::invalid_argument,
          "running maxima need ascending positive block sizes");
  Stepper stepper(spec, seed);
  std::vector<double> out;
  out.reserve(at.size());
  double m = -kInf;
  std::uint64_t done = 0;
  for (std::uint64_t n : at) {
    for (; done < n; ++done) m = std::max(m, stepper.next());
    out.push_back(m);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exact laws

std::uint64_t mixture_level_index(const LevelRule& levels, double x) {
  return first_index_where([&](std::uint64_t k) { return levels.level(k) > x; }, 1, kMaxIndex) - 1;
}

namespace {

// (K/(K+1)) (1 - 1/N)^count with N the level index of x and K = floor(sqrt N).
double mixture_power(const LevelRule& levels, double x, double count) {
  const std::uint64_t big_n = mixture_level_index(levels, x);
  if (big_n == 0) return 0.0;
  const double k = static_cast<double>(integer_sqrt(big_n));
  if (count == 0.0) return k / (k + 1.0);
  return k / (k + 1.0) * std::exp(count * std::log1p(-1.0 / static_cast<double>(big_n)));
}

DistFn mixture_marginal(const LevelRule& levels) {
  return laws::jump_rule(
      levels,
      [](std::uint64_t n) {
        const double k = static_cast<double>(integer_sqrt(n));
        return 1.0 / (k + 1.0) + k / (k + 1.0) / static_cast<double>(n);
      },
      1, "mixture-marginal(" + levels.name + ")");
}

void require_exact(const ProcessSpec& spec) {
  require(has_exact_max_law(spec), ErrorKind::not_exactly_computable,
          std::string(to_string(spec.kind)) + " has no closed-form maximum law");
}

}  // namespace

std::optional<DistFn> marginal_law(const ProcessSpec& spec) {
  switch (spec.kind) {
    case ProcessKind::iid: return spec.law;
    case ProcessKind::metropolis: return spec.law;
    case ProcessKind::moving_max:
      return spec.window == 1 ? spec.law : laws::power(spec.law, static_cast<double>(spec.window));
    case ProcessKind::exchangeable_mixture: return mixture_marginal(spec.levels);
    case ProcessKind::lindley: return std::nullopt;
  }
  return std::nullopt;
}

bool has_exact_max_law(const ProcessSpec& spec) {
  return spec.kind == ProcessKind::iid || spec.kind == ProcessKind::moving_max ||
         spec.kind == ProcessKind::exchangeable_mixture;
}

double exact_max_cdf(const ProcessSpec& spec, std::uint64_t n, double x) {
  require_exact(spec);
  require(n >= 1, ErrorKind::invalid_argument, "block size must be >= 1");
  switch (spec.kind) {
    case ProcessKind::iid: return spec.law.pow_n(x, static_cast<double>(n));
    case ProcessKind::moving_max: return spec.law.pow_n(x, static_cast<double>(n + spec.window - 1));
    default: return mixture_power(spec.levels, x, static_cast<double>(n));
  }
}

double exact_max_quantile(const ProcessSpec& spec, std::uint64_t n, double gamma) {
  require_exact(spec);
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::invalid_argument, "gamma must lie in (0,1)");
  require(n >= 1, ErrorKind::invalid_argument, "block size must be >= 1");
  if (spec.kind == ProcessKind::exchangeable_mixture) {
    const std::uint64_t big_n = first_index_where(
        [&](std::uint64_t k) { return mixture_power(spec.levels, spec.levels.level(k), static_cast<double>(n)) >= gamma; },
        1, kMaxIndex);
    return spec.levels.level(big_n);
  }
  const double count = static_cast<double>(spec.kind == ProcessKind::iid ? n : n + spec.window - 1);
  const double p = std::exp(std::log(gamma) / count);
  double x = spec.law.quantile(p);
  // settle rounding of gamma^{1/count}: move to the exact infimum
  if (exact_max_cdf(spec, n, x) < gamma) {
    x = first_double_where([&](double y) { return exact_max_cdf(spec, n, y) >= gamma; }, x, spec.law.right_end());
  } else {
    const double lo = spec.law.quantile(std::nextafter(p, 0.0));
    x = first_double_where([&](double y) { return exact_max_cdf(spec, n, y) >= gamma; }, lo, x);
  }
  return x;
}

double exact_joint_block_cdf(const ProcessSpec& spec, std::uint64_t a, std::uint64_t gap, std::uint64_t b,
                             double x) {
  require_exact(spec);
  require(a >= 1 && b >= 1, ErrorKind::invalid_argument, "blocks must be non-empty");
  switch (spec.kind) {
    case ProcessKind::iid: return spec.law.pow_n(x, static_cast<double>(a + b));
    case ProcessKind::moving_max: {
      const std::uint64_t w = spec.window;
      const std::uint64_t overlap = gap + 1 < w ? w - 1 - gap : 0;
      return spec.law.pow_n(x, static_cast<double>(a + b + 2 * (w - 1) - overlap));
    }
    default: return mixture_power(spec.levels, x, static_cast<double>(a + b));
  }
}

double exact_skeleton_cdf(const ProcessSpec& spec, std::uint64_t m, std::uint64_t j, double x) {
  require_exact(spec);
  require(m >= 1 && j >= 1, ErrorKind::invalid_argument, "skeleton needs m, j >= 1");
  switch (spec.kind) {
    case ProcessKind::iid: return spec.law.pow_n(x, static_cast<double>(j));
    case ProcessKind::moving_max: {
      const std::uint64_t w = spec.window;
      const std::uint64_t base = m >= w ? j * w : (j - 1) * m + w;
      return spec.law.pow_n(x, static_cast<double>(base));
    }
    default: return mixture_power(spec.levels, x, static_cast<double>(j));
  }
}

// ---------------------------------------------------------------------------
// Checks

MetropolisConfigCheck metropolis_config_check(const std::function<double(double)>& target_density,
                                              const std::function<double(double)>& proposal_density, double a,
                                              double b) {
  require(a < b, ErrorKind::invalid_argument, "config check needs a < b");
  MetropolisConfigCheck out;
  const double len = b - a;

  // (i) one contiguous run of positive density on a wide grid
  {
    const int points = 8000;
    const double lo = a - 10.0 * len;
    const double hi = b + 10.0 * len;
    int runs = 0;
    bool inside = false;
    for (int i = 0; i <= points; ++i) {
      const bool positive = target_density(lo + (hi - lo) * i / points) > 0.0;
      if (positive && !inside) ++runs;
      inside = positive;
    }
    out.support_connected = runs == 1;
    if (!out.support_connected)
      out.details.push_back("(i) support of f has " + std::to_string(runs) + " components on the probe grid");
  }

  // (ii) monotone on [a,b], no constancy run longer than (b-a)/4
  {
    const int points = 400;
    const double step = len / points;
    std::vector<double> f(points + 1);
    for (int i = 0; i <= points; ++i) f[i] = target_density(a + step * i);
    bool up = true;
    bool down = true;
    int run = 0;
    int longest = 0;
    for (int i = 1; i <= points; ++i) {
      up = up && f[i] >= f[i - 1];
      down = down && f[i] <= f[i - 1];
      run = f[i] == f[i - 1] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const bool short_runs = longest * step <= len / 4.0;
    out.monotone_on_interval = (up || down) && short_runs;
    if (!(up || down)) out.details.push_back("(ii) f is not monotone on [a,b]");
    if (!short_runs) out.details.push_back("(ii) f is constant on a stretch longer than (b-a)/4");
  }

  // (iii) h >= k_h > 0 on |x| <= (b-a)/3
  {
    const double reach = len / 3.0;
    const int points = 600;
    double k_h = kInf;
    for (int i = 0; i <= points; ++i) k_h = std::min(k_h, proposal_density(-reach + 2.0 * reach * i / points));
    out.k_h = k_h;
    out.proposal_bounded_below = k_h > 0.0;
    if (!out.proposal_bounded_below) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "(iii) proposal density vanishes within |x| <= %.6g", reach);
      out.details.push_back(buf);
    }
  }
  out.ok = out.support_connected && out.monotone_on_interval && out.proposal_bounded_below;
  return out;
}

TailConditionResult target_tail_condition(const DistFn& target, double m, const ProbePolicy& probe) {
  require(m > 0.0, ErrorKind::invalid_argument, "shift m must be positive");
  TailConditionResult out;
  for (double u : probe_levels(target, probe)) {
    const double s = target.sf(u);
    if (!(s > 0.0) || !std::isfinite(u)) continue;
    out.probe_levels.push_back(u);
    out.ratio_track.push_back(target.sf(u + m) / s);
  }
  out.holds = last_quarter_within(out.ratio_track, 1.0, probe.epsilon);
  return out;
}

TailComparison lindley_step_tail_vs_stationary(const DistFn& step, const std::vector<double>& path_values,
                                               const ProbePolicy& probe) {
  require(path_values.size() >= 100000, ErrorKind::insufficient_data,
          "stationary tail needs a path of at least 1e5 values");
  const DistFn stationary = laws::empirical(path_values);
  TailComparison out;
  if (std::isfinite(step.right_end()) && step.right_end() != stationary.right_end()) {
    out.verdict = TailVerdict::mismatched_right_ends;
    return out;
  }
  // tail probabilities log-spaced from 1/2 down to 1e-3
  const std::size_t count = std::max<std::size_t>(kMinProbeLevels, static_cast<std::size_t>(probe.depth));
  for (std::size_t i = 0; i < count; ++i) {
    const double q = 0.5 * std::pow(2e-3, static_cast<double>(i) / static_cast<double>(count - 1));
    const double x = stationary.isf(q);
    const double s = stationary.sf(x);
    if (!(s > 0.0) || (!out.probe_levels.empty() && x <= out.probe_levels.back())) continue;
    out.probe_levels.push_back(x);
    out.ratio_track.push_back(step.sf(x) / s);
  }
  out.verdict = classify_ratio_track(out.ratio_track, probe.epsilon);
  return out;
}

}  // namespace phdf
