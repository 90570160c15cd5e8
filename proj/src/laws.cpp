#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <variant>

#include <boost/math/distributions/beta.hpp>

#include "phdf/distrib.hpp"
#include "phdf/error.hpp"
#include "phdf/numeric.hpp"

namespace phdf {

// ---------------------------------------------------------------------------
// Law defaults

double Law::log_cdf(double x) const {
  const double s = sf(x);
  if (s > 0.5) return std::log(cdf(x));
  return std::log1p(-s);
}

double Law::quantile(double p) const {
  if (!(p > 0.0)) return left_end();
  if (p >= 1.0) return right_end();
  return first_double_where([&](double x) { return cdf(x) >= p; }, left_end(), right_end());
}

double Law::isf(double q) const {
  if (!(q > 0.0)) return right_end();
  if (q >= 1.0) return left_end();
  return first_double_where([&](double x) { return sf(x) <= q; }, left_end(), right_end());
}

double Law::sample(Rng& rng) const { return isf(uniform01(rng)); }

DistFn::DistFn(std::shared_ptr<const Law> law) : law_(std::move(law)) {
  require(static_cast<bool>(law_), ErrorKind::invalid_argument, "null law");
}

double DistFn::pow_n(double x, double n) const {
  const double lc = log_cdf(x);
  if (lc == -kInf) return 0.0;
  return std::exp(n * lc);
}

LevelRule level_rule(std::string_view name) {
  if (name == "n") {
    return {"n", [](std::uint64_t n) { return static_cast<double>(n); }, kInf};
  }
  if (name == "sqrt") {
    return {"sqrt", [](std::uint64_t n) { return std::sqrt(static_cast<double>(n)); }, kInf};
  }
  if (name == "superheavy") {
    return {"superheavy",
            [](std::uint64_t n) {
              const double l = std::log(static_cast<double>(n));
              return std::exp(l * l);
            },
            kInf};
  }
  if (name.rfind("logext:", 0) == 0) {
    // logext:h:v:slope  ->  v + slope ln(n/h)
    const std::string text(name);
    double h = 0.0;
    double v = 0.0;
    double slope = 0.0;
    int used = 0;
    if (std::sscanf(text.c_str(), "logext:%lf:%lf:%lf%n", &h, &v, &slope, &used) == 3 &&
        static_cast<std::size_t>(used) == text.size() && h >= 1.0 && slope > 0.0 && std::isfinite(v)) {
      return {text, [h, v, slope](std::uint64_t n) { return v + slope * std::log(static_cast<double>(n) / h); }, kInf};
    }
  }
  fail(ErrorKind::invalid_argument, "unknown level rule '" + std::string(name) + "'");
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ExponentialLaw final : public Law {
 public:
  explicit ExponentialLaw(double rate) : rate_(rate) {}
  double cdf(double x) const override { return x <= 0.0 ? 0.0 : -std::expm1(-rate_ * x); }
  double sf(double x) const override { return x <= 0.0 ? 1.0 : std::exp(-rate_ * x); }
  double log_cdf(double x) const override {
    if (x <= 0.0) return -kInf;
    return rate_ * x < 0.6931471805599453 ? std::log(-std::expm1(-rate_ * x))
                                           : std::log1p(-std::exp(-rate_ * x));
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return 0.0;
    if (p >= 1.0) return kInf;
    return -std::log1p(-p) / rate_;
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return kInf;
    if (q >= 1.0) return 0.0;
    return -std::log(q) / rate_;
  }
  double left_end() const override { return 0.0; }
  std::optional<double> pdf(double x) const override {
    return x < 0.0 ? 0.0 : rate_ * std::exp(-rate_ * x);
  }
  std::optional<double> mean() const override { return 1.0 / rate_; }
  std::string describe() const override { return "exp(" + num(rate_) + ")"; }

 private:
  double rate_;
};

class ParetoLaw final : public Law {
 public:
  ParetoLaw(double alpha, double scale) : alpha_(alpha), scale_(scale) {}
  double cdf(double x) const override {
    return x <= 0.0 ? 0.0 : -std::expm1(-alpha_ * std::log1p(x / scale_));
  }
  double sf(double x) const override {
    return x <= 0.0 ? 1.0 : std::exp(-alpha_ * std::log1p(x / scale_));
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return 0.0;
    if (p >= 1.0) return kInf;
    return scale_ * std::expm1(-std::log1p(-p) / alpha_);
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return kInf;
    if (q >= 1.0) return 0.0;
    return scale_ * std::expm1(-std::log(q) / alpha_);
  }
  double left_end() const override { return 0.0; }
  std::optional<double> pdf(double x) const override {
    if (x < 0.0) return 0.0;
    return alpha_ / scale_ * std::exp(-(alpha_ + 1.0) * std::log1p(x / scale_));
  }
  std::optional<double> mean() const override {
    return alpha_ > 1.0 ? scale_ / (alpha_ - 1.0) : kInf;
  }
  std::string describe() const override {
    return "pareto(" + num(alpha_) + "," + num(scale_) + ")";
  }

 private:
  double alpha_;
  double scale_;
};

class UniformLaw final : public Law {
 public:
  UniformLaw(double a, double b) : a_(a), b_(b) {}
  double cdf(double x) const override {
    if (x <= a_) return 0.0;
    if (x >= b_) return 1.0;
    return (x - a_) / (b_ - a_);
  }
  double sf(double x) const override {
    if (x <= a_) return 1.0;
    if (x >= b_) return 0.0;
    return (b_ - x) / (b_ - a_);
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return a_;
    if (p >= 1.0) return b_;
    return a_ + p * (b_ - a_);
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return b_;
    if (q >= 1.0) return a_;
    return b_ - q * (b_ - a_);
  }
  double left_end() const override { return a_; }
  double right_end() const override { return b_; }
  std::optional<double> pdf(double x) const override {
    return (x >= a_ && x <= b_) ? 1.0 / (b_ - a_) : 0.0;
  }
  std::optional<double> mean() const override { return 0.5 * (a_ + b_); }
  std::string describe() const override { return "uniform(" + num(a_) + "," + num(b_) + ")"; }

 private:
  double a_;
  double b_;
};

class BetaLaw final : public Law {
 public:
  BetaLaw(double c, double d) : dist_(c, d), c_(c), d_(d) {}
  double cdf(double x) const override {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return boost::math::cdf(dist_, x);
  }
  double sf(double x) const override {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return boost::math::cdf(boost::math::complement(dist_, x));
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return 0.0;
    if (p >= 1.0) return 1.0;
    return boost::math::quantile(dist_, p);
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return 1.0;
    if (q >= 1.0) return 0.0;
    return boost::math::quantile(boost::math::complement(dist_, q));
  }
  double left_end() const override { return 0.0; }
  double right_end() const override { return 1.0; }
  std::optional<double> pdf(double x) const override {
    if (x < 0.0 || x > 1.0) return 0.0;
    if ((x == 0.0 && c_ < 1.0) || (x == 1.0 && d_ < 1.0)) return kInf;
    return boost::math::pdf(dist_, x);
  }
  std::optional<double> mean() const override { return c_ / (c_ + d_); }
  std::string describe() const override { return "beta(" + num(c_) + "," + num(d_) + ")"; }

 private:
  boost::math::beta_distribution<double> dist_;
  double c_;
  double d_;
};

class SuperheavyLaw final : public Law {
 public:
  double cdf(double x) const override {
    return x <= 1.0 ? 0.0 : -std::expm1(-std::sqrt(std::log(x)));
  }
  double sf(double x) const override {
    return x <= 1.0 ? 1.0 : std::exp(-std::sqrt(std::log(x)));
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return 1.0;
    if (p >= 1.0) return kInf;
    const double l = std::log1p(-p);
    return std::exp(l * l);
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return kInf;
    if (q >= 1.0) return 1.0;
    const double l = std::log(q);
    return std::exp(l * l);
  }
  double left_end() const override { return 1.0; }
  std::optional<double> pdf(double x) const override {
    if (x <= 1.0) return 0.0;
    const double r = std::sqrt(std::log(x));
    return std::exp(-r) / (2.0 * r * x);
  }
  std::optional<double> mean() const override { return kInf; }
  std::string describe() const override { return "superheavy"; }
};

class SymmetricParetoLaw final : public Law {
 public:
  explicit SymmetricParetoLaw(double alpha) : alpha_(alpha) {}
  double half_tail(double x) const { return 0.5 * std::exp(-alpha_ * std::log1p(x)); }
  double cdf(double x) const override { return x >= 0.0 ? 1.0 - half_tail(x) : half_tail(-x); }
  double sf(double x) const override { return x >= 0.0 ? half_tail(x) : 1.0 - half_tail(-x); }
  double isf(double q) const override {
    if (!(q > 0.0)) return kInf;
    if (q >= 1.0) return -kInf;
    if (q <= 0.5) return std::expm1(-std::log(2.0 * q) / alpha_);
    return -std::expm1(-std::log(2.0 * (1.0 - q)) / alpha_);
  }
  double quantile(double p) const override { return -isf(p); }
  std::optional<double> pdf(double x) const override {
    return 0.5 * alpha_ * std::exp(-(alpha_ + 1.0) * std::log1p(std::fabs(x)));
  }
  std::optional<double> mean() const override {
    if (alpha_ > 1.0) return 0.0;
    return std::nullopt;
  }
  std::string describe() const override { return "sympareto(" + num(alpha_) + ")"; }

 private:
  double alpha_;
};

// Purely jump law with atoms at level(n), n in [first, last], and
// 1 - F(level(n)) = tail(n). Levels strictly increase with n.
class JumpRuleLaw final : public Law {
 public:
  JumpRuleLaw(std::function<double(std::uint64_t)> level, std::function<double(std::uint64_t)> tail,
              std::uint64_t first, std::uint64_t last, double sup, std::string description)
      : level_(std::move(level)),
        tail_(std::move(tail)),
        first_(first),
        last_(last),
        sup_(sup),
        description_(std::move(description)) {}

  // Largest n with level(n) <= x, or first_ - 1 when x is below every atom.
  std::uint64_t index_at(double x) const {
    return first_index_where([&](std::uint64_t n) { return level_(n) > x; }, first_, last_) - 1;
  }
  double tail_at(std::uint64_t n) const { return n < first_ ? 1.0 : tail_(n); }

  double cdf(double x) const override { return 1.0 - tail_at(index_at(x)); }
  double sf(double x) const override { return tail_at(index_at(x)); }
  double atom_mass(double x) const override {
    const std::uint64_t n = index_at(x);
    if (n < first_ || level_(n) != x) return 0.0;
    return tail_at(n - 1) - tail_at(n);
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return level_(first_);
    const std::uint64_t n =
        first_index_where([&](std::uint64_t k) { return 1.0 - tail_(k) >= p; }, first_, last_);
    if (n > last_) return right_end();
    return level_(n);
  }
  double isf(double q) const override {
    if (q >= 1.0) return level_(first_);
    const std::uint64_t n =
        first_index_where([&](std::uint64_t k) { return tail_(k) <= q; }, first_, last_);
    if (n > last_) return right_end();
    return level_(n);
  }
  double left_end() const override { return level_(first_); }
  double right_end() const override { return last_ == kMaxIndex ? sup_ : level_(last_); }
  AtomModel atom_model() const override { return AtomModel::jump; }
  std::string describe() const override { return description_; }

 private:
  std::function<double(std::uint64_t)> level_;
  std::function<double(std::uint64_t)> tail_;
  std::uint64_t first_;
  std::uint64_t last_;
  double sup_;
  std::string description_;
};

class ShiftedLaw final : public Law {
 public:
  ShiftedLaw(DistFn base, double offset) : base_(std::move(base)), offset_(offset) {}
  double cdf(double x) const override { return base_.cdf(x - offset_); }
  double sf(double x) const override { return base_.sf(x - offset_); }
  double log_cdf(double x) const override { return base_.log_cdf(x - offset_); }
  double atom_mass(double x) const override { return base_.atom_mass(x - offset_); }
  double quantile(double p) const override { return base_.quantile(p) + offset_; }
  double isf(double q) const override { return base_.isf(q) + offset_; }
  double left_end() const override { return base_.left_end() + offset_; }
  double right_end() const override { return base_.right_end() + offset_; }
  AtomModel atom_model() const override { return base_.atom_model(); }
  std::optional<double> pdf(double x) const override { return base_.pdf(x - offset_); }
  std::optional<double> mean() const override {
    auto m = base_.mean();
    if (!m) return std::nullopt;
    return *m + offset_;
  }
  double sample(Rng& rng) const override { return base_.sample(rng) + offset_; }
  std::string describe() const override {
    return "shift(" + base_.describe() + "," + num(offset_) + ")";
  }

 private:
  DistFn base_;
  double offset_;
};

class PowerLaw final : public Law {
 public:
  PowerLaw(DistFn base, double exponent) : base_(std::move(base)), exponent_(exponent) {}
  double cdf(double x) const override { return base_.pow_n(x, exponent_); }
  double sf(double x) const override {
    const double lc = base_.log_cdf(x);
    if (lc == -kInf) return 1.0;
    return -std::expm1(exponent_ * lc);
  }
  double log_cdf(double x) const override { return exponent_ * base_.log_cdf(x); }
  double atom_mass(double x) const override {
    const double m = base_.atom_mass(x);
    if (m == 0.0) return 0.0;
    return cdf(x) - std::pow(base_.left_limit(x), exponent_);
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return base_.left_end();
    if (p >= 1.0) return base_.right_end();
    return base_.quantile(std::exp(std::log(p) / exponent_));
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return base_.right_end();
    if (q >= 1.0) return base_.left_end();
    return base_.isf(-std::expm1(std::log1p(-q) / exponent_));
  }
  double left_end() const override { return base_.left_end(); }
  double right_end() const override { return base_.right_end(); }
  AtomModel atom_model() const override { return base_.atom_model(); }
  std::optional<double> pdf(double x) const override {
    auto f = base_.pdf(x);
    if (!f) return std::nullopt;
    return exponent_ * std::exp((exponent_ - 1.0) * base_.log_cdf(x)) * *f;
  }
  std::string describe() const override {
    return "power(" + base_.describe() + "," + num(exponent_) + ")";
  }

 private:
  DistFn base_;
  double exponent_;
};

class EmpiricalLaw final : public Law {
 public:
  explicit EmpiricalLaw(std::vector<double> sample) : sorted_(std::move(sample)) {
    std::sort(sorted_.begin(), sorted_.end());
  }
  double count_le(double x) const {
    return static_cast<double>(std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin());
  }
  double size() const { return static_cast<double>(sorted_.size()); }
  double cdf(double x) const override { return count_le(x) / size(); }
  double sf(double x) const override { return (size() - count_le(x)) / size(); }
  double atom_mass(double x) const override {
    auto [lo, hi] = std::equal_range(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(hi - lo) / size();
  }
  double quantile(double p) const override {
    if (!(p > 0.0)) return sorted_.front();
    if (p >= 1.0) return sorted_.back();
    const auto k = static_cast<std::size_t>(std::ceil(p * size()));
    return sorted_[std::clamp<std::size_t>(k, 1, sorted_.size()) - 1];
  }
  double isf(double q) const override {
    if (!(q > 0.0)) return sorted_.back();
    if (q >= 1.0) return sorted_.front();
    const double n = size();
    const double k = n - std::floor(n * q);
    return sorted_[static_cast<std::size_t>(std::clamp(k, 1.0, n)) - 1];
  }
  double left_end() const override { return sorted_.front(); }
  double right_end() const override { return sorted_.back(); }
  AtomModel atom_model() const override { return AtomModel::jump; }
  std::optional<double> mean() const override {
    return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) / size();
  }
  double sample(Rng& rng) const override {
    const auto i = static_cast<std::size_t>(uniform01(rng) * size());
    return sorted_[std::min(i, sorted_.size() - 1)];
  }
  std::string describe() const override {
    return "empirical(n=" + std::to_string(sorted_.size()) + ")";
  }

 private:
  std::vector<double> sorted_;
};

class CustomContinuousLaw final : public Law {
 public:
  explicit CustomContinuousLaw(laws::CustomLaw spec) : spec_(std::move(spec)) {}
  double sf(double x) const override { return spec_.sf(x); }
  double cdf(double x) const override { return 1.0 - spec_.sf(x); }
  double isf(double q) const override {
    if (spec_.isf && q > 0.0 && q < 1.0) return spec_.isf(q);
    return Law::isf(q);
  }
  double quantile(double p) const override {
    if (p > 0.0 && p < 1.0) return isf(1.0 - p);
    return Law::quantile(p);
  }
  double left_end() const override { return spec_.left_end; }
  double right_end() const override { return spec_.right_end; }
  std::optional<double> pdf(double x) const override {
    if (spec_.pdf) return spec_.pdf(x);
    return std::nullopt;
  }
  std::string describe() const override { return spec_.description; }

 private:
  laws::CustomLaw spec_;
};

}  // namespace

namespace laws {

DistFn exponential(double rate) {
  require(rate > 0.0 && std::isfinite(rate), ErrorKind::invalid_argument, "exp: rate must be > 0");
  return DistFn(std::make_shared<ExponentialLaw>(rate));
}

DistFn pareto(double alpha, double scale) {
  require(alpha > 0.0 && scale > 0.0, ErrorKind::invalid_argument, "pareto: alpha, scale must be > 0");
  return DistFn(std::make_shared<ParetoLaw>(alpha, scale));
}

DistFn uniform(double a, double b) {
  require(a < b, ErrorKind::invalid_argument, "uniform: need a < b");
  return DistFn(std::make_shared<UniformLaw>(a, b));
}

DistFn beta(double c, double d) {
  require(c > 0.0 && d > 0.0, ErrorKind::invalid_argument, "beta: c, d must be > 0");
  return DistFn(std::make_shared<BetaLaw>(c, d));
}

DistFn geometric(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::invalid_argument, "geometric: p must lie in (0,1)");
  const double log_q = std::log1p(-p);
  return DistFn(std::make_shared<JumpRuleLaw>(
      [](std::uint64_t n) { return static_cast<double>(n); },
      [log_q](std::uint64_t n) { return std::exp(static_cast<double>(n) * log_q); }, 1, kMaxIndex,
      kInf, "geometric(" + num(p) + ")"));
}

DistFn superheavy() { return DistFn(std::make_shared<SuperheavyLaw>()); }

DistFn symmetric_pareto(double alpha) {
  require(alpha > 0.0, ErrorKind::invalid_argument, "sympareto: alpha must be > 0");
  return DistFn(std::make_shared<SymmetricParetoLaw>(alpha));
}

DistFn thm2_component(std::uint64_t k, LevelRule levels) {
  require(k >= 1 && k < (1ULL << 31), ErrorKind::invalid_argument, "thm2-component: k out of range");
  const std::string description = "thm2-component(" + std::to_string(k) + "," + levels.name + ")";
  return DistFn(std::make_shared<JumpRuleLaw>(
      levels.level, [](std::uint64_t n) { return 1.0 / static_cast<double>(n); }, k * k, kMaxIndex,
      levels.sup, description));
}

DistFn jump_sequence(std::vector<double> levels, std::vector<double> tails) {
  require(!levels.empty() && levels.size() == tails.size(), ErrorKind::invalid_argument,
          "jumpseq: levels and tail probabilities must be non-empty and of equal length");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    require(std::isfinite(levels[i]) && tails[i] >= 0.0 && tails[i] <= 1.0,
            ErrorKind::invalid_argument, "jumpseq: malformed entry");
    if (i > 0) {
      require(levels[i] > levels[i - 1] && tails[i] <= tails[i - 1], ErrorKind::invalid_argument,
              "jumpseq: levels must increase and tail probabilities must not increase");
    }
  }
  require(tails.back() == 0.0, ErrorKind::invalid_argument, "jumpseq: last tail probability must be 0");
  std::string description = "jumpseq([";
  for (std::size_t i = 0; i < levels.size(); ++i) description += (i ? "," : "") + num(levels[i]);
  description += "],[";
  for (std::size_t i = 0; i < tails.size(); ++i) description += (i ? "," : "") + num(tails[i]);
  description += "])";
  const auto last = static_cast<std::uint64_t>(levels.size());
  auto lv = std::make_shared<std::vector<double>>(std::move(levels));
  auto tv = std::make_shared<std::vector<double>>(std::move(tails));
  return DistFn(std::make_shared<JumpRuleLaw>([lv](std::uint64_t n) { return (*lv)[n - 1]; },
                                              [tv](std::uint64_t n) { return (*tv)[n - 1]; }, 1,
                                              last, kInf, description));
}

DistFn jump_rule(LevelRule levels, std::function<double(std::uint64_t)> tail, std::uint64_t first,
                 std::string description) {
  require(first >= 1, ErrorKind::invalid_argument, "jump rule: first index must be >= 1");
  return DistFn(std::make_shared<JumpRuleLaw>(levels.level, std::move(tail), first, kMaxIndex,
                                              levels.sup, std::move(description)));
}

DistFn shifted(DistFn base, double offset) {
  require(std::isfinite(offset), ErrorKind::invalid_argument, "shift: offset must be finite");
  return DistFn(std::make_shared<ShiftedLaw>(std::move(base), offset));
}

DistFn power(DistFn base, double exponent) {
  require(exponent > 0.0 && std::isfinite(exponent), ErrorKind::invalid_argument,
          "power: exponent must be > 0");
  return DistFn(std::make_shared<PowerLaw>(std::move(base), exponent));
}

DistFn empirical(std::vector<double> sample) {
  require(!sample.empty(), ErrorKind::insufficient_data, "empirical law of an empty sample");
  return DistFn(std::make_shared<EmpiricalLaw>(std::move(sample)));
}

DistFn custom(CustomLaw spec) {
  require(static_cast<bool>(spec.sf), ErrorKind::invalid_argument, "custom law needs a survival function");
  return DistFn(std::make_shared<CustomContinuousLaw>(std::move(spec)));
}

}  // namespace laws

// ---------------------------------------------------------------------------
// Catalog parser

namespace {

struct Expr;
using Arg = std::variant<double, std::string, std::vector<double>, std::shared_ptr<Expr>>;
struct Expr {
  std::string name;
  std::vector<Arg> args;
  bool called = false;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::shared_ptr<Expr> parse() {
    auto e = expr();
    skip_ws();
    if (pos_ != text_.size()) error("trailing input");
    return e;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::invalid_spec,
         "cannot parse law '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " + what);
  }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) error(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-' || text_[pos_] == '_'))
      ++pos_;
    if (start == pos_) error("expected a name");
    return std::string(text_.substr(start, pos_ - start));
  }
  double number() {
    skip_ws();
    const std::string rest(text_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) error("expected a number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return v;
  }
  bool number_ahead() {
    skip_ws();
    if (pos_ >= text_.size()) return false;
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '+') return true;
    if (c == '-' && pos_ + 1 < text_.size()) {
      const char d = text_[pos_ + 1];
      return std::isdigit(static_cast<unsigned char>(d)) || d == '.';
    }
    return false;
  }
  std::shared_ptr<Expr> expr() {
    auto e = std::make_shared<Expr>();
    e->name = ident();
    if (peek('(')) {
      ++pos_;
      e->called = true;
      if (!peek(')')) {
        for (;;) {
          e->args.push_back(arg());
          if (peek(',')) {
            ++pos_;
            continue;
          }
          break;
        }
      }
      expect(')');
    }
    return e;
  }
  Arg arg() {
    if (peek('[')) {
      ++pos_;
      std::vector<double> list;
      if (!peek(']')) {
        for (;;) {
          list.push_back(number());
          if (peek(',')) {
            ++pos_;
            continue;
          }
          break;
        }
      }
      expect(']');
      return list;
    }
    if (number_ahead()) return number();
    auto e = expr();
    if (!e->called) return e->name;
    return e;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

DistFn build(const Expr& e);

double as_number(const Expr& e, std::size_t i) {
  if (i >= e.args.size()) fail(ErrorKind::invalid_spec, e.name + ": missing argument " + std::to_string(i + 1));
  if (auto d = std::get_if<double>(&e.args[i])) return *d;
  fail(ErrorKind::invalid_spec, e.name + ": argument " + std::to_string(i + 1) + " must be a number");
}

DistFn as_law(const Expr& e, std::size_t i) {
  if (i < e.args.size()) {
    if (auto sub = std::get_if<std::shared_ptr<Expr>>(&e.args[i])) return build(**sub);
    if (auto name = std::get_if<std::string>(&e.args[i])) {
      Expr bare;
      bare.name = *name;
      return build(bare);
    }
  }
  fail(ErrorKind::invalid_spec, e.name + ": argument " + std::to_string(i + 1) + " must be a law");
}

void arity(const Expr& e, std::size_t n) {
  if (e.args.size() != n)
    fail(ErrorKind::invalid_spec, e.name + " takes " + std::to_string(n) + " argument(s)");
}

DistFn build(const Expr& e) {
  try {
    if (e.name == "exp") return arity(e, 1), laws::exponential(as_number(e, 0));
    if (e.name == "pareto") return arity(e, 2), laws::pareto(as_number(e, 0), as_number(e, 1));
    if (e.name == "uniform") return arity(e, 2), laws::uniform(as_number(e, 0), as_number(e, 1));
    if (e.name == "beta") return arity(e, 2), laws::beta(as_number(e, 0), as_number(e, 1));
    if (e.name == "geometric") return arity(e, 1), laws::geometric(as_number(e, 0));
    if (e.name == "superheavy") return arity(e, 0), laws::superheavy();
    if (e.name == "sympareto") return arity(e, 1), laws::symmetric_pareto(as_number(e, 0));
    if (e.name == "shift") return arity(e, 2), laws::shifted(as_law(e, 0), as_number(e, 1));
    if (e.name == "power") return arity(e, 2), laws::power(as_law(e, 0), as_number(e, 1));
    if (e.name == "thm2-component") {
      arity(e, 2);
      const double k = as_number(e, 0);
      require(k >= 1.0 && k == std::floor(k), ErrorKind::invalid_spec, "thm2-component: k must be a positive integer");
      const auto* rule = std::get_if<std::string>(&e.args[1]);
      require(rule != nullptr, ErrorKind::invalid_spec, "thm2-component: second argument is a level rule name");
      return laws::thm2_component(static_cast<std::uint64_t>(k), level_rule(*rule));
    }
    if (e.name == "jumpseq") {
      arity(e, 2);
      const auto* levels = std::get_if<std::vector<double>>(&e.args[0]);
      const auto* tails = std::get_if<std::vector<double>>(&e.args[1]);
      require(levels && tails, ErrorKind::invalid_spec, "jumpseq takes two lists");
      return laws::jump_sequence(*levels, *tails);
    }
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::invalid_spec) throw;
    fail(ErrorKind::invalid_spec, err.what());
  }
  fail(ErrorKind::invalid_spec, "unknown law '" + e.name + "'");
}

}  // namespace

DistFn parse_law(std::string_view text) { return build(*Parser(text).parse()); }

}  // namespace phdf
