#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "phdf/error.hpp"
#include "phdf/processes.hpp"

using namespace phdf;

namespace {

// DKW radius for an empirical cdf of n points at level alpha
double dkw(std::size_t n, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n))); }

double ks_to(const std::vector<double>& sample, const DistFn& f) {
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double c = f.cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - c, f.left_limit(s[i]) - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  for (double x : pts) {
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), x) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), x) - b.begin()) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

const char* kLindley = "lindley(shift(pareto(2,1),-2))";

}  // namespace

TEST_CASE("process specs parse and print canonically") {
  for (const char* text : {"iid(exp(1))", kLindley, "metropolis(sympareto(2),uniform(-1,1))", "mixture(n)",
                           "moving_max(2,uniform(0,1))"}) {
    const auto spec = parse_process(text);
    CHECK(parse_process(spec.describe()).describe() == spec.describe());
  }
  CHECK(parse_process(kLindley).burn_in == 10000);
  CHECK(parse_process("lindley(shift(pareto(2,1),-2), 500)").burn_in == 500);
  for (const char* bad : {"lindley(exp(1))", "metropolis(exp(1),uniform(0,1))", "moving_max(0,uniform(0,1))",
                          "walk(exp(1))", "iid(exp(1)"}) {
    try {
      parse_process(bad);
      FAIL("accepted " << bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_spec);
    }
  }
}

TEST_CASE("paths are pure functions of spec, seed and length") {
  for (const char* text : {"iid(exp(1))", kLindley, "metropolis(sympareto(2),uniform(-1,1))", "mixture(n)",
                           "moving_max(2,uniform(0,1))"}) {
    const auto spec = parse_process(text);
    const auto a = generate(spec, 42, 3000);
    const auto b = generate(spec, 42, 3000);
    const auto c = generate(spec, 43, 3000);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    // a longer path extends the shorter one
    const auto longer = generate(spec, 42, 5000);
    CHECK(std::equal(a.values.begin(), a.values.end(), longer.values.begin()));
    // running maxima agree with the stored path
    const std::vector<std::uint64_t> at = {1, 10, 999, 3000};
    const auto m = running_maxima(spec, 42, at);
    for (std::size_t i = 0; i < at.size(); ++i) {
      CHECK(m[i] == *std::max_element(a.values.begin(), a.values.begin() + static_cast<std::ptrdiff_t>(at[i])));
    }
  }
}

TEST_CASE("lindley regeneration marks are the visits to zero") {
  const auto path = generate(parse_process(kLindley), 7, 20000);
  std::vector<std::uint64_t> zeros;
  for (std::size_t i = 0; i < path.values.size(); ++i) {
    CHECK(path.values[i] >= 0.0);
    if (path.values[i] == 0.0) zeros.push_back(i);
  }
  CHECK(path.regeneration_marks == zeros);
  CHECK(zeros.size() > 1000);
  CHECK(generate(parse_process("iid(exp(1))"), 7, 100).regeneration_marks.empty());
}

TEST_CASE("exact maximum laws") {
  const auto mix = parse_process("mixture(n)");
  // N = 100: K = 10, P = (K/(K+1)) (1 - 1/N)^n
  CHECK(exact_max_cdf(mix, 100, 100.0) == doctest::Approx(std::pow(0.99, 100) * 10.0 / 11.0).epsilon(1e-14));
  CHECK(exact_max_cdf(mix, 5, 0.5) == 0.0);
  // between levels the law is flat
  CHECK(exact_max_cdf(mix, 100, 100.7) == exact_max_cdf(mix, 100, 100.0));
  CHECK(mixture_level_index(mix.levels, 99.99) == 99);
  CHECK(integer_sqrt(99) == 9);
  CHECK(integer_sqrt(100) == 10);
  CHECK(integer_sqrt((std::uint64_t{1} << 62) - 1) == (std::uint64_t{1} << 31) - 1);
  // marginal tail at v_N
  const auto marg = *marginal_law(mix);
  for (std::uint64_t N : {2ULL, 10ULL, 100ULL, 10000ULL}) {
    const double K = static_cast<double>(integer_sqrt(N));
    CHECK(marg.sf(static_cast<double>(N)) == doctest::Approx(1.0 / (K + 1) + (K / (K + 1)) / N).epsilon(1e-13));
  }

  const auto mm = parse_process("moving_max(2,uniform(0,1))");
  CHECK(exact_max_cdf(mm, 10, 0.9) == doctest::Approx(std::pow(0.9, 11)).epsilon(1e-14));
  CHECK(exact_joint_block_cdf(mm, 3, 0, 2, 0.9) == doctest::Approx(std::pow(0.9, 6)).epsilon(1e-14));
  CHECK(exact_joint_block_cdf(mm, 3, 1, 2, 0.9) == doctest::Approx(std::pow(0.9, 7)).epsilon(1e-14));
  CHECK(exact_skeleton_cdf(mm, 2, 3, 0.9) == doctest::Approx(std::pow(0.9, 6)).epsilon(1e-14));
  CHECK(exact_skeleton_cdf(mm, 1, 3, 0.9) == doctest::Approx(std::pow(0.9, 4)).epsilon(1e-14));
  const double q = exact_max_quantile(mm, 10, 0.5);
  CHECK(exact_max_cdf(mm, 10, q) >= 0.5);
  CHECK(exact_max_cdf(mm, 10, std::nextafter(q, 0.0)) < 0.5);

  const auto iid = parse_process("iid(exp(1))");
  CHECK(exact_max_cdf(iid, 7, 1.0) == doctest::Approx(std::pow(1.0 - std::exp(-1.0), 7)).epsilon(1e-14));
  CHECK_FALSE(has_exact_max_law(parse_process(kLindley)));
  CHECK_THROWS_AS(exact_max_cdf(parse_process(kLindley), 3, 1.0), Error);
}

TEST_CASE("mixture paths stay in their component") {
  const auto spec = parse_process("mixture(n)");
  int distinct = 0;
  std::uint64_t previous = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto path = generate(spec, seed, 500);
    REQUIRE(path.mixture_component.has_value());
    const std::uint64_t k = *path.mixture_component;
    CHECK(k >= 1);
    if (k < (1ULL << 31)) {
      CHECK(*std::min_element(path.values.begin(), path.values.end()) >= static_cast<double>(k * k));
    }
    if (k != previous) ++distinct;
    previous = k;
  }
  CHECK(distinct > 5);
}

TEST_CASE("marginals match the stationary law") {
  const double alpha = 1e-3;
  const std::size_t R = 2000;
  struct Case {
    const char* spec;
    DistFn marginal;
  };
  const std::vector<Case> cases = {
      {"metropolis(sympareto(2),uniform(-1,1))", laws::symmetric_pareto(2.0)},
      {"moving_max(2,uniform(0,1))", laws::power(laws::uniform(0, 1), 2.0)},
      {"mixture(n)", *marginal_law(parse_process("mixture(n)"))},
  };
  for (const auto& c : cases) {
    const auto spec = parse_process(c.spec);
    std::vector<double> first;
    for (std::size_t r = 0; r < R; ++r) first.push_back(generate(spec, 1000 + r, 1).values[0]);
    CHECK_MESSAGE(ks_to(first, c.marginal) <= dkw(R, alpha), std::string(c.spec));
  }
}

TEST_CASE("lindley path is stationary after burn-in") {
  const auto spec = parse_process(kLindley);
  const std::size_t R = 2000;
  const std::uint64_t L = 400;
  std::vector<double> early;
  std::vector<double> late;
  for (std::size_t r = 0; r < R; ++r) {
    const auto p = generate(spec, 5000 + r, L);
    early.push_back(p.values[L / 4]);
    late.push_back(p.values[3 * L / 4]);
  }
  CHECK(ks_two_sample(early, late) <= 2.0 * dkw(R, 0.5e-3));
}

TEST_CASE("metropolis configuration check") {
  auto target = [](double x) { return std::pow(1.0 + std::fabs(x), -3.0); };
  auto proposal = [](double x) { return std::fabs(x) <= 1.0 ? 0.5 : 0.0; };
  const auto ok = metropolis_config_check(target, proposal, 0.0, 3.0);
  CHECK(ok.ok);
  CHECK(ok.support_connected);
  CHECK(ok.monotone_on_interval);
  CHECK(ok.k_h == 0.5);
  const auto wide = metropolis_config_check(target, proposal, 0.0, 4.0);
  CHECK_FALSE(wide.ok);
  CHECK_FALSE(wide.proposal_bounded_below);
  // a bump in the interval breaks monotonicity
  auto bumpy = [](double x) { return std::exp(-x * x) * (1.5 + std::cos(3.0 * x)); };
  CHECK_FALSE(metropolis_config_check(bumpy, proposal, -1.5, 1.5).monotone_on_interval);
  // two separated pieces of support
  auto split = [](double x) { return std::fabs(std::fabs(x) - 3.0) < 1.0 ? 1.0 : 0.0; };
  CHECK_FALSE(metropolis_config_check(split, proposal, 2.0, 3.5).support_connected);
}

TEST_CASE("target tail condition") {
  CHECK(target_tail_condition(laws::symmetric_pareto(2.0), 1.0).holds);
  CHECK(target_tail_condition(laws::pareto(2.0, 1.0), 1.0).holds);
  CHECK_FALSE(target_tail_condition(laws::exponential(1.0), 1.0).holds);
}

TEST_CASE("lindley step tail against the stationary tail") {
  const auto spec = parse_process(kLindley);
  const auto path = generate(spec, 11, 200000);
  const auto cmp = lindley_step_tail_vs_stationary(spec.law, path.values);
  CHECK(cmp.verdict == TailVerdict::ratio_to_zero);
  try {
    lindley_step_tail_vs_stationary(spec.law, std::vector<double>(10, 0.0));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}
