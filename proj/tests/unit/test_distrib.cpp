#include <doctest.h>

#include <cmath>
#include <vector>

#include "phdf/distrib.hpp"
#include "phdf/error.hpp"

using namespace phdf;

namespace {

void check_cdf_invariants(const DistFn& f, const std::vector<double>& xs) {
  double prev = 0.0;
  for (double x : xs) {
    const double c = f.cdf(x);
    const double l = f.left_limit(x);
    CHECK(c >= prev - 1e-15);
    CHECK(l >= -1e-15);
    CHECK(l <= c + 1e-15);
    CHECK(c <= 1.0);
    prev = c;
  }
}

// Generalized inverse: exact definition for jump laws; for continuous laws
// closed-form inverses are only accurate to rounding, so F(q) = p is checked.
void check_quantile_definition(const DistFn& f) {
  for (int i = 1; i < 100; ++i) {
    const double p = i / 100.0;
    const double q = f.quantile(p);
    if (f.atom_model() == AtomModel::continuous) {
      CHECK(f.cdf(q) == doctest::Approx(p).epsilon(1e-12));
    } else {
      CHECK(f.cdf(q) >= p);
      CHECK(f.cdf(std::nextafter(q, -kInf)) < p);
    }
  }
}

double dkw_band(double n, double alpha) { return std::sqrt(std::log(2.0 / alpha) / (2.0 * n)); }

void check_sampler_dkw(const DistFn& f, std::uint64_t seed) {
  const int n = 100000;
  auto rng = make_rng(seed);
  std::vector<double> draws(n);
  for (auto& d : draws) d = f.sample(rng);
  std::sort(draws.begin(), draws.end());
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n && draws[i + 1] == draws[i]) continue;
    const double fx = f.cdf(draws[i]);
    const double fl = f.left_limit(draws[i]);
    const double emp_hi = (i + 1.0) / n;
    auto lo_it = std::lower_bound(draws.begin(), draws.end(), draws[i]);
    const double emp_lo = static_cast<double>(lo_it - draws.begin()) / n;
    worst = std::max({worst, std::fabs(emp_hi - fx), std::fabs(emp_lo - fl)});
  }
  CHECK(worst <= dkw_band(n, 0.001));
}

}  // namespace

TEST_CASE("catalog laws satisfy the distribution function invariants") {
  std::vector<double> xs;
  for (int i = -40; i <= 400; ++i) xs.push_back(i * 0.25);
  for (const char* spec : {"exp(1)", "pareto(2,1)", "uniform(0,1)", "beta(0.5,0.5)", "geometric(0.5)",
                           "superheavy", "sympareto(2)", "thm2-component(2,n)", "jumpseq([1,2,3],[0.5,0.25,0])",
                           "shift(pareto(2,1),-2)", "power(exp(1),0.5)"}) {
    CAPTURE(std::string(spec));
    const DistFn f = parse_law(spec);
    check_cdf_invariants(f, xs);
    check_quantile_definition(f);
  }
}

TEST_CASE("sampler agrees with cdf within the DKW band") {
  std::uint64_t seed = 11;
  for (const char* spec : {"exp(1)", "pareto(2,1)", "geometric(0.3)", "beta(0.5,0.5)", "sympareto(2)",
                           "thm2-component(2,n)"}) {
    CAPTURE(std::string(spec));
    check_sampler_dkw(parse_law(spec), seed++);
  }
}

TEST_CASE("atom masses are the jumps of the cdf") {
  const DistFn geo = laws::geometric(0.5);
  for (int k = 1; k <= 20; ++k) {
    CHECK(geo.atom_mass(k) == doctest::Approx(std::ldexp(1.0, -k)).epsilon(1e-14));
    CHECK(geo.atom_mass(k + 0.5) == 0.0);
  }
  const DistFn js = laws::jump_sequence({1, 2, 3}, {0.5, 0.25, 0});
  CHECK(js.atom_mass(1) == 0.5);
  CHECK(js.atom_mass(3) == 0.25);
  CHECK(js.right_end() == 3.0);
  CHECK(laws::exponential(1).atom_mass(1.0) == 0.0);
}

TEST_CASE("superheavy law: level n^{ln n} has tail exactly 1/n") {
  const DistFn f = laws::superheavy();
  for (double n : {1e2, 1e3, 1e4}) {
    const double v = std::exp(std::log(n) * std::log(n));
    CHECK(n * f.sf(v) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("regularity_check") {
  SUBCASE("continuous exponential is regular") {
    const auto r = regularity_check(laws::exponential(1));
    CHECK(r.is_regular);
    for (double v : r.ratio_track) CHECK(v == 1.0);
  }
  SUBCASE("geometric ratio is identically 1/(1-p)") {
    const auto r = regularity_check(laws::geometric(0.5));
    CHECK_FALSE(r.is_regular);
    REQUIRE(r.ratio_track.size() >= 32);
    for (double v : r.ratio_track) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("mixture component ratio n/(n-1) tends to 1") {
    const auto r = regularity_check(laws::thm2_component(3, level_rule("n")));
    CHECK(r.is_regular);
    for (std::size_t i = 0; i < r.probe_levels.size(); ++i) {
      const double n = r.probe_levels[i];
      if (n > 9) CHECK(r.ratio_track[i] == doctest::Approx(n / (n - 1.0)).epsilon(1e-12));
    }
  }
  SUBCASE("atom at a finite right end breaks regularity") {
    const auto r = regularity_check(laws::jump_sequence({1, 2}, {0.5, 0.0}));
    CHECK(r.mass_at_right_end == 0.5);
    CHECK_FALSE(r.is_regular);
  }
  SUBCASE("bounded continuous laws are regular") {
    CHECK(regularity_check(laws::uniform(0, 1)).is_regular);
    CHECK(regularity_check(laws::beta(2, 3)).is_regular);
  }
  SUBCASE("probe validation") {
    ProbePolicy bad;
    bad.explicit_levels.assign(40, 1.0);
    bad.explicit_levels[10] = 0.0;
    CHECK_THROWS_AS(regularity_check(laws::exponential(1), bad), Error);
    ProbePolicy shallow;
    shallow.depth = 8;
    CHECK_THROWS_AS(regularity_check(laws::exponential(1), shallow), Error);
  }
}

TEST_CASE("strict tail equivalence") {
  const DistFn e1 = laws::exponential(1);
  const DistFn e2 = laws::exponential(2);
  CHECK(strict_tail_equivalence(e1, e1).verdict == TailVerdict::equivalent);
  const auto c = strict_tail_equivalence(e1, e2);
  CHECK(c.verdict == TailVerdict::ratio_to_zero);
  for (std::size_t i = 0; i < c.probe_levels.size(); ++i)
    CHECK(c.ratio_track[i] == doctest::Approx(std::exp(-c.probe_levels[i])).epsilon(1e-9));
  CHECK(strict_tail_equivalence(e2, e1).verdict == TailVerdict::ratio_to_infinity);

  // tail (1+x)^-2 against the same law moved left by 5: tail (6+x)^-2
  const DistFn p = laws::pareto(2, 1);
  const auto ps = strict_tail_equivalence(p, laws::shifted(p, -5.0));
  CHECK(ps.verdict == TailVerdict::equivalent);
  for (std::size_t i = 0; i < ps.probe_levels.size(); ++i) {
    const double x = ps.probe_levels[i];
    if (x > 0) CHECK(ps.ratio_track[i] == doctest::Approx(std::pow((1 + x) / (6 + x), 2)).epsilon(1e-9));
  }
  CHECK(strict_tail_equivalence(laws::uniform(0, 1), e1).verdict == TailVerdict::mismatched_right_ends);
}

TEST_CASE("strict tail equivalence is reflexive and symmetric") {
  const std::vector<DistFn> fs = {laws::exponential(1), laws::pareto(2, 1), laws::shifted(laws::pareto(2, 1), 3),
                                  laws::exponential(3), laws::power(laws::pareto(2, 1), 2)};
  for (const auto& a : fs) {
    CHECK(strict_tail_equivalence(a, a).verdict == TailVerdict::equivalent);
    for (const auto& b : fs) {
      const bool ab = strict_tail_equivalence(a, b).verdict == TailVerdict::equivalent;
      const bool ba = strict_tail_equivalence(b, a).verdict == TailVerdict::equivalent;
      CHECK(ab == ba);
    }
  }
}

TEST_CASE("sup_power_distance") {
  const DistFn e1 = laws::exponential(1);
  const DistFn e2 = laws::exponential(2);
  for (double n : {1.0, 10.0, 1e3, 1e6}) {
    CHECK(sup_power_distance(e1, e1, n, power_grid(e1, e1, n)) == 0.0);
  }
  // at x = ln n: G^n -> e^{-1} while H^n -> 1
  const double n = 1000;
  const LevelGrid grid{{std::log(n)}};
  const double oracle = std::pow(1 - std::exp(-2 * std::log(n)), n) - std::pow(1 - 1 / n, n);
  CHECK(sup_power_distance(e1, e2, n, grid) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(sup_power_distance(e1, e2, n, power_grid(e1, e2, n)) >= 0.5);

  const DistFn g = laws::pareto(2, 1);
  const DistFn h = laws::custom({[](double x) { return x <= 0 ? 1.0 : std::min(1.0, 1.0 / (x * (1.0 + x))); },
                                 nullptr, nullptr, 0.0, kInf, "ratio 1+1/x"});
  double prev = 1.0;
  for (double m : {1e2, 1e3, 1e4}) {
    const double d = sup_power_distance(g, h, m, power_grid(g, h, m));
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev < 0.02);
  CHECK_THROWS_AS(sup_power_distance(e1, e2, 10, LevelGrid{}), Error);
}

TEST_CASE("tail equivalence of regular laws implies decaying power distance") {
  const std::vector<std::pair<DistFn, DistFn>> pairs = {
      {laws::pareto(2, 1), laws::shifted(laws::pareto(2, 1), 5)},
      {laws::pareto(1, 1), laws::pareto(1, 2)},
      {laws::exponential(1), laws::exponential(1)},
  };
  for (const auto& [a, b] : pairs) {
    if (strict_tail_equivalence(a, b).verdict != TailVerdict::equivalent) continue;
    REQUIRE(regularity_check(a).is_regular);
    REQUIRE(regularity_check(b).is_regular);
    double prev = 2.0;
    for (double n : {1e2, 1e3, 1e4}) {
      const double d = sup_power_distance(a, b, n, power_grid(a, b, n));
      CHECK(d <= prev);
      prev = d;
    }
  }
}

TEST_CASE("delta_condition") {
  SUBCASE("continuous laws hold trivially") {
    const auto r = delta_condition(laws::exponential(1), 0.3);
    CHECK(r.holds);
    CHECK(r.sup_value == 0.0);
  }
  SUBCASE("geometric fails at xi = 0") {
    const auto r = delta_condition(laws::geometric(0.5), 0.0);
    CHECK_FALSE(r.holds);
    for (double v : r.ratio_track) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("tails 1/n at atoms n: ratio n^{xi-1}") {
    const DistFn f = laws::jump_rule(level_rule("n"), [](std::uint64_t n) { return 1.0 / n; }, 1, "1/n");
    const auto r = delta_condition(f, 0.5);
    CHECK(r.holds);
    for (std::size_t i = 0; i < r.atoms.size(); ++i) {
      const double n = r.atoms[i];
      if (n < 2) continue;
      const double oracle = (1 / (n - 1) - 1 / n) / std::pow(1 / n, 1.5);
      CHECK(r.ratio_track[i] == doctest::Approx(oracle).epsilon(1e-9));
    }
    CHECK(delta_condition(f, 0.0).holds);
    CHECK(delta_condition(f, 1.5).holds);  // sup ~ 1e4 below the cap
    CHECK_FALSE(delta_condition(f, 3.0).holds);
  }
  SUBCASE("monotone in xi for tails bounded by 1") {
    const DistFn f = laws::jump_rule(level_rule("n"), [](std::uint64_t n) { return std::pow(n, -2.0); }, 1, "n^-2");
    bool previous = false;
    for (double xi : {2.0, 1.0, 0.5, 0.25, 0.1, 0.0}) {
      const bool holds = delta_condition(f, xi).holds;
      CAPTURE(xi);
      if (previous) CHECK(holds);
      previous = holds;
    }
  }
  CHECK_THROWS_AS(delta_condition(laws::geometric(0.5), -0.1), Error);
}

TEST_CASE("concentration_exponent") {
  const auto u = concentration_exponent(laws::uniform(0, 1), 1.0);
  CHECK(u.satisfied);
  CHECK(u.b_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(concentration_exponent(laws::beta(0.5, 0.5), 0.5).satisfied);
  CHECK_FALSE(concentration_exponent(laws::beta(0.5, 0.5), 1.0).satisfied);
  CHECK_FALSE(concentration_exponent(laws::geometric(0.5), 1.0).satisfied);
  CHECK(concentration_exponent(laws::exponential(1), 1.0).b_hat == doctest::Approx(1.0).epsilon(0.02));
  CHECK_THROWS_AS(concentration_exponent(laws::uniform(0, 1), 0.0), Error);
  CHECK_THROWS_AS(concentration_exponent(laws::uniform(0, 1), 1.5), Error);
}

TEST_CASE("law parser") {
  CHECK(parse_law("exp(2)").describe() == "exp(2)");
  CHECK(parse_law(" shift( pareto(2, 1) , -2 ) ").describe() == "shift(pareto(2,1),-2)");
  CHECK(parse_law("superheavy").describe() == "superheavy");
  CHECK(parse_law("thm2-component(3,sqrt)").left_end() == doctest::Approx(3.0));
  for (const char* bad : {"exp(", "exp(-1)", "nosuch(1)", "pareto(1)", "jumpseq([1,2],[0.5,0.1])", "exp(1) x",
                          "thm2-component(1.5,n)"}) {
    CAPTURE(std::string(bad));
    try {
      parse_law(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::invalid_spec);
    }
  }
}
