#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phdf/error.hpp"
#include "phdf/estimate.hpp"

using namespace phdf;

TEST_CASE("cycle decomposition") {
  SamplePath p;
  p.spec = "hand";
  p.values = {3, 0, 1, 2, 0, 5, 0, 1};
  p.regeneration_marks = {1, 4, 6};
  const auto s = decompose_regenerative(p);
  CHECK(s.W0 == 1.0);
  CHECK(s.Y0 == 3.0);
  CHECK(s.W == std::vector<double>{3, 2});
  CHECK(s.Y == std::vector<double>{2, 5});
  CHECK(s.cycles == 2);
  CHECK(s.mu_hat == 2.5);

  p.regeneration_marks.clear();
  try {
    decompose_regenerative(p);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_regenerative);
  }
  try {
    decompose_regenerative(generate(parse_process("iid(exp(1))"), 1, 100));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_regenerative);
  }
}

TEST_CASE("an iid path regenerating at every step gives back its empirical law") {
  auto p = generate(parse_process("iid(exp(1))"), 3, 2001);
  p.regeneration_marks.resize(p.values.size());
  std::iota(p.regeneration_marks.begin(), p.regeneration_marks.end(), 0);
  const auto s = decompose_regenerative(p);
  CHECK(s.mu_hat == 1.0);
  const auto G = rootzen_phantom(s, false);
  const auto ecdf = laws::empirical(std::vector<double>(p.values.begin(), p.values.end() - 1));
  for (double x : p.values) {
    CHECK(G.cdf(x) == doctest::Approx(ecdf.cdf(x)).epsilon(1e-12));
    CHECK(G.cdf(x - 1e-9) == doctest::Approx(ecdf.cdf(x - 1e-9)).epsilon(1e-12));
  }
}

TEST_CASE("rootzen phantom") {
  RootzenLaw raw({1, 2, 2, 4}, 2.0, false);
  RootzenLaw smooth({1, 2, 2, 4}, 2.0, true);
  CHECK(raw.cycle_cdf(0.5) == 0.0);
  CHECK(raw.cycle_cdf(1.0) == 0.25);
  CHECK(raw.cycle_cdf(3.0) == 0.75);
  CHECK(smooth.cycle_cdf(3.0) == 0.875);
  CHECK(smooth.cycle_cdf(4.0) == 1.0);
  CHECK(raw.cdf(3.0) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
  CHECK(raw.atom_mass(2.0) == doctest::Approx(std::sqrt(0.75) - std::sqrt(0.25)).epsilon(1e-15));
  CHECK(smooth.atom_mass(2.0) == 0.0);
  CHECK(smooth.atom_mass(1.0) == 0.5);
  CHECK(raw.sf(5.0) == 0.0);

  RegenStats few;
  few.cycles = 10;
  few.Y.assign(10, 1.0);
  few.mu_hat = 1.0;
  try {
    rootzen_phantom(few);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_data);
  }
}

TEST_CASE("lindley cycles") {
  const auto spec = parse_process("lindley(shift(pareto(2,1),-2))");
  auto s = decompose_regenerative(generate(spec, 17, 200000));
  CHECK(s.cycles > 1000);
  CHECK(s.mu_se > 0.0);
  CHECK(std::accumulate(s.W.begin(), s.W.end(), 0.0) / s.cycles == doctest::Approx(s.mu_hat));
  zero_cycle_diagnostic(spec, {1, 10, 100}, 400, 5, 2, s);
  REQUIRE(s.zero_cycle_diag.size() == 3);
  CHECK(s.zero_cycle_diag[0] >= s.zero_cycle_diag[1]);
  CHECK(s.zero_cycle_diag[1] >= s.zero_cycle_diag[2]);
  CHECK(s.zero_cycle_diag[2] < 0.5 * s.zero_cycle_diag[0]);
  // maxima of n steps against the rootzen phantom at a central level
  const auto G = rootzen_phantom(s);
  const auto maxima = simulate_running_maxima(spec, {1000}, 400, 99, 2);
  std::vector<double> m;
  for (const auto& r : maxima) m.push_back(r[0]);
  std::sort(m.begin(), m.end());
  const double med = empirical_quantile_sorted(m, 0.5);
  CHECK(std::fabs(G.pow_n(med, 1000.0) - 0.5) < 0.15);
}
