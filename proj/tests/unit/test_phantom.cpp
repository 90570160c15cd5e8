#include <doctest.h>

#include <cmath>
#include <vector>

#include "phdf/error.hpp"
#include "phdf/phantom.hpp"

using namespace phdf;

namespace {

const double kGamma = std::exp(-1.0);

DrivingSequence strict_n(std::uint64_t prefix) { return DrivingSequence::from_rule(kGamma, level_rule("n"), prefix); }

std::vector<double> dense_grid(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i <= points; ++i) out.push_back(lo + (hi - lo) * i / points);
  return out;
}

}  // namespace

TEST_CASE("driving sequence bookkeeping") {
  const auto d = DrivingSequence::from_levels(0.5, {1, 1, 1, 2, 3, 3, 4});
  CHECK(d.plateau_index() == std::vector<std::uint64_t>{3, 4, 6, 7});
  CHECK(d.level(2) == 1.0);
  CHECK(d.level(5) == 3.0);
  CHECK(d.sup_level() == 4.0);
  CHECK_THROWS_AS(d.level(8), Error);
  CHECK(strict_n(5).level(1000) == 1000.0);
  CHECK_THROWS_AS(DrivingSequence::from_levels(1.0, {1, 2}), Error);
  CHECK_THROWS_AS(DrivingSequence::from_levels(0.0, {1, 2}), Error);
  CHECK_THROWS_AS(DrivingSequence::from_levels(0.5, {2, 1}), Error);
  try {
    build_continuous_phantom(DrivingSequence::from_levels(0.5, {2, 2, 2}));
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_driving_sequence);
  }
}

TEST_CASE("continuous phantom is exact at the levels") {
  const auto G = build_continuous_phantom(strict_n(10000));
  for (std::uint64_t n = 1; n <= 10000; ++n) {
    CHECK(G.g(static_cast<double>(n)) == 1.0 / static_cast<double>(n));
    CHECK(std::fabs(G.pow_n(static_cast<double>(n), static_cast<double>(n)) - kGamma) <= 1e-15);
  }
  // beyond the stored prefix the rule takes over
  CHECK(G.g(123456.0) == 1.0 / 123456.0);
  // below v_1: g = v_1 - x + 1
  CHECK(G.cdf(0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(G.g(-3.0) == 5.0);
  // linear between levels
  CHECK(G.g(4.5) == doctest::Approx(0.5 * (1.0 / 4 + 1.0 / 5)).epsilon(1e-15));
}

TEST_CASE("plateaus compress to their last index") {
  const auto d = DrivingSequence::from_levels(kGamma, {1, 1, 1, 2, 3, 4, 5});
  const auto G = build_continuous_phantom(d);
  CHECK(G.cdf(1.0) == doctest::Approx(std::exp(-1.0 / 3.0)).epsilon(1e-15));
  for (double x : dense_grid(-5, 0.999, 200)) CHECK(G.cdf(x) < std::exp(-1.0 / 3.0));
  CHECK(G.g(2.0) == 0.25);
  CHECK(G.g(1.5) == doctest::Approx(0.5 * (1.0 / 3 + 1.0 / 4)).epsilon(1e-15));
  // finite prefix: reaches 1 at the last level and stays there
  CHECK(G.cdf(5.0) == 1.0);
  CHECK(G.cdf(50.0) == 1.0);
  CHECK(G.cdf(4.999) < 1.0);
}

TEST_CASE("continuous phantom is a continuous non-decreasing distribution function") {
  for (const auto& d : {strict_n(50), DrivingSequence::from_levels(0.3, {0.5, 0.5, 1.5, 1.5, 1.5, 2, 7})}) {
    const auto G = build_continuous_phantom(d);
    double prev = 0.0;
    for (double x : dense_grid(-10, 60, 20000)) {
      const double c = G.cdf(x);
      CHECK(c >= prev);
      CHECK(c - prev <= 0.01);
      prev = c;
    }
  }
}

TEST_CASE("jump phantom") {
  const auto J = build_jump_phantom(strict_n(100));
  CHECK(J.cdf(5.5) == doctest::Approx(std::exp(-1.0 / 5)).epsilon(1e-15));
  CHECK(J.cdf(0.5) == 0.0);
  const auto bounded = build_jump_phantom(DrivingSequence::from_levels(kGamma, {1, 2, 3}));
  CHECK(bounded.cdf(3.0) == 1.0);
  CHECK(bounded.cdf(7.0) == 1.0);
  CHECK(bounded.cdf(2.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  // right-continuity at a jump
  CHECK(J.cdf(7.0) == doctest::Approx(std::exp(-1.0 / 7)).epsilon(1e-15));
  CHECK(J.cdf(std::nextafter(7.0, 0.0)) == doctest::Approx(std::exp(-1.0 / 6)).epsilon(1e-15));
}

TEST_CASE("ordering between the jump and continuous phantoms") {
  const auto d = DrivingSequence::from_levels(kGamma, {1, 1, 2, 4, 4, 4, 5, 9, 10});
  const auto G = build_continuous_phantom(d);
  const auto J = build_jump_phantom(d);
  const auto& plateaus = d.plateaus();
  for (std::size_t k = 0; k + 1 < plateaus.size(); ++k) {
    const double next = J.cdf(plateaus[k + 1].level);
    for (double x : dense_grid(plateaus[k].level, plateaus[k + 1].level - 1e-9, 400)) {
      CHECK(J.cdf(x) <= G.cdf(x));
      CHECK(G.cdf(x) < next);
    }
  }
}

TEST_CASE("phantom_gap") {
  const auto d = strict_n(20000);
  const auto G = build_continuous_phantom(d);
  const auto J = build_jump_phantom(d);
  LevelGrid knots;
  for (int k = 1; k <= 100; ++k) knots.levels.push_back(k);
  CHECK(phantom_gap(G, J, 1, knots) <= 1e-16);
  double prev = 1.0;
  for (double n : {10.0, 100.0, 1000.0}) {
    LevelGrid grid;
    for (double x : dense_grid(0.5 * n, 4 * n, 4000)) grid.levels.push_back(x);
    const double gap = phantom_gap(G, J, n, grid);
    CHECK(gap < prev);
    prev = gap;
  }
  // below v_1 the gap is G^n itself, bounded by gamma^{n/p_1}
  const LevelGrid below{{0.5, 0.9, 0.99}};
  for (double n : {10.0, 100.0}) CHECK(phantom_gap(G, J, n, below) <= std::pow(kGamma, n));
  const auto other = build_jump_phantom(DrivingSequence::from_levels(kGamma, {1, 2, 3}));
  CHECK_THROWS_AS(phantom_gap(G, other, 10, knots), Error);
}

TEST_CASE("phantom round-trips through its text table") {
  const auto d = DrivingSequence::from_levels(0.3678794411714423, {0.1, 0.1, 1.0 / 3.0, 2.718281828459045, 1e10});
  const auto G = build_continuous_phantom(d);
  const auto back = PhantomDistFn::deserialize(G.serialize());
  CHECK(back.driving() == d);
  CHECK(back.serialize() == G.serialize());
  for (double x : dense_grid(-1, 3, 100)) CHECK(back.cdf(x) == G.cdf(x));
  const auto R = build_continuous_phantom(strict_n(30));
  CHECK(PhantomDistFn::deserialize(R.serialize()).cdf(1e6) == R.cdf(1e6));
  CHECK_THROWS_AS(PhantomDistFn::deserialize("nonsense"), Error);
}

TEST_CASE("perturbed levels with equivalent tails give interchangeable phantoms") {
  const auto a = build_continuous_phantom(strict_n(1));
  const auto b = build_continuous_phantom(DrivingSequence::from_rule(
      kGamma, LevelRule{"perturbed", [](std::uint64_t n) { return n * (1.0 + 1.0 / n); }, kInf}, 1));
  const DistFn ga = a.as_distfn();
  const DistFn gb = b.as_distfn();
  CHECK(strict_tail_equivalence(ga, gb).verdict == TailVerdict::equivalent);
  double prev = 1.0;
  for (double n : {1e2, 1e3, 1e4}) {
    const double d = sup_power_distance(ga, gb, n, power_grid(ga, gb, n));
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("verify_phantom") {
  MaxLawEstimate exact;
  exact.exact = true;
  const DistFn e1 = laws::exponential(1);
  for (std::uint64_t n : {100u, 1000u}) {
    MaxLawTable t;
    t.n = n;
    for (double x : dense_grid(std::log(n) - 2, std::log(n) + 5, 60)) {
      t.levels.push_back(x);
      t.p_hat.push_back(e1.pow_n(x, n));
      t.se.push_back(0.0);
    }
    exact.tables.push_back(t);
  }
  const auto ok = verify_phantom(e1, exact);
  CHECK(ok.pass);
  CHECK(ok.sup_gap <= 1e-15);
  const auto wrong = verify_phantom(laws::exponential(2), exact);
  CHECK_FALSE(wrong.pass);
  CHECK(wrong.sup_gap > 0.3);

  MaxLawEstimate coarse = exact;
  coarse.tables[0].levels.resize(10);
  coarse.tables[0].p_hat.resize(10);
  coarse.tables[0].se.resize(10);
  try {
    verify_phantom(e1, coarse);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::insufficient_grid);
  }
}

TEST_CASE("extremal index from gammas") {
  CHECK(extremal_index_from_gammas(std::exp(-0.5), std::exp(-1.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(extremal_index_from_gammas(kGamma, 0.0) == 0.0);
  CHECK(extremal_index_from_gammas(kGamma, kGamma) == 1.0);
  for (double c : {0.5, 2.0, 3.0, 10.0}) {
    const double theta = extremal_index_from_gammas(std::exp(-0.3 * c), std::exp(-0.9 * c));
    CHECK(theta == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
  CHECK_THROWS_AS(extremal_index_from_gammas(kGamma, 1.0), Error);
  CHECK_THROWS_AS(extremal_index_from_gammas(1.0, 0.5), Error);
}

TEST_CASE("extremal index tail ratio") {
  const DistFn f = laws::exponential(1);
  const auto half = extremal_index_tail_ratio(laws::power(f, 0.5), f);
  REQUIRE(half.limit.has_value());
  CHECK(*half.limit == doctest::Approx(0.5).epsilon(0.01));
  for (std::size_t i = 0; i < half.probe_levels.size(); ++i) {
    const double s = f.sf(half.probe_levels[i]);
    CHECK(half.ratio_track[i] == doctest::Approx(-std::expm1(0.5 * std::log1p(-s)) / s).epsilon(1e-12));
  }
  const auto one = extremal_index_tail_ratio(f, f);
  REQUIRE(one.limit.has_value());
  CHECK(*one.limit == 1.0);
  CHECK_THROWS_AS(extremal_index_tail_ratio(laws::uniform(0, 1), f), Error);
}
