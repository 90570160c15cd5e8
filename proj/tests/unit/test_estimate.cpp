#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "phdf/error.hpp"
#include "phdf/estimate.hpp"

using namespace phdf;

namespace {
const double kGamma = std::exp(-1.0);
const EstimateOptions kExact{true, 1};
}  // namespace

TEST_CASE("type-1 empirical quantile") {
  const std::vector<double> s = {1, 2, 3, 4};
  CHECK(empirical_quantile_sorted(s, 0.5) == 2.0);
  CHECK(empirical_quantile_sorted(s, 0.51) == 3.0);
  CHECK(empirical_quantile_sorted(s, 0.0) == 1.0);
  CHECK(empirical_quantile_sorted(s, 1.0) == 4.0);
  CHECK_THROWS_AS(empirical_quantile_sorted({}, 0.5), Error);
}

TEST_CASE("driving sequence, exact and simulated") {
  const auto spec = parse_process("iid(exp(1))");
  const std::vector<std::uint64_t> ns = {10, 100, 1000};
  const auto ex = estimate_driving_sequence(spec, kGamma, ns, 0, 1, kExact);
  CHECK(ex.method == "exact");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double truth = -std::log1p(-std::pow(kGamma, 1.0 / static_cast<double>(ns[i])));
    CHECK(ex.v_hat[i] == doctest::Approx(truth).epsilon(1e-12));
  }
  const auto mc = estimate_driving_sequence(spec, kGamma, ns, 2000, 1);
  CHECK(mc.method == "monte-carlo");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    CHECK(mc.ci_lo[i] <= mc.v_hat[i]);
    CHECK(mc.v_hat[i] <= mc.ci_hi[i]);
    CHECK(mc.p_at_v[i] >= kGamma);
    CHECK(std::fabs(mc.v_hat[i] - ex.v_hat[i]) < 0.15);
  }
  CHECK(mc.level_at(100) == mc.v_hat[1]);
  CHECK_THROWS_AS(mc.level_at(7), Error);
  try {
    estimate_driving_sequence(spec, kGamma, ns, 100, 1);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  CHECK_THROWS_AS(estimate_driving_sequence(spec, 1.0, ns, 2000, 1), Error);
}

TEST_CASE("estimates do not depend on the worker count") {
  const auto spec = parse_process("lindley(shift(pareto(2,1),-2))");
  const auto a = estimate_driving_sequence(spec, 0.5, {10, 100}, 300, 9, {false, 1});
  const auto b = estimate_driving_sequence(spec, 0.5, {10, 100}, 300, 9, {false, 4});
  CHECK(a.v_hat == b.v_hat);
  CHECK(a.ci_hi == b.ci_hi);
}

TEST_CASE("simulated maximum law agrees with the exact one") {
  const auto spec = parse_process("moving_max(2,uniform(0,1))");
  const std::vector<double> grid = {0.97, 0.99, 0.995, 0.999};
  const auto mc = estimate_max_cdf(spec, {100, 500}, {grid}, 4000, 3, {false, 2});
  const auto ex = estimate_max_cdf(spec, {100, 500}, {grid}, 0, 3, kExact);
  CHECK(ex.exact);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double pe = ex.tables[t].p_hat[i];
      CHECK(std::fabs(mc.tables[t].p_hat[i] - pe) <= 4.0 * std::sqrt(pe * (1.0 - pe) / 4000.0) + 1e-12);
    }
  }
  CHECK(ex.tables[0].p_hat[1] == doctest::Approx(std::pow(0.99, 101)).epsilon(1e-14));
}

TEST_CASE("B_T for independent and 1-dependent sequences") {
  const auto iid = parse_process("iid(exp(1))");
  const std::vector<std::uint64_t> ns = {100, 1000};
  const auto dse = estimate_driving_sequence(iid, kGamma, ns, 0, 1, kExact);
  const auto exact = check_BT(iid, dse, 2.0, ns, default_pq_grid(2.0), 0, 1, kExact);
  for (const auto& row : exact.pairs) CHECK(row.b_value < 1e-14);
  const auto mc = check_BT(iid, dse, 2.0, ns, default_pq_grid(2.0), 1000, 1, {false, 4});
  for (const auto& row : mc.pairs) CHECK(row.b_value <= 4.0 * row.se + 1e-12);
  CHECK(mc.r_tail_decays);

  const auto mm = parse_process("moving_max(2,uniform(0,1))");
  const std::vector<std::uint64_t> mns = {100, 1000, 10000};
  const auto mdse = estimate_driving_sequence(mm, kGamma, mns, 0, 1, kExact);
  const auto report = check_BT(mm, mdse, 2.0, mns, default_pq_grid(2.0), 0, 1, kExact);
  const auto marginal = *marginal_law(mm);
  for (std::size_t i = 0; i < mns.size(); ++i) {
    const double ratio = report.worst[i].b_value / marginal.sf(mdse.v_hat[i]);
    CHECK(ratio > 0.05);
    CHECK(ratio < 1.0);
  }
  CHECK_THROWS_AS(check_BT(mm, mdse, 0.5, mns, {{1.0, 1.0}}, 0, 1, kExact), Error);
}

TEST_CASE("C_n sandwich") {
  const auto mm = parse_process("moving_max(2,uniform(0,1))");
  const auto dse = estimate_driving_sequence(mm, kGamma, {1000}, 0, 1, kExact);
  const auto spaced = estimate_Cn(mm, dse, 1000, 2, 500, 0, 1, kExact);
  CHECK(spaced.c_hat < 1e-15);
  CHECK(spaced.sandwich_holds);
  const auto dense = estimate_Cn(mm, dse, 1000, 1, 1000, 0, 1, kExact);
  CHECK(dense.c_hat > 0.0);
  CHECK(dense.sandwich_holds);
  const auto mc = estimate_Cn(mm, dse, 1000, 1, 1000, 2000, 1, {false, 4});
  CHECK(mc.sandwich_holds);
  CHECK(std::fabs(mc.p_max - kGamma) <= 4.0 * mc.p_max_se);
  CHECK_THROWS_AS(estimate_Cn(mm, dse, 1000, 2, 501, 0, 1, kExact), Error);
}

TEST_CASE("index rules and the divergence rule") {
  CHECK(parse_index_rule("n").at(50) == 50);
  CHECK(parse_index_rule("sqrt").at(99) == 9);
  CHECK(parse_index_rule("1").at(99) == 1);
  CHECK(parse_index_rule("const:5").at(99) == 5);
  CHECK(parse_index_rule("n^0.5").at(10000) == 100);
  CHECK_THROWS_AS(parse_index_rule("n^2"), Error);
  CHECK_THROWS_AS(parse_index_rule("banana"), Error);

  const std::vector<std::uint64_t> ns = {10, 100, 1000, 10000};
  CHECK(diverges_per_rule(ns, {1, 3, 9, 27}));
  CHECK_FALSE(diverges_per_rule(ns, {1, 3, 5, 27}));
  CHECK_FALSE(diverges_per_rule(ns, {1, 1, 1, 1}));
  CHECK_FALSE(diverges_per_rule({10, 100, 1000}, {1, 3, 9}));
  CHECK(diverges_per_rule({10, 100, 1000}, {1, 3, 9}, 2.0));
  CHECK(alpha_delta_exponent(1.0) == 0.5);
}

TEST_CASE("propbasic series") {
  const auto mix = parse_process("mixture(n)");
  const std::vector<std::uint64_t> ns = {100, 1000, 10000};
  DrivingSeqEstimate dse;
  dse.gamma = kGamma;
  dse.n = ns;
  dse.v_hat = {100.0, 1000.0, 10000.0};
  const auto s = propbasic_series(mix, dse, parse_index_rule("n"), parse_index_rule("1"), ns, 0, 1, kExact);
  for (const auto& row : s.rows) {
    const double K = static_cast<double>(integer_sqrt(row.n));
    CHECK(row.k_tail >= static_cast<double>(row.n) / (K + 1.0));
  }
  CHECK_FALSE(s.bounded);
  const auto iid = parse_process("iid(exp(1))");
  const auto idse = estimate_driving_sequence(iid, kGamma, ns, 0, 1, kExact);
  CHECK(propbasic_series(iid, idse, parse_index_rule("n"), parse_index_rule("1"), ns, 0, 1, kExact).bounded);
}

TEST_CASE("extremal index from a single driving sequence") {
  const std::vector<std::uint64_t> ns = {100, 1000, 10000};
  const auto iid = estimate_theta_single_sequence(parse_process("iid(exp(1))"), kGamma, ns, 0, 1, kExact);
  CHECK(iid.verdict == "positive");
  CHECK(iid.theta_hat == doctest::Approx(1.0).epsilon(1e-3));
  const auto mm = estimate_theta_single_sequence(parse_process("moving_max(2,uniform(0,1))"), kGamma, ns, 0, 1, kExact);
  CHECK(mm.verdict == "positive");
  CHECK(std::fabs(mm.theta_hat - 0.5) < 1e-2);
  const auto mix =
      estimate_theta_single_sequence(parse_process("mixture(n)"), kGamma, {100, 1000, 10000, 100000}, 0, 1, kExact);
  CHECK(mix.verdict == "zero");
  CHECK(mix.theta_hat == 0.0);
}

TEST_CASE("continuous phantom fit") {
  const auto spec = parse_process("iid(exp(1))");
  PhantomFit fit;
  const auto G = fit_continuous_phantom(spec, kGamma, 1000, 0, 1, kExact, &fit);
  CHECK(fit.m_grid.front() == 1);
  CHECK(fit.m_grid.back() == 1000);
  for (std::size_t i = 0; i < fit.m_grid.size(); ++i) {
    const auto m = static_cast<double>(fit.m_grid[i]);
    CHECK(std::fabs(G.pow_n(fit.v_grid[i], m) - kGamma) < 1e-12);
  }
  // between grid points the fit is close to F itself
  const auto F = laws::exponential(1.0);
  for (double n : {37.0, 333.0, 777.0}) {
    const double x = F.quantile(std::pow(kGamma, 1.0 / n));
    CHECK(std::fabs(G.pow_n(x, n) - kGamma) < 5e-3);
  }
  const auto grid = verification_grid(G.as_distfn(), 100, {1.0, 2.0, 3.0});
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
}
