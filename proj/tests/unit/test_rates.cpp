#include <doctest.h>

#include <cmath>
#include <vector>

#include "phdf/error.hpp"
#include "phdf/rates.hpp"

using namespace phdf;

TEST_CASE("rate thresholds") {
  const double root5 = std::sqrt(5.0);
  CHECK(threshold_beta(DependenceKind::theta, 1.0) == doctest::Approx(1.0 + root5).epsilon(1e-15));
  CHECK(threshold_beta(DependenceKind::eta, 1.0) == 4.0);
  CHECK(threshold_beta(DependenceKind::kappa, 1.0) == doctest::Approx(3.0 * (1.0 + root5)).epsilon(1e-15));
  CHECK(threshold_beta(DependenceKind::lambda, 0.5) == threshold_beta(DependenceKind::kappa, 0.5));
  CHECK(threshold_beta(DependenceKind::alpha, 0.3) == 0.0);
  for (double b : {0.0, -0.5, 1.5, std::nan("")}) {
    CHECK_THROWS_AS(threshold_beta(DependenceKind::theta, b), Error);
  }
}

TEST_CASE("rate sufficiency is strict") {
  const auto theta = check_rate_sufficiency(DependenceKind::theta, 4.0, 1.0);
  CHECK(theta.sufficient);
  CHECK(theta.margin == doctest::Approx(3.0 - std::sqrt(5.0)).epsilon(1e-14));
  const auto eta = check_rate_sufficiency(DependenceKind::eta, 4.0, 1.0);
  CHECK_FALSE(eta.sufficient);
  CHECK(eta.margin == 0.0);
  CHECK(check_rate_sufficiency(DependenceKind::kappa, 10.0, 1.0).sufficient);
  const auto alpha = check_rate_sufficiency(DependenceKind::alpha, 0.0, 1.0);
  CHECK(alpha.note == "no rate needed for continuous marginals");
}

TEST_CASE("rate threshold properties") {
  for (auto kind : {DependenceKind::theta, DependenceKind::eta, DependenceKind::kappa, DependenceKind::lambda}) {
    double previous = INFINITY;
    for (int i = 1; i <= 200; ++i) {
      const double b = i / 200.0;
      const double t = threshold_beta(kind, b);
      CHECK(t < previous);
      previous = t;
      for (double beta : {t - 1.0, t, std::nextafter(t, INFINITY), t + 1.0}) {
        const auto v = check_rate_sufficiency(kind, beta, b);
        CHECK(v.sufficient == (v.margin > 0.0));
      }
    }
  }
  for (int i = 1; i <= 200; ++i) {
    const double b = i / 200.0;
    CHECK(threshold_beta(DependenceKind::theta, b) < threshold_beta(DependenceKind::eta, b));
    CHECK(threshold_beta(DependenceKind::eta, b) < threshold_beta(DependenceKind::kappa, b));
  }
}

TEST_CASE("discontinuous marginal cases") {
  using T = MixingCase::Type;
  DeltaReport d0;
  d0.delta0 = true;
  const auto i = alpha_discontinuous_case({T::m_dependent, 2.0}, d0);
  CHECK(i.admits_phantom == "true");
  CHECK(i.which_case == "(i)");

  DeltaReport weak;
  weak.delta_xi[0.2] = true;
  MixingCase poly{T::polynomial};
  poly.beta = 4.0;
  CHECK(alpha_discontinuous_case(poly, weak).admits_phantom == "undetermined");
  // the boundary xi = 1/beta is not enough
  DeltaReport boundary;
  boundary.delta_xi[0.25] = true;
  CHECK(alpha_discontinuous_case(poly, boundary).admits_phantom == "undetermined");
  boundary.delta_xi[0.3] = true;
  CHECK(alpha_discontinuous_case(poly, boundary).which_case == "(iii)");

  MixingCase expo{T::exponential};
  expo.rho = 0.5;
  DeltaReport small;
  small.delta_xi[0.1] = true;
  CHECK(alpha_discontinuous_case(expo, small).which_case == "(ii)");
  CHECK(alpha_discontinuous_case(expo, d0).admits_phantom == "undetermined");

  expo.rho = 1.0;
  CHECK_THROWS_AS(alpha_discontinuous_case(expo, small), Error);
  poly.beta = 0.0;
  CHECK_THROWS_AS(alpha_discontinuous_case(poly, small), Error);
}

TEST_CASE("more evidence never revokes a phantom") {
  using T = MixingCase::Type;
  const std::vector<double> xis = {0.0, 0.05, 0.1, 0.25, 0.3, 0.5, 1.0};
  for (auto type : {T::m_dependent, T::exponential, T::polynomial}) {
    MixingCase c{type, 1.0, 1.0, 0.5, 4.0};
    for (unsigned mask = 0; mask < (1u << xis.size()); ++mask) {
      DeltaReport r;
      for (std::size_t j = 0; j < xis.size(); ++j) r.delta_xi[xis[j]] = (mask >> j) & 1u;
      const bool before = alpha_discontinuous_case(c, r).admits_phantom == "true";
      for (std::size_t j = 0; j < xis.size(); ++j) {
        DeltaReport more = r;
        more.delta_xi[xis[j]] = true;
        if (before) CHECK(alpha_discontinuous_case(c, more).admits_phantom == "true");
      }
    }
  }
}
