#include "phdf/rates.hpp"

#include <cmath>

#include "phdf/error.hpp"

namespace phdf {

std::string_view to_string(DependenceKind kind) {
  switch (kind) {
    case DependenceKind::alpha: return "alpha";
    case DependenceKind::theta: return "theta";
    case DependenceKind::eta: return "eta";
    case DependenceKind::kappa: return "kappa";
    case DependenceKind::lambda: return "lambda";
  }
  return "unknown";
}

DependenceKind parse_dependence_kind(std::string_view text) {
  for (auto k : {DependenceKind::alpha, DependenceKind::theta, DependenceKind::eta, DependenceKind::kappa,
                 DependenceKind::lambda}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorKind::invalid_argument, "unknown dependence kind '" + std::string(text) + "'");
}

double threshold_beta(DependenceKind kind, double b) {
  require(b > 0.0 && b <= 1.0, ErrorKind::invalid_argument, "concentration exponent b must lie in (0,1]");
  switch (kind) {
    case DependenceKind::alpha: return 0.0;
    case DependenceKind::theta: return kGoldenRatio * (1.0 + 1.0 / b);
    case DependenceKind::eta: return 2.0 * (1.0 + 1.0 / b);
    case DependenceKind::kappa:
    case DependenceKind::lambda: return 2.0 * kGoldenRatio * (1.0 + 2.0 / b);
  }
  return 0.0;
}

RateVerdict check_rate_sufficiency(DependenceKind kind, double beta, double b) {
  require(!std::isnan(beta), ErrorKind::invalid_argument, "beta is NaN");
  RateVerdict v;
  v.kind = kind;
  v.b = b;
  v.beta = beta;
  v.threshold = threshold_beta(kind, b);
  if (kind == DependenceKind::alpha) {
    v.sufficient = true;
    v.margin = 0.0;
    v.note = "no rate needed for continuous marginals";
    return v;
  }
  v.sufficient = beta > v.threshold;
  v.margin = beta - v.threshold;
  return v;
}

AlphaCaseVerdict alpha_discontinuous_case(const MixingCase& c, const DeltaReport& report) {
  using T = MixingCase::Type;
  if (c.type == T::exponential) {
    require(c.rho >= 0.0 && c.rho < 1.0, ErrorKind::invalid_argument, "rho must lie in [0,1)");
  }
  if (c.type == T::polynomial) require(c.beta > 0.0, ErrorKind::invalid_argument, "beta must be positive");
  if (c.type == T::m_dependent) require(c.m >= 0.0, ErrorKind::invalid_argument, "m must be non-negative");

  bool any_delta = report.delta0;
  for (const auto& [xi, holds] : report.delta_xi) any_delta = any_delta || (holds && xi >= 0.0);
  switch (c.type) {
    case T::m_dependent:
      // Delta_xi implies Delta_0
      if (any_delta) return {"true", "(i)"};
      break;
    case T::exponential:
      for (const auto& [xi, holds] : report.delta_xi) {
        if (holds && xi > 0.0) return {"true", "(ii)"};
      }
      break;
    case T::polynomial:
      for (const auto& [xi, holds] : report.delta_xi) {
        if (holds && xi > 1.0 / c.beta) return {"true", "(iii)"};
      }
      break;
  }
  return {"undetermined", ""};
}

}  // namespace phdf
