#pragma once

#include <map>
#include <string>
#include <string_view>

namespace phdf {

enum class DependenceKind { alpha, theta, eta, kappa, lambda };

std::string_view to_string(DependenceKind kind);
DependenceKind parse_dependence_kind(std::string_view text);

inline constexpr double kGoldenRatio = 1.6180339887498948482;

struct RateVerdict {
  DependenceKind kind = DependenceKind::theta;
  double b = 1.0;
  double beta = 0.0;
  double threshold = 0.0;
  bool sufficient = false;
  double margin = 0.0;  // beta - threshold
  std::string note;
};

/// Polynomial decay rate beyond which weak dependence of the given kind
/// yields a continuous phantom, for concentration exponent b in (0, 1].
/// alpha needs no rate and returns 0.
double threshold_beta(DependenceKind kind, double b);

/// sufficient iff beta > threshold_beta(kind, b).
RateVerdict check_rate_sufficiency(DependenceKind kind, double beta, double b);

/// Mixing-rate cases for alpha-mixing sequences with discontinuous marginals.
struct MixingCase {
  enum class Type { m_dependent, exponential, polynomial } type = Type::m_dependent;
  double m = 0.0;
  double C = 1.0;
  double rho = 0.0;   // exponential
  double beta = 0.0;  // polynomial
};

struct DeltaReport {
  bool delta0 = false;
  std::map<double, bool> delta_xi;  // xi -> Delta_xi holds
};

struct AlphaCaseVerdict {
  std::string admits_phantom;  // "true" or "undetermined"
  std::string which_case;      // "(i)", "(ii)", "(iii)" or ""
};

AlphaCaseVerdict alpha_discontinuous_case(const MixingCase& c, const DeltaReport& report);

}  // namespace phdf
