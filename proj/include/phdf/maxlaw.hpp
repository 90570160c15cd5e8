#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace phdf {

/// Estimated (or exact) P(M_n <= x) on a level grid for one block size.
struct MaxLawTable {
  std::uint64_t n = 0;
  std::vector<double> levels;
  std::vector<double> p_hat;
  std::vector<double> se;  // sqrt(p(1-p)/R); zero for exact tables
  bool isotonic_corrected = false;
};

struct MaxLawEstimate {
  std::string spec;
  std::size_t replicas = 0;  // 0 for exact tables
  bool exact = false;
  std::vector<MaxLawTable> tables;
};

}  // namespace phdf
