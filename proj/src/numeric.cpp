#include "phdf/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

namespace phdf {

std::vector<double> isotonic_increasing(std::span<const double> values) {
  struct Block {
    double sum;
    double count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.push_back({v, 1.0});
    while (blocks.size() > 1) {
      const Block& b = blocks.back();
      const Block& a = blocks[blocks.size() - 2];
      if (a.sum / a.count <= b.sum / b.count) break;
      const Block merged{a.sum + b.sum, a.count + b.count};
      blocks.pop_back();
      blocks.back() = merged;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) {
    out.insert(out.end(), static_cast<std::size_t>(b.count), b.sum / b.count);
  }
  return out;
}

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace phdf
