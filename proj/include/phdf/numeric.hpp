#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace phdf {

inline constexpr std::uint64_t kMaxIndex = std::uint64_t{1} << 62;

namespace detail {

// Monotone map from doubles (NaN excluded) to unsigned integers.
inline std::uint64_t ordered_key(double x) {
  const auto u = std::bit_cast<std::uint64_t>(x);
  return (u >> 63) ? ~u : (u | (std::uint64_t{1} << 63));
}

inline double from_ordered_key(std::uint64_t k) {
  return std::bit_cast<double>((k >> 63) ? (k & ~(std::uint64_t{1} << 63)) : ~k);
}

}  // namespace detail

/// Smallest double x in [lo, hi] with pred(x) true, for pred monotone
/// (false ... true) and pred(hi) true. Exact: bisects the ordered bit
/// pattern, so at most 64 evaluations.
template <class Pred>
double first_double_where(Pred&& pred, double lo, double hi) {
  std::uint64_t a = detail::ordered_key(lo);
  std::uint64_t b = detail::ordered_key(hi);
  while (a < b) {
    const std::uint64_t mid = a + (b - a) / 2;
    if (pred(detail::from_ordered_key(mid))) {
      b = mid;
    } else {
      a = mid + 1;
    }
  }
  return detail::from_ordered_key(a);
}

/// Smallest n in [first, last] with pred(n) true, or last + 1 if none;
/// pred must be monotone. Gallops from `first`, so cost is logarithmic in
/// the answer rather than in `last`.
template <class Pred>
std::uint64_t first_index_where(Pred&& pred, std::uint64_t first, std::uint64_t last) {
  if (first > last) return last + 1;
  if (pred(first)) return first;
  std::uint64_t lo = first;  // pred(lo) false
  std::uint64_t step = 1;
  std::uint64_t hi;
  for (;;) {
    hi = (last - lo > step) ? lo + step : last;
    if (pred(hi)) break;
    if (hi == last) return last + 1;
    lo = hi;
    step *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Pool-adjacent-violators fit of a non-decreasing sequence (unit weights).
std::vector<double> isotonic_increasing(std::span<const double> values);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace phdf
