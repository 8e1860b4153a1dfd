#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>

namespace wvtilt {

/// Composite Simpson rule over uniformly spaced samples.
///
/// Works for any sample count >= 2. With an even number of points the last
/// three intervals use Simpson's 3/8 rule; two points fall back to the
/// trapezoid. T may be real or complex.
template <typename T>
T simpson(std::span<const T> y, double h) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("simpson: need at least two samples");
  if (n == 2) return (y[0] + y[1]) * (0.5 * h);
  if (n == 3) return (y[0] + 4.0 * y[1] + y[2]) * (h / 3.0);

  std::size_t last = n - 1;  // index where the 1/3 rule stops
  T tail{};
  if ((n - 1) % 2 == 1) {
    // odd number of intervals: peel off three for the 3/8 rule
    if (n == 4) return (y[0] + 3.0 * y[1] + 3.0 * y[2] + y[3]) * (3.0 * h / 8.0);
    last = n - 4;
    tail = (y[last] + 3.0 * y[last + 1] + 3.0 * y[last + 2] + y[last + 3]) * (3.0 * h / 8.0);
  }
  T odd{}, even{};
  for (std::size_t i = 1; i < last; i += 2) odd += y[i];
  for (std::size_t i = 2; i < last; i += 2) even += y[i];
  return (y[0] + 4.0 * odd + 2.0 * even + y[last]) * (h / 3.0) + tail;
}

}  // namespace wvtilt
