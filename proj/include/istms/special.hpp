#pragma once

#include <cmath>

#include "errors.hpp"

namespace istms {

// inverse of std::erfc on (0, 2): bisection bracket, then Newton polish
inline double erfc_inv(double y) {
  if (!(y > 0.0 && y < 2.0)) throw domain_error("erfc_inv: argument outside (0,2)");
  if (y == 1.0) return 0.0;
  if (y > 1.0) return -erfc_inv(2.0 - y);

  double lo = 0.0, hi = 1.0;
  while (std::erfc(hi) > y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e3) break;  // erfc underflows long before this
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (std::erfc(mid) > y)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  static const double two_over_sqrt_pi = 2.0 / std::sqrt(std::acos(-1.0));
  for (int i = 0; i < 8; ++i) {
    const double f = std::erfc(x) - y;
    const double df = -two_over_sqrt_pi * std::exp(-x * x);
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

}  // namespace istms
