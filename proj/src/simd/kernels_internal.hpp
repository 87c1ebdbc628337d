#pragma once

#include <cmath>

namespace isobath::simd::detail {

inline constexpr double kExpFlushBelow = -708.0;

inline double flushed_exp(double x) { return x < kExpFlushBelow ? 0.0 : std::exp(x); }

}  // namespace isobath::simd::detail
