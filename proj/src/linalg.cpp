#include "isobath/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "isobath/errors.hpp"
#include "isobath/simd/kernels.hpp"

namespace isobath::linalg {

bool Cholesky::try_factor(std::span<const double> a, double jitter) {
  return simd::active().cholesky(a.data(), l_.data(), n_, jitter);
}

void Cholesky::factor(std::span<const double> a, std::size_t n, double jitter, double condition_cap) {
  n_ = n;
  l_.resize(n * n);
  jittered_ = false;
  if (n == 0) return;
  if (!try_factor(a, 0.0)) {
    jittered_ = true;
    if (!try_factor(a, jitter))
      throw NumericalError("Gram matrix not positive definite for data size " + std::to_string(n));
  }
  if (condition_estimate() > condition_cap)
    throw NumericalError("Gram matrix ill-conditioned for data size " + std::to_string(n));
}

double Cholesky::condition_estimate() const {
  if (n_ == 0) return 1.0;
  double lo = l_[0];
  double hi = l_[0];
  for (std::size_t i = 1; i < n_; ++i) {
    lo = std::min(lo, l_[i * n_ + i]);
    hi = std::max(hi, l_[i * n_ + i]);
  }
  const double ratio = hi / lo;
  return ratio * ratio;
}

void Cholesky::solve_lower(std::span<double> b) const { simd::active().forward_solve(l_.data(), b.data(), n_); }

void Cholesky::solve_upper(std::span<double> y) const {
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n_; ++j) s -= l_[j * n_ + ii] * y[j];
    y[ii] = s / l_[ii * n_ + ii];
  }
}

}  // namespace isobath::linalg
