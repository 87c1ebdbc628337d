#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace isobath::linalg {

/// Dense lower Cholesky factor of an SPD matrix, stored row-major (full rows,
/// upper part unused) so both the factorization and forward substitution run
/// over contiguous rows.
class Cholesky {
 public:
  /// Factors `a` (row-major n x n, lower triangle read). When a pivot is not
  /// positive, retries once with `jitter` added to the diagonal. Throws
  /// NumericalError if that also fails or if the condition estimate
  /// (max L_ii / min L_ii)^2 exceeds `condition_cap`.
  void factor(std::span<const double> a, std::size_t n, double jitter, double condition_cap);

  std::size_t size() const { return n_; }
  bool jittered() const { return jittered_; }
  double condition_estimate() const;

  /// Solves L y = b in place.
  void solve_lower(std::span<double> b) const;
  /// Solves L^T x = y in place.
  void solve_upper(std::span<double> y) const;

  double at(std::size_t i, std::size_t j) const { return l_[i * n_ + j]; }

 private:
  bool try_factor(std::span<const double> a, double jitter);

  std::vector<double> l_;
  std::size_t n_ = 0;
  bool jittered_ = false;
};

}  // namespace isobath::linalg
