#include "isobath/simd/kernels.hpp"

#include <cmath>
#include <limits>

#include "kernels_internal.hpp"

namespace isobath::simd {
namespace {

void squared_distances(double qn, double qe, const double* north, const double* east,
                       std::size_t count, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double dn = qn - north[i];
    const double de = qe - east[i];
    out[i] = dn * dn + de * de;
  }
}

double min_squared_distance(double qn, double qe, const double* north, const double* east,
                            std::size_t count) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    const double dn = qn - north[i];
    const double de = qe - east[i];
    const double d2 = dn * dn + de * de;
    if (d2 < best) best = d2;
  }
  return best;
}

void se_kernel_row(double qn, double qe, const double* north, const double* east,
                   std::size_t count, double inv_two_ell_sq, double signal_variance, double* out) {
  for (std::size_t i = 0; i < count; ++i) {
    const double dn = qn - north[i];
    const double de = qe - east[i];
    out[i] = signal_variance * detail::flushed_exp(-(dn * dn + de * de) * inv_two_ell_sq);
  }
}

std::size_t select_within(double qn, double qe, const double* north, const double* east,
                          std::size_t count, double radius_sq, std::uint32_t* out) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double dn = qn - north[i];
    const double de = qe - east[i];
    if (dn * dn + de * de <= radius_sq) out[n++] = static_cast<std::uint32_t>(i);
  }
  return n;
}

double dot(const double* a, const double* b, std::size_t count) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += a[i] * b[i];
  return acc;
}

void exp_batch(const double* in, double* out, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) out[i] = detail::flushed_exp(in[i]);
}

bool cholesky(const double* a, double* l, std::size_t n, double jitter) {
  for (std::size_t i = 0; i < n; ++i) {
    double* li = l + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const double* lj = l + j * n;
      li[j] = (a[i * n + j] - dot(li, lj, j)) / lj[j];
    }
    const double d = a[i * n + i] + jitter - dot(li, li, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    li[i] = std::sqrt(d);
  }
  return true;
}

void forward_solve(const double* l, double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l + i * n;
    b[i] = (b[i] - dot(li, b, i)) / li[i];
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      "scalar",      squared_distances, min_squared_distance, se_kernel_row, select_within,
      dot,           exp_batch,         cholesky,             forward_solve,
  };
  return table;
}

}  // namespace isobath::simd
