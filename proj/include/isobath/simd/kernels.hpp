#pragma once

// Data-parallel inner loops shared by the GP and planning code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at startup from the CPU
// feature flags; ISOBATH_SIMD=scalar|avx2 forces a choice. Points are passed
// in structure-of-arrays form (north[], east[]).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace isobath::simd {

struct KernelTable {
  std::string_view name;

  /// out[i] = (qn - north[i])^2 + (qe - east[i])^2
  void (*squared_distances)(double qn, double qe, const double* north, const double* east,
                            std::size_t count, double* out);

  /// Smallest squared distance from (qn, qe) to any point; +inf when count == 0.
  double (*min_squared_distance)(double qn, double qe, const double* north, const double* east,
                                 std::size_t count);

  /// out[i] = signal_variance * exp(-|q - p_i|^2 * inv_two_ell_sq)
  void (*se_kernel_row)(double qn, double qe, const double* north, const double* east,
                        std::size_t count, double inv_two_ell_sq, double signal_variance,
                        double* out);

  /// Writes indices i (ascending) with |q - p_i|^2 <= radius_sq; returns how many.
  std::size_t (*select_within)(double qn, double qe, const double* north, const double* east,
                               std::size_t count, double radius_sq, std::uint32_t* out);

  double (*dot)(const double* a, const double* b, std::size_t count);

  /// out[i] = exp(in[i]); inputs below -708 flush to 0.
  void (*exp)(const double* in, double* out, std::size_t count);

  /// Lower Cholesky factor of row-major n x n `a` (lower triangle read) into
  /// `l` (same layout, upper part left untouched), with `jitter` added to the
  /// diagonal. Returns false on a non-positive pivot.
  bool (*cholesky)(const double* a, double* l, std::size_t n, double jitter);

  /// Solves L y = b in place for the row-major lower factor.
  void (*forward_solve)(const double* l, double* b, std::size_t n);
};

const KernelTable& scalar_kernels();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table used by the library.
const KernelTable& active();

// Span conveniences over the active table.

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

}  // namespace isobath::simd
