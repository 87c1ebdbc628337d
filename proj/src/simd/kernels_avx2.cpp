// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the dispatcher has checked the CPU flags.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "isobath/simd/kernels.hpp"
#include "kernels_internal.hpp"

namespace isobath::simd {
namespace {

inline __m256d load_sq_dist(__m256d qn, __m256d qe, const double* north, const double* east) {
  const __m256d dn = _mm256_sub_pd(qn, _mm256_loadu_pd(north));
  const __m256d de = _mm256_sub_pd(qe, _mm256_loadu_pd(east));
  // Not fused: distance comparisons must agree bit for bit with the scalar path.
  return _mm256_add_pd(_mm256_mul_pd(dn, dn), _mm256_mul_pd(de, de));
}

inline double sq_dist_scalar(double qn, double qe, double n, double e) {
  const double dn = qn - n;
  const double de = qe - e;
  return dn * dn + de * de;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Cephes-style exp: range reduction by ln 2, rational approximation on
// [-ln2/2, ln2/2], scale by 2^n through the exponent field.
inline __m256d exp_pd(__m256d x) {
  const __m256d flush = _mm256_cmp_pd(x, _mm256_set1_pd(detail::kExpFlushBelow), _CMP_LT_OQ);
  x = _mm256_min_pd(x, _mm256_set1_pd(709.0));
  x = _mm256_max_pd(x, _mm256_set1_pd(detail::kExpFlushBelow));

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);

  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(3.02994407707441961300E-2));
  p = _mm256_fmadd_pd(p, rr, _mm256_set1_pd(9.99999999999999999910E-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.52448340349684104192E-3));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.27265548208155028766E-1));
  q = _mm256_fmadd_pd(q, rr, _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), _mm256_set1_pd(1.0));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i bits = _mm256_cvtepi32_epi64(n32);
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  const __m256d scale = _mm256_castsi256_pd(bits);
  return _mm256_andnot_pd(flush, _mm256_mul_pd(e, scale));
}

void squared_distances(double qn, double qe, const double* north, const double* east,
                       std::size_t count, double* out) {
  const __m256d vqn = _mm256_set1_pd(qn);
  const __m256d vqe = _mm256_set1_pd(qe);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) _mm256_storeu_pd(out + i, load_sq_dist(vqn, vqe, north + i, east + i));
  for (; i < count; ++i) out[i] = sq_dist_scalar(qn, qe, north[i], east[i]);
}

double min_squared_distance(double qn, double qe, const double* north, const double* east,
                            std::size_t count) {
  const __m256d vqn = _mm256_set1_pd(qn);
  const __m256d vqe = _mm256_set1_pd(qe);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) best = _mm256_min_pd(best, load_sq_dist(vqn, vqe, north + i, east + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
  for (; i < count; ++i) m = std::min(m, sq_dist_scalar(qn, qe, north[i], east[i]));
  return m;
}

void se_kernel_row(double qn, double qe, const double* north, const double* east,
                   std::size_t count, double inv_two_ell_sq, double signal_variance, double* out) {
  const __m256d vqn = _mm256_set1_pd(qn);
  const __m256d vqe = _mm256_set1_pd(qe);
  const __m256d neg_scale = _mm256_set1_pd(-inv_two_ell_sq);
  const __m256d sf2 = _mm256_set1_pd(signal_variance);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d arg = _mm256_mul_pd(load_sq_dist(vqn, vqe, north + i, east + i), neg_scale);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(sf2, exp_pd(arg)));
  }
  if (i < count) {
    alignas(32) double arg[4] = {detail::kExpFlushBelow - 1.0, detail::kExpFlushBelow - 1.0,
                                 detail::kExpFlushBelow - 1.0, detail::kExpFlushBelow - 1.0};
    for (std::size_t j = i; j < count; ++j)
      arg[j - i] = -sq_dist_scalar(qn, qe, north[j], east[j]) * inv_two_ell_sq;
    alignas(32) double res[4];
    _mm256_store_pd(res, _mm256_mul_pd(sf2, exp_pd(_mm256_load_pd(arg))));
    for (std::size_t j = i; j < count; ++j) out[j] = res[j - i];
  }
}

std::size_t select_within(double qn, double qe, const double* north, const double* east,
                          std::size_t count, double radius_sq, std::uint32_t* out) {
  const __m256d vqn = _mm256_set1_pd(qn);
  const __m256d vqe = _mm256_set1_pd(qe);
  const __m256d r2 = _mm256_set1_pd(radius_sq);
  std::size_t n = 0;
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d d2 = load_sq_dist(vqn, vqe, north + i, east + i);
    int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, r2, _CMP_LE_OQ));
    while (mask != 0) {
      const int bit = __builtin_ctz(static_cast<unsigned>(mask));
      out[n++] = static_cast<std::uint32_t>(i + static_cast<std::size_t>(bit));
      mask &= mask - 1;
    }
  }
  for (; i < count; ++i)
    if (sq_dist_scalar(qn, qe, north[i], east[i]) <= radius_sq) out[n++] = static_cast<std::uint32_t>(i);
  return n;
}

inline double dot_inline(const double* a, const double* b, std::size_t count) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= count; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= count; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < count; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double dot(const double* a, const double* b, std::size_t count) { return dot_inline(a, b, count); }

bool cholesky(const double* a, double* l, std::size_t n, double jitter) {
  for (std::size_t i = 0; i < n; ++i) {
    double* li = l + i * n;
    for (std::size_t j = 0; j < i; ++j) {
      const double* lj = l + j * n;
      li[j] = (a[i * n + j] - dot_inline(li, lj, j)) / lj[j];
    }
    const double d = a[i * n + i] + jitter - dot_inline(li, li, i);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    li[i] = std::sqrt(d);
  }
  return true;
}

void forward_solve(const double* l, double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l + i * n;
    b[i] = (b[i] - dot_inline(li, b, i)) / li[i];
  }
}

void exp_batch(const double* in, double* out, std::size_t count) {
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(in + i)));
  if (i < count) {
    alignas(32) double buf[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = i; j < count; ++j) buf[j - i] = in[j];
    alignas(32) double res[4];
    _mm256_store_pd(res, exp_pd(_mm256_load_pd(buf)));
    for (std::size_t j = i; j < count; ++j) out[j] = res[j - i];
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{
      "avx2",        squared_distances, min_squared_distance, se_kernel_row, select_within,
      dot,           exp_batch,         cholesky,             forward_solve,
  };
  return table;
}

}  // namespace isobath::simd
