#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "isobath/simd/kernels.hpp"

using namespace isobath;

namespace {

struct Points {
  std::vector<double> n, e;
};

Points random_points(std::mt19937_64& rng, std::size_t count) {
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  Points p;
  for (std::size_t i = 0; i < count; ++i) {
    p.n.push_back(u(rng));
    p.e.push_back(u(rng));
  }
  return p;
}

const simd::KernelTable* avx2_or_skip() { return simd::avx2_kernels(); }

}  // namespace

TEST(Simd, ActiveTableIsKnown) {
  const auto name = simd::active().name;
  EXPECT_TRUE(name == "scalar" || name == "avx2") << name;
}

// Sizes straddle the 4-lane width so tails are covered.
class SimdEquivalence : public ::testing::TestWithParam<std::size_t> {};

TEST_P(SimdEquivalence, DistancesAndSelectionBitIdentical) {
  const auto* v = avx2_or_skip();
  if (v == nullptr) GTEST_SKIP() << "no AVX2 on this CPU";
  const auto& s = simd::scalar_kernels();
  std::mt19937_64 rng(GetParam());
  const auto p = random_points(rng, GetParam());
  std::vector<double> a(GetParam()), b(GetParam());
  std::vector<std::uint32_t> ia(GetParam()), ib(GetParam());
  for (int q = 0; q < 20; ++q) {
    const double qn = p.n.empty() ? 0.0 : p.n[q % p.n.size()] + 0.5, qe = 3.0 * q;
    s.squared_distances(qn, qe, p.n.data(), p.e.data(), p.n.size(), a.data());
    v->squared_distances(qn, qe, p.n.data(), p.e.data(), p.n.size(), b.data());
    EXPECT_EQ(a, b);
    EXPECT_EQ(s.min_squared_distance(qn, qe, p.n.data(), p.e.data(), p.n.size()),
              v->min_squared_distance(qn, qe, p.n.data(), p.e.data(), p.n.size()));
    const double r2 = 200.0 * 200.0;
    const auto ca = s.select_within(qn, qe, p.n.data(), p.e.data(), p.n.size(), r2, ia.data());
    const auto cb = v->select_within(qn, qe, p.n.data(), p.e.data(), p.n.size(), r2, ib.data());
    ASSERT_EQ(ca, cb);
    for (std::size_t i = 0; i < ca; ++i) EXPECT_EQ(ia[i], ib[i]);
  }
}

TEST_P(SimdEquivalence, KernelRowExpDotClose) {
  const auto* v = avx2_or_skip();
  if (v == nullptr) GTEST_SKIP() << "no AVX2 on this CPU";
  const auto& s = simd::scalar_kernels();
  const std::size_t n = GetParam();
  std::mt19937_64 rng(100 + n);
  const auto p = random_points(rng, n);
  std::vector<double> a(n), b(n);
  s.se_kernel_row(10.0, -20.0, p.n.data(), p.e.data(), n, 1.0 / 5000.0, 25.0, a.data());
  v->se_kernel_row(10.0, -20.0, p.n.data(), p.e.data(), n, 1.0 / 5000.0, 25.0, b.data());
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-13 * 25.0);

  std::uniform_real_distribution<double> x(-745.0, 5.0);
  std::vector<double> in(n);
  for (auto& t : in) t = x(rng);
  s.exp(in.data(), a.data(), n);
  v->exp(in.data(), b.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-14 * std::max(1.0, a[i]));

  EXPECT_NEAR(s.dot(p.n.data(), p.e.data(), n), v->dot(p.n.data(), p.e.data(), n), 1e-9 * (1.0 + n) * 2.5e5);
}

TEST_P(SimdEquivalence, CholeskyAndSolveClose) {
  const auto* v = avx2_or_skip();
  if (v == nullptr) GTEST_SKIP() << "no AVX2 on this CPU";
  const auto& s = simd::scalar_kernels();
  const std::size_t n = std::min<std::size_t>(GetParam(), 60);
  if (n == 0) return;
  std::mt19937_64 rng(200 + n);
  const auto p = random_points(rng, n);
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d2 = (p.n[i] - p.n[j]) * (p.n[i] - p.n[j]) + (p.e[i] - p.e[j]) * (p.e[i] - p.e[j]);
      k[i * n + j] = 25.0 * std::exp(-d2 / 5000.0) + (i == j ? 0.25 : 0.0);
    }
  std::vector<double> la(n * n, 0.0), lb(n * n, 0.0);
  ASSERT_TRUE(s.cholesky(k.data(), la.data(), n, 0.0));
  ASSERT_TRUE(v->cholesky(k.data(), lb.data(), n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) EXPECT_NEAR(la[i * n + j], lb[i * n + j], 1e-10);
  std::vector<double> ya(n, 1.0), yb(n, 1.0);
  s.forward_solve(la.data(), ya.data(), n);
  v->forward_solve(la.data(), yb.data(), n);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ya[i], yb[i], 1e-10 * std::max(1.0, std::abs(ya[i])));
}

INSTANTIATE_TEST_SUITE_P(Sizes, SimdEquivalence, ::testing::Values(0, 1, 3, 4, 5, 7, 8, 17, 64, 259));

TEST(Simd, CholeskyRejectsIndefinite) {
  const double a[4] = {1.0, 2.0, 2.0, 1.0};
  double l[4] = {};
  EXPECT_FALSE(simd::scalar_kernels().cholesky(a, l, 2, 0.0));
  if (const auto* v = simd::avx2_kernels()) {
    EXPECT_FALSE(v->cholesky(a, l, 2, 0.0));
  }
}
