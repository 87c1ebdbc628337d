#pragma once

// Gaussian-process beliefs over depth: exact conditioning, the sparse
// (density-limited) data set, and the local-subset predictor.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "isobath/geometry.hpp"
#include "isobath/grid.hpp"
#include "isobath/linalg.hpp"

namespace isobath::gp {

enum class KernelFamily { SquaredExponential };

/// k(p, p') = signal_variance * exp(-|p - p'|^2 / (2 length_scale^2)); noise_std
/// is the measurement noise of z = f(p) + eps.
struct KernelSpec {
  double length_scale = 50.0;
  double signal_variance = 25.0;
  double noise_std = 0.5;
  KernelFamily family = KernelFamily::SquaredExponential;

  void validate() const;
  double inv_two_ell_sq() const { return 1.0 / (2.0 * length_scale * length_scale); }
  double noise_variance() const { return noise_std * noise_std; }
  double operator()(const Vec2& a, const Vec2& b) const;
};

/// Kernel plus the constant prior mean and numerical limits.
struct GpModel {
  KernelSpec kernel;
  double prior_mean = 0.0;
  double condition_cap = 1e12;

  void validate() const;
  /// Diagonal jitter used when the plain factorization fails.
  double jitter() const { return 1e-8 * kernel.signal_variance; }
};

struct Sample {
  Vec2 location;
  double value = 0.0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Locations only, structure-of-arrays so the SIMD kernels can scan them.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::span<const Vec2> points);

  std::size_t size() const { return north_.size(); }
  bool empty() const { return north_.empty(); }
  Vec2 operator[](std::size_t i) const { return {north_[i], east_[i]}; }
  std::span<const double> north() const { return north_; }
  std::span<const double> east() const { return east_; }

  void push_back(const Vec2& p);
  void clear();
  void reserve(std::size_t n);

  /// Smallest distance squared to any stored point (+inf when empty).
  double min_squared_distance(const Vec2& q) const;
  /// Indices with |p - q| <= radius, ascending.
  void within(const Vec2& q, double radius, std::vector<std::uint32_t>& out) const;

 private:
  std::vector<double> north_;
  std::vector<double> east_;
};

enum class InsertDecision { Accepted, RejectedTooClose };

/// Ordered samples whose locations are pairwise at least min_spacing apart.
/// A candidate exactly min_spacing from its nearest neighbour is accepted;
/// later samples near an existing center are rejected (first write wins).
class DataSet {
 public:
  explicit DataSet(double min_spacing = 0.0);

  double min_spacing() const { return min_spacing_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const PointSet& locations() const { return points_; }
  std::span<const double> values() const { return values_; }
  Sample operator[](std::size_t i) const { return {points_[i], values_[i]}; }

  bool admits(const Vec2& p) const;
  InsertDecision insert(const Sample& s);

  /// Copy restricted to the given indices, in the given order; spacing is kept.
  DataSet subset(std::span<const std::uint32_t> indices) const;

 private:
  double min_spacing_;
  PointSet points_;
  std::vector<double> values_;
};

/// Sparse insertion rule: accepted iff no existing location is closer than min_spacing.
inline InsertDecision sparse_insert(DataSet& data, const Sample& s) { return data.insert(s); }

/// Samples with |p - query| <= d_eps, order preserved.
DataSet local_subset(const DataSet& data, const Vec2& query, double d_eps);

/// Exact GP conditioning on every sample; empty data returns the prior.
/// Throws NumericalError when the Gram matrix is too ill-conditioned.
std::vector<Prediction> posterior_predict(const GpModel& model, const DataSet& data,
                                          std::span<const Vec2> queries);

struct VarianceReduction {
  double mu_mu = 0.0;        // posterior mean given S
  double sigma_mu_sq = 0.0;  // variance(S) - variance(S u planned), >= 0
  double sigma_pq_sq = 0.0;  // variance(S u planned)
};

/// Spread of the future posterior mean at `query` once `planned` locations are
/// measured. Planned locations go through the sparse rule against S (so a
/// duplicate of an accepted location changes nothing); values are never used.
VarianceReduction variance_reduction(const GpModel& model, const DataSet& data_s,
                                     std::span<const Vec2> planned, const Vec2& query);

/// Reusable local-subset conditioning. Holds scratch buffers, so one instance
/// must not be shared between threads.
class LocalSolver {
 public:
  /// radius <= 0 conditions on everything that is passed in.
  LocalSolver(GpModel model, double radius);

  const GpModel& model() const { return model_; }
  double radius() const { return radius_; }

  /// Posterior at q from the samples of `data` within radius.
  Prediction predict(const DataSet& data, const Vec2& q);

  /// Posterior variance at q given the union of the point sets (locations
  /// within radius of q are used from each set).
  double variance(std::span<const PointSet* const> sets, const Vec2& q);

 private:
  void gather(const PointSet& set, const Vec2& q);
  void factor_gathered();
  double solve_variance(const Vec2& q);

  GpModel model_;
  double radius_;
  linalg::Cholesky chol_;
  std::vector<std::uint32_t> idx_;
  std::vector<double> north_;
  std::vector<double> east_;
  std::vector<double> values_;
  std::vector<double> gram_;
  std::vector<double> kstar_;
  std::vector<double> resid_;
};

/// One agent's belief: kernel, sparse data set, and cached local-subset
/// predictions on an evaluation grid. Cache entries within the local radius of
/// a newly accepted sample are invalidated, so cached values always equal a
/// fresh local prediction.
class Belief {
 public:
  Belief(GpModel model, double min_spacing, double local_radius,
         std::shared_ptr<const RegularGrid> grid);

  const GpModel& model() const { return solver_.model(); }
  double local_radius() const { return solver_.radius(); }
  const DataSet& data() const { return data_; }
  const RegularGrid& grid() const { return *grid_; }
  std::shared_ptr<const RegularGrid> grid_ptr() const { return grid_; }

  InsertDecision insert(const Sample& s);

  Prediction predict(const Vec2& q);
  const Prediction& grid_prediction(std::size_t i);

 private:
  DataSet data_;
  LocalSolver solver_;
  std::shared_ptr<const RegularGrid> grid_;
  std::vector<Prediction> cache_;
  std::vector<std::uint8_t> valid_;
  std::vector<std::uint32_t> scratch_;
};

}  // namespace isobath::gp
