#include "isobath/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "isobath/errors.hpp"
#include "isobath/simd/kernels.hpp"

namespace isobath::gp {

void KernelSpec::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw ConfigError("kernel length_scale must be > 0");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw ConfigError("kernel signal_variance must be > 0");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) throw ConfigError("kernel noise_std must be >= 0");
}

double KernelSpec::operator()(const Vec2& a, const Vec2& b) const {
  return signal_variance * std::exp(-squared_distance(a, b) * inv_two_ell_sq());
}

void GpModel::validate() const {
  kernel.validate();
  if (!std::isfinite(prior_mean)) throw ConfigError("prior mean must be finite");
  if (!(condition_cap > 1.0)) throw ConfigError("condition cap must exceed 1");
}

// ---------------------------------------------------------------------------

PointSet::PointSet(std::span<const Vec2> points) {
  reserve(points.size());
  for (const auto& p : points) push_back(p);
}

void PointSet::push_back(const Vec2& p) {
  north_.push_back(p.north);
  east_.push_back(p.east);
}

void PointSet::clear() {
  north_.clear();
  east_.clear();
}

void PointSet::reserve(std::size_t n) {
  north_.reserve(n);
  east_.reserve(n);
}

double PointSet::min_squared_distance(const Vec2& q) const {
  return simd::active().min_squared_distance(q.north, q.east, north_.data(), east_.data(), size());
}

void PointSet::within(const Vec2& q, double radius, std::vector<std::uint32_t>& out) const {
  const std::size_t base = out.size();
  out.resize(base + size());
  const std::size_t n = simd::active().select_within(q.north, q.east, north_.data(), east_.data(),
                                                     size(), radius * radius, out.data() + base);
  out.resize(base + n);
}

// ---------------------------------------------------------------------------

DataSet::DataSet(double min_spacing) : min_spacing_(min_spacing) {
  if (!(min_spacing >= 0.0) || !std::isfinite(min_spacing))
    throw ConfigError("min_spacing must be a finite value >= 0");
}

bool DataSet::admits(const Vec2& p) const {
  if (points_.empty()) return true;
  const double d2 = points_.min_squared_distance(p);
  if (min_spacing_ == 0.0) return d2 > 0.0;
  return d2 >= min_spacing_ * min_spacing_;
}

InsertDecision DataSet::insert(const Sample& s) {
  if (!admits(s.location)) return InsertDecision::RejectedTooClose;
  points_.push_back(s.location);
  values_.push_back(s.value);
  return InsertDecision::Accepted;
}

DataSet DataSet::subset(std::span<const std::uint32_t> indices) const {
  DataSet out(min_spacing_);
  out.points_.reserve(indices.size());
  out.values_.reserve(indices.size());
  for (auto i : indices) {
    out.points_.push_back(points_[i]);
    out.values_.push_back(values_[i]);
  }
  return out;
}

DataSet local_subset(const DataSet& data, const Vec2& query, double d_eps) {
  if (!(d_eps > 0.0)) throw ConfigError("local subset radius must be > 0");
  std::vector<std::uint32_t> idx;
  data.locations().within(query, d_eps, idx);
  return data.subset(idx);
}

// ---------------------------------------------------------------------------

namespace {

void build_gram(const KernelSpec& k, std::span<const double> north, std::span<const double> east,
                std::vector<double>& gram) {
  const std::size_t n = north.size();
  gram.resize(n * n);
  const auto& kern = simd::active();
  const double noise = k.noise_variance();
  for (std::size_t i = 0; i < n; ++i) {
    kern.se_kernel_row(north[i], east[i], north.data(), east.data(), i + 1, k.inv_two_ell_sq(),
                       k.signal_variance, gram.data() + i * n);
    gram[i * n + i] += noise;
  }
}

}  // namespace

std::vector<Prediction> posterior_predict(const GpModel& model, const DataSet& data,
                                          std::span<const Vec2> queries) {
  std::vector<Prediction> out;
  out.reserve(queries.size());
  const KernelSpec& k = model.kernel;
  if (data.empty()) {
    for (std::size_t i = 0; i < queries.size(); ++i) out.push_back({model.prior_mean, k.signal_variance});
    return out;
  }
  const auto north = data.locations().north();
  const auto east = data.locations().east();
  const std::size_t n = data.size();

  std::vector<double> gram;
  build_gram(k, north, east, gram);
  linalg::Cholesky chol;
  chol.factor(gram, n, model.jitter(), model.condition_cap);

  std::vector<double> w(data.values().begin(), data.values().end());
  for (auto& v : w) v -= model.prior_mean;
  chol.solve_lower(w);

  const auto& kern = simd::active();
  std::vector<double> kstar(n);
  for (const auto& q : queries) {
    kern.se_kernel_row(q.north, q.east, north.data(), east.data(), n, k.inv_two_ell_sq(),
                       k.signal_variance, kstar.data());
    chol.solve_lower(kstar);
    const double mean = model.prior_mean + kern.dot(kstar.data(), w.data(), n);
    const double var = k.signal_variance - kern.dot(kstar.data(), kstar.data(), n);
    out.push_back({mean, std::max(var, 0.0)});
  }
  return out;
}

VarianceReduction variance_reduction(const GpModel& model, const DataSet& data_s,
                                     std::span<const Vec2> planned, const Vec2& query) {
  const Prediction at_s = posterior_predict(model, data_s, std::span(&query, 1)).front();
  VarianceReduction out{at_s.mean, 0.0, at_s.variance};
  if (planned.empty()) return out;

  DataSet q = data_s;
  for (const auto& p : planned) q.insert({p, 0.0});
  if (q.size() == data_s.size()) return out;

  LocalSolver solver(model, 0.0);
  const PointSet* sets[] = {&q.locations()};
  const double var_q = solver.variance(sets, query);
  out.sigma_pq_sq = var_q;
  out.sigma_mu_sq = std::max(at_s.variance - var_q, 0.0);
  return out;
}

// ---------------------------------------------------------------------------

LocalSolver::LocalSolver(GpModel model, double radius) : model_(model), radius_(radius) {
  model_.validate();
}

void LocalSolver::gather(const PointSet& set, const Vec2& q) {
  const auto n = set.north();
  const auto e = set.east();
  if (radius_ <= 0.0) {
    north_.insert(north_.end(), n.begin(), n.end());
    east_.insert(east_.end(), e.begin(), e.end());
    return;
  }
  idx_.clear();
  set.within(q, radius_, idx_);
  for (auto i : idx_) {
    north_.push_back(n[i]);
    east_.push_back(e[i]);
  }
}

void LocalSolver::factor_gathered() {
  build_gram(model_.kernel, north_, east_, gram_);
  chol_.factor(gram_, north_.size(), model_.jitter(), model_.condition_cap);
}

double LocalSolver::solve_variance(const Vec2& q) {
  const std::size_t n = north_.size();
  const auto& k = model_.kernel;
  kstar_.resize(n);
  const auto& kern = simd::active();
  kern.se_kernel_row(q.north, q.east, north_.data(), east_.data(), n, k.inv_two_ell_sq(),
                     k.signal_variance, kstar_.data());
  chol_.solve_lower(kstar_);
  return std::max(k.signal_variance - kern.dot(kstar_.data(), kstar_.data(), n), 0.0);
}

Prediction LocalSolver::predict(const DataSet& data, const Vec2& q) {
  north_.clear();
  east_.clear();
  values_.clear();
  const auto vals = data.values();
  if (radius_ <= 0.0) {
    gather(data.locations(), q);
    values_.assign(vals.begin(), vals.end());
  } else {
    idx_.clear();
    data.locations().within(q, radius_, idx_);
    const auto n = data.locations().north();
    const auto e = data.locations().east();
    for (auto i : idx_) {
      north_.push_back(n[i]);
      east_.push_back(e[i]);
      values_.push_back(vals[i]);
    }
  }
  if (north_.empty()) return {model_.prior_mean, model_.kernel.signal_variance};
  factor_gathered();
  resid_.assign(values_.begin(), values_.end());
  for (auto& v : resid_) v -= model_.prior_mean;
  chol_.solve_lower(resid_);
  const double var = solve_variance(q);
  const double mean =
      model_.prior_mean + simd::active().dot(kstar_.data(), resid_.data(), north_.size());
  return {mean, var};
}

double LocalSolver::variance(std::span<const PointSet* const> sets, const Vec2& q) {
  north_.clear();
  east_.clear();
  for (const PointSet* s : sets)
    if (s != nullptr) gather(*s, q);
  if (north_.empty()) return model_.kernel.signal_variance;
  factor_gathered();
  return solve_variance(q);
}

// ---------------------------------------------------------------------------

Belief::Belief(GpModel model, double min_spacing, double local_radius,
               std::shared_ptr<const RegularGrid> grid)
    : data_(min_spacing), solver_(model, local_radius), grid_(std::move(grid)) {
  if (!grid_) throw ConfigError("belief needs an evaluation grid");
  cache_.resize(grid_->size());
  valid_.assign(grid_->size(), 0);
}

InsertDecision Belief::insert(const Sample& s) {
  const InsertDecision d = data_.insert(s);
  if (d != InsertDecision::Accepted) return d;
  if (solver_.radius() <= 0.0) {
    std::fill(valid_.begin(), valid_.end(), 0);
  } else {
    scratch_.clear();
    grid_->within(s.location, solver_.radius(), scratch_);
    for (auto i : scratch_) valid_[i] = 0;
  }
  return d;
}

Prediction Belief::predict(const Vec2& q) { return solver_.predict(data_, q); }

const Prediction& Belief::grid_prediction(std::size_t i) {
  if (!valid_[i]) {
    cache_[i] = solver_.predict(data_, grid_->point(i));
    valid_[i] = 1;
  }
  return cache_[i];
}

}  // namespace isobath::gp
