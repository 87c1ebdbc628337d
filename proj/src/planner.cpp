#include "isobath/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "isobath/errors.hpp"
#include "isobath/simd/kernels.hpp"

namespace isobath::plan {

void PlanConfig::validate() const {
  if (short_horizon < 1 || short_horizon > total_length)
    throw ConfigError("short_horizon must be in [1, total_length]");
  if (total_length < 1) throw ConfigError("total_length must be >= 1");
  if (mcts_iterations < 1) throw ConfigError("mcts_iterations must be >= 1");
  if (!(mcts_exploration >= 0.0) || !std::isfinite(mcts_exploration))
    throw ConfigError("mcts_exploration must be >= 0");
  if (!(eval_radius >= 0.0) || !std::isfinite(eval_radius)) throw ConfigError("eval_radius must be >= 0");
}

bool bound_condition_check(double jbar_n, double jbar_naive) { return jbar_n >= jbar_naive - 1e-9; }

// ---------------------------------------------------------------------------

RewardEvaluator::RewardEvaluator(PlanContext& ctx, const PlanConfig& cfg) : ctx_(ctx), cfg_(cfg) {
  if (ctx.belief == nullptr) throw ConfigError("plan context needs a belief");
  ctx.loss.validate();
  radius_ = cfg.eval_radius > 0.0 ? cfg.eval_radius : ctx.belief->local_radius();
  if (!(radius_ > 0.0)) throw ConfigError("planning needs a positive local radius");
  const double ms = ctx.belief->data().min_spacing();
  min_spacing_sq_ = ms * ms;
  stamp_.assign(ctx.belief->grid().size(), 0);
  base_slot_.assign(ctx.belief->grid().size(), -1);

  // Predecessor locations, thinned against S and each other.
  gp::PointSet none;
  for (const auto& locs : ctx.predecessors) {
    gp::PointSet added;
    thin(locs, none, added);
    for (std::size_t i = 0; i < added.size(); ++i) pred_.push_back(added[i]);
  }
}

std::size_t RewardEvaluator::remaining() const {
  return cfg_.total_length > ctx_.steps_done ? cfg_.total_length - ctx_.steps_done : 0;
}

bool RewardEvaluator::admissible(const Vec2& p, const gp::PointSet& cond, const gp::PointSet& out) const {
  const auto far_enough = [&](const gp::PointSet& set) {
    if (set.empty()) return true;
    const double d2 = set.min_squared_distance(p);
    return min_spacing_sq_ == 0.0 ? d2 > 0.0 : d2 >= min_spacing_sq_;
  };
  return far_enough(ctx_.belief->data().locations()) && far_enough(pred_) && far_enough(cond) && far_enough(out);
}

void RewardEvaluator::thin(std::span<const Vec2> locations, const gp::PointSet& cond, gp::PointSet& out) const {
  for (const auto& p : locations)
    if (admissible(p, cond, out)) out.push_back(p);
}

namespace {

// Lower factor of row-major `a` into `l`; one retry with jitter on the diagonal.
void factor_or_throw(const simd::KernelTable& kern, const double* a, double* l, std::size_t n, double jitter) {
  if (n == 0) return;
  if (kern.cholesky(a, l, n, 0.0)) return;
  if (!kern.cholesky(a, l, n, jitter))
    throw NumericalError("Gram matrix not positive definite for data size " + std::to_string(n));
}

}  // namespace

const RewardEvaluator::BaseBlock& RewardEvaluator::base_block(std::uint32_t g) {
  if (base_slot_[g] >= 0) return blocks_[static_cast<std::size_t>(base_slot_[g])];
  gp::Belief& belief = *ctx_.belief;
  const gp::KernelSpec& k = belief.model().kernel;
  const auto& kern = simd::active();
  const Vec2& q = belief.grid().point(g);
  const gp::PointSet& s_pts = belief.data().locations();

  BaseBlock b;
  const auto take = [&](const gp::PointSet& set, std::uint32_t i) {
    b.north.push_back(set.north()[i]);
    b.east.push_back(set.east()[i]);
  };
  sel_.clear();
  s_pts.within(q, radius_, sel_);
  if (cfg_.max_local_points > 0 && sel_.size() > cfg_.max_local_points) {
    nearest_.clear();
    for (auto i : sel_) nearest_.push_back({squared_distance(s_pts[i], q), i});
    std::nth_element(nearest_.begin(), nearest_.begin() + static_cast<std::ptrdiff_t>(cfg_.max_local_points),
                     nearest_.end());
    nearest_.resize(cfg_.max_local_points);
    std::sort(nearest_.begin(), nearest_.end(), [](auto& x, auto& y) { return x.second < y.second; });
    for (auto& [d, i] : nearest_) take(s_pts, i);
  } else {
    for (auto i : sel_) take(s_pts, i);
  }
  b.n_s = b.north.size();
  sel_.clear();
  pred_.within(q, radius_, sel_);
  for (auto i : sel_) take(pred_, i);
  const std::size_t n = b.north.size();
  b.n = n;

  gram_.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    kern.se_kernel_row(b.north[i], b.east[i], b.north.data(), b.east.data(), i + 1, k.inv_two_ell_sq(),
                       k.signal_variance, gram_.data() + i * n);
    gram_[i * n + i] += k.noise_variance();
  }
  b.l.resize(n * n);
  factor_or_throw(kern, gram_.data(), b.l.data(), n, belief.model().jitter());
  b.y.resize(n);
  kern.se_kernel_row(q.north, q.east, b.north.data(), b.east.data(), n, k.inv_two_ell_sq(), k.signal_variance,
                     b.y.data());
  if (n > 0) kern.forward_solve(b.l.data(), b.y.data(), n);
  b.head_s = kern.dot(b.y.data(), b.y.data(), b.n_s);
  b.head = b.head_s + kern.dot(b.y.data() + b.n_s, b.y.data() + b.n_s, n - b.n_s);
  b.diag_lo = std::numeric_limits<double>::infinity();
  b.diag_hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b.diag_lo = std::min(b.diag_lo, b.l[i * n + i]);
    b.diag_hi = std::max(b.diag_hi, b.l[i * n + i]);
  }
  base_slot_[g] = static_cast<std::int32_t>(blocks_.size());
  blocks_.push_back(std::move(b));
  return blocks_.back();
}

double RewardEvaluator::marginal(const gp::PointSet& cond, const gp::PointSet& added) {
  if (added.empty()) return 0.0;
  gp::Belief& belief = *ctx_.belief;
  const RegularGrid& grid = belief.grid();
  const gp::KernelSpec& k = belief.model().kernel;
  const auto& kern = simd::active();

  // Grid points within the radius of any added location, deduplicated.
  if (++stamp_id_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    stamp_id_ = 1;
  }
  grid_idx_.clear();
  std::vector<std::uint32_t> hits;
  for (std::size_t i = 0; i < added.size(); ++i) {
    hits.clear();
    grid.within(added[i], radius_, hits);
    for (auto g : hits)
      if (stamp_[g] != stamp_id_) {
        stamp_[g] = stamp_id_;
        grid_idx_.push_back(g);
      }
  }
  std::sort(grid_idx_.begin(), grid_idx_.end());

  const auto gather = [&](const gp::PointSet& set, const Vec2& q) {
    sel_.clear();
    set.within(q, radius_, sel_);
    for (auto i : sel_) {
      north_.push_back(set.north()[i]);
      east_.push_back(set.east()[i]);
    }
  };

  double total = 0.0;
  for (auto g : grid_idx_) {
    const Vec2& q = grid.point(g);
    north_.clear();
    east_.clear();
    gather(cond, q);
    const std::size_t m1 = north_.size();
    gather(added, q);
    const std::size_t m = north_.size();
    if (m == m1) continue;
    const BaseBlock& b = base_block(g);
    const std::size_t nb = b.n;

    // Block Cholesky of [base, new]: W = L11^-1 K(base, new), then the Schur
    // complement of the new points.
    w_.resize(m * nb);
    for (std::size_t j = 0; j < m; ++j) {
      double* wj = w_.data() + j * nb;
      kern.se_kernel_row(north_[j], east_[j], b.north.data(), b.east.data(), nb, k.inv_two_ell_sq(),
                         k.signal_variance, wj);
      if (nb > 0) kern.forward_solve(b.l.data(), wj, nb);
    }
    schur_.resize(m * m);
    for (std::size_t i = 0; i < m; ++i) {
      double* row = schur_.data() + i * m;
      kern.se_kernel_row(north_[i], east_[i], north_.data(), east_.data(), i + 1, k.inv_two_ell_sq(),
                         k.signal_variance, row);
      row[i] += k.noise_variance();
      for (std::size_t j = 0; j <= i; ++j) row[j] -= kern.dot(w_.data() + i * nb, w_.data() + j * nb, nb);
    }
    l22_.resize(m * m);
    factor_or_throw(kern, schur_.data(), l22_.data(), m, belief.model().jitter());
    double lo = b.diag_lo, hi = b.diag_hi;
    for (std::size_t i = 0; i < m; ++i) {
      lo = std::min(lo, l22_[i * m + i]);
      hi = std::max(hi, l22_[i * m + i]);
    }
    if ((hi / lo) * (hi / lo) > belief.model().condition_cap)
      throw NumericalError("Gram matrix ill-conditioned for data size " + std::to_string(nb + m));

    kstar_.resize(m);
    kern.se_kernel_row(q.north, q.east, north_.data(), east_.data(), m, k.inv_two_ell_sq(), k.signal_variance,
                       kstar_.data());
    for (std::size_t j = 0; j < m; ++j) kstar_[j] -= kern.dot(w_.data() + j * nb, b.y.data(), nb);
    kern.forward_solve(l22_.data(), kstar_.data(), m);
    ++local_solves_;
    // Variances given S, S u P' u cond, and everything, all from this local set.
    const double head = b.head + kern.dot(kstar_.data(), kstar_.data(), m1);
    const double tail = kern.dot(kstar_.data() + m1, kstar_.data() + m1, m - m1);
    const double var_s = std::max(k.signal_variance - b.head_s, 0.0);
    const double var1 = std::max(k.signal_variance - head, 0.0);
    const double var2 = std::max(var1 - tail, 0.0);

    const double mean = belief.grid_prediction(g).mean;
    const double before =
        nb == b.n_s && m1 == 0
            ? risk::bayes_risk(mean, var_s, ctx_.loss)
            : risk::expected_bayes_risk_closed({mean, std::max(var_s - var1, 0.0), var1}, ctx_.loss);
    const double after = risk::expected_bayes_risk_closed({mean, std::max(var_s - var2, 0.0), var2}, ctx_.loss);
    total += before - after;
  }
  return total;
}

double RewardEvaluator::path_reward(std::span<const Vec2> locations) {
  gp::PointSet none;
  gp::PointSet added;
  thin(locations, none, added);
  return marginal(none, added);
}

const RewardEvaluator::Tail& RewardEvaluator::tail(const motion::AgentState& from, std::size_t steps) {
  static const Tail empty;
  if (steps == 0) return empty;
  const auto q = [](double v) { return static_cast<std::uint64_t>(std::llround(v) + (1LL << 20)) & ((1ULL << 21) - 1); };
  const std::uint64_t heading_bin =
      static_cast<std::uint64_t>((std::llround(rad_to_deg(from.heading) / 5.0) % 72 + 72) % 72);
  const std::uint64_t key = (q(from.north) << 43) | (q(from.east) << 22) | (heading_bin << 15) | (steps & 0x7FFF);
  if (auto it = tails_.find(key); it != tails_.end()) return it->second;

  const motion::Path path = motion::lawnmower_path(from, steps, ctx_.lawnmower, ctx_.motion);
  const auto locations = motion::sample_locations(path, ctx_.sample_spacing);
  Tail t;
  gp::PointSet none;
  thin(locations, none, t.points);
  t.reward = marginal(none, t.points);
  return tails_.emplace(key, std::move(t)).first->second;
}

double RewardEvaluator::augmented_reward(const motion::Path& short_path) {
  const std::size_t rem = remaining();
  const std::size_t tail_steps = rem > short_path.length() ? rem - short_path.length() : 0;
  const Tail& t = tail(short_path.final_state(), tail_steps);
  const auto locations = motion::sample_locations(short_path, ctx_.sample_spacing);
  gp::PointSet added;
  thin(locations, t.points, added);
  return t.reward + marginal(t.points, added);
}

double RewardEvaluator::objective(const motion::Path& short_path) {
  if (cfg_.use_terminal_reward) return augmented_reward(short_path);
  return path_reward(motion::sample_locations(short_path, ctx_.sample_spacing));
}

double path_reward(PlanContext& ctx, std::span<const Vec2> locations) {
  PlanConfig cfg;
  cfg.total_length = std::max<std::size_t>(ctx.steps_done + 1, 1);
  cfg.short_horizon = 1;
  return RewardEvaluator(ctx, cfg).path_reward(locations);
}

double augmented_reward(const motion::Path& short_path, PlanContext& ctx, const PlanConfig& cfg) {
  return RewardEvaluator(ctx, cfg).augmented_reward(short_path);
}

// ---------------------------------------------------------------------------

namespace {

struct Node {
  motion::AgentState state;
  std::array<std::int32_t, motion::kActionCount> child;
  std::array<std::uint8_t, motion::kActionCount> untried;
  std::uint8_t n_untried = 0;
  std::uint32_t visits = 0;
  double value_sum = 0.0;
};

bool inside(const PlanContext& ctx, const motion::AgentState& s) {
  return !ctx.bounds || ctx.bounds->contains(s.position(), 2.0 * ctx.motion.turn_radius);
}

std::uint64_t sequence_key(std::span<const std::uint8_t> seq) {
  std::uint64_t key = 0;
  for (auto a : seq) key = key * motion::kActionCount + a;
  return key;
}

}  // namespace

PlanResult mcts_plan(const motion::AgentState& start, PlanContext& ctx, const PlanConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RewardEvaluator eval(ctx, cfg);
  PlanResult result;
  const std::size_t horizon = std::min(cfg.short_horizon, eval.remaining());
  result.path = motion::Path::build(start, {}, ctx.motion);
  if (horizon == 0) return result;

  std::mt19937_64 rng(seed);
  std::vector<Node> tree;
  tree.reserve(cfg.mcts_iterations * 2 + 1);
  // Actions whose next state stays inside the bounds; the lawnmower's choice
  // when none does.
  const auto feasible = [&](const motion::AgentState& s, std::array<std::uint8_t, motion::kActionCount>& out) {
    std::uint8_t n = 0;
    for (std::uint8_t a = 0; a < motion::kActionCount; ++a)
      if (inside(ctx, motion::step_index(s, a, ctx.motion))) out[n++] = a;
    if (n == 0) out[n++] = motion::lawnmower_action(s, ctx.lawnmower, ctx.motion);
    return n;
  };
  const auto new_node = [&](const motion::AgentState& s) {
    Node n;
    n.state = s;
    n.child.fill(-1);
    n.n_untried = feasible(s, n.untried);
    std::shuffle(n.untried.begin(), n.untried.begin() + n.n_untried, rng);
    tree.push_back(n);
    return static_cast<std::int32_t>(tree.size() - 1);
  };
  new_node(start);

  std::unordered_map<std::uint64_t, double> memo;
  // Spread of the rewards seen so far; scales the exploration term.
  double reward_lo = std::numeric_limits<double>::infinity();
  double reward_hi = -reward_lo;
  bool have_best = false;
  std::vector<std::uint8_t> best_seq;
  double best_value = -std::numeric_limits<double>::infinity();

  const auto evaluate = [&](const std::vector<std::uint8_t>& seq) {
    const std::uint64_t key = sequence_key(seq);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const double v = eval.objective(motion::Path::build(start, seq, ctx.motion));
    ++result.evaluations;
    memo.emplace(key, v);
    return v;
  };

  // Removes `a` from the node's untried list, creating the child.
  const auto expand = [&](std::int32_t node, std::uint8_t a) {
    Node& n = tree[static_cast<std::size_t>(node)];
    for (std::uint8_t i = 0; i < n.n_untried; ++i)
      if (n.untried[i] == a) {
        std::swap(n.untried[i], n.untried[n.n_untried - 1]);
        --n.n_untried;
        break;
      }
    const std::int32_t c = new_node(motion::step_index(n.state, a, ctx.motion));
    tree[static_cast<std::size_t>(node)].child[a] = c;
    return c;
  };

  std::vector<std::int32_t> visited;
  std::vector<std::uint8_t> seq;
  const auto finish = [&](double value) {
    for (auto id : visited) {
      tree[static_cast<std::size_t>(id)].visits += 1;
      tree[static_cast<std::size_t>(id)].value_sum += value;
    }
    reward_lo = std::min(reward_lo, value);
    reward_hi = std::max(reward_hi, value);
    if (!have_best || value > best_value) {
      have_best = true;
      best_value = value;
      best_seq = seq;
    }
    ++result.iterations;
  };

  if (cfg.seed_naive) {
    // The lawnmower's own next steps, walked into the tree.
    visited.assign(1, 0);
    seq.clear();
    motion::AgentState s = start;
    std::int32_t node = 0;
    for (std::size_t d = 0; d < horizon; ++d) {
      const std::uint8_t a = motion::lawnmower_action(s, ctx.lawnmower, ctx.motion);
      node = expand(node, a);
      visited.push_back(node);
      seq.push_back(a);
      s = motion::step_index(s, a, ctx.motion);
    }
    finish(evaluate(seq));
  }

  std::bernoulli_distribution go_straight(0.5);
  while (result.iterations < cfg.mcts_iterations) {
    visited.assign(1, 0);
    seq.clear();
    std::int32_t node = 0;
    // Selection.
    while (seq.size() < horizon && tree[static_cast<std::size_t>(node)].n_untried == 0) {
      const Node& n = tree[static_cast<std::size_t>(node)];
      const double spread = reward_hi - reward_lo;
      const double c = cfg.mcts_exploration * (spread > 0.0 ? spread : 1.0);
      const double log_n = std::log(static_cast<double>(std::max<std::uint32_t>(n.visits, 1)));
      std::uint8_t pick = 0;
      double best_ucb = -std::numeric_limits<double>::infinity();
      for (std::uint8_t a = 0; a < motion::kActionCount; ++a) {
        if (n.child[a] < 0) continue;
        const Node& ch = tree[static_cast<std::size_t>(n.child[a])];
        const double ucb = ch.value_sum / ch.visits + c * std::sqrt(log_n / ch.visits);
        if (ucb > best_ucb) {
          best_ucb = ucb;
          pick = a;
        }
      }
      node = n.child[pick];
      visited.push_back(node);
      seq.push_back(pick);
    }
    // Expansion.
    if (seq.size() < horizon) {
      Node& n = tree[static_cast<std::size_t>(node)];
      const std::uint8_t a = n.untried[n.n_untried - 1];
      node = expand(node, a);
      visited.push_back(node);
      seq.push_back(a);
    }
    // Rollout.
    motion::AgentState s = tree[static_cast<std::size_t>(node)].state;
    std::array<std::uint8_t, motion::kActionCount> options;
    while (seq.size() < horizon) {
      const std::uint8_t n_opt = feasible(s, options);
      const bool straight_ok = std::find(options.begin(), options.begin() + n_opt, motion::kStraight) !=
                               options.begin() + n_opt;
      std::uint8_t a;
      if (cfg.rollout_policy == RolloutPolicy::StraightBias && straight_ok && go_straight(rng))
        a = motion::kStraight;
      else
        a = options[std::uniform_int_distribution<int>(0, n_opt - 1)(rng)];
      seq.push_back(a);
      s = motion::step_index(s, a, ctx.motion);
    }
    finish(evaluate(seq));
  }

  result.path = motion::Path::build(start, best_seq, ctx.motion);
  result.value = best_value;
  if (cfg.use_terminal_reward) {
    // The pure lawnmower scored through the same decomposition as the candidates.
    seq.clear();
    motion::AgentState s = start;
    for (std::size_t d = 0; d < horizon; ++d) {
      seq.push_back(motion::lawnmower_action(s, ctx.lawnmower, ctx.motion));
      s = motion::step_index(s, seq.back(), ctx.motion);
    }
    result.naive_value = evaluate(seq);
  }
  return result;
}

}  // namespace isobath::plan
