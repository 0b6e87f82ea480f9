#pragma once

// Environments: the shattering and block lower-bound adversaries built on a
// certified shattered tree, plus i.i.d. generators for sanity runs.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "olreg/complexity.hpp"
#include "olreg/core.hpp"
#include "olreg/function_class.hpp"
#include "olreg/protocol.hpp"
#include "olreg/tree.hpp"

namespace olreg {

/// Round t of a tree adversary: x_t, and y_t = center + half_width * eps with
/// a fresh fair sign eps.
struct AdversaryStep {
  Covariate x = 0;
  double center = 0.0;
  double half_width = 0.0;
};

/// Plays y_t = s_t(eps) + (B/2) eps_t down a beta-shattered tree.
class ShatteringAdversary final : public Environment<Covariate> {
 public:
  /// Throws std::invalid_argument unless (x_tree, witness) is beta-shattered by cls.
  ShatteringAdversary(LabeledTree<Covariate> x_tree, LabeledTree<double> witness,
                      const FunctionClass& cls, double beta, double B = 4.0)
      : x_tree_(std::move(x_tree)), witness_(std::move(witness)), beta_(beta), B_(B) {
    if (!(B > 0.0)) throw RangeError("ShatteringAdversary: B must be > 0");
    if (!is_beta_shattered(x_tree_, witness_, cls, beta))
      throw std::invalid_argument("ShatteringAdversary: tree is not beta-shattered by the class");
  }

  const LabeledTree<Covariate>& x_tree() const { return x_tree_; }
  const LabeledTree<double>& witness() const { return witness_; }
  double beta() const { return beta_; }
  int depth() const { return x_tree_.depth(); }
  double bound() const override { return B_; }
  /// Rounds whose y had to be clamped into [-B,B] since the last reset.
  std::size_t clamped() const { return clamped_; }

  void reset(std::uint64_t seed) override {
    rng_.seed(seed);
    node_ = 0;
    level_ = 1;
    clamped_ = 0;
  }

  Covariate next_x(std::span<const Round<Covariate>>) override {
    if (level_ > depth())
      throw RangeError("ShatteringAdversary: round exceeds tree depth");
    return x_tree_[node_];
  }

  double next_y(std::span<const Round<Covariate>>, const Covariate&, double) override {
    if (level_ > depth())
      throw RangeError("ShatteringAdversary: round exceeds tree depth");
    const int eps = draw_sign(rng_);
    const double raw = witness_[node_] + 0.5 * B_ * eps;
    const double y = clip(raw, B_);
    if (y != raw) ++clamped_;
    node_ = LabeledTree<double>::child(node_, eps);
    ++level_;
    return y;
  }

 private:
  LabeledTree<Covariate> x_tree_;
  LabeledTree<double> witness_;
  double beta_, B_;
  std::mt19937_64 rng_{0};
  std::size_t node_ = 0;
  int level_ = 1;
  std::size_t clamped_ = 0;
};

/// Round t (1-based) given the signs eps_1..eps_{t-1} drawn so far.
inline AdversaryStep shattering_adversary_step(const ShatteringAdversary& adv, int t,
                                               std::span<const int> eps_prefix) {
  if (t < 1 || t > adv.depth())
    throw RangeError("shattering_adversary_step: round outside [1, depth]");
  const std::size_t node = adv.x_tree().index(t, eps_prefix);
  return {adv.x_tree()[node], adv.witness()[node], 0.5 * adv.bound()};
}

/// sign(0) = +1.
inline int majority_sign(std::span<const int> signs) {
  long s = 0;
  for (int e : signs) s += e;
  return s >= 0 ? 1 : -1;
}

/// Stretches each level of a shattered tree over a block of k rounds. The
/// whole block's raw signs are drawn at its first round and revealed one per
/// round; the block's majority sign then selects the next tree level.
class BlockAdversary final : public Environment<Covariate> {
 public:
  BlockAdversary(ShatteringAdversary base, std::size_t block_size_k)
      : base_(std::move(base)), k_(block_size_k) {
    if (k_ < 1) throw RangeError("BlockAdversary: block size must be >= 1");
  }

  /// k = ceil(n / fat) where fat is the tree depth.
  static std::size_t block_size_for(std::size_t n, int fat) {
    if (fat < 1) throw RangeError("block_size_for: fat must be >= 1");
    return std::max<std::size_t>(1, (n + fat - 1) / static_cast<std::size_t>(fat));
  }

  std::size_t block_size() const { return k_; }
  std::size_t horizon() const { return k_ * static_cast<std::size_t>(base_.depth()); }
  const ShatteringAdversary& base() const { return base_; }
  double bound() const override { return base_.bound(); }
  std::size_t clamped() const { return clamped_; }

  void reset(std::uint64_t seed) override {
    rng_.seed(seed);
    round_ = 0;
    node_ = 0;
    block_.clear();
    clamped_ = 0;
  }

  Covariate next_x(std::span<const Round<Covariate>>) override {
    if (round_ >= horizon()) throw RangeError("BlockAdversary: round exceeds k * depth");
    if (round_ % k_ == 0) {
      block_.resize(k_);
      for (auto& e : block_) e = draw_sign(rng_);
    }
    return base_.x_tree()[node_];
  }

  double next_y(std::span<const Round<Covariate>>, const Covariate&, double) override {
    if (round_ >= horizon() || block_.empty())
      throw RangeError("BlockAdversary: next_y without next_x");
    const double B = base_.bound();
    const double raw = base_.witness()[node_] + 0.5 * B * block_[round_ % k_];
    const double y = clip(raw, B);
    if (y != raw) ++clamped_;
    ++round_;
    if (round_ % k_ == 0) node_ = LabeledTree<double>::child(node_, majority_sign(block_));
    return y;
  }

 private:
  ShatteringAdversary base_;
  std::size_t k_;
  std::mt19937_64 rng_{0};
  std::size_t round_ = 0;
  std::size_t node_ = 0;
  std::vector<int> block_;
  std::size_t clamped_ = 0;
};

/// Round t (1-based) of the block adversary given all raw signs drawn for the
/// completed blocks before round t.
inline AdversaryStep block_adversary_step(const BlockAdversary& adv, std::size_t t,
                                          std::span<const int> completed_block_signs) {
  if (t < 1 || t > adv.horizon()) throw RangeError("block_adversary_step: round outside [1, k*depth]");
  const std::size_t k = adv.block_size();
  const std::size_t block = (t - 1) / k;
  if (completed_block_signs.size() < block * k)
    throw ShapeError("block_adversary_step: signs for earlier blocks missing");
  std::size_t node = 0;
  for (std::size_t b = 0; b < block; ++b)
    node = LabeledTree<double>::child(node, majority_sign(completed_block_signs.subspan(b * k, k)));
  return {adv.base().x_tree()[node], adv.base().witness()[node], 0.5 * adv.bound()};
}

enum class LowerBoundRegime { PowerAbove2, PowerAtMost2 };

/// Unnormalized minimax lower bound from a shattered tree: n beta when the
/// tree depth equals the horizon, or (1/4)(2 sqrt2 beta sqrt(n fat) - n beta^2)
/// from the block construction.
inline double lower_bound_value(double beta, std::size_t n, std::size_t fat,
                                LowerBoundRegime regime) {
  if (!(beta >= 0.0)) throw RangeError("lower_bound_value: beta must be >= 0");
  const double N = static_cast<double>(n);
  if (regime == LowerBoundRegime::PowerAbove2) return N * beta;
  if (fat > n) throw std::invalid_argument("lower_bound_value: fat exceeds n");
  return 0.25 * (2.0 * std::numbers::sqrt2 * beta * std::sqrt(N * static_cast<double>(fat)) -
                 N * beta * beta);
}

/// All 2^m functions on {0..m-1} with values in {-amplitude, +amplitude};
/// member c takes +amplitude at x exactly when bit (m-1-x) of c is set.
inline FunctionClass sign_cube_class(std::size_t m, double amplitude) {
  if (m < 1 || m > 16) throw RangeError("sign_cube_class: m must be in [1, 16]");
  FunctionClass cls(m);
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << m); ++c) {
    std::vector<double> table(m);
    for (std::size_t x = 0; x < m; ++x)
      table[x] = (c >> (m - 1 - x)) & 1U ? amplitude : -amplitude;
    cls.add("s" + std::to_string(c), std::move(table));
  }
  return cls;
}

/// Depth-d tree whose level t queries covariate t-1, with a zero witness:
/// beta-shattered by sign_cube_class(d, beta/2).
inline ShatteredTree level_indexed_tree(int depth) {
  std::vector<Covariate> levels(static_cast<std::size_t>(depth));
  for (int t = 0; t < depth; ++t) levels[t] = static_cast<Covariate>(t);
  return {LabeledTree<Covariate>::constant_levels(levels), LabeledTree<double>(depth, 0.0)};
}

namespace detail {

// Box-Muller on draw_unit so the stream does not depend on the standard
// library's normal_distribution.
template <class Engine>
double draw_gaussian(Engine& rng) {
  double u = 0.0;
  while (u == 0.0) u = draw_unit(rng);
  const double v = draw_unit(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

}  // namespace detail

/// x_t uniform on the domain, y_t = f_star(x_t) + N(0, sd^2) truncated to [-B,B].
class StochasticEnvironment final : public Environment<Covariate> {
 public:
  StochasticEnvironment(std::vector<double> f_star, double noise_sd, double B)
      : f_star_(std::move(f_star)), sd_(noise_sd), B_(B) {
    if (f_star_.empty()) throw std::invalid_argument("StochasticEnvironment: empty domain");
    if (!(noise_sd >= 0.0)) throw RangeError("StochasticEnvironment: noise_sd must be >= 0");
    if (!(B > 0.0)) throw RangeError("StochasticEnvironment: B must be > 0");
  }

  double bound() const override { return B_; }
  std::size_t truncated() const { return truncated_; }

  void reset(std::uint64_t seed) override {
    rng_.seed(seed);
    truncated_ = 0;
  }

  Covariate next_x(std::span<const Round<Covariate>>) override {
    const auto m = static_cast<double>(f_star_.size());
    return std::min(f_star_.size() - 1, static_cast<std::size_t>(draw_unit(rng_) * m));
  }

  double next_y(std::span<const Round<Covariate>>, const Covariate& x, double) override {
    double raw = f_star_.at(x);
    if (sd_ > 0.0) raw += sd_ * detail::draw_gaussian(rng_);
    const double y = clip(raw, B_);
    if (y != raw) ++truncated_;
    return y;
  }

 private:
  std::vector<double> f_star_;
  double sd_, B_;
  std::mt19937_64 rng_{0};
  std::size_t truncated_ = 0;
};

/// Vector covariates for the linear forecaster: x_t uniform in [-1,1]^d scaled
/// to the unit ball, y_t = <w, x_t> + noise clipped to [-B,B]. In adversarial
/// mode y_t = -B sign(y_hat_t) instead, with sign(0) = +1.
class LinearEnvironment final : public Environment<Eigen::VectorXd> {
 public:
  LinearEnvironment(Eigen::VectorXd w, double noise_sd, double B, bool adversarial = false)
      : w_(std::move(w)), sd_(noise_sd), B_(B), adversarial_(adversarial) {
    if (w_.size() < 1) throw ShapeError("LinearEnvironment: empty weight vector");
    if (!(noise_sd >= 0.0)) throw RangeError("LinearEnvironment: noise_sd must be >= 0");
    if (!(B > 0.0)) throw RangeError("LinearEnvironment: B must be > 0");
  }

  double bound() const override { return B_; }
  void reset(std::uint64_t seed) override { rng_.seed(seed); }

  Eigen::VectorXd next_x(std::span<const Round<Eigen::VectorXd>>) override {
    Eigen::VectorXd x(w_.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 2.0 * draw_unit(rng_) - 1.0;
    const double norm = x.norm();
    if (norm > 1.0) x /= norm;
    return x;
  }

  double next_y(std::span<const Round<Eigen::VectorXd>>, const Eigen::VectorXd& x,
                double y_hat) override {
    if (adversarial_) return y_hat > 0.0 ? -B_ : B_;
    double raw = w_.dot(x);
    if (sd_ > 0.0) raw += sd_ * detail::draw_gaussian(rng_);
    return clip(raw, B_);
  }

 private:
  Eigen::VectorXd w_;
  double sd_, B_;
  bool adversarial_;
  std::mt19937_64 rng_{0};
};

}  // namespace olreg
