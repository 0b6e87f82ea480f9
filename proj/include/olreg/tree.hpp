#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "olreg/core.hpp"

namespace olreg {

inline constexpr int kMaxTreeDepth = 30;

/// Sign path epsilon in {-1,+1}^n, stored as ints.
using SignPath = std::vector<int>;

/// Path number `code` in [0, 2^n): bit n-1 is eps_1, +1 for a set bit.
inline SignPath sign_path(std::uint64_t code, int n) {
  SignPath eps(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) eps[t] = (code >> (n - 1 - t)) & 1U ? 1 : -1;
  return eps;
}

/// Complete rooted binary tree of depth n with a label on each of its
/// 2^n - 1 nodes. Level t (1-based) holds labels z_t(eps_1..eps_{t-1});
/// -1 steps left, +1 steps right. Storage is level order, i.e. heap order:
/// node i has children 2i+1 (left) and 2i+2 (right).
template <class T>
class LabeledTree {
 public:
  LabeledTree() = default;

  explicit LabeledTree(int depth, const T& fill = T{}) : depth_(check(depth)) {
    labels_.assign(node_count(depth_), fill);
  }

  LabeledTree(int depth, std::vector<T> labels)
      : depth_(check(depth)), labels_(std::move(labels)) {
    if (labels_.size() != node_count(depth_))
      throw ShapeError("LabeledTree: depth " + std::to_string(depth_) + " needs " +
                       std::to_string(node_count(depth_)) + " labels, got " +
                       std::to_string(labels_.size()));
  }

  /// Tree whose level-t nodes all carry level_labels[t-1].
  static LabeledTree constant_levels(std::span<const T> level_labels) {
    LabeledTree tr(static_cast<int>(level_labels.size()));
    for (int t = 1; t <= tr.depth_; ++t)
      for (std::size_t i = level_begin(t); i < level_begin(t + 1); ++i)
        tr.labels_[i] = level_labels[t - 1];
    return tr;
  }

  static std::size_t node_count(int depth) {
    return (std::size_t{1} << depth) - 1;
  }
  static std::size_t level_begin(int t) { return (std::size_t{1} << (t - 1)) - 1; }
  static std::size_t left(std::size_t i) { return 2 * i + 1; }
  static std::size_t right(std::size_t i) { return 2 * i + 2; }
  static std::size_t child(std::size_t i, int sign) {
    return sign > 0 ? right(i) : left(i);
  }

  int depth() const { return depth_; }
  std::size_t size() const { return labels_.size(); }
  const std::vector<T>& labels() const { return labels_; }

  T& operator[](std::size_t i) { return labels_[i]; }
  const T& operator[](std::size_t i) const { return labels_[i]; }

  /// Node index of level t reached by the first t-1 signs of eps.
  std::size_t index(int t, std::span<const int> eps) const {
    if (t < 1 || t > depth_) throw RangeError("LabeledTree: level out of range");
    if (eps.size() < static_cast<std::size_t>(t - 1))
      throw ShapeError("LabeledTree: sign prefix too short");
    std::size_t i = 0;
    for (int s = 0; s < t - 1; ++s) i = child(i, eps[s]);
    return i;
  }

  const T& at(int t, std::span<const int> eps) const { return labels_[index(t, eps)]; }

  /// Node indices along the path eps (one per level).
  std::vector<std::size_t> path_indices(std::span<const int> eps) const {
    if (eps.size() != static_cast<std::size_t>(depth_))
      throw ShapeError("LabeledTree: path length " + std::to_string(eps.size()) +
                       " != depth " + std::to_string(depth_));
    std::vector<std::size_t> out(eps.size());
    std::size_t i = 0;
    for (std::size_t t = 0; t < eps.size(); ++t) {
      out[t] = i;
      i = child(i, eps[t]);
    }
    return out;
  }

 private:
  static int check(int depth) {
    if (depth < 1 || depth > kMaxTreeDepth)
      throw RangeError("LabeledTree: depth must be in [1, " +
                       std::to_string(kMaxTreeDepth) + "]");
    return depth;
  }

  int depth_ = 0;
  std::vector<T> labels_;
};

/// (z_1(eps), ..., z_n(eps)).
template <class T>
std::vector<T> tree_path_eval(const LabeledTree<T>& tree, std::span<const int> eps) {
  std::vector<T> out;
  out.reserve(eps.size());
  for (std::size_t i : tree.path_indices(eps)) out.push_back(tree[i]);
  return out;
}

}  // namespace olreg
