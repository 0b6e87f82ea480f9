#pragma once

// Desk-scale complexity measures of a finite class on explicit trees:
// beta-shattering and the sequential fat-shattering dimension, sequential
// covering numbers in l2 and l-infinity, and the offset Rademacher complexity.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "olreg/core.hpp"
#include "olreg/function_class.hpp"
#include "olreg/parallel.hpp"
#include "olreg/tree.hpp"

namespace olreg {

/// Slack on the shattering and cover inequalities so that constructions
/// meeting them with equality survive floating-point rounding.
inline constexpr double kComparisonTol = 1e-12;

namespace detail {

inline void check_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw RangeError("beta must be finite and >= 0");
}

inline void check_tree_domain(const LabeledTree<Covariate>& x_tree,
                              const FunctionClass& cls) {
  for (Covariate x : x_tree.labels())
    if (x >= cls.domain_size())
      throw RangeError("tree label " + std::to_string(x) + " outside class domain");
}

// Members with pairwise distinct tables, in first-occurrence order.
inline std::vector<std::size_t> distinct_members(const FunctionClass& cls) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < cls.size(); ++i) {
    bool dup = false;
    for (std::size_t j : keep)
      if (std::equal(cls.values(i).begin(), cls.values(i).end(), cls.values(j).begin())) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(i);
  }
  return keep;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shattering

/// True iff for every eps in {+-1}^d some f satisfies
/// eps_t (f(x_t(eps)) - s_t(eps)) >= beta/2 for all t.
inline bool is_beta_shattered(const LabeledTree<Covariate>& x_tree,
                              const LabeledTree<double>& witness,
                              const FunctionClass& cls, double beta,
                              int max_depth = 12) {
  detail::check_beta(beta);
  if (x_tree.depth() != witness.depth())
    throw ShapeError("is_beta_shattered: tree depths differ");
  if (x_tree.depth() > max_depth)
    throw ResourceError("is_beta_shattered: depth " + std::to_string(x_tree.depth()) +
                            " over limit " + std::to_string(max_depth),
                        0);
  if (cls.empty()) return false;
  detail::check_tree_domain(x_tree, cls);

  // Depth-first over nodes carrying the members still consistent with the path.
  const double half = beta / 2.0;
  std::vector<std::size_t> all(cls.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto rec = [&](auto&& self, std::size_t node, int level,
                 const std::vector<std::size_t>& alive) -> bool {
    if (level > x_tree.depth()) return !alive.empty();
    std::vector<std::size_t> lo, hi;
    for (std::size_t f : alive) {
      const double gap = cls(f, x_tree[node]) - witness[node];
      if (-gap >= half - kComparisonTol) lo.push_back(f);
      if (gap >= half - kComparisonTol) hi.push_back(f);
    }
    if (lo.empty() || hi.empty()) return false;
    return self(self, LabeledTree<double>::left(node), level + 1, lo) &&
           self(self, LabeledTree<double>::right(node), level + 1, hi);
  };
  return rec(rec, 0, 1, all);
}

struct ShatterOptions {
  int max_depth = 6;
  std::size_t memo_limit = 2'000'000;
  /// Witness values to try. When empty, every distinct value a of the members
  /// at the covariate yields the candidate a + beta/2; each such split keeps
  /// the largest possible member sets, so the search is exact over all real
  /// witnesses.
  std::vector<double> witness_grid;
};

struct ShatteredTree {
  LabeledTree<Covariate> x_tree;
  LabeledTree<double> witness;
};

/// Exhaustive search for beta-shattered trees over all covariate labelings.
class ShatterSearch {
 public:
  ShatterSearch(const FunctionClass& cls, double beta, ShatterOptions opts = {})
      : cls_(cls), beta_(beta), opts_(std::move(opts)) {
    detail::check_beta(beta);
    members_ = detail::distinct_members(cls);
  }

  bool shatters(int depth) {
    if (depth <= 0) return !members_.empty();
    return find(members_, depth).has_value();
  }

  std::optional<ShatteredTree> tree(int depth) {
    if (depth < 1 || !shatters(depth)) return std::nullopt;
    ShatteredTree out{LabeledTree<Covariate>(depth), LabeledTree<double>(depth)};
    build(members_, depth, 0, out);
    return out;
  }

  /// Largest d <= max_depth admitting a shattered tree; 0 if none.
  int dimension() {
    int d = 0;
    while (d < opts_.max_depth && shatters(d + 1)) ++d;
    return d;
  }

 private:
  using Set = std::vector<std::size_t>;
  struct Split {
    Covariate x;
    double s;
  };

  std::pair<Set, Set> split(const Set& S, Covariate x, double s) const {
    Set lo, hi;
    const double half = beta_ / 2.0;
    for (std::size_t f : S) {
      const double gap = cls_(f, x) - s;
      if (-gap >= half - kComparisonTol) lo.push_back(f);
      if (gap >= half - kComparisonTol) hi.push_back(f);
    }
    return {std::move(lo), std::move(hi)};
  }

  std::vector<double> witnesses(const Set& S, Covariate x) const {
    if (!opts_.witness_grid.empty()) return opts_.witness_grid;
    std::vector<double> w;
    for (std::size_t f : S) w.push_back(cls_(f, x) + beta_ / 2.0);
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
  }

  std::optional<Split> find(const Set& S, int d) {
    if (S.size() < (std::size_t{1} << d)) return std::nullopt;
    std::string key(reinterpret_cast<const char*>(S.data()), S.size() * sizeof(std::size_t));
    key.push_back(static_cast<char>(d));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= opts_.memo_limit)
      throw ResourceError("fat-shattering search exceeded memo limit", d);

    std::optional<Split> found;
    const std::size_t need = std::size_t{1} << (d - 1);
    for (Covariate x = 0; x < cls_.domain_size() && !found; ++x)
      for (double s : witnesses(S, x)) {
        auto [lo, hi] = split(S, x, s);
        if (lo.size() < need || hi.size() < need) continue;
        if (d == 1 || (find(lo, d - 1) && find(hi, d - 1))) {
          found = Split{x, s};
          break;
        }
      }
    memo_.emplace(std::move(key), found);
    return found;
  }

  void build(const Set& S, int d, std::size_t node, ShatteredTree& out) {
    const auto sp = *find(S, d);
    out.x_tree[node] = sp.x;
    out.witness[node] = sp.s;
    if (d == 1) return;
    auto [lo, hi] = split(S, sp.x, sp.s);
    build(lo, d - 1, LabeledTree<double>::left(node), out);
    build(hi, d - 1, LabeledTree<double>::right(node), out);
  }

  const FunctionClass& cls_;
  double beta_;
  ShatterOptions opts_;
  Set members_;
  std::unordered_map<std::string, std::optional<Split>> memo_;
};

/// Sequential fat-shattering dimension at scale beta, capped at max_depth.
inline int fat_shattering_dim(const FunctionClass& cls, std::size_t domain_size,
                              double beta, int max_depth = 6,
                              ShatterOptions opts = {}) {
  if (domain_size != cls.domain_size())
    throw ShapeError("fat_shattering_dim: domain size does not match class");
  if (cls.empty()) return 0;
  opts.max_depth = max_depth;
  return ShatterSearch(cls, beta, std::move(opts)).dimension();
}

// ---------------------------------------------------------------------------
// Sequential covers

enum class CoverNorm { L2, Linf };

struct CoverResult {
  std::size_t size = 0;
  bool exact = true;
  const char* mode() const { return exact ? "exact" : "upper_bound_only"; }
};

struct CoverOptions {
  int max_depth = 12;
  std::size_t node_budget = 4'000'000;
};

namespace detail {

// Exact minimum cover by a search over k cover trees, level by level.
//
// A cover tree contributes one value per node. Along any path, tree i still
// "covers" member f while its accumulated distance stays within budget
// (l-infinity: every node within beta; l2: sum of squares within n beta^2).
// The state at a node is the k x |F| matrix of accumulated distances; the two
// subtrees below a node are independent given that state. Node values are
// drawn from a finite candidate set: the window centres a + beta for
// l-infinity (exact, since any covered set of values shifts into the window
// starting at its minimum), plus the member values and their pairwise
// midpoints for l2. With the same candidates in both norms an l-infinity
// cover is also an l2 cover.
class CoverSolver {
 public:
  struct BudgetExceeded {};

  CoverSolver(const FunctionClass& cls, const LabeledTree<Covariate>& x_tree,
              double beta, CoverNorm norm, std::size_t budget)
      : n_(x_tree.depth()), norm_(norm), budget_(budget) {
    const auto members = distinct_members(cls);
    // Members with identical evaluation trees are interchangeable here.
    std::vector<std::vector<double>> evals;
    for (std::size_t f : members) {
      std::vector<double> e(x_tree.size());
      for (std::size_t u = 0; u < x_tree.size(); ++u) e[u] = cls(f, x_tree[u]);
      if (std::find(evals.begin(), evals.end(), e) == evals.end())
        evals.push_back(std::move(e));
    }
    m_ = evals.size();
    values_.assign(x_tree.size(), std::vector<double>(m_));
    for (std::size_t u = 0; u < x_tree.size(); ++u)
      for (std::size_t f = 0; f < m_; ++f) values_[u][f] = evals[f][u];

    limit_ = norm == CoverNorm::Linf ? beta + kComparisonTol
                                     : static_cast<double>(n_) * beta * beta + kComparisonTol;
    candidates_.resize(x_tree.size());
    for (std::size_t u = 0; u < x_tree.size(); ++u) {
      auto vals = values_[u];
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
      auto& c = candidates_[u];
      for (double a : vals) c.push_back(a + beta);
      if (norm == CoverNorm::L2) {
        for (double a : vals) c.push_back(a);
        for (std::size_t i = 0; i < vals.size(); ++i)
          for (std::size_t j = i + 1; j < vals.size(); ++j)
            c.push_back(0.5 * (vals[i] + vals[j]));
      }
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
    }
  }

  std::size_t distinct() const { return m_; }

  // Lower bound on the cover size: along any path, members that no single
  // cover tree can serve together need separate trees. Two members fit one
  // tree only if |f - g| <= 2 beta at every node (l-infinity) or
  // sum (f - g)^2 <= 4 n beta^2 (l2, from (a+b)^2 <= 2a^2 + 2b^2).
  std::size_t lower_bound() const {
    const std::size_t paths = std::size_t{1} << n_;
    std::size_t best = m_ ? 1 : 0;
    std::vector<std::uint64_t> clash(m_);
    for (std::size_t p = 0; p < paths; ++p) {
      std::fill(clash.begin(), clash.end(), 0);
      for (std::size_t f = 0; f < m_; ++f)
        for (std::size_t g = f + 1; g < m_; ++g) {
          double acc = 0.0;
          std::size_t u = 0;
          for (int t = 0; t < n_; ++t) {
            const double d = std::abs(values_[u][f] - values_[u][g]);
            acc = norm_ == CoverNorm::Linf ? std::max(acc, d) : acc + d * d;
            u = ((p >> (n_ - 1 - t)) & 1U) ? 2 * u + 2 : 2 * u + 1;
          }
          const bool apart = norm_ == CoverNorm::Linf ? acc > 2.0 * limit_ : acc > 4.0 * limit_;
          if (apart) clash[f] |= std::uint64_t{1} << g, clash[g] |= std::uint64_t{1} << f;
        }
      best = std::max(best, max_clique(clash, m_ <= 20));
    }
    return best;
  }

  bool feasible(std::size_t k) {
    k_ = k;
    memo_.clear();
    std::vector<double> state(k * m_, 0.0);
    return node(0, 1, state);
  }

  // Greedy set cover using evaluation trees of the members as candidates.
  std::size_t greedy() const {
    const std::size_t paths = std::size_t{1} << n_;
    auto covers = [&](std::size_t g, std::size_t f, std::size_t p) {
      double acc = 0.0;
      std::size_t u = 0;
      for (int t = 0; t < n_; ++t) {
        const double d = std::abs(values_[u][g] - values_[u][f]);
        acc = norm_ == CoverNorm::Linf ? std::max(acc, d) : acc + d * d;
        const bool right = (p >> (n_ - 1 - t)) & 1U;
        u = right ? 2 * u + 2 : 2 * u + 1;
      }
      return acc <= limit_;
    };
    std::vector<char> covered(m_ * paths, 0);
    std::size_t remaining = m_ * paths, used = 0;
    while (remaining > 0) {
      std::size_t best_g = 0, best_gain = 0;
      for (std::size_t g = 0; g < m_; ++g) {
        std::size_t gain = 0;
        for (std::size_t f = 0; f < m_; ++f)
          for (std::size_t p = 0; p < paths; ++p)
            if (!covered[f * paths + p] && covers(g, f, p)) ++gain;
        if (gain > best_gain) best_gain = gain, best_g = g;
      }
      for (std::size_t f = 0; f < m_; ++f)
        for (std::size_t p = 0; p < paths; ++p)
          if (!covered[f * paths + p] && covers(best_g, f, p)) {
            covered[f * paths + p] = 1;
            --remaining;
          }
      ++used;
    }
    return used;
  }

 private:
  static constexpr double kDead = std::numeric_limits<double>::infinity();

  // Under l-infinity only liveness matters, so live entries stay at 0 and
  // equivalent states share a memo entry.
  double accumulate(double acc, double dist) const {
    if (acc == kDead) return kDead;
    if (norm_ == CoverNorm::Linf) return dist <= limit_ ? 0.0 : kDead;
    const double next = acc + dist * dist;
    return next <= limit_ ? next : kDead;
  }

  // Necessary condition for the subtree at u: on every path below, each
  // member can be given a live row so that no two members sharing a row are
  // too far apart to be served by it (the pairwise test of lower_bound with
  // the remaining budgets).
  bool paths_assignable(std::size_t u, int level, const std::vector<double>& state) const {
    const int rest = n_ - level + 1;
    const std::size_t paths = std::size_t{1} << rest;
    std::vector<double> gap(m_ * m_);
    std::vector<std::size_t> row_of(m_);
    for (std::size_t p = 0; p < paths; ++p) {
      std::fill(gap.begin(), gap.end(), 0.0);
      std::size_t v = u;
      for (int t = 0; t < rest; ++t) {
        for (std::size_t f = 0; f < m_; ++f)
          for (std::size_t g = f + 1; g < m_; ++g) {
            const double d = std::abs(values_[v][f] - values_[v][g]);
            double& acc = gap[f * m_ + g];
            acc = norm_ == CoverNorm::Linf ? std::max(acc, d) : acc + d * d;
          }
        v = ((p >> (rest - 1 - t)) & 1U) ? 2 * v + 2 : 2 * v + 1;
      }
      auto fits = [&](std::size_t i, std::size_t f, std::size_t g) {
        const double a = state[i * m_ + f], b = state[i * m_ + g];
        const double d = gap[std::min(f, g) * m_ + std::max(f, g)];
        if (norm_ == CoverNorm::Linf) return d <= 2.0 * limit_;
        return d <= 2.0 * ((limit_ - a) + (limit_ - b));
      };
      auto assign = [&](auto&& self, std::size_t f) -> bool {
        if (f == m_) return true;
        for (std::size_t i = 0; i < k_; ++i) {
          if (state[i * m_ + f] == kDead) continue;
          bool ok = true;
          for (std::size_t g = 0; g < f && ok; ++g)
            if (row_of[g] == i && !fits(i, f, g)) ok = false;
          if (!ok) continue;
          row_of[f] = i;
          if (self(self, f + 1)) return true;
        }
        return false;
      };
      if (!assign(assign, 0)) return false;
    }
    return true;
  }

  // Largest set of pairwise clashing members; greedy when not exact.
  static std::size_t max_clique(const std::vector<std::uint64_t>& adj, bool exact) {
    std::size_t best = 0;
    auto grow = [&](auto&& self, std::uint64_t cand, std::size_t size) -> void {
      if (cand == 0) {
        best = std::max(best, size);
        return;
      }
      if (size + static_cast<std::size_t>(std::popcount(cand)) <= best) return;
      const int v = std::countr_zero(cand);
      self(self, cand & adj[v], size + 1);
      if (exact) self(self, cand & ~(std::uint64_t{1} << v), size);
    };
    const std::uint64_t all = adj.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << adj.size()) - 1;
    grow(grow, all, 0);
    return best;
  }

  std::uint64_t alive_mask(std::span<const double> row) const {
    std::uint64_t mask = 0;
    for (std::size_t f = 0; f < m_; ++f)
      if (row[f] != kDead) mask |= std::uint64_t{1} << f;
    return mask;
  }

  void canonicalize(std::vector<double>& state) const {
    std::vector<std::vector<double>> rows(k_);
    for (std::size_t i = 0; i < k_; ++i)
      rows[i].assign(state.begin() + i * m_, state.begin() + (i + 1) * m_);
    std::sort(rows.begin(), rows.end());
    for (std::size_t i = 0; i < k_; ++i)
      std::copy(rows[i].begin(), rows[i].end(), state.begin() + i * m_);
  }

  // Candidate node values for a row that are not dominated by another
  // candidate (componentwise no-worse distances on the row's live members).
  std::vector<std::vector<double>> row_options(std::size_t u,
                                               std::span<const double> row) const {
    std::vector<std::vector<double>> opts;
    if (alive_mask(row) == 0) {
      opts.emplace_back(row.begin(), row.end());
      return opts;
    }
    for (double c : candidates_[u]) {
      std::vector<double> next(m_);
      for (std::size_t f = 0; f < m_; ++f)
        next[f] = accumulate(row[f], std::abs(values_[u][f] - c));
      opts.push_back(std::move(next));
    }
    std::sort(opts.begin(), opts.end());
    opts.erase(std::unique(opts.begin(), opts.end()), opts.end());
    std::vector<std::vector<double>> kept;
    for (std::size_t a = 0; a < opts.size(); ++a) {
      bool dominated = false;
      for (std::size_t b = 0; b < opts.size() && !dominated; ++b) {
        if (a == b) continue;
        bool no_worse = true, better = false;
        for (std::size_t f = 0; f < m_; ++f) {
          if (opts[b][f] > opts[a][f]) no_worse = false;
          if (opts[b][f] < opts[a][f]) better = true;
        }
        dominated = no_worse && better;
      }
      if (!dominated) kept.push_back(opts[a]);
    }
    return kept;
  }

  bool node(std::size_t u, int level, const std::vector<double>& state) {
    if (++work_ > budget_) throw BudgetExceeded{};
    std::string key(reinterpret_cast<const char*>(&u), sizeof u);
    key.append(reinterpret_cast<const char*>(state.data()), state.size() * sizeof(double));
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (!paths_assignable(u, level, state)) {
      memo_.emplace(std::move(key), false);
      return false;
    }

    std::vector<std::vector<std::vector<double>>> options(k_);
    std::vector<std::uint64_t> reach(k_ + 1, 0);  // members any row >= i can still cover
    for (std::size_t i = k_; i-- > 0;) {
      options[i] = row_options(u, std::span<const double>(state).subspan(i * m_, m_));
      std::uint64_t any = 0;
      for (const auto& o : options[i]) any |= alive_mask(o);
      reach[i] = reach[i + 1] | any;
    }
    const std::uint64_t everyone = m_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m_) - 1;

    std::vector<double> next(state.size());
    std::vector<std::size_t> choice(k_, 0);
    bool ok = false;
    auto choose = [&](auto&& self, std::size_t i, std::uint64_t covered) -> void {
      if (ok) return;
      if ((covered | reach[i]) != everyone) return;
      if (i == k_) {
        if (level == n_) {
          ok = true;
          return;
        }
        auto canon = next;
        canonicalize(canon);
        ok = node(2 * u + 1, level + 1, canon) && node(2 * u + 2, level + 1, canon);
        return;
      }
      // Identical incoming rows are interchangeable: choose nondecreasingly.
      const bool same_as_prev =
          i > 0 && std::equal(state.begin() + i * m_, state.begin() + (i + 1) * m_,
                              state.begin() + (i - 1) * m_);
      const std::size_t start = same_as_prev ? choice[i - 1] : 0;
      for (std::size_t c = start; c < options[i].size() && !ok; ++c) {
        choice[i] = c;
        std::copy(options[i][c].begin(), options[i][c].end(), next.begin() + i * m_);
        self(self, i + 1, covered | alive_mask(options[i][c]));
      }
    };
    choose(choose, 0, 0);
    memo_.emplace(std::move(key), ok);
    return ok;
  }

  int n_;
  CoverNorm norm_;
  std::size_t budget_;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::size_t work_ = 0;
  double limit_ = 0.0;
  std::vector<std::vector<double>> values_;      // [node][member]
  std::vector<std::vector<double>> candidates_;  // [node]
  std::unordered_map<std::string, bool> memo_;
};

}  // namespace detail

/// Smallest number of real-valued trees forming a beta-cover of the class on
/// x_tree. Exact over the candidate node values (see detail::CoverSolver);
/// falls back to a greedy upper bound, flagged, when the search budget runs out.
inline CoverResult sequential_cover_size(const FunctionClass& cls,
                                         const LabeledTree<Covariate>& x_tree,
                                         double beta, CoverNorm norm,
                                         CoverOptions opts = {}) {
  detail::check_beta(beta);
  if (x_tree.depth() > opts.max_depth)
    throw ResourceError("sequential_cover_size: depth over limit", 0);
  detail::check_tree_domain(x_tree, cls);
  if (cls.empty()) return {0, true};
  detail::CoverSolver solver(cls, x_tree, beta, norm, opts.node_budget);
  const std::size_t greedy = solver.greedy();
  if (solver.distinct() > 64) return {greedy, false};
  try {
    for (std::size_t k = std::max<std::size_t>(1, solver.lower_bound()); k < greedy; ++k)
      if (solver.feasible(k)) return {k, true};
    return {greedy, true};
  } catch (const detail::CoverSolver::BudgetExceeded&) {
    return {greedy, false};
  }
}

// ---------------------------------------------------------------------------
// Offset Rademacher complexity

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
  bool exact = false;
  const char* mode() const { return exact ? "exact" : "monte_carlo"; }
};

inline constexpr int kMaxExactRademacherDepth = 20;

namespace detail {

inline void check_offset_inputs(const FunctionClass& cls,
                                const LabeledTree<Covariate>& x_tree,
                                const LabeledTree<double>& mu_tree) {
  if (cls.empty()) throw std::invalid_argument("offset_rademacher: empty class");
  if (x_tree.depth() != mu_tree.depth())
    throw ShapeError("offset_rademacher: x and mu trees differ in depth");
  check_tree_domain(x_tree, cls);
}

}  // namespace detail

/// max_f sum_t [4B eps_t (f(x_t) - mu_t) - w (f(x_t) - mu_t)^2] along path eps,
/// with offset weight w (1 for the offset complexity, 0 drops the square).
inline double offset_path_value(const FunctionClass& cls,
                                const LabeledTree<Covariate>& x_tree,
                                const LabeledTree<double>& mu_tree, double B,
                                std::span<const int> eps, double offset_weight = 1.0) {
  detail::check_offset_inputs(cls, x_tree, mu_tree);
  const auto nodes = x_tree.path_indices(eps);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < cls.size(); ++f) {
    double s = 0.0;
    for (std::size_t t = 0; t < nodes.size(); ++t) {
      const double g = cls(f, x_tree[nodes[t]]) - mu_tree[nodes[t]];
      s += 4.0 * B * eps[t] * g - offset_weight * g * g;
    }
    best = std::max(best, s);
  }
  return best;
}

/// Exact expectation over all 2^n sign paths (depth-first, sharing prefixes).
inline Estimate offset_rademacher_exact(const FunctionClass& cls,
                                        const LabeledTree<Covariate>& x_tree,
                                        const LabeledTree<double>& mu_tree, double B,
                                        double offset_weight = 1.0) {
  detail::check_offset_inputs(cls, x_tree, mu_tree);
  if (x_tree.depth() > kMaxExactRademacherDepth)
    throw RangeError("offset_rademacher: exact mode limited to depth 20");
  const int n = x_tree.depth();
  const std::size_t m = cls.size();
  std::vector<std::vector<double>> score(static_cast<std::size_t>(n) + 1,
                                         std::vector<double>(m, 0.0));
  double total = 0.0;
  auto rec = [&](auto&& self, std::size_t node, int level) -> void {
    const auto& cur = score[level - 1];
    if (level > n) {
      total += *std::max_element(cur.begin(), cur.end());
      return;
    }
    auto& nxt = score[level];
    for (int sign : {-1, 1}) {
      for (std::size_t f = 0; f < m; ++f) {
        const double g = cls(f, x_tree[node]) - mu_tree[node];
        nxt[f] = cur[f] + 4.0 * B * sign * g - offset_weight * g * g;
      }
      self(self, LabeledTree<double>::child(node, sign), level + 1);
    }
  };
  rec(rec, 0, 1);
  return {std::ldexp(total, -n), 0.0, true};
}

/// Monte-Carlo estimate over `samples` uniform sign paths. Samples are drawn
/// in fixed chunks, each seeded from (seed, chunk index), so the estimate
/// does not depend on the number of worker threads.
inline Estimate offset_rademacher(const FunctionClass& cls,
                                  const LabeledTree<Covariate>& x_tree,
                                  const LabeledTree<double>& mu_tree, double B,
                                  std::size_t samples, std::uint64_t seed,
                                  double offset_weight = 1.0, unsigned threads = 0) {
  detail::check_offset_inputs(cls, x_tree, mu_tree);
  if (samples < 1) throw RangeError("offset_rademacher: samples must be >= 1");
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  const int n = x_tree.depth();
  std::vector<double> sum(chunks, 0.0), sumsq(chunks, 0.0);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        std::mt19937_64 rng(mix_seed(seed, c));
        SignPath eps(static_cast<std::size_t>(n));
        const std::size_t end = std::min(samples, (c + 1) * kChunk);
        for (std::size_t s = c * kChunk; s < end; ++s) {
          for (auto& e : eps) e = draw_sign(rng);
          const double v = offset_path_value(cls, x_tree, mu_tree, B, eps, offset_weight);
          sum[c] += v;
          sumsq[c] += v * v;
        }
      },
      threads);
  const double N = static_cast<double>(samples);
  const double mean = std::accumulate(sum.begin(), sum.end(), 0.0) / N;
  const double sq = std::accumulate(sumsq.begin(), sumsq.end(), 0.0) / N;
  const double var = samples > 1 ? std::max(0.0, sq - mean * mean) * N / (N - 1.0) : 0.0;
  return {mean, std::sqrt(var / N), false};
}

struct OffsetSupResult {
  double value = 0.0;
  LabeledTree<Covariate> x_tree;
  LabeledTree<double> mu_tree;
};

/// sup over covariate trees and mu-trees with labels in mu_grid of the exact
/// offset Rademacher complexity. Solved by backward induction: a node's label
/// only affects the paths below it, whose value depends on the past solely
/// through each member's accumulated score.
inline OffsetSupResult offset_rademacher_sup(const FunctionClass& cls,
                                             std::size_t domain_size, int depth,
                                             double B, std::span<const double> mu_grid,
                                             double work_limit = 2e8) {
  if (cls.empty()) throw std::invalid_argument("offset_rademacher_sup: empty class");
  if (domain_size != cls.domain_size() || domain_size == 0)
    throw ShapeError("offset_rademacher_sup: domain size does not match class");
  if (mu_grid.empty()) throw std::invalid_argument("offset_rademacher_sup: empty mu grid");
  if (depth < 1 || depth > 4)
    throw ResourceError("offset_rademacher_sup: depth must be in [1, 4]", 0);
  const double branch = 2.0 * static_cast<double>(domain_size * mu_grid.size());
  if (std::pow(branch, depth) * static_cast<double>(cls.size()) > work_limit)
    throw ResourceError("offset_rademacher_sup: search too large", depth);

  const std::size_t m = cls.size();
  struct Sub {
    double value;
    std::vector<Covariate> xs;  // subtree labels, heap order relative to its root
    std::vector<double> mus;
  };
  auto rec = [&](auto&& self, int remaining, const std::vector<double>& score) -> Sub {
    if (remaining == 0) return {*std::max_element(score.begin(), score.end()), {}, {}};
    Sub best{-std::numeric_limits<double>::infinity(), {}, {}};
    std::vector<double> up(m), down(m);
    for (Covariate x = 0; x < domain_size; ++x)
      for (double mu : mu_grid) {
        for (std::size_t f = 0; f < m; ++f) {
          const double g = cls(f, x) - mu;
          up[f] = score[f] + 4.0 * B * g - g * g;
          down[f] = score[f] - 4.0 * B * g - g * g;
        }
        Sub l = self(self, remaining - 1, down);
        Sub r = self(self, remaining - 1, up);
        const double v = 0.5 * (l.value + r.value);
        if (v > best.value) {
          best.value = v;
          // Interleave the two child subtrees level by level under this node.
          best.xs.assign(1, x);
          best.mus.assign(1, mu);
          std::size_t width = 1, pos = 0;
          while (pos < l.xs.size()) {
            best.xs.insert(best.xs.end(), l.xs.begin() + pos, l.xs.begin() + pos + width);
            best.xs.insert(best.xs.end(), r.xs.begin() + pos, r.xs.begin() + pos + width);
            best.mus.insert(best.mus.end(), l.mus.begin() + pos, l.mus.begin() + pos + width);
            best.mus.insert(best.mus.end(), r.mus.begin() + pos, r.mus.begin() + pos + width);
            pos += width;
            width *= 2;
          }
        }
      }
    return best;
  };
  Sub top = rec(rec, depth, std::vector<double>(m, 0.0));
  return {top.value, LabeledTree<Covariate>(depth, std::move(top.xs)),
          LabeledTree<double>(depth, std::move(top.mus))};
}

// ---------------------------------------------------------------------------

struct CoverFatReport {
  bool passed = false;
  CoverResult n2;
  CoverResult ninf;
  int fat = 0;
  double rhs = 0.0;  // (2en/beta)^fat
};

/// Evaluates N_2 <= N_inf <= (2en/beta)^fat on one instance.
inline CoverFatReport cover_fat_relation_check(const FunctionClass& cls,
                                               const LabeledTree<Covariate>& x_tree,
                                               double beta, int max_depth = 6) {
  if (!(beta > 0.0)) throw RangeError("cover_fat_relation_check: beta must be > 0");
  if (x_tree.depth() > max_depth)
    throw ResourceError("cover_fat_relation_check: depth over limit", 0);
  CoverFatReport rep;
  rep.n2 = sequential_cover_size(cls, x_tree, beta, CoverNorm::L2);
  rep.ninf = sequential_cover_size(cls, x_tree, beta, CoverNorm::Linf);
  // A shattered tree of depth d needs 2^d distinct members.
  const auto distinct = detail::distinct_members(cls).size();
  const int cap = distinct ? std::bit_width(distinct) - 1 : 0;
  rep.fat = fat_shattering_dim(cls, cls.domain_size(), beta, std::min(max_depth, cap));
  const double n = static_cast<double>(x_tree.depth());
  rep.rhs = std::pow(2.0 * std::exp(1.0) * n / beta, rep.fat);
  rep.passed = rep.n2.size <= rep.ninf.size &&
               static_cast<double>(rep.ninf.size) <= rep.rhs;
  return rep;
}

}  // namespace olreg
