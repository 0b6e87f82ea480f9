#pragma once

// The five experiment drivers behind the command-line tool. Each returns the
// CSV it produced and an exit code: 0 ok, 1 a bound or check failed.
// Configuration problems throw UsageError (exit code 2 at the CLI).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "olreg/adversary.hpp"
#include "olreg/bounds.hpp"
#include "olreg/complexity.hpp"
#include "olreg/core.hpp"
#include "olreg/forecasters.hpp"
#include "olreg/function_class.hpp"
#include "olreg/io.hpp"
#include "olreg/parallel.hpp"
#include "olreg/protocol.hpp"
#include "olreg/tree.hpp"

namespace olreg {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CommandResult {
  std::string csv;
  int exit_code = 0;
};

/// Per-game seeds: the r-th of `reps` games uses mix_seed(seed, r).
inline std::vector<std::uint64_t> game_seeds(std::uint64_t seed, std::size_t reps) {
  std::vector<std::uint64_t> out(reps);
  for (std::size_t r = 0; r < reps; ++r) out[r] = mix_seed(seed, r);
  return out;
}

/// Class of `size` members with values uniform in [-1, 1].
inline FunctionClass random_class(std::size_t size, std::size_t domain, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  FunctionClass cls(domain);
  for (std::size_t i = 0; i < size; ++i) {
    std::vector<double> t(domain);
    for (auto& v : t) v = 2.0 * draw_unit(rng) - 1.0;
    cls.add("f" + std::to_string(i), std::move(t));
  }
  return cls;
}

/// Largest per-covariate spread of the class: the biggest beta at which some
/// depth-1 tree is shattered.
inline double widest_gap(const FunctionClass& cls) {
  double gap = 0.0;
  for (Covariate x = 0; x < cls.domain_size(); ++x) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t f = 0; f < cls.size(); ++f) lo = std::min(lo, cls(f, x)), hi = std::max(hi, cls(f, x));
    gap = std::max(gap, hi - lo);
  }
  return gap;
}

/// Deepest beta-shattered tree (up to max_depth). beta <= 0 picks widest_gap.
inline std::pair<ShatteredTree, double> deepest_shattered_tree(const FunctionClass& cls,
                                                               double beta, int max_depth = 6) {
  if (!(beta > 0.0)) beta = widest_gap(cls);
  if (!(beta > 0.0)) throw UsageError("class does not shatter any tree (all members agree)");
  ShatterSearch search(cls, beta);
  int depth = 0;
  while (depth < max_depth && search.shatters(depth + 1)) ++depth;
  if (depth == 0) throw UsageError("class shatters no tree at beta=" + format_real(beta));
  return {*search.tree(depth), beta};
}

// ---------------------------------------------------------------------------
// run

struct RunConfig {
  std::string forecaster = "finite";  // finite | vaw
  std::string env = "iid";            // shatter | block | iid
  std::shared_ptr<const FunctionClass> cls;
  std::optional<ShatteredTree> tree;
  std::vector<std::size_t> horizons{50};
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  double bound_B = 1.0;
  double alpha = 0.5;
  double lambda = 1.0;
  double noise_sd = 0.3;
  double beta = 0.0;           // <= 0: chosen from the class
  std::size_t blocks_k = 0;    // 0: ceil(n / depth)
  int dim = 3;                 // vaw covariate dimension
  double temperature_scale = 1.0;
  std::size_t f_star = 0;      // member generating iid responses
  unsigned threads = 0;
};

struct RunRow {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double regret = 0.0, alpha_regret = 0.0, bound = 0.0;
  std::string bound_name;
  double violation = 0.0;
};

namespace detail {

inline RunRow run_finite_game(const RunConfig& c, std::size_t n, std::uint64_t seed,
                              const ShatteredTree* tree, double beta) {
  FiniteClassForecaster fc(c.cls, c.bound_B, c.temperature_scale);
  GameConfig g{n, c.bound_B, c.alpha, seed};
  Transcript<Covariate> tr;
  if (c.env == "iid") {
    const auto& f = c.cls->values(c.f_star);
    StochasticEnvironment env({f.begin(), f.end()}, c.noise_sd, c.bound_B);
    tr = run_game<Covariate>(fc, env, g);
  } else {
    ShatteringAdversary base(tree->x_tree, tree->witness, *c.cls, beta, c.bound_B);
    if (c.env == "shatter") {
      tr = run_game<Covariate>(fc, base, g);
    } else {
      const std::size_t k = c.blocks_k ? c.blocks_k : BlockAdversary::block_size_for(n, base.depth());
      BlockAdversary env(std::move(base), k);
      if (n > env.horizon()) throw UsageError("horizon exceeds block adversary length k*depth");
      tr = run_game<Covariate>(fc, env, g);
    }
  }
  RunRow row;
  row.n = n;
  row.seed = seed;
  row.regret = n ? regret(tr, *c.cls) : 0.0;
  row.alpha_regret = n ? alpha_regret(tr, *c.cls, c.alpha) : 0.0;
  row.bound = c.temperature_scale * c.bound_B * c.bound_B * std::log(static_cast<double>(c.cls->size()));
  row.bound_name = c.temperature_scale == 1.0 ? "B^2*log|F|" : format_real(c.temperature_scale) + "*B^2*log|F|";
  return row;
}

inline RunRow run_vaw_game(const RunConfig& c, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 wrng(mix_seed(seed, 1));
  Vector w(c.dim);
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = 2.0 * draw_unit(wrng) - 1.0;
  if (w.norm() > 1.0) w /= w.norm();
  VawForecaster fc(c.dim, c.lambda, c.bound_B);
  LinearEnvironment env(w, c.noise_sd, c.bound_B);
  const auto tr = run_game<Vector>(fc, env, GameConfig{n, c.bound_B, c.alpha, seed});
  const double best = ridge_lattice_best_loss(tr, c.lambda);
  const double loss = forecaster_loss(tr);
  RunRow row;
  row.n = n;
  row.seed = seed;
  row.regret = loss - best;
  row.alpha_regret = (1.0 - c.alpha) * loss - best;
  row.bound = n ? vaw_regret_bound(n, static_cast<std::size_t>(c.dim), c.lambda, c.bound_B, 0.0) : 0.0;
  row.bound_name = "4*d*B^2*log(n/(lambda*d))";
  return row;
}

}  // namespace detail

inline std::vector<RunRow> run_rows(const RunConfig& c) {
  if (c.horizons.empty()) throw UsageError("run: horizon list is empty");
  if (c.reps < 1) throw UsageError("run: need at least one seed");
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) throw UsageError("run: alpha must lie in [0,1)");
  if (!(c.bound_B > 0.0)) throw UsageError("run: B must be > 0");

  std::optional<ShatteredTree> tree = c.tree;
  double beta = c.beta;
  if (c.forecaster == "finite") {
    if (!c.cls || c.cls->empty()) throw UsageError("run: finite forecaster needs a class file");
    if (c.f_star >= c.cls->size()) throw UsageError("run: f_star index outside the class");
    if (c.env == "shatter" || c.env == "block") {
      if (!tree) {
        auto picked = deepest_shattered_tree(*c.cls, beta);
        tree = std::move(picked.first);
        beta = picked.second;
      } else if (!(beta > 0.0)) {
        throw UsageError("run: --beta is required with a tree file");
      }
      const auto longest = *std::max_element(c.horizons.begin(), c.horizons.end());
      if (c.env == "shatter" && longest > static_cast<std::size_t>(tree->x_tree.depth()))
        throw UsageError("run: horizon " + std::to_string(longest) + " exceeds shattered depth " +
                         std::to_string(tree->x_tree.depth()) + "; use --env block");
    } else if (c.env != "iid") {
      throw UsageError("run: unknown environment '" + c.env + "'");
    }
  } else if (c.forecaster == "vaw") {
    if (c.env != "iid") throw UsageError("run: the vaw forecaster runs against --env iid only");
    if (c.dim < 1) throw UsageError("run: --dim must be >= 1");
    if (!(c.lambda > 0.0)) throw UsageError("run: --lambda must be > 0");
  } else {
    throw UsageError("run: unknown forecaster '" + c.forecaster + "'");
  }

  const auto seeds = game_seeds(c.seed, c.reps);
  std::vector<std::pair<std::size_t, std::uint64_t>> jobs;
  for (std::size_t n : c.horizons)
    for (auto s : seeds) jobs.emplace_back(n, s);
  std::vector<RunRow> rows(jobs.size());
  parallel_for(
      jobs.size(),
      [&](std::size_t i) {
        const auto [n, s] = jobs[i];
        rows[i] = c.forecaster == "vaw" ? detail::run_vaw_game(c, n, s)
                                        : detail::run_finite_game(c, n, s, tree ? &*tree : nullptr, beta);
        rows[i].violation = std::max(0.0, rows[i].regret - rows[i].bound);
      },
      c.threads);
  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) {
    return std::tie(a.n, a.seed) < std::tie(b.n, b.seed);
  });
  return rows;
}

inline CommandResult cmd_run(const RunConfig& c) {
  const auto rows = run_rows(c);
  std::ostringstream os;
  os << "n,seed,regret,alpha_regret,bound,bound_name,violation,normalized\n";
  int code = 0;
  for (const auto& r : rows) {
    os << r.n << ',' << r.seed << ',' << format_real(r.regret) << ','
       << format_real(r.alpha_regret) << ',' << format_real(r.bound) << ',' << r.bound_name << ','
       << format_real(r.violation) << ",false\n";
    if (r.violation > 1e-9) code = 1;
  }
  return {os.str(), code};
}

// ---------------------------------------------------------------------------
// bound

struct BoundConfig {
  std::string regime = "power:p=1";
  std::vector<std::size_t> horizons{100, 1000, 10000};
  double bound_B = 1.0;
  double L_star = 0.0;
  bool with_constants = false;
  std::string entropy;  // overrides the entropy used for the dudley column
};

/// Scales (gamma, rho) that the upper-bound argument picks for each regime.
inline std::pair<double, double> dudley_scales(const RateSpec& s) {
  const double n = static_cast<double>(s.horizon_n);
  switch (s.regime) {
    case RateSpec::Regime::Parametric: return {1.0 / std::sqrt(n), 1.0 / n};
    case RateSpec::Regime::Nonparametric:
      if (s.p > 2.0 && std::abs(s.p - 2.0) > 1e-12) return {1.0, std::pow(n, -1.0 / s.p)};
      return {std::pow(n, -1.0 / (s.p + 2.0)), 1.0 / n};
    case RateSpec::Regime::Finite: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

/// Unnormalized chaining bound at the regime's scales.
inline double regime_dudley_bound(const RateSpec& s, const std::optional<EntropyFunction>& entropy = {}) {
  if (s.regime == RateSpec::Regime::Finite) return dudley_finite_bound(s.size, s.bound_B);
  const auto [gamma, rho] = dudley_scales(s);
  const EntropyFunction h = entropy ? *entropy
                            : s.regime == RateSpec::Regime::Parametric
                                ? EntropyFunction::param_log(s.d)
                                : EntropyFunction::power(s.p);
  const double grid[] = {rho};
  return dudley_offset_bound(h, gamma, s.horizon_n, s.bound_B, grid).total;
}

inline CommandResult cmd_bound(const BoundConfig& c,
                               const std::optional<EntropyFunction>& entropy = {}) {
  if (c.horizons.empty()) throw UsageError("bound: horizon list is empty");
  if (!(c.L_star >= 0.0)) throw UsageError("bound: L* must be >= 0");
  std::ostringstream os;
  os << "n,regime,upper,lower,optimistic,dudley,normalized\n";
  int code = 0;
  auto sorted = c.horizons;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t n : sorted) {
    RateSpec s;
    try {
      s = parse_regime(c.regime, n, c.bound_B);
    } catch (const std::exception& e) {
      throw UsageError(std::string("bound: ") + e.what());
    }
    const double N = static_cast<double>(n);
    const double upper = theorem1_rate(s, c.with_constants);
    const auto lower = theorem2_lower_rate(s);
    const auto opt = theorem3_optimistic_bound(s, c.L_star, c.with_constants);
    const double dudley = regime_dudley_bound(s, entropy) / N;
    os << n << ',' << s.label() << ',' << format_real(upper) << ','
       << (lower ? format_real(*lower) : std::string()) << ','
       << (opt ? format_real(*opt / N) : std::string()) << ',' << format_real(dudley) << ",true\n";
    if (!std::isfinite(upper) || !std::isfinite(dudley)) code = 1;
    if (lower && *lower > upper * (1.0 + 1e-12)) code = 1;
  }
  return {os.str(), code};
}

// ---------------------------------------------------------------------------
// complexity

struct ComplexityConfig {
  std::shared_ptr<const FunctionClass> cls;
  std::optional<ShatteredTree> tree;  // covariate tree; witness doubles as mu when use_witness_mu
  int depth = 4;                      // for the default tree
  double beta = 0.5;
  double bound_B = 1.0;
  std::size_t samples = 2000;
  std::uint64_t seed = 0;
  bool use_witness_mu = false;
  int max_fat_depth = 6;
  unsigned threads = 0;
};

inline CommandResult cmd_complexity(const ComplexityConfig& c) {
  if (!c.cls || c.cls->empty()) throw UsageError("complexity: needs a nonempty class");
  if (!(c.beta > 0.0)) throw UsageError("complexity: --beta must be > 0");
  LabeledTree<Covariate> x_tree;
  LabeledTree<double> mu_tree;
  if (c.tree) {
    x_tree = c.tree->x_tree;
    mu_tree = c.use_witness_mu ? c.tree->witness : LabeledTree<double>(x_tree.depth(), 0.0);
  } else {
    if (c.depth < 1 || c.depth > 12) throw UsageError("complexity: --depth must be in [1, 12]");
    std::vector<Covariate> levels(static_cast<std::size_t>(c.depth));
    for (int t = 0; t < c.depth; ++t) levels[t] = static_cast<Covariate>(t) % c.cls->domain_size();
    x_tree = LabeledTree<Covariate>::constant_levels(levels);
    mu_tree = LabeledTree<double>(c.depth, 0.0);
  }
  std::ostringstream os;
  os << "quantity,value,mode,stderr\n";
  auto row = [&](const std::string& q, const std::string& v, const std::string& mode, double se) {
    os << q << ',' << v << ',' << mode << ',' << format_real(se) << '\n';
  };
  int code = 0;
  const auto n2 = sequential_cover_size(*c.cls, x_tree, c.beta, CoverNorm::L2);
  const auto ninf = sequential_cover_size(*c.cls, x_tree, c.beta, CoverNorm::Linf);
  row("cover_l2", std::to_string(n2.size), n2.mode(), 0.0);
  row("cover_linf", std::to_string(ninf.size), ninf.mode(), 0.0);
  const int fat = fat_shattering_dim(*c.cls, c.cls->domain_size(), c.beta, c.max_fat_depth);
  row("fat_shattering_dim", std::to_string(fat), "exact", 0.0);
  const double rhs = std::pow(2.0 * std::exp(1.0) * x_tree.depth() / c.beta, fat);
  row("cover_fat_rhs", format_real(rhs), "exact", 0.0);
  const bool chain = n2.size <= ninf.size && static_cast<double>(ninf.size) <= rhs;
  row("cover_fat_chain", chain ? "1" : "0", n2.exact && ninf.exact ? "exact" : "upper_bound_only", 0.0);
  if (!chain) code = 1;
  const auto mc = offset_rademacher(*c.cls, x_tree, mu_tree, c.bound_B, c.samples, c.seed, 1.0, c.threads);
  row("offset_rademacher", format_real(mc.value), mc.mode(), mc.stderr_);
  if (x_tree.depth() <= kMaxExactRademacherDepth) {
    const auto ex = offset_rademacher_exact(*c.cls, x_tree, mu_tree, c.bound_B);
    row("offset_rademacher", format_real(ex.value), ex.mode(), 0.0);
  }
  return {os.str(), code};
}

// ---------------------------------------------------------------------------
// lowerbound

struct LowerBoundConfig {
  std::string env = "shatter";         // shatter | block
  std::string forecaster = "finite";   // finite | vaw (one-hot covariates)
  double beta = 0.5;
  int depth = 10;                      // shattered depth; fat for the block adversary
  std::size_t blocks_k = 4;
  double bound_B = 4.0;
  std::size_t episodes = 2000;
  std::uint64_t seed = 0;
  double lambda = 1.0;
  double temperature_scale = 1.0;
  unsigned threads = 0;
};

struct LowerBoundSummary {
  std::size_t n = 0;
  double mean_regret = 0.0;
  double stderr_ = 0.0;
  double lower_bound = 0.0;
  bool passed = false;
};

/// Mean regret over seeded episodes of a forecaster against the shattering or
/// block adversary on the level-indexed tree of the sign-cube class.
inline LowerBoundSummary lower_bound_experiment(const LowerBoundConfig& c) {
  if (!(c.beta > 0.0)) throw UsageError("lowerbound: --beta must be > 0");
  if (c.depth < 1 || c.depth > 14) throw UsageError("lowerbound: --depth must be in [1, 14]");
  if (c.episodes < 2) throw UsageError("lowerbound: need at least two episodes");
  if (c.env != "shatter" && c.env != "block") throw UsageError("lowerbound: unknown environment '" + c.env + "'");
  if (c.forecaster != "finite" && c.forecaster != "vaw")
    throw UsageError("lowerbound: unknown forecaster '" + c.forecaster + "'");
  auto cls = std::make_shared<const FunctionClass>(sign_cube_class(c.depth, c.beta / 2.0));
  const auto tree = level_indexed_tree(c.depth);
  const ShatteringAdversary base(tree.x_tree, tree.witness, *cls, c.beta, c.bound_B);
  const std::size_t k = c.env == "block" ? std::max<std::size_t>(1, c.blocks_k) : 1;
  const std::size_t n = k * static_cast<std::size_t>(c.depth);

  const auto seeds = game_seeds(c.seed, c.episodes);
  std::vector<double> regrets(seeds.size());
  parallel_for(
      seeds.size(),
      [&](std::size_t i) {
        std::unique_ptr<Forecaster<Covariate>> fc;
        if (c.forecaster == "finite")
          fc = std::make_unique<FiniteClassForecaster>(cls, c.bound_B, c.temperature_scale);
        else
          fc = std::make_unique<OneHotForecaster>(
              std::make_unique<VawForecaster>(c.depth, c.lambda, c.bound_B), cls->domain_size());
        GameConfig g{n, c.bound_B, 0.0, seeds[i]};
        Transcript<Covariate> tr;
        if (c.env == "shatter") {
          ShatteringAdversary env = base;
          tr = run_game<Covariate>(*fc, env, g);
        } else {
          BlockAdversary env(base, k);
          tr = run_game<Covariate>(*fc, env, g);
        }
        regrets[i] = regret(tr, *cls);
      },
      c.threads);

  LowerBoundSummary s;
  s.n = n;
  const double E = static_cast<double>(regrets.size());
  for (double r : regrets) s.mean_regret += r;
  s.mean_regret /= E;
  double var = 0.0;
  for (double r : regrets) var += (r - s.mean_regret) * (r - s.mean_regret);
  s.stderr_ = std::sqrt(var / (E - 1.0) / E);
  s.lower_bound = c.env == "shatter"
                      ? lower_bound_value(c.beta, n, c.depth, LowerBoundRegime::PowerAbove2)
                      : lower_bound_value(c.beta, n, c.depth, LowerBoundRegime::PowerAtMost2);
  s.passed = s.mean_regret >= s.lower_bound - 4.0 * s.stderr_;
  return s;
}

inline CommandResult cmd_lowerbound(const LowerBoundConfig& c) {
  const auto s = lower_bound_experiment(c);
  std::ostringstream os;
  os << "env,forecaster,n,fat,k,beta,episodes,mean_regret,stderr,lower_bound,ratio,passed\n";
  const std::size_t k = c.env == "block" ? std::max<std::size_t>(1, c.blocks_k) : 1;
  const double ratio = s.lower_bound > 0.0 ? s.mean_regret / s.lower_bound : 0.0;
  os << c.env << ',' << c.forecaster << ',' << s.n << ',' << c.depth << ',' << k << ','
     << format_real(c.beta) << ',' << c.episodes << ',' << format_real(s.mean_regret) << ','
     << format_real(s.stderr_) << ',' << format_real(s.lower_bound) << ',' << format_real(ratio)
     << ',' << (s.passed ? 1 : 0) << '\n';
  return {os.str(), s.passed ? 0 : 1};
}

// ---------------------------------------------------------------------------
// admissibility

struct AdmissibilityConfig {
  std::string relaxation = "finite";  // finite | vaw | corrupted
  std::shared_ptr<const FunctionClass> cls;  // random class when null
  std::size_t histories = 50;
  std::size_t horizon = 10;
  std::size_t grid_points = 41;
  double bound_B = 1.0;
  double lambda = 1.0;
  int dim = 2;
  std::size_t x_candidates = 8;  // random covariates per round for vaw
  double temperature_scale = 1.0;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  unsigned threads = 0;
};

struct AdmissibilityRound {
  std::size_t round = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  bool passed = true;
};

namespace detail {

template <class X, class DrawX>
std::vector<AdmissibilityRound> admissibility_histories(const Relaxation<X>& rel,
                                                        const AdmissibilityConfig& c,
                                                        DrawX draw_x_grid) {
  const auto ygrid = response_grid(c.bound_B, c.grid_points);
  const auto seeds = game_seeds(c.seed, c.histories);
  std::vector<std::vector<double>> slack(seeds.size(), std::vector<double>(c.horizon));
  parallel_for(
      seeds.size(),
      [&](std::size_t h) {
        std::mt19937_64 rng(seeds[h]);
        std::vector<X> xs;
        std::vector<double> ys;
        for (std::size_t t = 0; t < c.horizon; ++t) {
          std::vector<X> grid = draw_x_grid(rng);
          const auto rep = admissibility_check<X>(rel, xs, ys, grid, ygrid, c.bound_B, c.tol);
          slack[h][t] = rep.worst_slack;
          xs.push_back(grid.front());
          ys.push_back(c.bound_B * (2.0 * draw_unit(rng) - 1.0));
        }
      },
      c.threads);
  std::vector<AdmissibilityRound> out(c.horizon);
  for (std::size_t t = 0; t < c.horizon; ++t) {
    out[t].round = t + 1;
    for (const auto& s : slack) out[t].worst_slack = std::min(out[t].worst_slack, s[t]);
    out[t].passed = out[t].worst_slack >= -c.tol;
  }
  return out;
}

}  // namespace detail

inline std::vector<AdmissibilityRound> admissibility_rounds(const AdmissibilityConfig& c) {
  if (c.histories < 1 || c.horizon < 1) throw UsageError("admissibility: need histories and horizon >= 1");
  if (c.grid_points < 2) throw UsageError("admissibility: y grid needs at least 2 points");
  if (c.relaxation == "finite" || c.relaxation == "corrupted") {
    auto cls = c.cls ? c.cls : std::make_shared<const FunctionClass>(random_class(5, 4, mix_seed(c.seed, 99)));
    std::shared_ptr<const Relaxation<Covariate>> rel =
        std::make_shared<FiniteClassRelaxation>(cls, c.bound_B, c.temperature_scale);
    // Rel lowered by one after the first round: the step into round 2 fails.
    if (c.relaxation == "corrupted")
      rel = std::make_shared<ShiftedRelaxation<Covariate>>(rel, 1, -1.0);
    std::vector<Covariate> domain(cls->domain_size());
    for (std::size_t x = 0; x < domain.size(); ++x) domain[x] = x;
    return detail::admissibility_histories<Covariate>(*rel, c, [&](std::mt19937_64& rng) {
      // Realized covariate first, then the whole domain.
      std::vector<Covariate> g{std::min(domain.size() - 1,
                                        static_cast<std::size_t>(draw_unit(rng) * domain.size()))};
      g.insert(g.end(), domain.begin(), domain.end());
      return g;
    });
  }
  if (c.relaxation == "vaw") {
    if (c.dim < 1) throw UsageError("admissibility: --dim must be >= 1");
    VawRelaxation rel(c.dim, c.lambda, c.bound_B, c.horizon);
    return detail::admissibility_histories<Vector>(rel, c, [&](std::mt19937_64& rng) {
      std::vector<Vector> g;
      for (std::size_t i = 0; i < std::max<std::size_t>(1, c.x_candidates); ++i) {
        Vector x(c.dim);
        for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = 2.0 * draw_unit(rng) - 1.0;
        if (x.norm() > 1.0) x /= x.norm();
        g.push_back(std::move(x));
      }
      return g;
    });
  }
  throw UsageError("admissibility: unknown relaxation '" + c.relaxation + "'");
}

inline CommandResult cmd_admissibility(const AdmissibilityConfig& c) {
  const auto rounds = admissibility_rounds(c);
  std::ostringstream os;
  os << "round,worst_slack,violation,passed\n";
  int code = 0;
  for (const auto& r : rounds) {
    os << r.round << ',' << format_real(r.worst_slack) << ','
       << format_real(std::max(0.0, -r.worst_slack)) << ',' << (r.passed ? 1 : 0) << '\n';
    if (!r.passed) code = 1;
  }
  return {os.str(), code};
}

}  // namespace olreg
