#pragma once

// The online regression game: on round t the environment reveals x_t, the
// forecaster predicts y_hat_t, the environment reveals y_t. Regret is the
// forecaster's cumulative square loss minus the best member's.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "olreg/core.hpp"
#include "olreg/function_class.hpp"

namespace olreg {

template <class X>
struct Round {
  X x{};
  double y_hat = 0.0;
  double y = 0.0;
};

template <class X>
struct Transcript {
  std::vector<Round<X>> rounds;
  double bound_B = 1.0;
  std::size_t horizon_n = 0;

  bool complete() const { return rounds.size() == horizon_n; }
};

struct GameConfig {
  std::size_t horizon_n = 0;
  double bound_B = 1.0;
  double alpha = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(bound_B > 0.0)) throw RangeError("GameConfig: bound_B must be > 0");
    if (!(alpha >= 0.0 && alpha < 1.0))
      throw RangeError("GameConfig: alpha must lie in [0,1)");
  }
};

/// The learner. predict() must not change state; observe() is the only mutator.
template <class X>
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual double predict(const X& x) const = 0;
  virtual void observe(const X& x, double y) = 0;
  virtual double bound() const = 0;
  virtual std::string name() const = 0;
};

/// Nature. Sees the full history and the current prediction when choosing y_t.
/// Implementations own their clamping; run_game rejects any y outside [-B,B].
template <class X>
class Environment {
 public:
  virtual ~Environment() = default;
  virtual void reset(std::uint64_t seed) = 0;
  virtual X next_x(std::span<const Round<X>> past) = 0;
  virtual double next_y(std::span<const Round<X>> past, const X& x,
                        double y_hat) = 0;
  virtual double bound() const = 0;
};

/// Plays one game of config.horizon_n rounds. The environment is reset with
/// config.seed first, so the result is a function of (forecaster state, seed).
template <class X>
Transcript<X> run_game(Forecaster<X>& forecaster, Environment<X>& environment,
                       const GameConfig& config) {
  config.validate();
  const double B = config.bound_B;
  if (std::abs(forecaster.bound() - B) > 1e-12 ||
      std::abs(environment.bound() - B) > 1e-12)
    throw std::invalid_argument(
        "run_game: forecaster, environment and config disagree on B");

  Transcript<X> tr;
  tr.bound_B = B;
  tr.horizon_n = config.horizon_n;
  tr.rounds.reserve(config.horizon_n);
  environment.reset(config.seed);
  for (std::size_t t = 0; t < config.horizon_n; ++t) {
    const std::span<const Round<X>> past(tr.rounds);
    X x = environment.next_x(past);
    const double y_hat = forecaster.predict(x);
    if (!(std::abs(y_hat) <= B))
      throw RangeError("run_game: forecaster predicted outside [-B,B] at t=" +
                       std::to_string(t + 1));
    const double y = environment.next_y(past, x, y_hat);
    if (!(std::abs(y) <= B))
      throw RangeError("run_game: environment emitted y=" + format_real(y) +
                       " outside [-B,B] at t=" + std::to_string(t + 1));
    forecaster.observe(x, y);
    tr.rounds.push_back({std::move(x), y_hat, y});
  }
  return tr;
}

template <class X>
double forecaster_loss(const Transcript<X>& tr) {
  double s = 0.0;
  for (const auto& r : tr.rounds) s += (r.y_hat - r.y) * (r.y_hat - r.y);
  return s;
}

inline void check_domain(const Transcript<Covariate>& tr,
                         const FunctionClass& cls) {
  for (const auto& r : tr.rounds)
    if (r.x >= cls.domain_size())
      throw RangeError("covariate " + std::to_string(r.x) +
                       " outside class domain");
}

/// Cumulative loss of every member, in member order.
inline std::vector<double> member_losses(const Transcript<Covariate>& tr,
                                         const FunctionClass& cls) {
  check_domain(tr, cls);
  std::vector<double> loss(cls.size(), 0.0);
  for (const auto& r : tr.rounds)
    for (std::size_t i = 0; i < cls.size(); ++i) {
      const double e = cls(i, r.x) - r.y;
      loss[i] += e * e;
    }
  return loss;
}

/// L* = min over the class of cumulative loss (exact scan).
inline double cumulative_best_loss(const Transcript<Covariate>& tr,
                                   const FunctionClass& cls) {
  if (cls.empty()) throw std::invalid_argument("empty class: infimum undefined");
  const auto loss = member_losses(tr, cls);
  return *std::min_element(loss.begin(), loss.end());
}

/// Index of the best member; ties go to the lowest index.
inline std::size_t best_member(const Transcript<Covariate>& tr,
                               const FunctionClass& cls) {
  if (cls.empty()) throw std::invalid_argument("empty class: infimum undefined");
  const auto loss = member_losses(tr, cls);
  return static_cast<std::size_t>(
      std::min_element(loss.begin(), loss.end()) - loss.begin());
}

inline double alpha_regret(const Transcript<Covariate>& tr,
                           const FunctionClass& cls, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw RangeError("alpha_regret: alpha must lie in [0,1)");
  return (1.0 - alpha) * forecaster_loss(tr) - cumulative_best_loss(tr, cls);
}

inline double regret(const Transcript<Covariate>& tr, const FunctionClass& cls) {
  return forecaster_loss(tr) - cumulative_best_loss(tr, cls);
}

/// Standard-regret bound implied by an alpha-regret bound U1/alpha + U2,
/// after optimizing alpha given the best loss L*.
inline double optimistic_conversion(double U1, double U2, double L_star) {
  if (!(U1 >= 0.0 && U2 >= 0.0 && L_star >= 0.0))
    throw RangeError("optimistic_conversion: inputs must be nonnegative");
  return 4.0 * std::sqrt(L_star * U1) + 12.0 * U1 + 4.0 * U2;
}

/// Running min_f sum_{j<=t} (f(x_j)-y_j)^2 for t = 1..n.
inline std::vector<double> best_loss_path(const Transcript<Covariate>& tr,
                                          const FunctionClass& cls) {
  check_domain(tr, cls);
  std::vector<double> loss(cls.size(), 0.0), out;
  out.reserve(tr.rounds.size());
  for (const auto& r : tr.rounds) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cls.size(); ++i) {
      const double e = cls(i, r.x) - r.y;
      loss[i] += e * e;
      best = std::min(best, loss[i]);
    }
    out.push_back(best);
  }
  return out;
}

/// Integer covariates print as-is; vector covariates as ';'-joined components.
template <class X>
std::string format_covariate(const X& x) {
  if constexpr (std::is_integral_v<X>) {
    return std::to_string(x);
  } else {
    std::string s;
    for (double v : x) {
      if (!s.empty()) s += ';';
      s += format_real(v);
    }
    return s;
  }
}

/// CSV `t,x,y_hat,y,loss_forecaster,loss_best_cumulative`. loss_forecaster is
/// the round's own loss; loss_best_cumulative is best_path[t-1].
template <class X>
std::string transcript_csv(const Transcript<X>& tr,
                           std::span<const double> best_path) {
  if (best_path.size() != tr.rounds.size())
    throw ShapeError("transcript_csv: best-loss path length mismatch");
  std::ostringstream os;
  os << "t,x,y_hat,y,loss_forecaster,loss_best_cumulative\n";
  for (std::size_t t = 0; t < tr.rounds.size(); ++t) {
    const auto& r = tr.rounds[t];
    os << (t + 1) << ',' << format_covariate(r.x) << ',' << format_real(r.y_hat)
       << ',' << format_real(r.y) << ','
       << format_real((r.y_hat - r.y) * (r.y_hat - r.y)) << ','
       << format_real(best_path[t]) << '\n';
  }
  return os.str();
}

inline std::string transcript_csv(const Transcript<Covariate>& tr,
                                  const FunctionClass& cls) {
  const auto path = best_loss_path(tr, cls);
  return transcript_csv(tr, std::span<const double>(path));
}

}  // namespace olreg
