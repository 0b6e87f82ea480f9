#pragma once

// Forecasters built from relaxations. A relaxation maps observed data
// (x_{1:t}, y_{1:t}) to a real; when it is convex in y_t the minimax step
// reduces to comparing its two values at y_t = +B and y_t = -B.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "olreg/core.hpp"
#include "olreg/function_class.hpp"
#include "olreg/protocol.hpp"

namespace olreg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct RelaxationValue {
  double value = 0.0;
  std::size_t conditioned_rounds = 0;
};

/// Rel(x_{1:t}, y_{1:t}) as a pure function of the data.
template <class X>
class Relaxation {
 public:
  virtual ~Relaxation() = default;
  /// xs and ys have the same length t.
  virtual RelaxationValue evaluate(std::span<const X> xs,
                                   std::span<const double> ys) const = 0;
  /// Whether (y_hat - y)^2 + Rel(..., y) is convex in the last response.
  virtual bool convex_in_response() const { return true; }
  virtual double bound() const = 0;
};

namespace detail {

template <class X>
double checked_value(const Relaxation<X>& rel, std::span<const X> xs,
                     std::span<const double> ys) {
  const double v = rel.evaluate(xs, ys).value;
  if (!std::isfinite(v))
    throw NumericalError("relaxation evaluated to a non-finite value at t=" +
                         std::to_string(ys.size()));
  return v;
}

// Rel at (xs, (ys_prev, y)) for the candidate last response y.
template <class X>
double value_with_response(const Relaxation<X>& rel, std::span<const X> xs,
                           std::span<const double> ys_prev, double y) {
  std::vector<double> ys(ys_prev.begin(), ys_prev.end());
  ys.push_back(y);
  return checked_value(rel, xs, std::span<const double>(ys));
}

}  // namespace detail

/// Clip((Rel(x_{1:t}, (y_{1:t-1}, B)) - Rel(x_{1:t}, (y_{1:t-1}, -B))) / 4B).
/// xs holds x_{1:t} (current covariate last), ys_prev holds y_{1:t-1}.
template <class X>
double relaxation_predict(const Relaxation<X>& rel, std::span<const X> xs,
                          std::span<const double> ys_prev, double B) {
  if (!(B > 0.0)) throw RangeError("relaxation_predict: B must be positive");
  if (xs.size() != ys_prev.size() + 1)
    throw ShapeError("relaxation_predict: need one more covariate than response");
  const double up = detail::value_with_response(rel, xs, ys_prev, B);
  const double down = detail::value_with_response(rel, xs, ys_prev, -B);
  return clip((up - down) / (4.0 * B), B);
}

// ---------------------------------------------------------------------------
// Finite class of experts

/// Cumulative losses of every member plus the scale of the exponential
/// weights. temperature_scale c gives Rel = cB^2 log sum exp(-L/(cB^2));
/// c = 1 is the B^{-2} weighting of the experts relaxation.
struct FiniteClassState {
  std::vector<double> cumulative_losses;
  double bound_B = 1.0;
  double temperature_scale = 1.0;
  std::size_t rounds = 0;

  FiniteClassState() = default;
  FiniteClassState(std::size_t members, double B, double scale = 1.0)
      : cumulative_losses(members, 0.0), bound_B(B), temperature_scale(scale) {
    if (!(B > 0.0)) throw RangeError("FiniteClassState: B must be positive");
    if (!(scale > 0.0))
      throw RangeError("FiniteClassState: temperature scale must be positive");
  }

  double temperature() const { return temperature_scale * bound_B * bound_B; }

  void observe(Covariate x, double y, const FunctionClass& cls) {
    if (cls.size() != cumulative_losses.size())
      throw ShapeError("FiniteClassState: class size changed");
    if (x >= cls.domain_size()) throw RangeError("covariate outside domain");
    for (std::size_t i = 0; i < cls.size(); ++i) {
      const double e = cls(i, x) - y;
      cumulative_losses[i] += e * e;
    }
    ++rounds;
  }
};

inline RelaxationValue finite_class_relaxation(const FiniteClassState& state) {
  if (state.cumulative_losses.empty())
    throw std::invalid_argument("finite_class_relaxation: empty class");
  const double T = state.temperature();
  std::vector<double> a(state.cumulative_losses.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    a[i] = -state.cumulative_losses[i] / T;
  return {T * log_sum_exp(a), state.rounds};
}

/// Exponential-weights prediction for the finite class at covariate x.
inline double finite_class_predict(const FiniteClassState& state, Covariate x,
                                   const FunctionClass& cls) {
  if (cls.size() != state.cumulative_losses.size() || cls.empty())
    throw ShapeError("finite_class_predict: state/class mismatch");
  if (x >= cls.domain_size()) throw RangeError("covariate outside domain");
  const double B = state.bound_B;
  const double T = state.temperature();
  std::vector<double> up(cls.size()), down(cls.size());
  for (std::size_t i = 0; i < cls.size(); ++i) {
    const double f = cls(i, x);
    const double L = state.cumulative_losses[i];
    up[i] = -(L + (f - B) * (f - B)) / T;
    down[i] = -(L + (f + B) * (f + B)) / T;
  }
  return clip(T / (4.0 * B) * (log_sum_exp(up) - log_sum_exp(down)), B);
}

class FiniteClassRelaxation final : public Relaxation<Covariate> {
 public:
  FiniteClassRelaxation(std::shared_ptr<const FunctionClass> cls, double B,
                        double temperature_scale = 1.0)
      : cls_(std::move(cls)), B_(B), scale_(temperature_scale) {
    if (!cls_ || cls_->empty())
      throw std::invalid_argument("FiniteClassRelaxation: empty class");
  }

  RelaxationValue evaluate(std::span<const Covariate> xs,
                           std::span<const double> ys) const override {
    if (xs.size() != ys.size()) throw ShapeError("relaxation: xs/ys mismatch");
    FiniteClassState st(cls_->size(), B_, scale_);
    for (std::size_t t = 0; t < xs.size(); ++t) st.observe(xs[t], ys[t], *cls_);
    return finite_class_relaxation(st);
  }

  double bound() const override { return B_; }

 private:
  std::shared_ptr<const FunctionClass> cls_;
  double B_;
  double scale_;
};

class FiniteClassForecaster final : public Forecaster<Covariate> {
 public:
  FiniteClassForecaster(std::shared_ptr<const FunctionClass> cls, double B,
                        double temperature_scale = 1.0)
      : cls_(std::move(cls)), state_(cls_ ? cls_->size() : 0, B, temperature_scale) {
    if (!cls_ || cls_->empty())
      throw std::invalid_argument("FiniteClassForecaster: empty class");
  }

  double predict(const Covariate& x) const override {
    return finite_class_predict(state_, x, *cls_);
  }
  void observe(const Covariate& x, double y) override {
    state_.observe(x, y, *cls_);
  }
  double bound() const override { return state_.bound_B; }
  std::string name() const override { return "finite"; }

  const FiniteClassState& state() const { return state_; }
  RelaxationValue relaxation() const { return finite_class_relaxation(state_); }

 private:
  std::shared_ptr<const FunctionClass> cls_;
  FiniteClassState state_;
};

// ---------------------------------------------------------------------------
// Vovk-Azoury-Warmuth

inline constexpr double kMaxGramCondition = 1e12;

/// After t observed rounds: gram = sum_{j<=t} x_j x_j^T + lambda I and
/// moment = sum_{j<=t} y_j x_j. Prediction at round t+1 adds x x^T to the gram
/// on the fly, so predict() stays const and observe() is the only mutator.
/// With use_inverse, gram^{-1} is also tracked by rank-one updates.
struct VawState {
  Matrix gram;
  Vector moment;
  double lambda = 1.0;
  double bound_B = 1.0;
  std::size_t rounds = 0;
  bool use_inverse = false;
  Matrix gram_inverse;

  VawState() = default;
  VawState(Eigen::Index dim, double lam, double B, bool sherman_morrison = false)
      : gram(Matrix::Identity(dim, dim) * lam),
        moment(Vector::Zero(dim)),
        lambda(lam),
        bound_B(B),
        use_inverse(sherman_morrison) {
    if (dim < 1) throw ShapeError("VawState: dimension must be >= 1");
    if (!(lam > 0.0)) throw RangeError("VawState: lambda must be positive");
    if (!(B > 0.0)) throw RangeError("VawState: B must be positive");
    if (use_inverse) gram_inverse = Matrix::Identity(dim, dim) / lam;
  }

  Eigen::Index dim() const { return moment.size(); }
};

namespace detail {

inline void check_dim(const VawState& s, const Vector& x) {
  if (x.size() != s.dim())
    throw ShapeError("VAW: covariate has dimension " + std::to_string(x.size()) +
                     ", state has " + std::to_string(s.dim()));
}

inline void check_condition(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition)
    throw NumericalError("VAW: gram matrix numerically singular");
}

}  // namespace detail

/// Clip(x^T (gram + x x^T)^{-1} moment).
inline double vaw_predict(const VawState& s, const Vector& x) {
  detail::check_dim(s, x);
  if (s.use_inverse) {
    const Vector gx = s.gram_inverse * x;
    const double c = x.dot(gx);
    return clip(gx.dot(s.moment) / (1.0 + c), s.bound_B);
  }
  Matrix a = s.gram;
  a.noalias() += x * x.transpose();
  detail::check_condition(a);
  const Vector w = a.llt().solve(s.moment);
  return clip(x.dot(w), s.bound_B);
}

inline void vaw_observe(VawState& s, const Vector& x, double y) {
  detail::check_dim(s, x);
  if (!(std::abs(y) <= s.bound_B))
    throw RangeError("vaw_observe: |y| exceeds B");
  s.gram.noalias() += x * x.transpose();
  s.moment += y * x;
  if (s.use_inverse) {
    const Vector gx = s.gram_inverse * x;
    s.gram_inverse -= (gx * gx.transpose()) / (1.0 + x.dot(gx));
  }
  ++s.rounds;
}

/// (lambda/2)|f|^2 + 4 d B^2 log(n/(lambda d)), log floored at 0.
inline double vaw_regret_bound(std::size_t n, std::size_t d, double lambda,
                               double B, double f_norm_sq) {
  if (n == 0 || d == 0) throw RangeError("vaw_regret_bound: n, d must be >= 1");
  if (!(lambda > 0.0) || !(B > 0.0) || !(f_norm_sq >= 0.0))
    throw RangeError("vaw_regret_bound: invalid lambda, B or |f|^2");
  const double lg =
      std::max(0.0, std::log(static_cast<double>(n) / (lambda * static_cast<double>(d))));
  return 0.5 * lambda * f_norm_sq + 4.0 * static_cast<double>(d) * B * B * lg;
}

class VawForecaster final : public Forecaster<Vector> {
 public:
  VawForecaster(Eigen::Index dim, double lambda, double B,
                bool sherman_morrison = false)
      : state_(dim, lambda, B, sherman_morrison) {}

  double predict(const Vector& x) const override { return vaw_predict(state_, x); }
  void observe(const Vector& x, double y) override { vaw_observe(state_, x, y); }
  double bound() const override { return state_.bound_B; }
  std::string name() const override { return "vaw"; }
  const VawState& state() const { return state_; }

 private:
  VawState state_;
};

/// Relaxation behind the VAW forecaster, in d dimensions:
///   |sum y_j x_j|^2_{(X_t + lambda I)^{-1}} - sum y_j^2
///     + 4B^2 log((n/d)^d / det(X_t + lambda I)),  X_t = sum_{j<=t} x_j x_j^T.
/// The appended zero coordinate of the (d+1)-dimensional formulation only adds
/// the constant -4B^2 log(lambda), which never enters a prediction.
class VawRelaxation final : public Relaxation<Vector> {
 public:
  VawRelaxation(Eigen::Index dim, double lambda, double B, std::size_t horizon)
      : dim_(dim), lambda_(lambda), B_(B), horizon_(horizon) {
    if (dim < 1 || horizon < 1) throw RangeError("VawRelaxation: bad dim/horizon");
    if (!(lambda > 0.0) || !(B > 0.0)) throw RangeError("VawRelaxation: bad lambda/B");
  }

  RelaxationValue evaluate(std::span<const Vector> xs,
                           std::span<const double> ys) const override {
    if (xs.size() != ys.size()) throw ShapeError("relaxation: xs/ys mismatch");
    Matrix a = Matrix::Identity(dim_, dim_) * lambda_;
    Vector m = Vector::Zero(dim_);
    double ysq = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) {
      if (xs[t].size() != dim_) throw ShapeError("VawRelaxation: dimension mismatch");
      a.noalias() += xs[t] * xs[t].transpose();
      m += ys[t] * xs[t];
      ysq += ys[t] * ys[t];
    }
    const Eigen::LLT<Matrix> llt(a);
    const double quad = m.dot(llt.solve(m));
    const double logdet =
        2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double d = static_cast<double>(dim_);
    const double cap = d * std::log(static_cast<double>(horizon_) / d);
    return {quad - ysq + 4.0 * B_ * B_ * (cap - logdet), xs.size()};
  }

  double bound() const override { return B_; }

 private:
  Eigen::Index dim_;
  double lambda_;
  double B_;
  std::size_t horizon_;
};

/// Rel shifted by `shift` whenever it is conditioned on exactly `at_round`
/// rounds. A negative shift breaks admissibility at round at_round + 1.
template <class X>
class ShiftedRelaxation final : public Relaxation<X> {
 public:
  ShiftedRelaxation(std::shared_ptr<const Relaxation<X>> base, std::size_t at_round,
                    double shift)
      : base_(std::move(base)), at_round_(at_round), shift_(shift) {}

  RelaxationValue evaluate(std::span<const X> xs,
                           std::span<const double> ys) const override {
    auto v = base_->evaluate(xs, ys);
    if (ys.size() == at_round_) v.value += shift_;
    return v;
  }
  bool convex_in_response() const override { return base_->convex_in_response(); }
  double bound() const override { return base_->bound(); }

 private:
  std::shared_ptr<const Relaxation<X>> base_;
  std::size_t at_round_;
  double shift_;
};

/// Adapts a vector forecaster to a finite domain through one-hot covariates.
class OneHotForecaster final : public Forecaster<Covariate> {
 public:
  OneHotForecaster(std::unique_ptr<Forecaster<Vector>> inner, std::size_t domain)
      : inner_(std::move(inner)), domain_(domain) {}

  double predict(const Covariate& x) const override { return inner_->predict(embed(x)); }
  void observe(const Covariate& x, double y) override { inner_->observe(embed(x), y); }
  double bound() const override { return inner_->bound(); }
  std::string name() const override { return inner_->name() + "-onehot"; }

 private:
  Vector embed(Covariate x) const {
    if (x >= domain_) throw RangeError("covariate outside domain");
    Vector v = Vector::Zero(static_cast<Eigen::Index>(domain_));
    v[static_cast<Eigen::Index>(x)] = 1.0;
    return v;
  }

  std::unique_ptr<Forecaster<Vector>> inner_;
  std::size_t domain_;
};

// ---------------------------------------------------------------------------
// Admissibility

struct AdmissibilityReport {
  bool passed = true;
  /// min over x of Rel_{t-1} - inf_yhat sup_y {(yhat-y)^2 + Rel_t}; >= -tol passes.
  double worst_slack = std::numeric_limits<double>::infinity();
  std::size_t worst_x_index = 0;
  double violation() const { return std::max(0.0, -worst_slack); }
};

/// Checks the one-step admissibility inequality at history (xs_prev, ys_prev)
/// for every x in x_grid. The infimum over y_hat ranges over y_grid plus the
/// recipe prediction; the supremum over y ranges over {-B, B} for relaxations
/// convex in the response and over y_grid otherwise.
template <class X>
AdmissibilityReport admissibility_check(const Relaxation<X>& rel,
                                        std::span<const X> xs_prev,
                                        std::span<const double> ys_prev,
                                        std::span<const X> x_grid,
                                        std::span<const double> y_grid, double B,
                                        double tol = 1e-9) {
  if (x_grid.empty() || y_grid.empty())
    throw std::invalid_argument("admissibility_check: empty grid");
  if (xs_prev.size() != ys_prev.size())
    throw ShapeError("admissibility_check: history xs/ys mismatch");
  const auto [lo, hi] = std::minmax_element(y_grid.begin(), y_grid.end());
  if (std::abs(*lo + B) > 1e-12 || std::abs(*hi - B) > 1e-12)
    throw RangeError("admissibility_check: y_grid must span [-B, B]");

  const double before = detail::checked_value(rel, xs_prev, ys_prev);
  const std::vector<double> extremes = {-B, B};
  const std::span<const double> sup_set =
      rel.convex_in_response() ? std::span<const double>(extremes) : y_grid;

  AdmissibilityReport rep;
  std::vector<X> xs(xs_prev.begin(), xs_prev.end());
  xs.push_back(x_grid[0]);
  for (std::size_t k = 0; k < x_grid.size(); ++k) {
    xs.back() = x_grid[k];
    const std::span<const X> xspan(xs);
    std::vector<double> after(sup_set.size());
    for (std::size_t j = 0; j < sup_set.size(); ++j)
      after[j] = detail::value_with_response(rel, xspan, ys_prev, sup_set[j]);

    std::vector<double> candidates(y_grid.begin(), y_grid.end());
    if (rel.convex_in_response())
      candidates.push_back(clip((after[1] - after[0]) / (4.0 * B), B));
    double inf_sup = std::numeric_limits<double>::infinity();
    for (double yh : candidates) {
      double sup = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < sup_set.size(); ++j)
        sup = std::max(sup, (yh - sup_set[j]) * (yh - sup_set[j]) + after[j]);
      inf_sup = std::min(inf_sup, sup);
    }
    const double slack = before - inf_sup;
    if (slack < rep.worst_slack) {
      rep.worst_slack = slack;
      rep.worst_x_index = k;
    }
  }
  rep.passed = rep.worst_slack >= -tol;
  return rep;
}

/// Evenly spaced grid of `points` values on [-B, B] (endpoints included).
inline std::vector<double> response_grid(double B, std::size_t points) {
  if (points < 2) throw RangeError("response_grid: need at least 2 points");
  std::vector<double> g(points);
  for (std::size_t i = 0; i < points; ++i)
    g[i] = -B + 2.0 * B * static_cast<double>(i) / static_cast<double>(points - 1);
  g.back() = B;
  return g;
}

/// One line of the telescoping ledger along realized play.
struct LedgerEntry {
  double rel_before = 0.0;
  double rel_after = 0.0;
  double loss = 0.0;
  /// rel_before - rel_after - loss; nonnegative on admissible rounds.
  double slack() const { return rel_before - rel_after - loss; }
};

template <class X>
std::vector<LedgerEntry> relaxation_ledger(const Relaxation<X>& rel,
                                           const Transcript<X>& tr) {
  std::vector<X> xs;
  std::vector<double> ys;
  std::vector<LedgerEntry> out;
  double prev = detail::checked_value(rel, std::span<const X>(xs),
                                      std::span<const double>(ys));
  for (const auto& r : tr.rounds) {
    xs.push_back(r.x);
    ys.push_back(r.y);
    const double cur = detail::checked_value(rel, std::span<const X>(xs),
                                             std::span<const double>(ys));
    out.push_back({prev, cur, (r.y_hat - r.y) * (r.y_hat - r.y)});
    prev = cur;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear comparators

/// min over the lattice {-radius, -radius+step, ..., radius}^d of
/// sum_t (f^T x_t - y_t)^2 + lambda |f|^2.
inline double ridge_lattice_best_loss(const Transcript<Vector>& tr, double lambda,
                                      double step = 0.1, double radius = 2.0) {
  if (tr.rounds.empty()) return 0.0;
  const Eigen::Index d = tr.rounds.front().x.size();
  Matrix g = Matrix::Zero(d, d);
  Vector b = Vector::Zero(d);
  double c = 0.0;
  for (const auto& r : tr.rounds) {
    if (r.x.size() != d) throw ShapeError("ridge_lattice_best_loss: ragged x");
    g.noalias() += r.x * r.x.transpose();
    b += r.y * r.x;
    c += r.y * r.y;
  }
  g += lambda * Matrix::Identity(d, d);
  const long ticks = std::lround(2.0 * radius / step);
  std::vector<long> idx(static_cast<std::size_t>(d), 0);
  Vector f(d);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (Eigen::Index i = 0; i < d; ++i)
      f[i] = -radius + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
    best = std::min(best, f.dot(g * f) - 2.0 * f.dot(b) + c);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] > ticks) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return best;
}

}  // namespace olreg
