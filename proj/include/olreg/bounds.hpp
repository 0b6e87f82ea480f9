#pragma once

// Closed-form and quadrature evaluation of the chaining bounds on the offset
// Rademacher complexity, the finite maximal inequality, and the rate tables
// for the three entropy-growth regimes.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olreg/core.hpp"

namespace olreg {

enum class EntropyNorm { L2, Linf };

/// delta -> log N(delta), the sequential entropy at scale delta.
class EntropyFunction {
 public:
  enum class Kind { Power, ParamLog, Table, Custom };

  /// scale * delta^-p.
  static EntropyFunction power(double p, double scale = 1.0,
                               EntropyNorm norm = EntropyNorm::L2) {
    if (!(p > 0.0)) throw RangeError("power entropy: p must be > 0");
    if (!(scale >= 0.0)) throw RangeError("power entropy: scale must be >= 0");
    EntropyFunction e(Kind::Power, norm);
    e.a_ = p;
    e.b_ = scale;
    return e;
  }

  /// d * log(c / delta), floored at 0 (so it vanishes for delta >= c).
  static EntropyFunction param_log(double d, double c = 1.0,
                                   EntropyNorm norm = EntropyNorm::L2) {
    if (!(d >= 0.0)) throw RangeError("paramlog entropy: d must be >= 0");
    if (!(c > 0.0)) throw RangeError("paramlog entropy: c must be > 0");
    EntropyFunction e(Kind::ParamLog, norm);
    e.a_ = d;
    e.b_ = c;
    return e;
  }

  /// Piecewise linear in log(delta) through (delta, entropy) points, constant
  /// beyond the first and last point.
  static EntropyFunction table(std::vector<std::pair<double, double>> points,
                               EntropyNorm norm = EntropyNorm::L2) {
    if (points.empty()) throw std::invalid_argument("entropy table: no points");
    std::sort(points.begin(), points.end());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(points[i].first > 0.0) || !std::isfinite(points[i].first))
        throw RangeError("entropy table: scales must be finite and > 0");
      if (!(points[i].second >= 0.0) || !std::isfinite(points[i].second))
        throw RangeError("entropy table: entropies must be finite and >= 0");
      if (i && points[i].first == points[i - 1].first)
        throw std::invalid_argument("entropy table: duplicate scale");
    }
    EntropyFunction e(Kind::Table, norm);
    e.table_ = std::move(points);
    return e;
  }

  static EntropyFunction custom(std::function<double(double)> fn,
                                EntropyNorm norm = EntropyNorm::L2) {
    EntropyFunction e(Kind::Custom, norm);
    e.fn_ = std::move(fn);
    return e;
  }

  static EntropyFunction zero(EntropyNorm norm = EntropyNorm::L2) {
    return power(1.0, 0.0, norm);
  }

  double operator()(double delta) const {
    if (!(delta > 0.0)) throw RangeError("entropy: scale must be > 0");
    switch (kind_) {
      case Kind::Power:
        return b_ == 0.0 ? 0.0 : b_ * std::pow(delta, -a_);
      case Kind::ParamLog:
        return delta >= b_ ? 0.0 : a_ * std::log(b_ / delta);
      case Kind::Table: {
        if (delta <= table_.front().first) return table_.front().second;
        if (delta >= table_.back().first) return table_.back().second;
        auto hi = std::upper_bound(table_.begin(), table_.end(), delta,
                                   [](double v, const auto& pt) { return v < pt.first; });
        auto lo = hi - 1;
        const double w = std::log(delta / lo->first) / std::log(hi->first / lo->first);
        return lo->second + w * (hi->second - lo->second);
      }
      case Kind::Custom:
        return fn_(delta);
    }
    return 0.0;
  }

  Kind kind() const { return kind_; }
  EntropyNorm norm() const { return norm_; }
  double exponent() const { return a_; }    // p for Power, d for ParamLog
  double coefficient() const { return b_; } // scale for Power, c for ParamLog

  /// Checks monotonicity on a log-spaced grid of `points` scales in [lo, hi].
  bool nonincreasing_on(double lo, double hi, std::size_t points = 64) const {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points; ++i) {
      const double w = points > 1 ? static_cast<double>(i) / (points - 1) : 0.0;
      const double v = (*this)(lo * std::pow(hi / lo, w));
      if (v > prev + 1e-12 * std::max(1.0, std::abs(prev))) return false;
      prev = v;
    }
    return true;
  }

 private:
  EntropyFunction(Kind k, EntropyNorm n) : kind_(k), norm_(n) {}

  Kind kind_;
  EntropyNorm norm_;
  double a_ = 0.0, b_ = 0.0;
  std::vector<std::pair<double, double>> table_;
  std::function<double(double)> fn_;
};

// ---------------------------------------------------------------------------
// Integrals of the chaining bounds

enum class Integration { Auto, Quadrature, Analytic };

namespace detail {

template <class F>
double simpson_step(const F& g, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol)
    return left + right + diff / 15.0;
  return simpson_step(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson_step(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

/// Adaptive Simpson for the integral of h over [lo, hi], run in u = log(delta)
/// so that integrands singular at 0 are resolved evenly across decades.
/// The tolerance is relative to a coarse estimate of the integral.
template <class H>
double log_space_integral(const H& h, double lo, double hi, double rel_tol = 1e-6) {
  if (!(lo > 0.0) || !(hi >= lo)) throw RangeError("integral: need 0 < lo <= hi");
  if (hi == lo) return 0.0;
  auto g = [&](double u) {
    const double d = std::exp(u);
    const double v = h(d) * d;
    if (!std::isfinite(v)) throw NumericalError("integrand not finite at " + format_real(d));
    return v;
  };
  const double a = std::log(lo), b = std::log(hi);
  // Start from 16 panels so that a coarse Simpson estimate gives a sound scale.
  constexpr int kPanels = 16;
  double total = 0.0, scale = 0.0;
  std::vector<double> est(kPanels);
  std::vector<std::array<double, 3>> f(kPanels);
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + (b - a) * i / kPanels, x1 = a + (b - a) * (i + 1) / kPanels;
    f[i] = {g(x0), g(0.5 * (x0 + x1)), g(x1)};
    est[i] = (x1 - x0) / 6.0 * (f[i][0] + 4.0 * f[i][1] + f[i][2]);
    scale += std::abs(est[i]);
  }
  const double tol = std::max(rel_tol * scale * 1e-2, 1e-300);
  for (int i = 0; i < kPanels; ++i) {
    const double x0 = a + (b - a) * i / kPanels, x1 = a + (b - a) * (i + 1) / kPanels;
    total += simpson_step(g, x0, x1, f[i][0], f[i][1], f[i][2], est[i], tol / kPanels, 48);
  }
  return total;
}

// Upper incomplete gamma at 3/2.
inline double upper_gamma_three_halves(double u) {
  return std::sqrt(u) * std::exp(-u) + 0.5 * std::sqrt(std::numbers::pi) * std::erfc(std::sqrt(u));
}

}  // namespace detail

/// Integral of sqrt(entropy(delta)) over [rho, gamma].
inline double entropy_sqrt_integral(const EntropyFunction& h, double rho, double gamma,
                                    Integration how = Integration::Auto) {
  if (!(rho > 0.0) || !(gamma >= rho)) throw RangeError("integral: need 0 < rho <= gamma");
  const bool closed = h.kind() == EntropyFunction::Kind::Power ||
                      h.kind() == EntropyFunction::Kind::ParamLog;
  if (how == Integration::Analytic && !closed)
    throw std::invalid_argument("no closed form for this entropy function");
  if (how == Integration::Quadrature || !closed)
    return detail::log_space_integral([&](double d) { return std::sqrt(h(d)); }, rho, gamma);
  if (h.kind() == EntropyFunction::Kind::Power) {
    const double p = h.exponent(), c = h.coefficient();
    if (c == 0.0) return 0.0;
    if (std::abs(p - 2.0) < 1e-15) return std::sqrt(c) * std::log(gamma / rho);
    const double e = 1.0 - p / 2.0;
    return std::sqrt(c) * (std::pow(gamma, e) - std::pow(rho, e)) / e;
  }
  // d log(c/delta): substitute u = log(c/delta).
  const double d = h.exponent(), c = h.coefficient();
  const double hi = std::min(gamma, c), lo = std::min(rho, c);
  if (hi <= lo || d == 0.0) return 0.0;
  const double u_hi = std::log(c / hi), u_lo = std::log(c / lo);
  return c * std::sqrt(d) *
         (detail::upper_gamma_three_halves(u_hi) - detail::upper_gamma_three_halves(u_lo));
}

/// Integral of delta * entropy(delta) over [rho, gamma].
inline double entropy_weighted_integral(const EntropyFunction& h, double rho, double gamma,
                                        Integration how = Integration::Auto) {
  if (!(rho > 0.0) || !(gamma >= rho)) throw RangeError("integral: need 0 < rho <= gamma");
  const bool closed = h.kind() == EntropyFunction::Kind::Power ||
                      h.kind() == EntropyFunction::Kind::ParamLog;
  if (how == Integration::Analytic && !closed)
    throw std::invalid_argument("no closed form for this entropy function");
  if (how == Integration::Quadrature || !closed)
    return detail::log_space_integral([&](double d) { return d * h(d); }, rho, gamma);
  if (h.kind() == EntropyFunction::Kind::Power) {
    const double p = h.exponent(), c = h.coefficient();
    if (c == 0.0) return 0.0;
    if (std::abs(p - 2.0) < 1e-15) return c * std::log(gamma / rho);
    const double e = 2.0 - p;
    return c * (std::pow(gamma, e) - std::pow(rho, e)) / e;
  }
  const double d = h.exponent(), c = h.coefficient();
  const double hi = std::min(gamma, c), lo = std::min(rho, c);
  if (hi <= lo) return 0.0;
  auto anti = [&](double x) { return d * (x * x / 2.0 * std::log(c / x) + x * x / 4.0); };
  return anti(hi) - anti(lo);
}

// ---------------------------------------------------------------------------

struct DudleyBreakdown {
  double total = 0.0;
  double entropy_term = 0.0;   // coefficient times entropy(gamma)
  double chaining_term = 0.0;  // the minimized bracket, with its prefactor
  double best_rho = 0.0;
};

namespace detail {

inline void check_rho_grid(std::span<const double> rho_grid, double gamma) {
  if (rho_grid.empty()) throw std::invalid_argument("rho grid is empty");
  for (double r : rho_grid)
    if (!(r > 0.0 && r < gamma)) throw RangeError("rho must lie in (0, gamma)");
}

inline double checked_entropy(const EntropyFunction& h, double delta) {
  const double v = h(delta);
  if (!std::isfinite(v)) throw NumericalError("entropy not finite at " + format_real(delta));
  return v;
}

}  // namespace detail

/// 32 B^2 H(gamma) + B min_rho [4 rho n + 12 sqrt(n) int_rho^gamma sqrt(H)].
/// An l-infinity entropy is accepted too: it dominates the l2 entropy.
inline DudleyBreakdown dudley_offset_bound(const EntropyFunction& entropy, double gamma,
                                           std::size_t n, double B,
                                           std::span<const double> rho_grid,
                                           Integration how = Integration::Auto) {
  if (!(gamma > 0.0)) throw RangeError("dudley: gamma must be > 0");
  if (!(B > 0.0)) throw RangeError("dudley: B must be > 0");
  detail::check_rho_grid(rho_grid, gamma);
  const double N = static_cast<double>(n);
  DudleyBreakdown out;
  out.entropy_term = 32.0 * B * B * detail::checked_entropy(entropy, gamma);
  out.chaining_term = std::numeric_limits<double>::infinity();
  for (double rho : rho_grid) {
    const double v =
        B * (4.0 * rho * N + 12.0 * std::sqrt(N) * entropy_sqrt_integral(entropy, rho, gamma, how));
    if (!std::isfinite(v)) throw NumericalError("dudley: non-finite chaining term");
    if (v < out.chaining_term) out.chaining_term = v, out.best_rho = rho;
  }
  out.total = out.entropy_term + out.chaining_term;
  return out;
}

/// Finite class at scale gamma = 0: 32 B^2 log|F|.
inline double dudley_finite_bound(std::size_t class_size, double B) {
  if (class_size < 1) throw RangeError("dudley: class size must be >= 1");
  if (!(B > 0.0)) throw RangeError("dudley: B must be > 0");
  return 32.0 * B * B * std::log(static_cast<double>(class_size));
}

/// alpha^-1 16 A^2 H(gamma) + alpha^-1 min_rho [4 rho n + 16 log(gamma/rho) int delta H].
inline DudleyBreakdown dudley_offset_bound_optimistic(const EntropyFunction& entropy,
                                                      double gamma, std::size_t n,
                                                      double alpha, double A,
                                                      std::span<const double> rho_grid,
                                                      Integration how = Integration::Auto) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw RangeError("dudley: alpha must lie in (0,1)");
  if (entropy.norm() != EntropyNorm::Linf)
    throw std::invalid_argument("optimistic chaining bound needs an l-infinity entropy");
  if (!(gamma > 0.0)) throw RangeError("dudley: gamma must be > 0");
  detail::check_rho_grid(rho_grid, gamma);
  const double N = static_cast<double>(n);
  DudleyBreakdown out;
  out.entropy_term = 16.0 * A * A * detail::checked_entropy(entropy, gamma) / alpha;
  out.chaining_term = std::numeric_limits<double>::infinity();
  for (double rho : rho_grid) {
    const double v = (4.0 * rho * N + 16.0 * std::log(gamma / rho) *
                                          entropy_weighted_integral(entropy, rho, gamma, how)) /
                     alpha;
    if (!std::isfinite(v)) throw NumericalError("dudley: non-finite chaining term");
    if (v < out.chaining_term) out.chaining_term = v, out.best_rho = rho;
  }
  out.total = out.entropy_term + out.chaining_term;
  return out;
}

/// min(B^2/(2C), A^2/(2 alpha)) log|W|, with x/0 = +inf.
inline double finite_maximal_bound(std::size_t W_size, double B, double A, double C,
                                   double alpha) {
  if (W_size < 1) throw RangeError("finite_maximal_bound: |W| must be >= 1");
  if (!(C >= 0.0) || !(alpha >= 0.0)) throw RangeError("finite_maximal_bound: offsets must be >= 0");
  if (C == 0.0 && alpha == 0.0)
    throw std::invalid_argument("finite_maximal_bound: C and alpha both zero");
  const double inf = std::numeric_limits<double>::infinity();
  const double first = C > 0.0 ? B * B / (2.0 * C) : inf;
  const double second = alpha > 0.0 ? A * A / (2.0 * alpha) : inf;
  return std::min(first, second) * std::log(static_cast<double>(W_size));
}

// ---------------------------------------------------------------------------
// Rate tables

struct RateSpec {
  enum class Regime { Finite, Parametric, Nonparametric };

  Regime regime = Regime::Nonparametric;
  double p = 1.0;            // nonparametric exponent
  double d = 1.0;            // parametric dimension
  std::size_t size = 1;      // finite class size
  std::size_t horizon_n = 1;
  double bound_B = 1.0;

  static RateSpec finite(std::size_t size, std::size_t n, double B = 1.0) {
    RateSpec s;
    s.regime = Regime::Finite, s.size = size, s.horizon_n = n, s.bound_B = B;
    return s;
  }
  static RateSpec parametric(double d, std::size_t n, double B = 1.0) {
    RateSpec s;
    s.regime = Regime::Parametric, s.d = d, s.horizon_n = n, s.bound_B = B;
    return s;
  }
  static RateSpec nonparametric(double p, std::size_t n, double B = 1.0) {
    RateSpec s;
    s.regime = Regime::Nonparametric, s.p = p, s.horizon_n = n, s.bound_B = B;
    return s;
  }

  void validate() const {
    if (horizon_n < 1) throw RangeError("RateSpec: n must be >= 1");
    if (!(bound_B > 0.0)) throw RangeError("RateSpec: B must be > 0");
    switch (regime) {
      case Regime::Nonparametric:
        if (!(p > 0.0) || !std::isfinite(p)) throw RangeError("RateSpec: p must be > 0");
        break;
      case Regime::Parametric:
        if (!(d >= 1.0)) throw RangeError("RateSpec: d must be >= 1");
        break;
      case Regime::Finite:
        if (size < 1) throw RangeError("RateSpec: size must be >= 1");
        break;
    }
  }

  std::string label() const {
    switch (regime) {
      case Regime::Finite: return "finite:size=" + std::to_string(size);
      case Regime::Parametric: return "parametric:d=" + format_real(d);
      case Regime::Nonparametric: return "power:p=" + format_real(p);
    }
    return {};
  }
};

namespace detail {
inline bool is_two(double p) { return std::abs(p - 2.0) < 1e-12; }
}  // namespace detail

/// Normalized minimax upper rate. With constants off every constant is 1;
/// with constants on, the values carried through the chaining argument.
inline double theorem1_rate(const RateSpec& s, bool with_constants = false) {
  s.validate();
  const double n = static_cast<double>(s.horizon_n), B = s.bound_B, ln = std::log(n);
  using R = RateSpec::Regime;
  if (!with_constants) {
    switch (s.regime) {
      case R::Finite: return std::log(static_cast<double>(s.size)) / n;
      case R::Parametric: return s.d * ln / n;
      case R::Nonparametric:
        if (detail::is_two(s.p)) return ln / std::sqrt(n);
        return s.p > 2.0 ? std::pow(n, -1.0 / s.p) : std::pow(n, -2.0 / (2.0 + s.p));
    }
  }
  switch (s.regime) {
    case R::Finite: return 32.0 * B * B * std::log(static_cast<double>(s.size)) / n;
    case R::Parametric:
      return (16.0 * B * B * s.d * ln + 4.0 * B + 12.0 * std::sqrt(s.d * ln)) / n;
    case R::Nonparametric: {
      const double p = s.p;
      if (detail::is_two(p)) return (32.0 * B * B + B * std::sqrt(n) * (4.0 + 6.0 * ln)) / n;
      if (p > 2.0) return (4.0 + 24.0 / (p - 2.0)) * B * std::pow(n, -1.0 / p);
      return (4.0 * B + (32.0 * B * B + 24.0 * B / (2.0 - p)) * std::pow(n, p / (p + 2.0))) / n;
    }
  }
  return 0.0;
}

/// Normalized lower rate with constants 1 and log factors dropped. No lower
/// rate is tabulated for finite classes.
inline std::optional<double> theorem2_lower_rate(const RateSpec& s) {
  s.validate();
  const double n = static_cast<double>(s.horizon_n);
  using R = RateSpec::Regime;
  switch (s.regime) {
    case R::Finite: return std::nullopt;
    case R::Parametric: return s.d * std::log(n) / n;
    case R::Nonparametric:
      return s.p >= 2.0 ? std::pow(n, -1.0 / s.p) : std::pow(n, -2.0 / (2.0 + s.p));
  }
  return std::nullopt;
}

/// Unnormalized L*-dependent regret bound. With constants on, the alpha-regret
/// coefficient U1 of the chaining argument is fed through optimistic_conversion.
inline std::optional<double> theorem3_optimistic_bound(const RateSpec& s, double L_star,
                                                       bool with_constants = false) {
  s.validate();
  if (!(L_star >= 0.0)) throw RangeError("theorem3: L* must be >= 0");
  const double n = static_cast<double>(s.horizon_n), ln = std::log(n);
  const double lnB = std::log(n * s.bound_B);
  using R = RateSpec::Regime;
  if (s.regime == R::Finite) return std::nullopt;
  if (with_constants) {
    double U1 = 0.0;
    if (s.regime == R::Parametric) {
      U1 = 4.0 + 4.0 * s.d * lnB;
    } else if (detail::is_two(s.p)) {
      U1 = 4.0 + 16.0 * lnB * lnB;
    } else if (s.p < 2.0) {
      U1 = 4.0 + 16.0 * lnB / (2.0 - s.p);
    } else {
      const double g = std::pow(n, (s.p - 2.0) / (s.p - 1.0));
      U1 = 4.0 * g + 16.0 * ln / (s.p * (s.p - 2.0)) * g;
    }
    return 4.0 * std::sqrt(L_star * std::max(0.0, U1)) + 12.0 * std::max(0.0, U1);
  }
  if (s.regime == R::Parametric) return std::sqrt(L_star * s.d * ln) + s.d * ln;
  if (detail::is_two(s.p)) return ln * (std::sqrt(L_star) + ln);
  if (s.p < 2.0) return std::sqrt(L_star * ln) + ln;
  const double g = std::pow(n, 1.0 - 1.0 / (s.p - 1.0));
  return std::sqrt(L_star * g * ln) + g * ln;
}

struct BesovRate {
  std::string regime;  // "smooth", "sparse-smooth" or "rough"
  double exponent;     // regret grows as n^exponent (unnormalized)
};

/// Rate regime of a Besov ball B^s_{p,q} on a d-dimensional domain. Under
/// s > d/p the "rough" branch cannot occur (it needs s < d/2 and
/// p <= 1 + d/(2s), hence p < d/s); pass require_embedding = false to read
/// the table outside that assumption.
inline BesovRate besov_rate(double s, int d, double p_besov, bool require_embedding = true) {
  if (!(s > 0.0) || d < 1 || !(p_besov > 0.0)) throw RangeError("besov_rate: bad parameters");
  if (require_embedding && !(s > d / p_besov))
    throw std::invalid_argument("besov_rate: requires s > d/p");
  const double smooth = 2.0 * s / (2.0 * s + d);
  if (s >= d / 2.0) return {"smooth", smooth};
  if (p_besov > 1.0 + d / (2.0 * s)) return {"sparse-smooth", smooth};
  return {"rough", 1.0 - 1.0 / p_besov};
}

/// s log(eM/s) + s log(1/beta): log of the cover bound for s-sparse
/// combinations of M predictors.
inline double sparse_class_entropy_bound(std::size_t M, std::size_t s, double beta) {
  if (s < 1 || s > M) throw RangeError("sparse_class_entropy_bound: need 1 <= s <= M");
  if (!(beta > 0.0)) throw RangeError("sparse_class_entropy_bound: beta must be > 0");
  const double sd = static_cast<double>(s);
  return sd * std::log(std::exp(1.0) * static_cast<double>(M) / sd) + sd * std::log(1.0 / beta);
}

/// Least-squares slope of log(value) against log(n).
inline double loglog_slope(std::span<const double> ns, std::span<const double> values) {
  if (ns.size() != values.size() || ns.size() < 2)
    throw ShapeError("loglog_slope: need two or more matching points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0.0) || !(values[i] > 0.0)) throw RangeError("loglog_slope: values must be > 0");
    const double x = std::log(ns[i]), y = std::log(values[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace olreg
