#pragma once

// Shared error types and small numeric helpers used across olreg.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace olreg {

/// Argument outside its admissible numeric range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Mismatched lengths or dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive search exceeded its configured limits.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, int depth_reached)
      : std::runtime_error(what), depth_reached_(depth_reached) {}
  int depth_reached() const { return depth_reached_; }

 private:
  int depth_reached_;
};

/// Ill-conditioned linear algebra or a non-finite evaluation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. line() is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")"
                                : what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Projection onto [-bound, bound].
inline double clip(double v, double bound) {
  if (!(bound > 0.0)) throw RangeError("clip: bound must be positive");
  return std::min(bound, std::max(-bound, v));
}

/// log(sum(exp(a))) with max-subtraction. Empty input gives -inf.
inline double log_sum_exp(std::span<const double> a) {
  if (a.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(a.begin(), a.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

/// Shortest decimal rendering with `digits` significant digits (printf %.*g).
inline std::string format_real(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Fair ±1 from the top bit of a 64-bit engine draw (portable across stdlibs).
template <class Engine>
int draw_sign(Engine& rng) {
  return (rng() >> 63) ? 1 : -1;
}

/// Uniform double in [0,1) from the top 53 bits of a 64-bit engine draw.
template <class Engine>
double draw_unit(Engine& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace olreg
