#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "olreg/core.hpp"

namespace olreg {

/// Covariate in a finite domain {0, ..., m-1}.
using Covariate = std::size_t;

/// A finite class of functions tabulated on a finite covariate domain.
///
/// Member i is the vector values(i) of length domain_size(); members keep the
/// order they were added in, which is the tie-break order for every argmin.
/// Immutable after construction.
class FunctionClass {
 public:
  FunctionClass() = default;

  explicit FunctionClass(std::size_t domain_size) : domain_size_(domain_size) {}

  FunctionClass(std::size_t domain_size,
                std::vector<std::vector<double>> tables,
                std::vector<std::string> names = {})
      : domain_size_(domain_size) {
    if (!names.empty() && names.size() != tables.size())
      throw ShapeError("FunctionClass: names/tables length mismatch");
    for (std::size_t i = 0; i < tables.size(); ++i)
      add(names.empty() ? "f" + std::to_string(i) : std::move(names[i]),
          std::move(tables[i]));
  }

  FunctionClass& add(std::string name, std::vector<double> table) {
    if (table.size() != domain_size_)
      throw ShapeError("FunctionClass: function '" + name + "' has " +
                       std::to_string(table.size()) + " values, domain has " +
                       std::to_string(domain_size_));
    names_.push_back(std::move(name));
    values_.insert(values_.end(), table.begin(), table.end());
    return *this;
  }

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  std::size_t domain_size() const { return domain_size_; }

  double operator()(std::size_t member, Covariate x) const {
    return values_[member * domain_size_ + x];
  }

  std::span<const double> values(std::size_t member) const {
    return {values_.data() + member * domain_size_, domain_size_};
  }

  const std::string& name(std::size_t member) const { return names_[member]; }

  /// Largest |f(x)| over the class; 0 for an empty class.
  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Class with member order permuted: result member i is this member perm[i].
  FunctionClass permuted(std::span<const std::size_t> perm) const {
    FunctionClass out(domain_size_);
    for (std::size_t i : perm)
      out.add(names_.at(i), {values(i).begin(), values(i).end()});
    return out;
  }

 private:
  std::size_t domain_size_ = 0;
  std::vector<std::string> names_;
  std::vector<double> values_;  // row-major: member x covariate
};

}  // namespace olreg
