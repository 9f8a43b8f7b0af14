#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "agess/errors.hpp"

namespace agess {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Unnormalized log density over an open subset of R^P. Off-support points
// must evaluate to -inf, never NaN; the wrapper maps stray NaNs to -inf so a
// shrinkage predicate can never wedge on them. Evaluation is re-entrant; the
// evaluation counter is shared between copies (use fork() for a per-chain
// counter).
class TargetDensity {
 public:
  using LogDensityFn = std::function<double(const Eigen::VectorXd&)>;

  TargetDensity(std::string name, Eigen::Index dim, LogDensityFn log_density)
      : name_(std::move(name)),
        dim_(dim),
        log_density_(std::move(log_density)),
        evals_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}

  Eigen::Index dim() const { return dim_; }
  const std::string& name() const { return name_; }

  double log_density(const Eigen::VectorXd& x) const {
    if (x.size() != dim_) {
      throw std::invalid_argument("TargetDensity: dimension mismatch");
    }
    evals_->fetch_add(1, std::memory_order_relaxed);
    const double value = log_density_(x);
    return std::isnan(value) ? neg_inf : value;
  }

  std::uint64_t evals() const { return evals_->load(std::memory_order_relaxed); }
  void reset_evals() const { evals_->store(0, std::memory_order_relaxed); }

  // Copy with an independent evaluation counter.
  TargetDensity fork() const { return TargetDensity(name_, dim_, log_density_); }

 private:
  std::string name_;
  Eigen::Index dim_;
  LogDensityFn log_density_;
  mutable std::shared_ptr<std::atomic<std::uint64_t>> evals_;
};

}  // namespace agess
