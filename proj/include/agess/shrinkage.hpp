#pragma once

#include <cmath>
#include <numbers>
#include <utility>

#include <Eigen/Core>

#include "agess/errors.hpp"
#include "agess/rng.hpp"

namespace agess {

// One ellipse through the current state x and auxiliary draw z, centered at
// the working mean. theta = 0 recovers x and theta = pi/2 recovers z.
struct EllipseProposal {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  Eigen::VectorXd center;
};

inline Eigen::VectorXd point_on_ellipse(const EllipseProposal& prop,
                                        double theta) {
  return (prop.x - prop.center) * std::cos(theta) +
         (prop.z - prop.center) * std::sin(theta) + prop.center;
}

struct ShrinkResult {
  double theta = 0.0;
  Eigen::VectorXd point;
  int loop_count = 0;  // proposals drawn, equals 1 + rejections
  int evals = 0;       // predicate evaluations
};

// A stuck shrinkage loop means the predicate is broken at the current state
// (NaN or -inf density); the chain must abort rather than silently return.
struct ShrinkError : SamplingError {
  ShrinkError(int loops, double lo, double hi)
      : SamplingError("shrink: max_iter exceeded after " +
                      std::to_string(loops) + " proposals, bracket [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        loop_count(loops),
        theta_min(lo),
        theta_max(hi) {}
  int loop_count;
  double theta_min;
  double theta_max;
};

// Angle-bracket shrinkage on the ellipse (Murray, Adams & MacKay 2010).
// Draws theta ~ U[0, 2pi), brackets [theta - 2pi, theta], and shrinks toward
// the current state (theta = 0) until the predicate accepts. The caller must
// guarantee accept(x) at theta = 0, which holds whenever the slice threshold
// is drawn strictly below the density at x.
template <typename Predicate>
ShrinkResult shrink(const EllipseProposal& prop, Predicate&& accept, Rng& rng,
                    int max_iter = 10000) {
  constexpr double tau = 2.0 * std::numbers::pi;
  double theta = uniform(rng, 0.0, tau);
  double theta_min = theta - tau;
  double theta_max = theta;

  for (int i = 1; i <= max_iter; ++i) {
    Eigen::VectorXd candidate = point_on_ellipse(prop, theta);
    if (accept(candidate)) {
      return ShrinkResult{theta, std::move(candidate), i, i};
    }
    if (theta < 0.0) {
      theta_min = theta;
    } else {
      theta_max = theta;
    }
    theta = uniform(rng, theta_min, theta_max);
  }
  throw ShrinkError(max_iter, theta_min, theta_max);
}

// Scalar specialization used by the 1-d coordinate updates.
template <typename Predicate>
ShrinkResult shrink_1d(double x, double z, double center, Predicate&& accept,
                       Rng& rng, int max_iter = 10000) {
  constexpr double tau = 2.0 * std::numbers::pi;
  double theta = uniform(rng, 0.0, tau);
  double theta_min = theta - tau;
  double theta_max = theta;

  for (int i = 1; i <= max_iter; ++i) {
    const double candidate = (x - center) * std::cos(theta) +
                             (z - center) * std::sin(theta) + center;
    if (accept(candidate)) {
      ShrinkResult result;
      result.theta = theta;
      result.point = Eigen::VectorXd::Constant(1, candidate);
      result.loop_count = i;
      result.evals = i;
      return result;
    }
    if (theta < 0.0) {
      theta_min = theta;
    } else {
      theta_max = theta;
    }
    theta = uniform(rng, theta_min, theta_max);
  }
  throw ShrinkError(max_iter, theta_min, theta_max);
}

}  // namespace agess
